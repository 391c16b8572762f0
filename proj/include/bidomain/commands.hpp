#pragma once

#include <filesystem>
#include <ostream>

#include "bidomain/cli_io.hpp"

namespace bidomain {

/// Exit status of a command: 0 success, 3 when a verification verdict fails.
/// Errors propagate as exceptions.
inline constexpr int kVerdictFailed = 3;

/// Runs cfg.command, writing files below `out_dir` and a report to `log`.
int run_command(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace bidomain
