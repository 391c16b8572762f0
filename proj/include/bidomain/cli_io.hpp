#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bidomain/analysis.hpp"
#include "bidomain/mesh.hpp"
#include "bidomain/stepper.hpp"

namespace bidomain {

struct MeshSpec {
  std::string kind = "split_rectangle";  // interval | split_rectangle | inclusion
  int nx = 16, ny = 16;                  // split_rectangle
  int n_b = 8, n_d = 8;                  // interval
  double split = 0.5;                    // interval, split_rectangle
  int n = 8;                             // inclusion
  std::vector<CellBox> boxes{{3, 5, 3, 5}};

  bool operator==(const MeshSpec&) const = default;
};

/// Everything a command needs. Defaults are the values documented in README.md.
struct RunConfig {
  std::string command = "run";
  MeshSpec mesh;
  double sigma_i = 1.0, sigma_e = 1.0, sigma_d = 1.0;
  double alpha = 1.0, beta = 1.0;
  std::string ionic_model = "default";
  bool ionic = true;
  double w_in = 0.0;
  std::string f1 = "zero", f2 = "zero";  // zero | constant | stimulus | random
  double source_amplitude = 1.0;
  std::string v0 = "zero";  // zero | bump | random
  double v0_amplitude = 1.0;
  std::string s0 = "zero";  // zero | constant | random
  double s0_value = 1.0;
  double dt = 1e-3, T = 1.0;
  double tol = 1e-10;
  int output_every = 10;
  std::string output_dir = "out";
  bool vtk = true;
  std::vector<double> betas{10.0, 100.0, 1000.0, 10000.0};
  std::vector<double> deltas{1e-2, 1e-4};
  int datasets = 20;
  int levels = 3;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the TOML-style document. Unknown keys, type mismatches and
/// constraint violations throw ConfigError naming the key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Throws ConfigError on the first violated constraint.
void validate_config(const RunConfig& c);
/// A document that parse_config() maps back to an equal RunConfig.
std::string serialize_config(const RunConfig& c);

Mesh build_mesh(const MeshSpec& spec);
/// Every count (and every inclusion box) doubled.
MeshSpec refine(const MeshSpec& spec);

Conductivities make_conductivities(const RunConfig& c, const Mesh& mesh);
StepperConfig make_stepper_config(const RunConfig& c);
SourceSet make_sources(const RunConfig& c, int dim);
InitialData make_initial_data(const RunConfig& c, int dim);

/// Header plus one row per time level (t = 0 included).
void write_csv_series(const std::vector<StepDiagnostics>& diag, const std::filesystem::path& path);
/// Legacy ASCII VTK unstructured grid with point data V, U_B, U_D, w and the
/// region label as cell data.
void write_vtk_snapshot(const State& state, const Mesh& mesh, const DofMap& dofs,
                        const std::filesystem::path& path);

/// printf("%.17g") without locale dependence.
std::string format_double(double v);

}  // namespace bidomain
