#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "bidomain/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Modified bidomain simulator with an imperfect RC interface"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  const char* commands[][2] = {
      {"run", "time integration with CSV and VTK output"},
      {"mms", "manufactured-solution convergence rates"},
      {"energy", "energy-inequality ratios on two meshes"},
      {"coercivity", "smallest eigenvalue of the bilinear form"},
      {"beta-sweep", "interface jump against the conductance beta"},
      {"stability", "amplification of initial perturbations"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "TOML-style configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides BIDOMAIN_OUT_DIR and output.dir)");
    sub->add_option("--seed", seed, "seed for randomized data (overrides study.seed)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return app.exit(e);
  }

  try {
    bidomain::RunConfig cfg = bidomain::load_config(config_path);
    cfg.command = app.get_subcommands().front()->get_name();
    for (const CLI::App* sub : app.get_subcommands())
      if (sub->count("--seed") > 0) cfg.seed = seed;
    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("BIDOMAIN_OUT_DIR"); env && *env) dir = env;
    if (!out_dir.empty()) dir = out_dir;
    return bidomain::run_command(cfg, dir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
