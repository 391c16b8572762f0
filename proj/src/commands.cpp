#include "bidomain/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

int command_run(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const Mesh mesh = build_mesh(cfg.mesh);
  const Stepper stepper(mesh, make_conductivities(cfg, mesh), make_stepper_config(cfg));
  const Trajectory tr =
      stepper.run(make_initial_data(cfg, mesh.dim()), make_sources(cfg, mesh.dim()));
  write_csv_series(tr.diagnostics, dir / "series.csv");
  if (cfg.vtk) {
    for (const State& s : tr.states) {
      char name[40];
      std::snprintf(name, sizeof name, "state_%06zu.vtk", s.step);
      write_vtk_snapshot(s, mesh, stepper.dofs(), dir / name);
    }
  }
  std::size_t iterations = 0;
  for (const auto& d : tr.diagnostics) iterations += d.cg_iterations;
  const auto& last = tr.diagnostics.back();
  log << "steps " << tr.diagnostics.size() - 1 << ", t = " << fmt("%.6g", last.t)
      << ", |V| = " << fmt("%.6e", std::sqrt(last.v_sq))
      << ", |[U]| = " << fmt("%.6e", std::sqrt(last.jump_sq))
      << ", energy = " << fmt("%.6e", last.energy) << ", cg iterations " << iterations << "\n";
  return 0;
}

int command_mms(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  if (cfg.mesh.kind == "inclusion")
    throw ConfigError("mesh.kind: mms needs an interval or split_rectangle mesh");
  const bool one_d = cfg.mesh.kind == "interval";
  MmsStudy spatial;
  spatial.solution = one_d ? mms_interval(cfg.mesh.split) : mms_split_rectangle(cfg.mesh.split);
  spatial.sigma_i = cfg.sigma_i;
  spatial.sigma_e = cfg.sigma_e;
  spatial.sigma_d = cfg.sigma_d;
  spatial.alpha = cfg.alpha;
  spatial.beta = cfg.beta;
  spatial.T = cfg.T;
  spatial.tol = std::min(cfg.tol, 1e-10);
  MmsStudy temporal = spatial;
  MeshSpec spec = cfg.mesh;
  for (int k = 0; k < cfg.levels; ++k) {
    const double h = one_d ? 1.0 / (spec.n_b + spec.n_d) : 1.0 / spec.nx;
    spatial.levels.push_back({build_mesh(spec), h * h, h});
    if (k + 1 < cfg.levels) spec = refine(spec);
  }
  const Mesh finest = build_mesh(spec);
  for (int k = 0; k < cfg.levels; ++k) {
    const double dt = cfg.dt / std::pow(2.0, k);
    temporal.levels.push_back({finest, dt, dt});
  }
  auto csv = open_output(dir / "mms.csv");
  csv << "study,scale,dt,dofs,err_v,err_u,rate_v,rate_u\n";
  bool ok = true;
  for (const auto& [name, study, threshold] :
       {std::tuple{"spatial", &spatial, 1.9}, std::tuple{"temporal", &temporal, 0.9}}) {
    const auto rows = mms_convergence(*study);
    log << name << " ladder\n";
    double min_rate = INFINITY;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      log << "  scale " << fmt("%-10.4g", r.scale) << " err_v " << fmt("%.4e", r.err_v) << " err_u "
          << fmt("%.4e", r.err_u);
      if (i > 0) {
        log << " rate_v " << fmt("%.3f", r.rate_v) << " rate_u " << fmt("%.3f", r.rate_u);
        min_rate = std::min(min_rate, r.rate_v);
      }
      log << "\n";
      csv << name << ',' << format_double(r.scale) << ',' << format_double(r.dt) << ',' << r.dofs
          << ',' << format_double(r.err_v) << ',' << format_double(r.err_u) << ','
          << format_double(r.rate_v) << ',' << format_double(r.rate_u) << '\n';
    }
    const bool pass = min_rate >= threshold;
    ok = ok && pass;
    log << verdict(pass) << " " << name << " rate of V " << fmt("%.3f", min_rate) << " (threshold "
        << threshold << ")\n";
  }
  return ok ? 0 : kVerdictFailed;
}

int command_energy(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  auto csv = open_output(dir / "energy.csv");
  csv << "dataset,level,lhs,data,ratio\n";
  double calibrated = 0.0, fine_max = 0.0;
  MeshSpec spec = cfg.mesh;
  double dt = cfg.dt;
  for (int level = 0; level < 2; ++level) {
    const Mesh mesh = build_mesh(spec);
    StepperConfig sc = make_stepper_config(cfg);
    sc.dt = dt;
    sc.snapshot_every = 0;
    const Stepper stepper(mesh, make_conductivities(cfg, mesh), sc);
    for (int d = 0; d < cfg.datasets; ++d) {
      RunConfig data = cfg;
      data.seed = cfg.seed * 1000 + std::uint64_t(d);
      data.f1 = data.f2 = "random";
      data.v0 = "random";
      data.s0 = "random";
      const SourceSet src = make_sources(data, mesh.dim());
      const InitialData init = make_initial_data(data, mesh.dim());
      const Trajectory tr = stepper.run(init, src);
      const double functional = energy_data_functional(mesh, stepper.dofs(), stepper.operators(), src,
                                                       init, dt, stepper.step_count());
      const EnergyReport rep = energy_report(tr, dt, functional);
      (level == 0 ? calibrated : fine_max) = std::max(level == 0 ? calibrated : fine_max, rep.ratio);
      csv << d << ',' << level << ',' << format_double(rep.lhs) << ',' << format_double(rep.data)
          << ',' << format_double(rep.ratio) << '\n';
    }
    spec = refine(spec);
    dt /= 2.0;
  }
  const bool pass = fine_max <= 2.0 * calibrated;
  log << "calibrated constant " << fmt("%.6e", calibrated) << ", refined max ratio "
      << fmt("%.6e", fine_max) << "\n"
      << verdict(pass) << " energy inequality ratio within factor 2 under refinement\n";
  return pass ? 0 : kVerdictFailed;
}

int command_coercivity(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  auto csv = open_output(dir / "coercivity.csv");
  csv << "level,dimension,c_min\n";
  double c[2];
  MeshSpec spec = cfg.mesh;
  for (int level = 0; level < 2; ++level) {
    const Mesh mesh = build_mesh(spec);
    const DofMap dofs(mesh);
    const Operators ops = assemble_operators(mesh, dofs, make_conductivities(cfg, mesh));
    const CoercivityResult r = coercivity_estimate(dofs, ops, cfg.beta);
    c[level] = r.c_min;
    log << "level " << level << ": dimension " << r.dimension << ", c_min " << fmt("%.6e", r.c_min)
        << "\n";
    csv << level << ',' << r.dimension << ',' << format_double(r.c_min) << '\n';
    spec = refine(spec);
  }
  const bool pass = c[0] > 0.0 && c[1] > 0.0 && c[1] / c[0] >= 0.5;
  log << verdict(pass) << " coercivity positive and refinement ratio " << fmt("%.4f", c[1] / c[0])
      << " >= 0.5\n";
  return pass ? 0 : kVerdictFailed;
}

int command_beta_sweep(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const Mesh mesh = build_mesh(cfg.mesh);
  const BetaStudy study =
      beta_limit_study(mesh, make_conductivities(cfg, mesh), make_stepper_config(cfg),
                       make_initial_data(cfg, mesh.dim()), make_sources(cfg, mesh.dim()), cfg.betas);
  auto csv = open_output(dir / "beta_sweep.csv");
  csv << "beta,jump_norm,distance_to_perfect\n";
  bool monotone = true;
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    const auto& r = study.rows[i];
    log << "beta " << fmt("%-10.4g", r.beta) << " |[U]| " << fmt("%.6e", r.jump_norm)
        << " distance to perfect coupling " << fmt("%.6e", r.distance_to_perfect) << "\n";
    csv << format_double(r.beta) << ',' << format_double(r.jump_norm) << ','
        << format_double(r.distance_to_perfect) << '\n';
    if (i > 0 && r.distance_to_perfect > study.rows[i - 1].distance_to_perfect) monotone = false;
  }
  const bool slope_ok = study.slope >= -0.65 && study.slope <= -0.35;
  log << verdict(slope_ok) << " log-log slope " << fmt("%.4f", study.slope) << " in [-0.65, -0.35]\n"
      << verdict(monotone) << " distance to perfect coupling non-increasing\n";
  return slope_ok && monotone ? 0 : kVerdictFailed;
}

int command_stability(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const Mesh mesh = build_mesh(cfg.mesh);
  const SpaceTimeFn p = random_smooth_field(7 * cfg.seed + 5, 1.0, mesh.dim());
  const auto rows = stability_study(mesh, make_conductivities(cfg, mesh), make_stepper_config(cfg),
                                    make_initial_data(cfg, mesh.dim()), make_sources(cfg, mesh.dim()),
                                    [p](const Point& x) { return p(x, 0.0); }, cfg.deltas,
                                    {cfg.dt, cfg.dt / 2.0});
  auto csv = open_output(dir / "stability.csv");
  csv << "delta,dt,amplification\n";
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    log << "delta " << fmt("%-8.2g", r.delta) << " dt " << fmt("%-10.4g", r.dt) << " amplification "
        << fmt("%.6f", r.amplification) << "\n";
    csv << format_double(r.delta) << ',' << format_double(r.dt) << ','
        << format_double(r.amplification) << '\n';
    ok = ok && std::isfinite(r.amplification);
    if (i % 2 == 1 && r.delta != 0.0) {
      const double ratio = rows[i - 1].amplification / r.amplification;
      const bool stable = ratio >= 0.8 && ratio <= 1.25;
      ok = ok && stable;
      log << verdict(stable) << " dt / (dt/2) amplification ratio " << fmt("%.4f", ratio) << "\n";
    }
  }
  log << verdict(ok) << " amplification finite and dt-stable\n";
  return ok ? 0 : kVerdictFailed;
}

}  // namespace

int run_command(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  validate_config(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  if (cfg.command == "run") return command_run(cfg, out_dir, log);
  if (cfg.command == "mms") return command_mms(cfg, out_dir, log);
  if (cfg.command == "energy") return command_energy(cfg, out_dir, log);
  if (cfg.command == "coercivity") return command_coercivity(cfg, out_dir, log);
  if (cfg.command == "beta-sweep") return command_beta_sweep(cfg, out_dir, log);
  if (cfg.command == "stability") return command_stability(cfg, out_dir, log);
  throw ConfigError("command: unknown command '" + cfg.command + "'");
}

}  // namespace bidomain
