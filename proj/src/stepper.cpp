#include "bidomain/stepper.hpp"

#include <cmath>

#include "bidomain/errors.hpp"

namespace bidomain {

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt: must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("T: must be non-negative");
  if (!(alpha > 0.0)) throw ConfigError("alpha: must satisfy alpha > 0");
  if (!(beta >= 0.0)) throw ConfigError("beta: must satisfy beta >= 0");
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  if (ionic && (!model.a || !model.b || !model.h1 || !model.h2))
    throw ConfigError("ionic: model functions missing");
}

Stepper::Stepper(const Mesh& mesh, const Conductivities& sigma, StepperConfig config)
    : mesh_(mesh), dofs_(mesh), config_(std::move(config)) {
  config_.validate();
  ops_ = assemble_operators(mesh_, dofs_, sigma);
  broken_ = broken_stiffness(ops_);
  const Index nv = Index(dofs_.num_v());
  const Index nub = Index(dofs_.num_ub());
  const std::size_t n = dofs_.size();
  TripletBuilder tb(n, n);
  tb.add_block(ops_.mass_b, 0, 0, 1.0 / config_.dt);
  tb.add_block(ops_.stiff_i, 0, 0);
  tb.add_block(ops_.stiff_i, 0, nv);
  tb.add_block(ops_.stiff_i, nv, 0);
  tb.add_block(ops_.stiff_i, nv, nv);
  tb.add_block(ops_.stiff_e, nv, nv);
  tb.add_block(ops_.stiff_d, nv + nub, nv + nub);
  if (config_.coupling == Coupling::Resistive)
    tb.add_block(ops_.jump_mass, nv, nv, config_.alpha / config_.dt + config_.beta);
  system_ = tb.build(true);
  if (config_.coupling == Coupling::Perfect) {
    perfect_ = std::make_unique<JumpElimination>(dofs_, true);
    reduced_ = perfect_->reduce(system_);
  }
}

std::size_t Stepper::step_count() const {
  if (config_.T <= 0.0) return 0;
  return std::size_t(std::ceil(config_.T / config_.dt - 1e-9));
}

Vector Stepper::u_volume_rhs(const SourceSet& src, double t) const {
  Vector out(dofs_.num_u(), 0.0);
  if (src.f1 || src.f2) {
    const SpaceTimeFn f1 = src.f1, f2 = src.f2;
    const Vector diff = assemble_volume_load(
        mesh_, dofs_,
        [&](const Point& p, double s) { return (f1 ? f1(p, s) : 0.0) - (f2 ? f2(p, s) : 0.0); },
        Region::B, t);
    std::copy(diff.begin(), diff.end(), out.begin());
  }
  if (src.f_d) {
    const Vector fd = assemble_volume_load(mesh_, dofs_, src.f_d, Region::D, t);
    std::copy(fd.begin(), fd.end(), out.begin() + dofs_.num_ub());
  }
  if (src.g_flux1 || src.g_flux2) {
    const SpaceTimeFn g1 = src.g_flux1, g2 = src.g_flux2;
    const Vector tr = assemble_interface_load(
        mesh_, dofs_,
        [&](const Point& p, double s) { return (g1 ? g1(p, s) : 0.0) + (g2 ? g2(p, s) : 0.0); },
        InterfaceTarget::BTrace, t);
    for (std::size_t i = 0; i < tr.size(); ++i) out[i] -= tr[i];
  }
  if (src.q_gamma || src.g_flux2) {
    const SpaceTimeFn q = src.q_gamma, g2 = src.g_flux2;
    const Vector jl = assemble_interface_load(
        mesh_, dofs_,
        [&](const Point& p, double s) { return (q ? q(p, s) : 0.0) + (g2 ? g2(p, s) : 0.0); },
        InterfaceTarget::Jump, t);
    for (std::size_t i = 0; i < jl.size(); ++i) out[i] += jl[i];
  }
  return out;
}

State Stepper::initialize(const InitialData& init, const SourceSet& sources) const {
  Vector v0 = interpolate_region(mesh_, dofs_, Region::B, init.v0);
  const Vector s0 = interpolate_jumps(mesh_, dofs_, init.s0);
  Vector w0 = interpolate_region(mesh_, dofs_, Region::B, init.w_in);
  return initialize_nodal(std::move(v0), s0, std::move(w0), sources);
}

State Stepper::initialize_nodal(Vector v0, std::span<const double> s0, Vector w0,
                                const SourceSet& sources) const {
  if (v0.size() != dofs_.num_v() || w0.size() != dofs_.num_v())
    throw DimensionError("initial data: V and w must live on the V dofs");
  if (s0.size() != dofs_.num_jumps()) throw DimensionError("initial data: one s0 per jump pair");
  for (double w : w0)
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("w_in: values must lie in [0, 1]");
  State s;
  s.V = std::move(v0);
  s.w = std::move(w0);
  Vector b = u_volume_rhs(sources, 0.0);
  const Vector aiv = spmv(ops_.stiff_i, s.V);
  for (std::size_t i = 0; i < aiv.size(); ++i) b[i] -= aiv[i];
  const Vector zero_jump(dofs_.num_jumps(), 0.0);
  const bool perfect = config_.coupling == Coupling::Perfect;
  s.U = solve_jump_constrained(dofs_, broken_, b, perfect ? std::span<const double>(zero_jump) : s0,
                               config_.solver);
  return s;
}

State Stepper::step(const State& s, const SourceSet& sources, StepDiagnostics* diag) const {
  const double dt = config_.dt;
  const double t_next = double(s.step + 1) * dt;
  const std::size_t nv = dofs_.num_v();
  State out;
  out.step = s.step + 1;
  out.t = t_next;
  out.w = s.w;
  if (config_.ionic)
    for (std::size_t i = 0; i < nv; ++i)
      out.w[i] = gating_exact_step(config_.model, s.w[i], s.V[i], dt);

  Vector rhs(dofs_.size(), 0.0);
  const Vector mv = spmv(ops_.mass_b, s.V);
  const Vector f1 = assemble_volume_load(mesh_, dofs_, sources.f1, Region::B, t_next);
  for (std::size_t i = 0; i < nv; ++i) rhs[i] = mv[i] / dt + f1[i];
  if (config_.ionic)
    for (std::size_t i = 0; i < nv; ++i)
      rhs[i] -= ops_.lumped_b[i] * ionic_current(config_.model, s.V[i], out.w[i]);
  if (sources.g_flux1) {
    const Vector g1 =
        assemble_interface_load(mesh_, dofs_, sources.g_flux1, InterfaceTarget::BTrace, t_next);
    for (std::size_t i = 0; i < nv; ++i) rhs[i] -= g1[i];
  }
  const Vector ub = u_volume_rhs(sources, t_next);
  for (std::size_t i = 0; i < ub.size(); ++i) rhs[nv + i] = ub[i];
  if (config_.coupling == Coupling::Resistive) {
    const Vector gu = spmv(ops_.jump_mass, s.U);
    for (std::size_t i = 0; i < gu.size(); ++i) rhs[nv + i] += config_.alpha / dt * gu[i];
  }
  if (sources.extra) {
    const StepLoads extra = sources.extra(s.step, t_next);
    if (!extra.v.empty()) {
      if (extra.v.size() != nv) throw DimensionError("extra loads: V block size mismatch");
      for (std::size_t i = 0; i < nv; ++i) rhs[i] += extra.v[i];
    }
    if (!extra.u.empty()) {
      if (extra.u.size() != dofs_.num_u()) throw DimensionError("extra loads: U block size mismatch");
      for (std::size_t i = 0; i < extra.u.size(); ++i) rhs[nv + i] += extra.u[i];
    }
  }

  Vector x0(dofs_.size());
  std::copy(s.V.begin(), s.V.end(), x0.begin());
  std::copy(s.U.begin(), s.U.end(), x0.begin() + nv);
  CgResult res;
  Vector x;
  if (perfect_) {
    res = cg_solve(reduced_, perfect_->restrict(rhs), config_.solver, perfect_->gather(x0));
    x = perfect_->expand(res.x);
  } else {
    res = cg_solve(system_, rhs, config_.solver, x0);
    x = std::move(res.x);
  }
  for (double v : x)
    if (!std::isfinite(v)) throw NumericBreakdownError("step: non-finite solution at t = " +
                                                       std::to_string(t_next));
  out.V.assign(x.begin(), x.begin() + nv);
  out.U.assign(x.begin() + nv, x.end());
  if (diag) {
    *diag = diagnose(out);
    diag->cg_iterations = res.iterations;
    diag->cg_residual = res.residual;
  }
  return out;
}

StepDiagnostics Stepper::diagnose(const State& s) const {
  StepDiagnostics d;
  d.t = s.t;
  d.v_sq = quadratic_form(ops_.mass_b, s.V);
  d.jump_sq = quadratic_form(ops_.jump_mass, s.U);
  d.grad_v_sq = quadratic_form(ops_.lap_b, s.V);
  const std::size_t nub = dofs_.num_ub();
  d.grad_ub_sq = quadratic_form(ops_.lap_b, std::span<const double>(s.U).first(nub));
  d.grad_ud_sq = quadratic_form(ops_.lap_d, std::span<const double>(s.U).subspan(nub));
  d.energy = 0.5 * d.v_sq + 0.5 * config_.alpha * d.jump_sq;
  return d;
}

Trajectory Stepper::run(const InitialData& init, const SourceSet& sources) const {
  return run_from(initialize(init, sources), sources);
}

Trajectory Stepper::run_from(State s, const SourceSet& sources) const {
  Trajectory tr;
  const std::size_t n = step_count();
  tr.diagnostics.reserve(n + 1);
  tr.diagnostics.push_back(diagnose(s));
  tr.states.push_back(s);
  const std::size_t every = config_.snapshot_every;
  for (std::size_t k = 0; k < n; ++k) {
    StepDiagnostics d;
    s = step(s, sources, &d);
    tr.diagnostics.push_back(d);
    if ((every > 0 && s.step % every == 0) || k + 1 == n) tr.states.push_back(s);
  }
  return tr;
}

}  // namespace bidomain
