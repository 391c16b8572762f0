#include "bidomain/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "bidomain/errors.hpp"
#include "bidomain/transmission.hpp"

namespace bidomain {

namespace {

constexpr double kPi = std::numbers::pi;

// Solve K x = b with x prescribed on `fixed`; the other rows are free.
Vector solve_with_fixed(const SparseMatrix& k, std::span<const double> b,
                        std::span<const Index> fixed, std::span<const double> values,
                        const CgOptions& opts) {
  const std::size_t n = k.rows();
  std::vector<Index> map(n, 0);
  Vector x(n, 0.0);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    map[fixed[i]] = -1;
    x[fixed[i]] = values[i];
  }
  std::size_t nf = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (map[i] >= 0) map[i] = Index(nf++);
  const Vector kx = spmv(k, x);
  Vector rhs(nf);
  for (std::size_t i = 0; i < n; ++i)
    if (map[i] >= 0) rhs[map[i]] = b[i] - kx[i];
  TripletBuilder tb(nf, nf);
  const auto rp = k.row_offsets();
  const auto ci = k.col_indices();
  const auto val = k.values();
  for (std::size_t r = 0; r < n; ++r) {
    if (map[r] < 0) continue;
    for (Index q = rp[r]; q < rp[r + 1]; ++q)
      if (map[ci[q]] >= 0) tb.add(map[r], map[ci[q]], val[q]);
  }
  if (nf == 0) return x;
  const CgResult res = cg_solve(tb.build(true), rhs, opts);
  for (std::size_t i = 0; i < n; ++i)
    if (map[i] >= 0) x[i] = res.x[map[i]];
  return x;
}

Vector jump_transpose(const DofMap& dofs, std::span<const double> on_jumps) {
  Vector out(dofs.num_u(), 0.0);
  const auto pairs = dofs.jump_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[pairs[k].b] += on_jumps[k];
    out[dofs.num_ub() + pairs[k].d] -= on_jumps[k];
  }
  return out;
}

std::span<const double> b_part(const DofMap& dofs, std::span<const double> u) {
  return u.first(dofs.num_ub());
}
std::span<const double> d_part(const DofMap& dofs, std::span<const double> u) {
  return u.subspan(dofs.num_ub());
}

double broken_mass_sq(const DofMap& dofs, const Operators& ops, std::span<const double> u) {
  return quadratic_form(ops.mass_b, b_part(dofs, u)) + quadratic_form(ops.mass_d, d_part(dofs, u));
}

Vector difference(std::span<const double> a, std::span<const double> b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

Vector solve_source_shift(const Mesh& mesh, const DofMap& dofs, const Operators& ops,
                          const SpaceTimeFn& f1, const SpaceTimeFn& f2, double t,
                          const CgOptions& opts) {
  Vector out(dofs.num_u(), 0.0);
  if (!f1 && !f2) return out;
  const Vector load = assemble_volume_load(
      mesh, dofs,
      [&](const Point& p, double s) { return (f1 ? f1(p, s) : 0.0) - (f2 ? f2(p, s) : 0.0); },
      Region::B, t);
  const SparseMatrix k = add(ops.stiff_i, ops.stiff_e);
  const CgResult res = cg_solve(k, load, opts);
  std::copy(res.x.begin(), res.x.end(), out.begin());
  return out;
}

Vector interface_charge_source(std::span<const double> jump_prev, std::span<const double> jump_next,
                               double alpha, double beta, double dt) {
  if (jump_prev.size() != jump_next.size()) throw DimensionError("charge source: size mismatch");
  Vector q(jump_next.size());
  for (std::size_t k = 0; k < q.size(); ++k)
    q[k] = -alpha * (jump_next[k] - jump_prev[k]) / dt - beta * jump_next[k];
  return q;
}

LiftingSolution solve_lifting(const DofMap& dofs, const Operators& ops, std::span<const double> w,
                              std::span<const double> r, const CgOptions& opts) {
  if (w.size() != dofs.num_v()) throw DimensionError("lifting: w must live on the V dofs");
  if (r.size() != dofs.num_jumps()) throw DimensionError("lifting: one r per jump pair");
  LiftingSolution out;
  out.w.assign(w.begin(), w.end());
  out.r.assign(r.begin(), r.end());
  Vector b(dofs.num_u(), 0.0);
  const Vector aiw = spmv(ops.stiff_i, w);
  for (std::size_t i = 0; i < aiw.size(); ++i) b[i] = -aiw[i];
  out.W = solve_jump_constrained(dofs, broken_stiffness(ops), b, r, opts);
  out.norm_x = std::sqrt(quadratic_form(ops.lap_b, b_part(dofs, out.W)) +
                         quadratic_form(ops.lap_d, d_part(dofs, out.W)) +
                         quadratic_form(ops.jump_mass, out.W));
  return out;
}

Vector harmonic_extension(const DofMap& dofs, const Operators& ops, std::span<const double> r,
                          const CgOptions& opts) {
  if (r.size() != dofs.num_jumps()) throw DimensionError("extension: one r per jump pair");
  std::vector<Index> fixed;
  for (const auto& p : dofs.jump_pairs()) fixed.push_back(p.b);
  const Vector zero(dofs.num_ub(), 0.0);
  return solve_with_fixed(ops.lap_b, zero, fixed, r, opts);
}

double half_norm_sq(const DofMap& dofs, const Operators& ops, std::span<const double> r,
                    const CgOptions& opts) {
  const Vector e = harmonic_extension(dofs, ops, r, opts);
  return quadratic_form(ops.gamma_mass, r) + quadratic_form(ops.lap_b, e);
}

double bilinear_form(const DofMap& dofs, const Operators& ops, double beta,
                     const LiftingSolution& x, const LiftingSolution& y) {
  const std::size_t nb = dofs.num_ub();
  Vector xw(nb), yw(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    xw[i] = x.w[i] + x.W[i];
    yw[i] = y.w[i] + y.W[i];
  }
  return bilinear(ops.stiff_i, xw, yw) + bilinear(ops.stiff_e, b_part(dofs, x.W), b_part(dofs, y.W)) +
         bilinear(ops.stiff_d, d_part(dofs, x.W), d_part(dofs, y.W)) +
         beta * bilinear(ops.gamma_mass, x.r, y.r);
}

double bilinear_form(const DofMap& dofs, const Operators& ops, double beta, const FormArgument& x,
                     const FormArgument& y, const CgOptions& opts) {
  return bilinear_form(dofs, ops, beta, solve_lifting(dofs, ops, x.w, x.r, opts),
                       solve_lifting(dofs, ops, y.w, y.r, opts));
}

CoercivityResult coercivity_estimate(const DofMap& dofs, const Operators& ops, double beta,
                                     const CgOptions& opts, const EigenOptions& eig) {
  const std::size_t nv = dofs.num_v(), nj = dofs.num_jumps(), n = nv + nj;
  if (n == 0) throw DimensionError("coercivity: empty (w, r) space");
  std::vector<LiftingSolution> lift(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector w(nv, 0.0), r(nj, 0.0);
    (i < nv ? w[i] : r[i - nv]) = 1.0;
    lift[i] = solve_lifting(dofs, ops, w, r, opts);
  }
  std::vector<Vector> form(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) form[i][j] = bilinear_form(dofs, ops, beta, lift[i], lift[j]);
  CoercivityResult out;
  out.dimension = n;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      scale = std::max(scale, std::abs(form[i][j]));
      out.form_asymmetry = std::max(out.form_asymmetry, std::abs(form[i][j] - form[j][i]));
    }
  if (scale > 0.0) out.form_asymmetry /= scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) form[i][j] = form[j][i] = 0.5 * (form[i][j] + form[j][i]);

  // Gram matrix: H1(B) on w, L2(Gamma) plus harmonic-extension energy on r.
  std::vector<Vector> gram(n, Vector(n, 0.0));
  const SparseMatrix h1 = add(ops.lap_b, ops.mass_b);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nv; ++j) gram[i][j] = h1.at(i, j);
  std::vector<Vector> ext(nj);
  for (std::size_t k = 0; k < nj; ++k) {
    Vector r(nj, 0.0);
    r[k] = 1.0;
    ext[k] = harmonic_extension(dofs, ops, r, opts);
  }
  for (std::size_t k = 0; k < nj; ++k)
    for (std::size_t l = 0; l < nj; ++l)
      gram[nv + k][nv + l] = ops.gamma_mass.at(k, l) + bilinear(ops.lap_b, ext[k], ext[l]);
  for (std::size_t k = 0; k < nj; ++k)
    for (std::size_t l = k + 1; l < nj; ++l)
      gram[nv + k][nv + l] = gram[nv + l][nv + k] = 0.5 * (gram[nv + k][nv + l] + gram[nv + l][nv + k]);

  const EigenResult e = smallest_generalized_eigenvalue(SparseMatrix::from_dense(form, true),
                                                        SparseMatrix::from_dense(gram, true), eig);
  out.c_min = e.lambda;
  out.eigen_iterations = e.iterations;
  return out;
}

EquivalenceResult shifted_equivalence_check(const Mesh& mesh, const Conductivities& sigma,
                                            const StepperConfig& config, const InitialData& init,
                                            const SourceSet& sources) {
  if (config.ionic) throw ConfigError("shifted equivalence: requires ionic = false");
  StepperConfig cfg = config;
  cfg.snapshot_every = 1;
  const Stepper stepper(mesh, sigma, cfg);
  const DofMap& dofs = stepper.dofs();
  const Operators& ops = stepper.operators();
  const Trajectory direct = stepper.run(init, sources);

  const std::size_t n = stepper.step_count();
  std::vector<Vector> shift(n + 1), jumps(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    shift[k] = solve_source_shift(mesh, dofs, ops, sources.f1, sources.f2, double(k) * cfg.dt,
                                  cfg.solver);
    jumps[k] = dofs.jump(shift[k]);
  }

  SourceSet shifted = sources;
  shifted.f2 = sources.f1;
  shifted.extra = [&](std::size_t k, double t) {
    StepLoads loads = sources.extra ? sources.extra(k, t) : StepLoads{};
    if (loads.v.empty()) loads.v.assign(dofs.num_v(), 0.0);
    if (loads.u.empty()) loads.u.assign(dofs.num_u(), 0.0);
    const Vector ai = spmv(ops.stiff_i, b_part(dofs, shift[k + 1]));
    for (std::size_t i = 0; i < ai.size(); ++i) loads.v[i] -= ai[i];
    const Vector q = interface_charge_source(jumps[k], jumps[k + 1], cfg.alpha, cfg.beta, cfg.dt);
    const Vector jq = jump_transpose(dofs, spmv(ops.gamma_mass, q));
    for (std::size_t i = 0; i < jq.size(); ++i) loads.u[i] += jq[i];
    return loads;
  };
  Vector v0 = interpolate_region(mesh, dofs, Region::B, init.v0);
  Vector s0 = interpolate_jumps(mesh, dofs, init.s0);
  for (std::size_t k = 0; k < s0.size(); ++k) s0[k] -= jumps[0][k];
  Vector w0 = interpolate_region(mesh, dofs, Region::B, init.w_in);
  const Trajectory other =
      stepper.run_from(stepper.initialize_nodal(std::move(v0), s0, std::move(w0), shifted), shifted);

  EquivalenceResult out;
  out.steps = n;
  out.bitwise_equal = true;
  for (std::size_t k = 0; k < direct.states.size(); ++k) {
    const State& a = direct.states[k];
    const State& b = other.states[k];
    Vector u = b.U;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += shift[a.step][i];
    out.bitwise_equal = out.bitwise_equal && a.V == b.V && a.U == u;
    const double dv = norm2(difference(a.V, b.V)), du = norm2(difference(a.U, u));
    out.max_discrepancy = std::max(out.max_discrepancy, dv + du);
    out.reference_scale = std::max(out.reference_scale, norm2(a.V) + norm2(a.U));
  }
  return out;
}

double region_l2_sq(const Mesh& mesh, Region region, const SpaceFn& f) {
  if (!f) return 0.0;
  double s = 0.0;
  const int nv = mesh.vertices_per_cell();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    if (cell.region != region) continue;
    const double w = mesh.cell_measure(Index(c)) / nv;
    for (int k = 0; k < nv; ++k) {
      const double v = f(mesh.vertices()[cell.v[k]]);
      s += w * v * v;
    }
  }
  return s;
}

double energy_data_functional(const Mesh& mesh, const DofMap& dofs, const Operators& ops,
                              const SourceSet& sources, const InitialData& init, double dt,
                              std::size_t steps) {
  double src = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = double(k) * dt;
    for (const SpaceTimeFn* f : {&sources.f1, &sources.f2}) {
      if (!*f) continue;
      src += dt * region_l2_sq(mesh, Region::B, [&](const Point& p) { return (*f)(p, t); });
    }
  }
  const Vector s0 = interpolate_jumps(mesh, dofs, init.s0);
  return src + region_l2_sq(mesh, Region::B, init.v0) + quadratic_form(ops.gamma_mass, s0) + 1.0;
}

EnergyReport energy_report(const Trajectory& tr, double dt, double data) {
  EnergyReport r;
  for (std::size_t k = 0; k < tr.diagnostics.size(); ++k) {
    const auto& d = tr.diagnostics[k];
    r.sup_v_sq = std::max(r.sup_v_sq, d.v_sq);
    r.sup_jump_sq = std::max(r.sup_jump_sq, d.jump_sq);
    if (k == 0) continue;
    r.int_grad_v_sq += dt * d.grad_v_sq;
    r.int_grad_ub_sq += dt * d.grad_ub_sq;
    r.int_grad_ud_sq += dt * d.grad_ud_sq;
    r.int_jump_sq += dt * d.jump_sq;
  }
  r.lhs = r.sup_v_sq + r.int_grad_v_sq + r.int_grad_ub_sq + r.int_grad_ud_sq + r.sup_jump_sq +
          r.int_jump_sq;
  r.data = data;
  r.ratio = r.lhs == 0.0 ? 0.0 : r.lhs / data;
  return r;
}

SpaceTimeFn random_smooth_field(std::uint64_t seed, double amplitude, int dim, int modes) {
  struct Mode {
    int k1, k2;
    double c, d;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Mode> list;
  for (int k1 = 1; k1 <= modes; ++k1)
    for (int k2 = 1; k2 <= (dim == 1 ? 1 : modes); ++k2) {
      const double c = amplitude * unif(rng) / (k1 * k2);
      list.push_back({k1, k2, c, unif(rng)});
    }
  return [list, dim](const Point& p, double t) {
    double s = 0.0;
    for (const auto& m : list) {
      const double sy = dim == 1 ? 1.0 : std::sin(m.k2 * kPi * p.y);
      s += m.c * std::sin(m.k1 * kPi * p.x) * sy * (1.0 + m.d * t);
    }
    return s;
  };
}

ManufacturedSolution mms_interval(double s) {
  ManufacturedSolution m;
  const double k = kPi / s;
  const double cb = 1.0 / (2.0 * s), cd = 1.0 / (2.0 * (1.0 - s));
  m.v = [k](const Point& p, double t) { return std::exp(-t) * std::sin(k * p.x); };
  m.v_t = [k](const Point& p, double t) { return -std::exp(-t) * std::sin(k * p.x); };
  m.v_lap = [k](const Point& p, double t) { return -k * k * std::exp(-t) * std::sin(k * p.x); };
  m.v_grad = [k](const Point& p, double t) { return Point{k * std::exp(-t) * std::cos(k * p.x), 0.0}; };
  m.ub = [cb](const Point& p, double t) { return (1.0 + t) * cb * p.x; };
  m.ub_t = [cb](const Point& p, double) { return cb * p.x; };
  m.ub_lap = [](const Point&, double) { return 0.0; };
  m.ub_grad = [cb](const Point&, double t) { return Point{(1.0 + t) * cb, 0.0}; };
  m.ud = [cd](const Point& p, double t) { return -std::cos(t) * cd * (1.0 - p.x); };
  m.ud_t = [cd](const Point& p, double t) { return std::sin(t) * cd * (1.0 - p.x); };
  m.ud_lap = [](const Point&, double) { return 0.0; };
  m.ud_grad = [cd](const Point&, double t) { return Point{std::cos(t) * cd, 0.0}; };
  m.normal = {-1.0, 0.0};
  return m;
}

ManufacturedSolution mms_split_rectangle(double s) {
  ManufacturedSolution m;
  const double k = kPi / (2.0 * s);
  m.v = [k](const Point& p, double t) {
    return std::exp(-t) * std::sin(k * p.x) * std::sin(kPi * p.y);
  };
  m.v_t = [m](const Point& p, double t) { return -m.v(p, t); };
  m.v_lap = [m, k](const Point& p, double t) { return -(k * k + kPi * kPi) * m.v(p, t); };
  m.v_grad = [k](const Point& p, double t) {
    const double e = std::exp(-t);
    return Point{e * k * std::cos(k * p.x) * std::sin(kPi * p.y),
                 e * kPi * std::sin(k * p.x) * std::cos(kPi * p.y)};
  };
  m.ub = [](const Point& p, double t) { return (1.0 + t) * p.x * std::sin(kPi * p.y); };
  m.ub_t = [](const Point& p, double) { return p.x * std::sin(kPi * p.y); };
  m.ub_lap = [](const Point& p, double t) {
    return -kPi * kPi * (1.0 + t) * p.x * std::sin(kPi * p.y);
  };
  m.ub_grad = [](const Point& p, double t) {
    return Point{(1.0 + t) * std::sin(kPi * p.y), (1.0 + t) * p.x * kPi * std::cos(kPi * p.y)};
  };
  m.ud = [](const Point& p, double t) { return std::cos(t) * (1.0 - p.x) * std::sin(kPi * p.y); };
  m.ud_t = [](const Point& p, double t) { return -std::sin(t) * (1.0 - p.x) * std::sin(kPi * p.y); };
  m.ud_lap = [](const Point& p, double t) {
    return -kPi * kPi * std::cos(t) * (1.0 - p.x) * std::sin(kPi * p.y);
  };
  m.ud_grad = [](const Point& p, double t) {
    return Point{-std::cos(t) * std::sin(kPi * p.y), std::cos(t) * (1.0 - p.x) * kPi * std::cos(kPi * p.y)};
  };
  m.normal = {-1.0, 0.0};
  return m;
}

SourceSet mms_sources(const ManufacturedSolution& m, double si, double se, double sd, double alpha,
                      double beta) {
  SourceSet s;
  const Point n = m.normal;
  auto dn = [n](const Point& g) { return g.x * n.x + g.y * n.y; };
  // dt V - div(si grad(V + U_B)) = f1,  dt V + div(se grad U_B) = f2
  s.f1 = [m, si](const Point& p, double t) { return m.v_t(p, t) - si * (m.v_lap(p, t) + m.ub_lap(p, t)); };
  s.f2 = [m, se](const Point& p, double t) { return m.v_t(p, t) + se * m.ub_lap(p, t); };
  s.f_d = [m, sd](const Point& p, double t) { return -sd * m.ud_lap(p, t); };
  s.g_flux1 = [m, si, dn](const Point& p, double t) {
    const Point gv = m.v_grad(p, t), gu = m.ub_grad(p, t);
    return si * dn(Point{gv.x + gu.x, gv.y + gu.y});
  };
  s.g_flux2 = [m, se, sd, dn](const Point& p, double t) {
    return se * dn(m.ub_grad(p, t)) - sd * dn(m.ud_grad(p, t));
  };
  s.q_gamma = [m, se, alpha, beta, dn](const Point& p, double t) {
    const double jump_t = m.ub_t(p, t) - m.ud_t(p, t);
    const double jump = m.ub(p, t) - m.ud(p, t);
    return alpha * jump_t + beta * jump - se * dn(m.ub_grad(p, t));
  };
  return s;
}

double region_l2_error(const Mesh& mesh, const DofMap& dofs, Region region,
                       std::span<const double> values, const SpaceFn& exact) {
  const auto map = dofs.region_map(region);
  // barycentric points and weights (weights sum to 1)
  std::vector<std::array<double, 3>> pts;
  std::vector<double> wts;
  if (mesh.dim() == 1) {
    const double a = 0.5 * std::sqrt(3.0 / 5.0);
    for (double x : {0.5 - a, 0.5, 0.5 + a}) pts.push_back({1.0 - x, x, 0.0});
    wts = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  } else {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    pts = {{a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
           {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
    wts = {wa, wa, wa, wb, wb, wb};
  }
  const int nv = mesh.vertices_per_cell();
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    if (cell.region != region) continue;
    const double meas = mesh.cell_measure(Index(c));
    for (std::size_t q = 0; q < pts.size(); ++q) {
      Point x{0.0, 0.0};
      double uh = 0.0;
      for (int k = 0; k < nv; ++k) {
        const Point& v = mesh.vertices()[cell.v[k]];
        x.x += pts[q][k] * v.x;
        x.y += pts[q][k] * v.y;
        const Index i = map[cell.v[k]];
        if (i >= 0) uh += pts[q][k] * values[i];
      }
      const double e = uh - exact(x);
      s += meas * wts[q] * e * e;
    }
  }
  return std::sqrt(s);
}

std::vector<MmsRow> mms_convergence(const MmsStudy& study) {
  std::vector<MmsRow> rows;
  const ManufacturedSolution& m = study.solution;
  const SourceSet src =
      mms_sources(m, study.sigma_i, study.sigma_e, study.sigma_d, study.alpha, study.beta);
  for (const MmsLevel& level : study.levels) {
    StepperConfig cfg;
    cfg.dt = level.dt;
    cfg.T = study.T;
    cfg.alpha = study.alpha;
    cfg.beta = study.beta;
    cfg.ionic = false;
    cfg.solver.tol = study.tol;
    cfg.snapshot_every = 0;
    const Conductivities sigma =
        Conductivities::constant(level.mesh, study.sigma_i, study.sigma_e, study.sigma_d);
    const Stepper stepper(level.mesh, sigma, cfg);
    InitialData init;
    init.v0 = [&](const Point& p) { return m.v(p, 0.0); };
    init.s0 = [&](const Point& p) { return m.ub(p, 0.0) - m.ud(p, 0.0); };
    const Trajectory tr = stepper.run(init, src);
    const State& fin = tr.final_state();
    const DofMap& dofs = stepper.dofs();
    const double t = fin.t;
    MmsRow row;
    row.scale = level.scale;
    row.dt = level.dt;
    row.dofs = dofs.size();
    row.err_v = region_l2_error(level.mesh, dofs, Region::B, fin.V,
                                [&](const Point& p) { return m.v(p, t); });
    const double eb = region_l2_error(level.mesh, dofs, Region::B, b_part(dofs, fin.U),
                                      [&](const Point& p) { return m.ub(p, t); });
    const double ed = region_l2_error(level.mesh, dofs, Region::D, d_part(dofs, fin.U),
                                      [&](const Point& p) { return m.ud(p, t); });
    row.err_u = std::sqrt(eb * eb + ed * ed);
    if (!rows.empty()) {
      const MmsRow& prev = rows.back();
      const double lh = std::log(prev.scale / row.scale);
      row.rate_v = std::log(prev.err_v / row.err_v) / lh;
      row.rate_u = std::log(prev.err_u / row.err_u) / lh;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<StabilityRow> stability_study(const Mesh& mesh, const Conductivities& sigma,
                                          const StepperConfig& config, const InitialData& init,
                                          const SourceSet& sources, const SpaceFn& perturbation,
                                          const std::vector<double>& deltas,
                                          const std::vector<double>& dts) {
  struct Base {
    std::unique_ptr<Stepper> stepper;
    Trajectory tr;
  };
  std::vector<Base> bases;
  for (double dt : dts) {
    StepperConfig cfg = config;
    cfg.dt = dt;
    cfg.snapshot_every = 1;
    Base b;
    b.stepper = std::make_unique<Stepper>(mesh, sigma, cfg);
    b.tr = b.stepper->run(init, sources);
    bases.push_back(std::move(b));
  }
  std::vector<StabilityRow> rows;
  for (double delta : deltas) {
    for (std::size_t k = 0; k < dts.size(); ++k) {
      StabilityRow row{delta, dts[k], 0.0};
      if (delta != 0.0) {
        const Stepper& st = *bases[k].stepper;
        const DofMap& dofs = st.dofs();
        const Vector p = interpolate_region(mesh, dofs, Region::B, perturbation);
        const double pn = std::sqrt(quadratic_form(st.operators().mass_b, p));
        if (!(pn > 0.0)) throw ConfigError("stability: perturbation vanishes on the V dofs");
        Vector v0 = interpolate_region(mesh, dofs, Region::B, init.v0);
        for (std::size_t i = 0; i < v0.size(); ++i) v0[i] += delta * p[i] / pn;
        const Vector s0 = interpolate_jumps(mesh, dofs, init.s0);
        Vector w0 = interpolate_region(mesh, dofs, Region::B, init.w_in);
        const Trajectory pert = st.run_from(st.initialize_nodal(std::move(v0), s0, std::move(w0), sources), sources);
        const auto& base = bases[k].tr.states;
        for (std::size_t n = 0; n < base.size(); ++n) {
          const Vector dv = difference(pert.states[n].V, base[n].V);
          row.amplification = std::max(
              row.amplification, std::sqrt(quadratic_form(st.operators().mass_b, dv)) / std::abs(delta));
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double fitted_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("slope fit: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("slope fit: abscissae coincide");
  return sxy / sxx;
}

BetaStudy beta_limit_study(const Mesh& mesh, const Conductivities& sigma,
                           const StepperConfig& config, const InitialData& init,
                           const SourceSet& sources, const std::vector<double>& betas) {
  if (betas.size() < 2) throw ConfigError("beta_limit: need at least two beta values");
  StepperConfig ref_cfg = config;
  ref_cfg.snapshot_every = 1;
  ref_cfg.coupling = Coupling::Perfect;
  const Stepper ref_stepper(mesh, sigma, ref_cfg);
  const Trajectory ref = ref_stepper.run(init, sources);
  const DofMap& dofs = ref_stepper.dofs();
  const Operators& ops = ref_stepper.operators();

  BetaStudy out;
  std::vector<double> lx, ly;
  for (double beta : betas) {
    StepperConfig cfg = config;
    cfg.beta = beta;
    cfg.snapshot_every = 1;
    cfg.coupling = Coupling::Resistive;
    const Stepper st(mesh, sigma, cfg);
    const Trajectory tr = st.run(init, sources);
    BetaRow row;
    row.beta = beta;
    double jump = 0.0, dist = 0.0;
    for (std::size_t n = 1; n < tr.diagnostics.size(); ++n) jump += cfg.dt * tr.diagnostics[n].jump_sq;
    for (std::size_t n = 1; n < tr.states.size(); ++n) {
      const Vector dv = difference(tr.states[n].V, ref.states[n].V);
      const Vector du = difference(tr.states[n].U, ref.states[n].U);
      dist += cfg.dt * (quadratic_form(ops.mass_b, dv) + broken_mass_sq(dofs, ops, du));
    }
    row.jump_norm = std::sqrt(jump);
    row.distance_to_perfect = std::sqrt(dist);
    out.rows.push_back(row);
    if (!(beta > 0.0) || !(row.jump_norm > 0.0))
      throw ConfigError("beta_limit: beta and the interface jump must be positive for a log fit");
    lx.push_back(std::log(beta));
    ly.push_back(std::log(row.jump_norm));
  }
  out.slope = fitted_slope(lx, ly);
  return out;
}

}  // namespace bidomain
