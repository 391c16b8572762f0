#include <cmath>
#include <numbers>
#include <random>

#include "bidomain/analysis.hpp"
#include "bidomain/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bidomain;

namespace {

constexpr double pi = std::numbers::pi;

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct Setup {
  Mesh mesh;
  DofMap dofs;
  Operators ops;
  explicit Setup(Mesh m, double si = 1.0, double se = 1.0, double sd = 1.0)
      : mesh(std::move(m)), dofs(mesh), ops(assemble_operators(mesh, dofs, Conductivities::constant(mesh, si, se, sd))) {}
};

CgOptions tight() { return tight_cg_options(); }

StepperConfig passive(double dt, double T) {
  StepperConfig c;
  c.dt = dt;
  c.T = T;
  c.ionic = false;
  c.solver.tol = 1e-12;
  return c;
}

}  // namespace

TEST_CASE("source shift vanishes when f1 = f2") {
  const Setup s(build_split_rectangle_mesh(6, 6, 0.5));
  const SpaceTimeFn f = [](const Point& p, double t) { return p.x + t; };
  CHECK(max_abs(solve_source_shift(s.mesh, s.dofs, s.ops, f, f, 0.3, tight())) == 0.0);
  CHECK(max_abs(solve_source_shift(s.mesh, s.dofs, s.ops, nullptr, nullptr, 0.3, tight())) == 0.0);
}

TEST_CASE("source shift in 1D is nodally exact for constant data") {
  // sigma_i + sigma_e = 1, f1 - f2 = 1 on (0, s): u = s x - x^2 / 2
  const double split = 0.5;
  const Setup s(build_interval_mesh(8, 8, split), 0.5, 0.5, 1.0);
  const Vector u = solve_source_shift(s.mesh, s.dofs, s.ops, [](const Point&, double) { return 1.0; },
                                      nullptr, 0.0, tight());
  REQUIRE(u.size() == s.dofs.num_u());
  for (std::size_t i = 0; i < s.dofs.num_ub(); ++i) {
    const double x = s.mesh.vertices()[s.dofs.b_vertices()[i]].x;
    CHECK(u[i] == doctest::Approx(split * x - 0.5 * x * x).epsilon(1e-11));
  }
  for (std::size_t i = s.dofs.num_ub(); i < u.size(); ++i) CHECK(u[i] == 0.0);
  // and agrees with a dense solve of the same system
  const Vector load = assemble_volume_load(s.mesh, s.dofs, [](const Point&, double) { return 1.0; },
                                           Region::B, 0.0);
  const Vector ref = oracle::lu_solve(add(s.ops.stiff_i, s.ops.stiff_e), load);
  CHECK(max_diff(Vector(u.begin(), u.begin() + long(ref.size())), ref) <= 1e-12);
}

TEST_CASE("source shift converges at second order") {
  const double split = 0.5;
  const double k = pi / (2.0 * split);
  const SpaceTimeFn f1 = [k](const Point& p, double) { return k * k * std::sin(k * p.x); };
  std::vector<double> errs;
  for (int n : {8, 16, 32}) {
    const Setup s(build_interval_mesh(n, n, split), 0.5, 0.5, 1.0);
    const Vector u = solve_source_shift(s.mesh, s.dofs, s.ops, f1, nullptr, 0.0, tight());
    errs.push_back(region_l2_error(s.mesh, s.dofs, Region::B, Vector(u.begin(), u.begin() + long(s.dofs.num_ub())),
                                   [k](const Point& p) { return std::sin(k * p.x); }));
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
  CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("interface charge source") {
  const Vector j{0.5, -1.0};
  CHECK(interface_charge_source(j, j, 2.0, 3.0, 0.1) == Vector{-1.5, 3.0});
  CHECK(interface_charge_source(Vector{0.0}, Vector{0.0}, 2.0, 3.0, 0.1) == Vector{0.0});
  // ramp [u] = 1 + 2t: q = -2 alpha - beta (1 + 2 t_next)
  const double dt = 0.25, t = 0.5;
  const Vector q = interface_charge_source(Vector{1.0 + 2.0 * t}, Vector{1.0 + 2.0 * (t + dt)}, 1.5, 0.7, dt);
  CHECK(std::abs(q[0] - (-2.0 * 1.5 - 0.7 * (1.0 + 2.0 * (t + dt)))) <= 1e-12);
  CHECK_THROWS_AS(interface_charge_source(Vector{1.0}, Vector{1.0, 2.0}, 1.0, 1.0, 1.0), DimensionError);
}

TEST_CASE("lifting of zero data is zero and the jump is exact") {
  const Setup s(build_inclusion_mesh(8, {{3, 5, 2, 6}}), 1.0, 2.0, 0.5);
  const LiftingSolution z = solve_lifting(s.dofs, s.ops, Vector(s.dofs.num_v(), 0.0),
                                          Vector(s.dofs.num_jumps(), 0.0), tight());
  CHECK(max_abs(z.W) == 0.0);
  CHECK(z.norm_x == 0.0);
  std::mt19937_64 rng(2);
  const Vector w = random_vector(s.dofs.num_v(), rng), r = random_vector(s.dofs.num_jumps(), rng);
  const LiftingSolution l = solve_lifting(s.dofs, s.ops, w, r, tight());
  CHECK(max_diff(s.dofs.jump(l.W), r) <= 1e-14);
  CHECK_THROWS_AS(solve_lifting(s.dofs, s.ops, r, r, tight()), DimensionError);
}

TEST_CASE("lifting matches the two-stage construction") {
  for (const Mesh& m : {build_interval_mesh(6, 5, 0.5), build_split_rectangle_mesh(8, 8, 0.5),
                        build_inclusion_mesh(8, {{2, 5, 3, 6}})}) {
    const Setup s(m, 1.0, 1.5, 0.7);
    std::mt19937_64 rng(31);
    for (int k = 0; k < 5; ++k) {
      const Vector w = random_vector(s.dofs.num_v(), rng), r = random_vector(s.dofs.num_jumps(), rng);
      const Vector single = solve_lifting(s.dofs, s.ops, w, r, tight()).W;
      const Vector staged = oracle::two_stage_lifting(s.dofs, s.ops, w, r);
      CHECK(max_diff(single, staged) <= 1e-10 * std::max(1.0, max_abs(staged)));
    }
  }
}

TEST_CASE("lifting stability constant is refinement stable") {
  auto worst = [](const Mesh& m) {
    const Setup s(m);
    double ratio = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const SpaceTimeFn fw = random_smooth_field(seed, 1.0, 2);
      const SpaceTimeFn fr = random_smooth_field(seed + 1000, 1.0, 2);
      const Vector w = interpolate_region(s.mesh, s.dofs, Region::B, [&](const Point& p) { return fw(p, 0.0); });
      const Vector r = interpolate_jumps(s.mesh, s.dofs, [&](const Point& p) { return fr(p, 0.0); });
      const LiftingSolution l = solve_lifting(s.dofs, s.ops, w, r, tight());
      const double h1 = std::sqrt(quadratic_form(s.ops.mass_b, w) + quadratic_form(s.ops.lap_b, w));
      const double half = std::sqrt(half_norm_sq(s.dofs, s.ops, r, tight()));
      ratio = std::max(ratio, l.norm_x / (h1 + half));
    }
    return ratio;
  };
  const double coarse = worst(build_inclusion_mesh(8, {{3, 5, 3, 5}}));
  const double fine = worst(build_inclusion_mesh(16, {{6, 10, 6, 10}}));
  CHECK(coarse > 0.0);
  CHECK(fine <= 2.0 * coarse);
  CHECK(coarse <= 2.0 * fine);
}

TEST_CASE("harmonic extension reproduces the Gamma data") {
  const Setup s(build_split_rectangle_mesh(8, 8, 0.5));
  Vector r(s.dofs.num_jumps(), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::sin(pi * s.mesh.vertices()[s.dofs.jump_pairs()[k].vertex].y);
  const Vector e = harmonic_extension(s.dofs, s.ops, r, tight());
  for (std::size_t k = 0; k < r.size(); ++k) CHECK(e[s.dofs.jump_pairs()[k].b] == r[k]);
  CHECK(half_norm_sq(s.dofs, s.ops, r, tight()) > quadratic_form(s.ops.gamma_mass, r));
  CHECK(half_norm_sq(s.dofs, s.ops, Vector(r.size(), 0.0), tight()) == 0.0);
}

TEST_CASE("bilinear form is symmetric and non-negative") {
  for (const Mesh& m : {build_interval_mesh(5, 5, 0.5), build_inclusion_mesh(8, {{3, 5, 3, 5}})}) {
    const Setup s(m, 1.0, 0.5, 2.0);
    std::mt19937_64 rng(17);
    for (int k = 0; k < 25; ++k) {
      const FormArgument x{random_vector(s.dofs.num_v(), rng), random_vector(s.dofs.num_jumps(), rng)};
      const FormArgument y{random_vector(s.dofs.num_v(), rng), random_vector(s.dofs.num_jumps(), rng)};
      const double xy = bilinear_form(s.dofs, s.ops, 1.0, x, y, tight());
      const double yx = bilinear_form(s.dofs, s.ops, 1.0, y, x, tight());
      const double xx = bilinear_form(s.dofs, s.ops, 1.0, x, x, tight());
      const double yy = bilinear_form(s.dofs, s.ops, 1.0, y, y, tight());
      CHECK(std::abs(xy - yx) <= 1e-12 * (std::abs(xx) + std::abs(yy)));
      CHECK(xx >= 0.0);
      CHECK(yy >= 0.0);
      CHECK(xy * xy <= xx * yy * (1.0 + 1e-10));
    }
    const FormArgument zero{Vector(s.dofs.num_v(), 0.0), Vector(s.dofs.num_jumps(), 0.0)};
    CHECK(bilinear_form(s.dofs, s.ops, 1.0, zero, zero, tight()) == 0.0);
  }
}

TEST_CASE("coercivity constant is positive and refinement stable") {
  const Setup a(build_interval_mesh(8, 8, 0.5));
  const Setup b(build_split_rectangle_mesh(8, 8, 0.5));
  const Setup c(build_inclusion_mesh(8, {{3, 5, 3, 5}}));
  for (const Setup* s : {&a, &b, &c}) {
    const CoercivityResult r = coercivity_estimate(s->dofs, s->ops, 1.0);
    CHECK(r.c_min > 0.0);
    CHECK(r.dimension == s->dofs.num_v() + s->dofs.num_jumps());
    CHECK(r.form_asymmetry <= 1e-12);
  }
  const double coarse = coercivity_estimate(b.dofs, b.ops, 1.0).c_min;
  const Setup fine(build_split_rectangle_mesh(16, 16, 0.5));
  CHECK(coercivity_estimate(fine.dofs, fine.ops, 1.0).c_min / coarse >= 0.5);
}

TEST_CASE("coercivity constant scales with the coefficients") {
  const Mesh m = build_split_rectangle_mesh(6, 6, 0.5);
  const Setup one(m, 1.0, 1.0, 1.0), two(m, 2.0, 2.0, 2.0);
  const double c1 = coercivity_estimate(one.dofs, one.ops, 1.0).c_min;
  const double c2 = coercivity_estimate(two.dofs, two.ops, 2.0).c_min;
  CHECK(c2 / c1 == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("shifted problem reproduces the direct solution") {
  for (const Mesh& m : {build_interval_mesh(8, 8, 0.5), build_split_rectangle_mesh(8, 8, 0.5)}) {
    const int dim = m.dim();
    const auto sig = Conductivities::constant(m, 1.0, 1.5, 0.8);
    InitialData init;
    const SpaceTimeFn v0 = random_smooth_field(3, 1.0, dim), s0 = random_smooth_field(4, 1.0, dim);
    init.v0 = [v0](const Point& p) { return v0(p, 0.0); };
    init.s0 = [s0](const Point& p) { return s0(p, 0.0); };
    SourceSet src;
    src.f1 = random_smooth_field(5, 2.0, dim);
    src.f2 = random_smooth_field(6, 2.0, dim);
    const EquivalenceResult r = shifted_equivalence_check(m, sig, passive(0.05, 0.5), init, src);
    CHECK(r.steps == 10);
    CHECK(r.relative() <= 1e-8);

    SourceSet same;
    same.f1 = same.f2 = src.f1;
    CHECK(shifted_equivalence_check(m, sig, passive(0.05, 0.2), init, same).bitwise_equal);
    StepperConfig ionic = passive(0.05, 0.2);
    ionic.ionic = true;
    CHECK_THROWS_AS(shifted_equivalence_check(m, sig, ionic, init, src), ConfigError);
  }
}

TEST_CASE("energy report terms") {
  Trajectory tr;
  StepDiagnostics d0, d1, d2;
  d0.v_sq = 4.0;
  d0.jump_sq = 1.0;
  d0.grad_v_sq = 100.0;  // the initial level is not integrated
  d1.v_sq = 3.0;
  d1.jump_sq = 2.0;
  d1.grad_v_sq = 1.0;
  d1.grad_ub_sq = 2.0;
  d1.grad_ud_sq = 3.0;
  d2.v_sq = 1.0;
  d2.jump_sq = 0.5;
  tr.diagnostics = {d0, d1, d2};
  const EnergyReport r = energy_report(tr, 0.5, 10.0);
  CHECK(r.sup_v_sq == 4.0);
  CHECK(r.sup_jump_sq == 2.0);
  CHECK(r.int_grad_v_sq == 0.5);
  CHECK(r.int_grad_ub_sq == 1.0);
  CHECK(r.int_grad_ud_sq == 1.5);
  CHECK(r.int_jump_sq == 1.25);
  CHECK(r.lhs == doctest::Approx(4.0 + 2.0 + 0.5 + 1.0 + 1.5 + 1.25));
  CHECK(r.ratio == doctest::Approx(r.lhs / 10.0));
  CHECK(energy_report(Trajectory{}, 0.1, 1.0).ratio == 0.0);
}

TEST_CASE("energy data functional") {
  const Setup s(build_interval_mesh(4, 4, 0.5));
  CHECK(energy_data_functional(s.mesh, s.dofs, s.ops, {}, {}, 0.1, 10) == 1.0);
  SourceSet src;
  src.f1 = [](const Point&, double) { return 1.0; };
  src.f2 = [](const Point&, double) { return 2.0; };
  CHECK(energy_data_functional(s.mesh, s.dofs, s.ops, src, {}, 0.1, 10) == doctest::Approx(1.0 + 1.0 * 0.5 * 5.0));
  CHECK(region_l2_sq(s.mesh, Region::D, [](const Point&) { return 3.0; }) == doctest::Approx(4.5));
}

TEST_CASE("energy inequality ratio is bounded on random data") {
  const Mesh m = build_split_rectangle_mesh(8, 8, 0.5);
  const auto sig = Conductivities::constant(m, 1.0, 1.0, 1.0);
  StepperConfig c = passive(0.02, 0.2);
  c.ionic = true;
  const Stepper st(m, sig, c);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SourceSet src;
    src.f1 = random_smooth_field(seed, 1.0, 2);
    src.f2 = random_smooth_field(seed + 50, 1.0, 2);
    InitialData init;
    const SpaceTimeFn v0 = random_smooth_field(seed + 100, 1.0, 2);
    init.v0 = [v0](const Point& p) { return v0(p, 0.0); };
    init.s0 = [](const Point&) { return 0.5; };
    const Trajectory tr = st.run(init, src);
    const double data = energy_data_functional(m, st.dofs(), st.operators(), src, init, c.dt, st.step_count());
    const EnergyReport r = energy_report(tr, c.dt, data);
    CHECK(r.ratio > 0.0);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio < 100.0);
  }
}

TEST_CASE("random smooth fields are deterministic") {
  const SpaceTimeFn a = random_smooth_field(9, 1.0, 2), b = random_smooth_field(9, 1.0, 2);
  const SpaceTimeFn c = random_smooth_field(10, 1.0, 2);
  const Point p{0.3, 0.7};
  CHECK(a(p, 0.4) == b(p, 0.4));
  CHECK(a(p, 0.4) != c(p, 0.4));
  CHECK(a(Point{0.0, 0.5}, 1.0) == 0.0);
}

TEST_CASE("manufactured solutions that are linear in space are reproduced exactly") {
  ManufacturedSolution ms;
  const auto zero = [](const Point&, double) { return 0.0; };
  ms.v = [](const Point& p, double) { return 2.0 * p.x; };
  ms.ub = [](const Point& p, double) { return -p.x; };
  ms.ud = [](const Point& p, double) { return 3.0 * (1.0 - p.x); };
  ms.v_t = ms.v_lap = ms.ub_t = ms.ub_lap = ms.ud_t = ms.ud_lap = zero;
  ms.v_grad = [](const Point&, double) { return Point{2.0, 0.0}; };
  ms.ub_grad = [](const Point&, double) { return Point{-1.0, 0.0}; };
  ms.ud_grad = [](const Point&, double) { return Point{-3.0, 0.0}; };
  MmsStudy study;
  study.solution = ms;
  study.sigma_i = 1.3;
  study.sigma_e = 0.6;
  study.sigma_d = 2.0;
  study.beta = 0.4;
  study.levels.push_back({build_interval_mesh(4, 6, 0.4), 0.05, 0.1});
  study.levels.push_back({build_interval_mesh(3, 3, 0.5), 0.02, 1.0 / 6.0});
  for (const MmsRow& r : mms_convergence(study)) {
    CHECK(r.err_v <= 1e-10);
    CHECK(r.err_u <= 1e-10);
  }
}

TEST_CASE("manufactured solution converges at second order in space") {
  MmsStudy study;
  study.solution = mms_interval(0.5);
  for (int n : {8, 16, 32}) {
    const double h = 0.5 / n;
    study.levels.push_back({build_interval_mesh(n, n, 0.5), h * h, h});
  }
  const auto rows = mms_convergence(study);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rate_v == 0.0);
  CHECK(rows[1].rate_v >= 1.9);
  CHECK(rows[2].rate_v >= 1.9);
  CHECK(rows[2].rate_u >= 1.9);
}

TEST_CASE("region L2 error is exact on P1 fields") {
  const Setup s(build_split_rectangle_mesh(4, 4, 0.5));
  const auto f = [](const Point& p) { return p.x * p.y * (1.0 - p.y); };
  const Vector v = interpolate_region(s.mesh, s.dofs, Region::B, f);
  CHECK(region_l2_error(s.mesh, s.dofs, Region::B, v, f) > 0.0);
  CHECK(region_l2_error(s.mesh, s.dofs, Region::B, v, [](const Point&) { return 0.0; }) > 0.0);
  // P1 exact field: the interpolant is the field itself
  const Setup line(build_interval_mesh(4, 4, 0.5));
  const auto g = [](const Point& p) { return 3.0 * p.x; };
  CHECK(region_l2_error(line.mesh, line.dofs, Region::B, interpolate_region(line.mesh, line.dofs, Region::B, g), g) <= 1e-15);
}

TEST_CASE("stability amplification") {
  const Mesh m = build_split_rectangle_mesh(8, 8, 0.5);
  const auto sig = Conductivities::constant(m, 1.0, 1.0, 1.0);
  InitialData init;
  init.v0 = [](const Point& p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
  const SpaceFn pert = [](const Point& p) { return std::sin(2.0 * pi * p.x) * std::sin(pi * p.y); };

  const auto lin = stability_study(m, sig, passive(0.02, 0.2), init, {}, pert, {1e-2, 1e-4}, {0.02, 0.01});
  REQUIRE(lin.size() == 4);
  for (const auto& r : lin) CHECK(r.amplification <= 1.0 + 1e-10);
  CHECK(lin[0].delta == 1e-2);
  CHECK(lin[1].dt == 0.01);

  StepperConfig c = passive(0.02, 0.2);
  c.ionic = true;
  SourceSet src;
  src.f1 = [](const Point& p, double) { return 5.0 * p.x; };
  const auto rows = stability_study(m, sig, c, init, src, pert, {1e-3}, {0.02, 0.01});
  REQUIRE(rows.size() == 2);
  CHECK(std::isfinite(rows[0].amplification));
  const double ratio = rows[0].amplification / rows[1].amplification;
  CHECK(ratio >= 0.8);
  CHECK(ratio <= 1.25);
}

TEST_CASE("beta study") {
  const Mesh m = build_interval_mesh(4, 4, 0.5);
  const auto sig = Conductivities::constant(m, 1.0, 1.0, 1.0);
  InitialData init;
  init.s0 = [](const Point&) { return 1.0; };
  CHECK_THROWS_AS(beta_limit_study(m, sig, passive(1e-3, 0.1), init, {}, {10.0}), ConfigError);
  const BetaStudy st = beta_limit_study(m, sig, passive(1e-3, 0.1), init, {}, {1.0, 10.0, 100.0});
  REQUIRE(st.rows.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(st.rows[k].jump_norm < st.rows[k - 1].jump_norm);
    CHECK(st.rows[k].distance_to_perfect <= st.rows[k - 1].distance_to_perfect);
  }
  CHECK(st.slope < 0.0);
}

TEST_CASE("fitted slope") {
  const Vector x{0.0, 1.0, 2.0, 3.0};
  const Vector y{3.0, 2.5, 2.0, 1.5};
  CHECK(fitted_slope(x, y) == doctest::Approx(-0.5));
}
