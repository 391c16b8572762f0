#include <cmath>
#include <random>

#include "bidomain/errors.hpp"
#include "bidomain/mesh.hpp"
#include "bidomain/model.hpp"
#include "doctest.h"

using namespace bidomain;

namespace {

IonicModel constant_rates(double a, double b) {
  IonicModel m = linear_ionic_model();
  m.a = [a](double) { return a; };
  m.b = [b](double) { return b; };
  m.bound_a = a;
  m.bound_b = b;
  return m;
}

std::vector<IonicModel> all_models() {
  std::vector<IonicModel> out;
  for (const auto& name : ionic_model_names()) out.push_back(make_ionic_model(name));
  return out;
}

}  // namespace

TEST_CASE("gating exact step closed forms") {
  const IonicModel m = default_ionic_model();
  CHECK(gating_exact_step(m, 0.3, 1.7, 0.0) == 0.3);
  CHECK(gating_exact_step(constant_rates(1.0, 1.0), 0.0, 0.0, 100.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gating_exact_step(constant_rates(0.0, 2.0), 1.0, 0.0, std::log(2.0) / 2.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  // a + b = 0 is the identity
  CHECK(gating_exact_step(constant_rates(0.0, 0.0), 0.7, 0.0, 3.0) == 0.7);
}

TEST_CASE("ionic current evaluation") {
  const IonicModel lin = linear_ionic_model();
  CHECK(ionic_current(lin, 2.0, 0.7) == 2.0);
  IonicModel unit = lin;
  unit.h1 = [](double) { return 0.0; };
  unit.h2 = [](double) { return 1.0; };
  CHECK(ionic_current(unit, 5.0, 0.25) == 0.25);
  const IonicModel cubic = cubic_clipped_ionic_model();
  // h1(1) = 1, h2(1) = 1/2
  CHECK(ionic_current(cubic, 1.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(cubic.h1(3.0) == 1.0);
  CHECK(cubic.h1(-0.5) == doctest::Approx(-0.125));
}

TEST_CASE("composed Lipschitz probe") {
  const IonicModel def = default_ionic_model();
  std::vector<LipschitzSample> same{{{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, 0.0}};
  CHECK(composed_lipschitz_probe(def, same, 0.1) == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<LipschitzSample> samples;
  for (int s = 0; s < 100; ++s) {
    LipschitzSample ls;
    for (int k = 0; k < 50; ++k) {
      ls.v1.push_back(u(rng));
      ls.v2.push_back(u(rng));
    }
    ls.w_in = 0.5 * (1.0 + u(rng) / 3.0);
    samples.push_back(ls);
  }
  CHECK(composed_lipschitz_probe(linear_ionic_model(), samples, 0.02) <= 1.0 + 1e-9);
  for (const IonicModel& m : all_models()) {
    const double est = composed_lipschitz_probe(m, samples, 0.02);
    CHECK(std::isfinite(est));
    CHECK(est <= composed_lipschitz_bound(m, 1.0, 0.02) * (1.0 + 1e-9));
  }
}

TEST_CASE("gating stays in [0,1] over random steps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-50.0, 50.0), dt(0.0, 5.0), w0(0.0, 1.0);
  for (const IonicModel& m : all_models()) {
    double w = w0(rng);
    for (int k = 0; k < 10000; ++k) {
      w = gating_exact_step(m, w, v(rng), dt(rng));
      REQUIRE(w >= -1e-14);
      REQUIRE(w <= 1.0 + 1e-14);
    }
  }
}

TEST_CASE("gating relaxes monotonically towards the steady state") {
  const IonicModel m = default_ionic_model();
  for (double V : {-2.0, 0.0, 0.7, 4.0}) {
    const double w_inf = m.a(V) / (m.a(V) + m.b(V));
    for (double w0 : {0.0, 0.2, 0.9, 1.0}) {
      double w = w0, gap = std::abs(w0 - w_inf);
      for (int k = 0; k < 200; ++k) {
        w = gating_exact_step(m, w, V, 0.05);
        const double g = std::abs(w - w_inf);
        CHECK(g <= gap + 1e-16);
        gap = g;
      }
    }
  }
}

TEST_CASE("gating flow has the semigroup property") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-5.0, 5.0), dt(0.0, 2.0), w0(0.0, 1.0);
  for (const IonicModel& m : all_models()) {
    for (int k = 0; k < 1000; ++k) {
      const double V = v(rng), w = w0(rng), a = dt(rng), b = dt(rng);
      const double split = gating_exact_step(m, gating_exact_step(m, w, V, a), V, b);
      CHECK(std::abs(split - gating_exact_step(m, w, V, a + b)) <= 1e-13);
    }
  }
}

TEST_CASE("gating sign conditions and declared constants") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> p(-20.0, 20.0);
  for (const IonicModel& m : all_models()) {
    for (int k = 0; k < 1000; ++k) {
      const double x = p(rng);
      CHECK(m.g(x, 1.0) >= 0.0);
      CHECK(m.g(x, 0.0) <= 0.0);
      CHECK(m.a(x) >= 0.0);
      CHECK(m.b(x) >= 0.0);
      CHECK(m.a(x) <= m.bound_a);
      CHECK(m.b(x) <= m.bound_b);
      CHECK(std::abs(m.h2(x)) <= m.bound_h2);
    }
    const double slack = 1.0 + 1e-9;
    CHECK(sampled_lipschitz(m.a, -20.0, 20.0, 40000) <= m.lip_a * slack);
    CHECK(sampled_lipschitz(m.b, -20.0, 20.0, 40000) <= m.lip_b * slack);
    CHECK(sampled_lipschitz(m.h1, -20.0, 20.0, 40000) <= m.lip_h1 * slack);
    CHECK(sampled_lipschitz(m.h2, -20.0, 20.0, 40000) <= m.lip_h2 * slack);
  }
}

TEST_CASE("ionic model registry") {
  CHECK_THROWS_AS(make_ionic_model("no-such-model"), ConfigError);
  register_ionic_model("test-linear", linear_ionic_model);
  CHECK(make_ionic_model("test-linear").name == "linear");
  const auto names = ionic_model_names();
  CHECK(std::find(names.begin(), names.end(), "default") != names.end());
}

TEST_CASE("conductivity bounds are enforced") {
  const Mesh m = build_interval_mesh(2, 2, 0.5);
  CHECK_THROWS_AS(ConductivityField::constant(m, ConductivityRegion::BIntra, 0.0), ConfigError);
  std::vector<double> vals(m.num_cells(), 1.0);
  vals[0] = 5.0;  // cell 0 lies in B
  CHECK_THROWS_AS(ConductivityField(m, ConductivityRegion::BIntra, vals, 0.5, 2.0), ConfigError);
  // the same value on a D cell is ignored by a B field
  std::vector<double> dvals(m.num_cells(), 1.0);
  dvals[3] = 5.0;
  const ConductivityField f(m, ConductivityRegion::BIntra, dvals, 0.5, 2.0);
  CHECK(f.is_constant());
  CHECK(f.value() == 1.0);
  CHECK(f.scaled(2.0)[0] == 2.0);
  CHECK_THROWS_AS(ConductivityField(m, ConductivityRegion::D, dvals, 0.5, 2.0), ConfigError);
}
