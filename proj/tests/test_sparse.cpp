#include <cmath>
#include <numbers>
#include <random>

#include "bidomain/errors.hpp"
#include "bidomain/sparse.hpp"
#include "doctest.h"

using namespace bidomain;

namespace {

// 1D Dirichlet Laplacian (2,-1) on n interior points, scaled by 1/h^2 if asked.
SparseMatrix laplacian_1d(std::size_t n, double scale = 1.0) {
  TripletBuilder t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    t.add(Index(i), Index(i), 2.0 * scale);
    if (i > 0) t.add(Index(i), Index(i - 1), -scale);
    if (i + 1 < n) t.add(Index(i), Index(i + 1), -scale);
  }
  return t.build(true);
}

SparseMatrix mass_1d(std::size_t n, double h) {
  TripletBuilder t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    t.add(Index(i), Index(i), 4.0 * h / 6.0);
    if (i > 0) t.add(Index(i), Index(i - 1), h / 6.0);
    if (i + 1 < n) t.add(Index(i), Index(i + 1), h / 6.0);
  }
  return t.build(true);
}

SparseMatrix random_spd(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> m(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (u(rng) > 0.6) m[i][j] = m[j][i] = u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(m[i][j]);
    m[i][i] = s + 0.1 + std::abs(u(rng));
  }
  return SparseMatrix::from_dense(m, true);
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("spmv on small examples") {
  const SparseMatrix a = SparseMatrix::from_dense({{1, 2}, {0, 3}});
  CHECK(spmv(a, Vector{1, 1}) == Vector{3, 3});
  CHECK(spmv(SparseMatrix::identity(3), Vector{4, 5, 6}) == Vector{4, 5, 6});
  const SparseMatrix empty(2, 2, {0, 0, 0}, {}, {});
  CHECK(spmv(empty, Vector{1, 2}) == Vector{0, 0});
  CHECK_THROWS_AS(spmv(a, Vector{1, 2, 3}), DimensionError);
}

TEST_CASE("spmv matches a dense product") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 50;
  std::vector<Vector> d(n, Vector(n, 0.0));
  for (auto& row : d)
    for (auto& v : row)
      if (u(rng) > 0.5) v = u(rng);
  Vector x(n);
  for (auto& v : x) v = u(rng);
  const Vector y = spmv(SparseMatrix::from_dense(d), x);
  for (std::size_t i = 0; i < n; ++i) {
    double ref = 0.0;
    for (std::size_t j = 0; j < n; ++j) ref += d[i][j] * x[j];
    CHECK(std::abs(y[i] - ref) <= 1e-14);
  }
}

TEST_CASE("triplet builder sums duplicates and keeps rows sorted") {
  TripletBuilder t(3, 3);
  t.add(2, 1, 1.0);
  t.add(0, 2, 1.0);
  t.add(2, 1, 2.5);
  t.add(0, 0, -1.0);
  const SparseMatrix a = t.build();
  CHECK(a.nnz() == 3);
  CHECK(a.at(2, 1) == 3.5);
  CHECK(a.at(1, 1) == 0.0);
  const auto rows = a.row_offsets();
  const auto cols = a.col_indices();
  for (std::size_t r = 0; r < 3; ++r)
    for (Index k = rows[r] + 1; k < rows[r + 1]; ++k) CHECK(cols[k - 1] < cols[k]);

  TripletBuilder blk(4, 4);
  blk.add_block(a, 1, 1, 2.0);
  CHECK(blk.build().at(3, 2) == 7.0);
  TripletBuilder tr(4, 4);
  tr.add_block_transposed(a, 1, 1);
  CHECK(tr.build().at(2, 3) == 3.5);
}

TEST_CASE("matrix helpers") {
  const SparseMatrix a = SparseMatrix::from_dense({{2, 1}, {0, 3}});
  CHECK(a.asymmetry() == 1.0);
  CHECK(a.transposed().at(1, 0) == 1.0);
  CHECK(add(a, a.transposed()).asymmetry() == 0.0);
  CHECK(a.diagonal() == Vector{2, 3});
  CHECK(quadratic_form(a, Vector{1, 1}) == 6.0);
  CHECK(bilinear(a, Vector{1, 0}, Vector{0, 1}) == 1.0);
}

TEST_CASE("cg on the identity converges in one iteration") {
  const CgResult r = cg_solve(SparseMatrix::identity(5), Vector{1, 2, 3, 4, 5});
  CHECK(r.iterations == 1);
  CHECK(r.x == Vector{1, 2, 3, 4, 5});
}

TEST_CASE("cg zero right-hand side returns zero") {
  const CgResult r = cg_solve(laplacian_1d(4), Vector(4, 0.0), {}, Vector{1, 1, 1, 1});
  CHECK(r.iterations == 0);
  CHECK(r.x == Vector(4, 0.0));
}

TEST_CASE("cg recovers a manufactured solution") {
  for (std::size_t n : {10u, 100u, 400u}) {
    const SparseMatrix a = laplacian_1d(n);
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.1 * double(i)) + 0.01 * double(i);
    CgOptions o;
    o.tol = 1e-13;
    const CgResult r = cg_solve(a, spmv(a, x), o);
    CHECK(max_diff(r.x, x) <= 1e-8);
    CHECK(r.iterations <= n + 1);
  }
}

TEST_CASE("cg rejects indefinite systems") {
  const SparseMatrix a = SparseMatrix::from_dense({{1, 2}, {2, 1}}, true);
  CHECK_THROWS_AS(cg_solve(a, Vector{1, -1}), NumericBreakdownError);
  const SparseMatrix neg = SparseMatrix::diagonal(Vector{1.0, -1.0});
  CHECK_THROWS_AS(cg_solve(neg, Vector{1, 1}), NumericBreakdownError);
  CgOptions plain;
  plain.preconditioner = Preconditioner::None;
  CHECK_THROWS_AS(cg_solve(neg, Vector{0, 1}, plain), NumericBreakdownError);
}

TEST_CASE("cg reports non-convergence with the last residual") {
  CgOptions o;
  o.max_iterations = 3;
  o.tol = 1e-14;
  try {
    cg_solve(laplacian_1d(50), Vector(50, 1.0), o);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.last_residual() > 1e-14);
    CHECK(std::isfinite(e.last_residual()));
  }
}

// The residual norm of CG is not monotone in general; the A-norm of the error
// is, for any SPD preconditioner.
TEST_CASE("cg error decreases monotonically in the energy norm") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const SparseMatrix a = random_spd(60, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(60);
    for (auto& v : x) v = u(rng);
    const Vector b = spmv(a, x);
    std::vector<double> errs;
    CgOptions o;
    o.tol = 1e-14;
    o.on_iterate = [&](std::size_t, std::span<const double> xk) {
      Vector e(xk.begin(), xk.end());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] -= x[i];
      errs.push_back(std::sqrt(quadratic_form(a, e)));
    };
    cg_solve(a, b, o);
    REQUIRE(errs.size() >= 2);
    for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] <= errs[k - 1] * (1.0 + 1e-10) + 1e-14);
  }
}

TEST_CASE("cg history is recorded") {
  CgOptions o;
  o.record_history = true;
  const CgResult r = cg_solve(laplacian_1d(20), Vector(20, 1.0), o);
  CHECK(r.history.size() == r.iterations);
  CHECK(r.history.back() == r.residual);
  CHECK(r.residual <= o.tol);
}

TEST_CASE("cg agrees with dense LU") {
  for (unsigned seed : {4u, 5u}) {
    const SparseMatrix a = random_spd(40, seed);
    Vector b(40);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : b) v = u(rng);
    CgOptions o;
    o.tol = 1e-12;
    const Vector xc = cg_solve(a, b, o).x;
    const Vector xl = dense_solve(a.to_dense(), b);
    CHECK(max_diff(xc, xl) / norm2(xl) <= 10.0 * o.tol * 40.0);
  }
}

TEST_CASE("dense solve") {
  CHECK(dense_solve({{1, 0}, {0, 1}}, {3, 4}) == Vector{3, 4});
  // Hilbert 4x4 against a tight CG solve
  std::vector<Vector> h(4, Vector(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h[i][j] = 1.0 / double(i + j + 1);
  const Vector b{1, 2, 3, 4};
  const Vector xl = dense_solve(h, b);
  CgOptions o;
  o.tol = 1e-15;
  o.max_iterations = 200;
  o.preconditioner = Preconditioner::None;
  Vector xc;
  try {
    xc = cg_solve(SparseMatrix::from_dense(h, true), b, o).x;
  } catch (const NonConvergenceError&) {
    o.tol = 1e-13;
    xc = cg_solve(SparseMatrix::from_dense(h, true), b, o).x;
  }
  CHECK(max_diff(xl, xc) / norm2(xl) <= 1e-8);
  const Vector r = spmv(SparseMatrix::from_dense(h), xl);
  CHECK(max_diff(r, b) <= 1e-10);
  CHECK_THROWS_AS(dense_solve({{1, 2}, {2, 4}}, {1, 1}), SingularMatrixError);
  CHECK_THROWS_AS(dense_solve({{1, 2}}, {1}), DimensionError);
}

TEST_CASE("generalized eigenvalue examples") {
  const SparseMatrix a = random_spd(20, 8);
  CHECK(smallest_generalized_eigenvalue(a, a).lambda == doctest::Approx(1.0).epsilon(1e-8));
  const EigenResult d =
      smallest_generalized_eigenvalue(SparseMatrix::diagonal(Vector{2, 5}), SparseMatrix::identity(2));
  CHECK(d.lambda == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(d.vector[1]) <= 1e-4);

  // -u'' = lambda u on (0,1): P1 stiffness against P1 mass, lambda_1 -> pi^2
  const std::size_t n = 63;
  const double h = 1.0 / 64.0;
  const EigenResult r = smallest_generalized_eigenvalue(laplacian_1d(n, 1.0 / h), mass_1d(n, h));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(r.lambda - pi2) / pi2 <= 0.05);
  CHECK(r.lambda >= pi2);
  CHECK(quadratic_form(mass_1d(n, h), r.vector) == doctest::Approx(1.0).epsilon(1e-8));
}
