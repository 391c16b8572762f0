#include "bidomain/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "bidomain/errors.hpp"

namespace bidomain {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values,
                           bool symmetric)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)),
      symmetric_(symmetric) {
  if (row_offsets_.size() != rows_ + 1 || col_indices_.size() != values_.size() ||
      std::size_t(row_offsets_.back()) != values_.size())
    throw DimensionError("csr: inconsistent array sizes");
  for (std::size_t r = 0; r < rows_; ++r)
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (col_indices_[k] < 0 || std::size_t(col_indices_[k]) >= cols_)
        throw DimensionError("csr: column index out of range");
      if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1])
        throw DimensionError("csr: column indices must be sorted and unique");
    }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  Vector ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  const std::size_t n = d.size();
  std::vector<Index> rp(n + 1), ci(n);
  std::iota(rp.begin(), rp.end(), 0);
  std::iota(ci.begin(), ci.end(), 0);
  return SparseMatrix(n, n, std::move(rp), std::move(ci), Vector(d.begin(), d.end()), true);
}

SparseMatrix SparseMatrix::from_dense(const std::vector<Vector>& rows, bool symmetric) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows[0].size() : 0;
  std::vector<Index> rp{0}, ci;
  Vector v;
  for (const auto& row : rows) {
    if (row.size() != n) throw DimensionError("from_dense: ragged rows");
    for (std::size_t c = 0; c < n; ++c)
      if (row[c] != 0.0) ci.push_back(Index(c)), v.push_back(row[c]);
    rp.push_back(Index(v.size()));
  }
  return SparseMatrix(m, n, std::move(rp), std::move(ci), std::move(v), symmetric);
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto begin = col_indices_.begin() + row_offsets_[r];
  auto end = col_indices_.begin() + row_offsets_[r + 1];
  auto it = std::lower_bound(begin, end, Index(c));
  return (it != end && *it == Index(c)) ? values_[it - col_indices_.begin()] : 0.0;
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(rows_, cols_), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = at(r, r);
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::asymmetry() const {
  if (rows_ != cols_) return INFINITY;
  double m = 0.0;
  for (std::size_t r = 0; r < rows_; ++r)
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      m = std::max(m, std::abs(values_[k] - at(col_indices_[k], r)));
  return m;
}

std::vector<Vector> SparseMatrix::to_dense() const {
  std::vector<Vector> d(rows_, Vector(cols_, 0.0));
  for (std::size_t r = 0; r < rows_; ++r)
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) d[r][col_indices_[k]] = values_[k];
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  TripletBuilder tb(cols_, rows_);
  tb.add_block_transposed(*this, 0, 0);
  return tb.build(symmetric_);
}

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix out = *this;
  for (auto& v : out.values_) v *= s;
  return out;
}

void TripletBuilder::add(Index r, Index c, double v) {
  if (r < 0 || c < 0 || std::size_t(r) >= rows_ || std::size_t(c) >= cols_)
    throw DimensionError("triplet out of range");
  entries_.push_back({r, c, v});
}

void TripletBuilder::add_block(const SparseMatrix& a, Index row_offset, Index col_offset,
                               double s) {
  const auto rp = a.row_offsets();
  const auto ci = a.col_indices();
  const auto v = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (Index k = rp[r]; k < rp[r + 1]; ++k) add(row_offset + Index(r), col_offset + ci[k], s * v[k]);
}

void TripletBuilder::add_block_transposed(const SparseMatrix& a, Index row_offset,
                                          Index col_offset, double s) {
  const auto rp = a.row_offsets();
  const auto ci = a.col_indices();
  const auto v = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (Index k = rp[r]; k < rp[r + 1]; ++k) add(row_offset + ci[k], col_offset + Index(r), s * v[k]);
}

SparseMatrix TripletBuilder::build(bool symmetric) const {
  std::vector<Entry> e = entries_;
  std::stable_sort(e.begin(), e.end(), [](const Entry& x, const Entry& y) {
    return x.r != y.r ? x.r < y.r : x.c < y.c;
  });
  std::vector<Index> rp(rows_ + 1, 0), ci;
  Vector vals;
  ci.reserve(e.size());
  vals.reserve(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (!ci.empty() && k > 0 && e[k].r == e[k - 1].r && e[k].c == e[k - 1].c) {
      vals.back() += e[k].v;
    } else {
      ci.push_back(e[k].c);
      vals.push_back(e[k].v);
      rp[e[k].r + 1]++;
    }
  }
  for (std::size_t r = 0; r < rows_; ++r) rp[r + 1] += rp[r];
  return SparseMatrix(rows_, cols_, std::move(rp), std::move(ci), std::move(vals), symmetric);
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  TripletBuilder tb(a.rows(), a.cols());
  tb.add_block(a, 0, 0, alpha);
  tb.add_block(b, 0, 0, beta);
  return tb.build(a.symmetric() && b.symmetric());
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) {
    std::ostringstream msg;
    msg << "spmv: matrix is " << a.rows() << "x" << a.cols() << ", x has " << x.size()
        << ", y has " << y.size();
    throw DimensionError(msg.str());
  }
  const auto rp = a.row_offsets();
  const auto ci = a.col_indices();
  const auto v = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (Index k = rp[r]; k < rp[r + 1]; ++k) s += v[k] * x[ci[k]];
    y[r] = s;
  }
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.rows());
  spmv(a, x, y);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double quadratic_form(const SparseMatrix& a, std::span<const double> x) {
  return bilinear(a, x, x);
}

double bilinear(const SparseMatrix& a, std::span<const double> x, std::span<const double> y) {
  Vector ay = spmv(a, y);
  return dot(x, ay);
}

CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& opts,
                  std::span<const double> x0) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("cg: matrix must be square");
  if (b.size() != n) throw DimensionError("cg: right-hand side has wrong size");
  if (!x0.empty() && x0.size() != n) throw DimensionError("cg: initial guess has wrong size");

  CgResult res;
  res.x = x0.empty() ? Vector(n, 0.0) : Vector(x0.begin(), x0.end());
  const double bnorm = norm2(b);
  if (!std::isfinite(bnorm)) throw NumericBreakdownError("cg: non-finite right-hand side");
  if (bnorm == 0.0) {
    std::fill(res.x.begin(), res.x.end(), 0.0);
    return res;
  }

  Vector inv_diag(n, 1.0);
  if (opts.preconditioner == Preconditioner::Jacobi) {
    Vector d = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(d[i] > 0.0))
        throw NumericBreakdownError("cg: non-positive diagonal entry in row " + std::to_string(i));
      inv_diag[i] = 1.0 / d[i];
    }
  }

  Vector r(n), z(n), p(n), ap(n);
  spmv(a, res.x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  double rnorm = norm2(r);
  res.residual = rnorm / bnorm;
  if (res.residual <= opts.tol) return res;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  const std::size_t cap = opts.max_iterations ? opts.max_iterations : 10 * n;

  for (std::size_t it = 1; it <= cap; ++it) {
    spmv(a, p, ap);
    const double curvature = dot(p, ap);
    if (!std::isfinite(curvature) || !(curvature > 0.0))
      throw NumericBreakdownError("cg: non-positive curvature p^T A p = " +
                                  std::to_string(curvature) + " at iteration " + std::to_string(it));
    const double alpha = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rnorm = norm2(r);
    if (!std::isfinite(rnorm)) throw NumericBreakdownError("cg: non-finite residual");
    res.iterations = it;
    res.residual = rnorm / bnorm;
    if (opts.record_history) res.history.push_back(res.residual);
    if (opts.on_iterate) opts.on_iterate(it, res.x);
    if (res.residual <= opts.tol) return res;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  std::ostringstream msg;
  msg << "cg: no convergence after " << cap << " iterations (relative residual "
      << res.residual << ", tolerance " << opts.tol << ")";
  throw NonConvergenceError(msg.str(), res.residual);
}

Vector dense_solve(std::vector<Vector> a, Vector b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw DimensionError("dense_solve: size mismatch");
  double scale = 0.0;
  for (const auto& row : a) {
    if (row.size() != n) throw DimensionError("dense_solve: matrix must be square");
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  const double eps = 1e-14 * std::max(scale, 1e-300) * double(std::max<std::size_t>(n, 1));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (!(std::abs(a[piv][k]) > eps))
      throw SingularMatrixError("dense_solve: matrix is singular to working precision at column " +
                                std::to_string(k));
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

namespace {

// Cyclic Jacobi for a small dense symmetric matrix. Returns eigenvalues in
// ascending order with the matching eigenvectors as columns of q.
void symmetric_eigen(std::vector<Vector> h, Vector& theta, std::vector<Vector>& q) {
  const std::size_t k = h.size();
  q.assign(k, Vector(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) q[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        total += h[i][j] * h[i][j];
        if (i != j) off += h[i][j] * h[i][j];
      }
    if (off <= 1e-30 * total) break;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t r = p + 1; r < k; ++r) {
        if (h[p][r] == 0.0) continue;
        const double tau = (h[r][r] - h[p][p]) / (2.0 * h[p][r]);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        for (std::size_t m = 0; m < k; ++m) {
          const double hp = h[m][p], hr = h[m][r];
          h[m][p] = c * hp - s * hr;
          h[m][r] = s * hp + c * hr;
        }
        for (std::size_t m = 0; m < k; ++m) {
          const double hp = h[p][m], hr = h[r][m];
          h[p][m] = c * hp - s * hr;
          h[r][m] = s * hp + c * hr;
        }
        for (std::size_t m = 0; m < k; ++m) {
          const double qp = q[m][p], qr = q[m][r];
          q[m][p] = c * qp - s * qr;
          q[m][r] = s * qp + c * qr;
        }
      }
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return h[a][a] < h[b][b]; });
  theta.resize(k);
  std::vector<Vector> sorted(k, Vector(k));
  for (std::size_t j = 0; j < k; ++j) {
    theta[j] = h[order[j]][order[j]];
    for (std::size_t m = 0; m < k; ++m) sorted[m][j] = q[m][order[j]];
  }
  q = std::move(sorted);
}

}  // namespace

EigenResult smallest_generalized_eigenvalue(const SparseMatrix& a, const SparseMatrix& b,
                                            const EigenOptions& opts) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n)
    throw DimensionError("eigen: A and B must be square and of equal size");
  if (n == 0) throw DimensionError("eigen: empty pencil");
  const std::size_t k = std::clamp<std::size_t>(opts.block, 1, n);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Vector> x(k, Vector(n));
  for (auto& v : x)
    for (auto& e : v) e = unif(rng);

  CgOptions cg;
  cg.tol = opts.inner_tol;
  std::vector<Vector> guess(k);
  EigenResult res;
  double lambda_prev = 0.0;
  for (std::size_t it = 1; it <= opts.max_outer; ++it) {
    std::vector<Vector> y(k);
    for (std::size_t j = 0; j < k; ++j) y[j] = cg_solve(a, spmv(b, x[j]), cg, guess[j]).x;

    // B-orthonormalise (two passes of modified Gram-Schmidt); a direction
    // that collapses is replaced by a fresh random one.
    for (std::size_t j = 0; j < k; ++j) {
      for (int attempt = 0;; ++attempt) {
        const double before = std::sqrt(quadratic_form(b, y[j]));
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t i = 0; i < j; ++i) {
            const double c = bilinear(b, y[i], y[j]);
            for (std::size_t m = 0; m < n; ++m) y[j][m] -= c * y[i][m];
          }
        const double s = std::sqrt(quadratic_form(b, y[j]));
        if (!std::isfinite(s)) throw NumericBreakdownError("eigen: non-finite iterate");
        if (s > 1e-10 * before && s > 0.0) {
          for (auto& e : y[j]) e /= s;
          break;
        }
        if (attempt > 3) throw NumericBreakdownError("eigen: B-norm vanished");
        for (auto& e : y[j]) e = unif(rng);
      }
    }

    std::vector<Vector> ay(k);
    for (std::size_t j = 0; j < k; ++j) ay[j] = spmv(a, y[j]);
    std::vector<Vector> h(k, Vector(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) h[i][j] = dot(y[i], ay[j]);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) h[i][j] = h[j][i] = 0.5 * (h[i][j] + h[j][i]);
    Vector theta;
    std::vector<Vector> q;
    symmetric_eigen(h, theta, q);

    for (std::size_t j = 0; j < k; ++j) {
      x[j].assign(n, 0.0);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t m = 0; m < n; ++m) x[j][m] += q[i][j] * y[i][m];
      // the next solve returns roughly x / theta
      guess[j] = x[j];
      if (theta[j] > 0.0)
        for (auto& g : guess[j]) g /= theta[j];
    }
    const double lambda = theta[0];
    res.lambda = lambda;
    res.iterations = it;
    if (it > 1 && std::abs(lambda - lambda_prev) <= opts.tol * std::abs(lambda)) {
      res.vector = x[0];
      return res;
    }
    lambda_prev = lambda;
  }
  throw NonConvergenceError("eigen: inverse iteration did not converge", res.lambda);
}

}  // namespace bidomain
