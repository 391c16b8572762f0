#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bidomain/mesh.hpp"

namespace bidomain {

using Vector = std::vector<double>;

/// Compressed sparse row matrix with sorted, unique column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values, bool symmetric = false);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> d);
  static SparseMatrix from_dense(const std::vector<Vector>& rows, bool symmetric = false);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool symmetric() const { return symmetric_; }
  void set_symmetric(bool s) { symmetric_ = s; }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  /// Zero if the entry is not stored.
  double at(std::size_t r, std::size_t c) const;
  Vector diagonal() const;
  double max_abs() const;
  /// max |A - A^T| over stored entries.
  double asymmetry() const;
  std::vector<Vector> to_dense() const;

  SparseMatrix transposed() const;
  SparseMatrix scaled(double s) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// Coordinate-format accumulator. Duplicates are summed in insertion order
/// during build(), so the result does not depend on anything but the sequence
/// of add() calls.
class TripletBuilder {
 public:
  TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void add(Index r, Index c, double v);
  /// Adds s * A with its (0,0) entry placed at (row_offset, col_offset).
  void add_block(const SparseMatrix& a, Index row_offset, Index col_offset, double s = 1.0);
  /// Adds s * A^T at the offset.
  void add_block_transposed(const SparseMatrix& a, Index row_offset, Index col_offset,
                            double s = 1.0);
  SparseMatrix build(bool symmetric = false) const;

 private:
  struct Entry {
    Index r, c;
    double v;
  };
  std::size_t rows_, cols_;
  std::vector<Entry> entries_;
};

/// alpha * A + beta * B (shapes must match).
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                 double beta = 1.0);

/// y = A x
Vector spmv(const SparseMatrix& a, std::span<const double> x);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// x^T A x
double quadratic_form(const SparseMatrix& a, std::span<const double> x);
/// x^T A y
double bilinear(const SparseMatrix& a, std::span<const double> x, std::span<const double> y);

enum class Preconditioner { None, Jacobi };

struct CgOptions {
  double tol = 1e-10;
  /// 0 means 10 * n.
  std::size_t max_iterations = 0;
  Preconditioner preconditioner = Preconditioner::Jacobi;
  /// Record the residual norm after every iteration.
  bool record_history = false;
  /// Called with (iteration, x) after every update; empty by default.
  std::function<void(std::size_t, std::span<const double>)> on_iterate;
};

struct CgResult {
  Vector x;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b|| at exit
  std::vector<double> history;
};

/// Preconditioned conjugate gradients for SPD systems. Throws
/// NonConvergenceError when the cap is reached and NumericBreakdownError on
/// non-finite values or non-positive curvature. `x0` is the initial guess.
CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& opts = {},
                  std::span<const double> x0 = {});

/// LU with partial pivoting. Throws SingularMatrixError for singular input.
Vector dense_solve(std::vector<Vector> a, Vector b);

struct EigenResult {
  double lambda = 0.0;
  Vector vector;
  std::size_t iterations = 0;
};

struct EigenOptions {
  double tol = 1e-8;
  std::size_t max_outer = 500;
  double inner_tol = 1e-12;
  unsigned seed = 7;
  /// Block size of the iterated subspace; clustered low eigenvalues converge
  /// at the rate lambda_1 / lambda_{block+1}.
  std::size_t block = 8;
};

/// Smallest eigenvalue of A x = lambda B x by block inverse iteration with
/// Rayleigh-Ritz projection and CG inner solves (A SPD, B SPD). The returned
/// vector is B-normalised.
EigenResult smallest_generalized_eigenvalue(const SparseMatrix& a, const SparseMatrix& b,
                                            const EigenOptions& opts = {});

}  // namespace bidomain
