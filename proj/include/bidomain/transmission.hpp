#pragma once

#include <span>
#include <vector>

#include "bidomain/discretization.hpp"
#include "bidomain/sparse.hpp"

namespace bidomain {

/// Elimination of the D-side Gamma dofs through U_D|Gamma = U_B|Gamma - r.
///
/// Every full dof maps to exactly one reduced dof: the D-side dof of a jump
/// pair is represented by its B-side partner, everything else by itself. The
/// operator P is therefore a 0/1 matrix with one unit entry per row, and
/// U = P z + c with c = -r on the D-side Gamma dofs.
class JumpElimination {
 public:
  /// with_v: the full vector is [V | U_B | U_D]; otherwise just [U_B | U_D].
  JumpElimination(const DofMap& dofs, bool with_v);

  std::size_t full_size() const { return map_.size(); }
  std::size_t reduced_size() const { return reduced_; }
  Index reduced_index(std::size_t full) const { return map_[full]; }

  /// P^T K P
  SparseMatrix reduce(const SparseMatrix& k) const;
  /// P^T v
  Vector restrict(std::span<const double> v) const;
  /// P z + c(r). An empty r means r = 0.
  Vector expand(std::span<const double> z, std::span<const double> r = {}) const;
  /// c(r) alone.
  Vector offset(std::span<const double> r) const;
  /// Reduced coordinates of a full vector that already satisfies a constraint.
  Vector gather(std::span<const double> full) const;

 private:
  const DofMap* dofs_;
  std::size_t u_offset_;
  std::vector<Index> map_;
  std::vector<Index> representative_;
  std::size_t reduced_ = 0;
};

/// blockdiag(A_i + A_e, A_d) on the U block.
SparseMatrix broken_stiffness(const Operators& ops);

/// Solves K U = b over broken fields with [U] = r at the jump pairs, testing
/// only against functions without jump. K acts on the U block.
Vector solve_jump_constrained(const DofMap& dofs, const SparseMatrix& k, std::span<const double> b,
                              std::span<const double> r, const CgOptions& opts);

}  // namespace bidomain
