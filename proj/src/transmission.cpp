#include "bidomain/transmission.hpp"

#include "bidomain/errors.hpp"

namespace bidomain {

JumpElimination::JumpElimination(const DofMap& dofs, bool with_v) : dofs_(&dofs) {
  u_offset_ = with_v ? dofs.num_v() : 0;
  const std::size_t n = u_offset_ + dofs.num_u();
  map_.assign(n, -1);
  std::vector<char> eliminated(n, 0);
  const std::size_t ud0 = u_offset_ + dofs.num_ub();
  for (const auto& p : dofs.jump_pairs()) eliminated[ud0 + p.d] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (eliminated[i]) continue;
    map_[i] = Index(reduced_++);
    representative_.push_back(Index(i));
  }
  for (const auto& p : dofs.jump_pairs()) map_[ud0 + p.d] = map_[u_offset_ + p.b];
}

SparseMatrix JumpElimination::reduce(const SparseMatrix& k) const {
  if (k.rows() != full_size() || k.cols() != full_size())
    throw DimensionError("jump elimination: matrix does not match the full dof count");
  TripletBuilder tb(reduced_, reduced_);
  const auto rp = k.row_offsets();
  const auto ci = k.col_indices();
  const auto val = k.values();
  for (std::size_t r = 0; r < k.rows(); ++r)
    for (Index q = rp[r]; q < rp[r + 1]; ++q) tb.add(map_[r], map_[ci[q]], val[q]);
  return tb.build(k.symmetric());
}

Vector JumpElimination::restrict(std::span<const double> v) const {
  if (v.size() != full_size()) throw DimensionError("jump elimination: vector size mismatch");
  Vector z(reduced_, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) z[map_[i]] += v[i];
  return z;
}

Vector JumpElimination::offset(std::span<const double> r) const {
  Vector c(full_size(), 0.0);
  if (r.empty()) return c;
  if (r.size() != dofs_->num_jumps()) throw DimensionError("jump elimination: one r per jump pair");
  const std::size_t ud0 = u_offset_ + dofs_->num_ub();
  const auto pairs = dofs_->jump_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) c[ud0 + pairs[k].d] = -r[k];
  return c;
}

Vector JumpElimination::expand(std::span<const double> z, std::span<const double> r) const {
  if (z.size() != reduced_) throw DimensionError("jump elimination: reduced size mismatch");
  Vector u = offset(r);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += z[map_[i]];
  return u;
}

Vector JumpElimination::gather(std::span<const double> full) const {
  if (full.size() != full_size()) throw DimensionError("jump elimination: vector size mismatch");
  Vector z(reduced_);
  for (std::size_t i = 0; i < reduced_; ++i) z[i] = full[representative_[i]];
  return z;
}

SparseMatrix broken_stiffness(const Operators& ops) {
  const std::size_t nb = ops.stiff_i.rows(), nd = ops.stiff_d.rows();
  TripletBuilder tb(nb + nd, nb + nd);
  tb.add_block(ops.stiff_i, 0, 0);
  tb.add_block(ops.stiff_e, 0, 0);
  tb.add_block(ops.stiff_d, Index(nb), Index(nb));
  return tb.build(true);
}

Vector solve_jump_constrained(const DofMap& dofs, const SparseMatrix& k, std::span<const double> b,
                              std::span<const double> r, const CgOptions& opts) {
  if (b.size() != dofs.num_u()) throw DimensionError("constrained solve: b must live on the U block");
  const JumpElimination elim(dofs, false);
  const Vector c = elim.offset(r);
  const Vector kc = spmv(k, c);
  Vector rhs(b.begin(), b.end());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= kc[i];
  const SparseMatrix kr = elim.reduce(k);
  const CgResult res = cg_solve(kr, elim.restrict(rhs), opts);
  return elim.expand(res.x, r);
}

}  // namespace bidomain
