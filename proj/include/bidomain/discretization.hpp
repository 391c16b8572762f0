#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bidomain/mesh.hpp"
#include "bidomain/model.hpp"
#include "bidomain/sparse.hpp"

namespace bidomain {

/// Degree-of-freedom layout for (V, U) with U broken across Gamma.
///
/// Global ordering is [V | U_B | U_D]. V and U_B live on the same vertex set
/// (B-side vertices off the DirichletB boundary) in the same order, which is
/// referred to below as the "B space". U_D lives on the D-side vertices off
/// DirichletD (the "D space"). Gamma vertices carry one dof in each of U_B and
/// U_D, and the pair forms a jump [U] = U_B - U_D.
class DofMap {
 public:
  struct JumpPair {
    Index vertex;
    Index b;  // index in the B space
    Index d;  // index in the D space
  };

  explicit DofMap(const Mesh& mesh);

  std::size_t num_v() const { return b_vertices_.size(); }
  std::size_t num_ub() const { return b_vertices_.size(); }
  std::size_t num_ud() const { return d_vertices_.size(); }
  std::size_t num_u() const { return num_ub() + num_ud(); }
  std::size_t size() const { return num_v() + num_u(); }
  std::size_t num_jumps() const { return jumps_.size(); }

  Index v_offset() const { return 0; }
  Index ub_offset() const { return Index(num_v()); }
  Index ud_offset() const { return Index(num_v() + num_ub()); }

  /// -1 for vertices without a dof on that side.
  Index b_index(Index vertex) const { return b_of_vertex_[vertex]; }
  Index d_index(Index vertex) const { return d_of_vertex_[vertex]; }
  /// Index of the vertex in jump_pairs(), or -1.
  Index jump_index(Index vertex) const { return jump_of_vertex_[vertex]; }

  std::span<const Index> b_vertices() const { return b_vertices_; }
  std::span<const Index> d_vertices() const { return d_vertices_; }
  std::span<const JumpPair> jump_pairs() const { return jumps_; }

  /// Vertex -> dof index for the given region's space.
  std::span<const Index> region_map(Region r) const {
    return r == Region::B ? std::span<const Index>(b_of_vertex_) : std::span<const Index>(d_of_vertex_);
  }
  std::size_t region_size(Region r) const { return r == Region::B ? num_ub() : num_ud(); }

  /// [U] at each jump pair; `u` is the U block [U_B | U_D].
  Vector jump(std::span<const double> u) const;

 private:
  std::vector<Index> b_of_vertex_, d_of_vertex_, jump_of_vertex_;
  std::vector<Index> b_vertices_, d_vertices_;
  std::vector<JumpPair> jumps_;
};

inline DofMap build_dof_map(const Mesh& mesh) { return DofMap(mesh); }

enum class Block { VV, VUB, UBUB, UDUD };

/// Element integrals  int sigma grad(phi_i) . grad(phi_j)  over the region in
/// the requested block. Throws ConfigError on region/block/sigma mismatch.
SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const ConductivityField& sigma, Region region, Block block);

/// Unit-coefficient stiffness on a region space.
SparseMatrix assemble_laplacian(const Mesh& mesh, const DofMap& dofs, Region region);

/// Consistent or row-sum lumped P1 mass on a region space.
SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, Region region, bool lumped);

/// Consistent P1 mass on Gamma restricted to the jump pairs.
SparseMatrix assemble_interface_mass(const Mesh& mesh, const DofMap& dofs);

/// G = J^T M_Gamma J on the U block, so that U^T G U = int_Gamma [U]^2.
SparseMatrix assemble_interface_jump_mass(const Mesh& mesh, const DofMap& dofs);

using SpaceTimeFn = std::function<double(const Point&, double)>;
using SpaceFn = std::function<double(const Point&)>;

/// int f(., t) phi_i with the vertex rule, on the region space.
Vector assemble_volume_load(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFn& f,
                            Region region, double t);

enum class InterfaceTarget { Jump, BTrace };

/// int_Gamma g phi dsigma with g replaced by its P1 interpolant.
/// Jump: vector on the U block paired with [phi]. BTrace: vector on the B space.
Vector assemble_interface_load(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFn& g,
                               InterfaceTarget target, double t);

/// Same for nodal data given on the jump pairs (Dirichlet Gamma vertices read as 0).
Vector assemble_interface_load(const Mesh& mesh, const DofMap& dofs,
                               std::span<const double> g_on_jumps, InterfaceTarget target);

/// Nodal interpolation helpers.
Vector interpolate_region(const Mesh& mesh, const DofMap& dofs, Region region, const SpaceFn& f);
Vector interpolate_jumps(const Mesh& mesh, const DofMap& dofs, const SpaceFn& f);

/// All matrices used by the time stepper and the analysis routines.
struct Operators {
  SparseMatrix stiff_i;     // sigma_i on B space
  SparseMatrix stiff_e;     // sigma_e on B space
  SparseMatrix stiff_d;     // sigma_d on D space
  SparseMatrix lap_b;       // unit coefficient, B space
  SparseMatrix lap_d;       // unit coefficient, D space
  SparseMatrix mass_b;      // consistent, B space
  SparseMatrix mass_d;      // consistent, D space
  Vector lumped_b;          // row sums of mass_b
  SparseMatrix gamma_mass;  // jump pairs
  SparseMatrix jump_mass;   // G on the U block
};

Operators assemble_operators(const Mesh& mesh, const DofMap& dofs, const Conductivities& sigma);

}  // namespace bidomain
