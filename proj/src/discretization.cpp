#include "bidomain/discretization.hpp"

#include <array>
#include <cmath>

#include "bidomain/errors.hpp"

namespace bidomain {

DofMap::DofMap(const Mesh& mesh) {
  const std::size_t nv = mesh.num_vertices();
  std::vector<char> dirichlet(nv, 0), in_b(nv, 0), in_d(nv, 0), on_gamma(nv, 0);
  // All of the outer boundary carries homogeneous Dirichlet data for V and U.
  for (const auto& f : mesh.boundary())
    for (int k = 0; k < mesh.vertices_per_facet(); ++k) dirichlet[f.v[k]] = 1;
  for (const auto& c : mesh.cells())
    for (int k = 0; k < mesh.vertices_per_cell(); ++k)
      (c.region == Region::B ? in_b : in_d)[c.v[k]] = 1;
  for (const auto& f : mesh.interface())
    for (int k = 0; k < mesh.vertices_per_facet(); ++k) on_gamma[f.v[k]] = 1;

  b_of_vertex_.assign(nv, -1);
  d_of_vertex_.assign(nv, -1);
  jump_of_vertex_.assign(nv, -1);
  for (std::size_t v = 0; v < nv; ++v) {
    if (dirichlet[v]) continue;
    if (in_b[v]) {
      b_of_vertex_[v] = Index(b_vertices_.size());
      b_vertices_.push_back(Index(v));
    }
    if (in_d[v]) {
      d_of_vertex_[v] = Index(d_vertices_.size());
      d_vertices_.push_back(Index(v));
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (!on_gamma[v] || b_of_vertex_[v] < 0 || d_of_vertex_[v] < 0) continue;
    jump_of_vertex_[v] = Index(jumps_.size());
    jumps_.push_back({Index(v), b_of_vertex_[v], d_of_vertex_[v]});
  }
}

Vector DofMap::jump(std::span<const double> u) const {
  if (u.size() != num_u()) throw DimensionError("jump: expected a U-block vector");
  Vector j(jumps_.size());
  for (std::size_t k = 0; k < jumps_.size(); ++k)
    j[k] = u[jumps_[k].b] - u[num_ub() + jumps_[k].d];
  return j;
}

namespace {

struct LocalP1 {
  int n = 0;
  double measure = 0.0;
  std::array<std::array<double, 2>, 3> grad{};
};

LocalP1 local_p1(const Mesh& mesh, Index c) {
  const auto& cell = mesh.cells()[c];
  const auto& v = mesh.vertices();
  LocalP1 e;
  e.n = mesh.vertices_per_cell();
  if (mesh.dim() == 1) {
    const double h = v[cell.v[1]].x - v[cell.v[0]].x;
    e.measure = std::abs(h);
    e.grad[0] = {-1.0 / h, 0.0};
    e.grad[1] = {1.0 / h, 0.0};
    return e;
  }
  const Point& p0 = v[cell.v[0]];
  const Point& p1 = v[cell.v[1]];
  const Point& p2 = v[cell.v[2]];
  const double two_a = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  e.measure = 0.5 * std::abs(two_a);
  const std::array<const Point*, 3> p{&p0, &p1, &p2};
  for (int k = 0; k < 3; ++k) {
    const Point& b = *p[(k + 1) % 3];
    const Point& c2 = *p[(k + 2) % 3];
    e.grad[k] = {(b.y - c2.y) / two_a, (c2.x - b.x) / two_a};
  }
  return e;
}

template <typename LocalEntry>
SparseMatrix assemble_region(const Mesh& mesh, std::span<const Index> map, std::size_t n,
                             Region region, LocalEntry entry) {
  TripletBuilder tb(n, n);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    if (cell.region != region) continue;
    const LocalP1 e = local_p1(mesh, Index(c));
    for (int i = 0; i < e.n; ++i) {
      const Index gi = map[cell.v[i]];
      if (gi < 0) continue;
      for (int j = 0; j < e.n; ++j) {
        const Index gj = map[cell.v[j]];
        if (gj < 0) continue;
        tb.add(gi, gj, entry(Index(c), e, i, j));
      }
    }
  }
  return tb.build(true);
}

void check_block(const ConductivityField& sigma, Region region, Block block) {
  const bool b_block = block != Block::UDUD;
  if (b_block != (region == Region::B))
    throw ConfigError("stiffness: block does not belong to the requested region");
  if (region_of(sigma.region()) != region)
    throw ConfigError("stiffness: conductivity field lives on a different region");
}

// Facet-local consistent mass on Gamma.
double facet_mass(const Mesh& mesh, std::size_t f, int a, int b) {
  if (mesh.dim() == 1) return 1.0;
  const double len = mesh.interface_facet_measure(f);
  return len / 6.0 * (a == b ? 2.0 : 1.0);
}

Vector interface_load_impl(const Mesh& mesh, const DofMap& dofs, InterfaceTarget target,
                           const std::function<double(Index vertex)>& g) {
  const std::size_t nub = dofs.num_ub();
  Vector out(target == InterfaceTarget::Jump ? dofs.num_u() : nub, 0.0);
  const int nf = mesh.vertices_per_facet();
  for (std::size_t f = 0; f < mesh.interface().size(); ++f) {
    const auto& F = mesh.interface()[f];
    for (int a = 0; a < nf; ++a) {
      double load = 0.0;
      for (int b = 0; b < nf; ++b) load += facet_mass(mesh, f, a, b) * g(F.v[b]);
      const Index v = F.v[a];
      if (target == InterfaceTarget::Jump) {
        const Index j = dofs.jump_index(v);
        if (j < 0) continue;
        const auto& pair = dofs.jump_pairs()[j];
        out[pair.b] += load;
        out[nub + pair.d] -= load;
      } else {
        const Index bi = dofs.b_index(v);
        if (bi >= 0) out[bi] += load;
      }
    }
  }
  return out;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const ConductivityField& sigma, Region region, Block block) {
  check_block(sigma, region, block);
  return assemble_region(mesh, dofs.region_map(region), dofs.region_size(region), region,
                         [&](Index c, const LocalP1& e, int i, int j) {
                           return sigma[c] * e.measure *
                                  (e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1]);
                         });
}

SparseMatrix assemble_laplacian(const Mesh& mesh, const DofMap& dofs, Region region) {
  return assemble_region(mesh, dofs.region_map(region), dofs.region_size(region), region,
                         [](Index, const LocalP1& e, int i, int j) {
                           return e.measure *
                                  (e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1]);
                         });
}

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, Region region, bool lumped) {
  const int dim = mesh.dim();
  if (lumped) {
    // row sums of the consistent matrix: |K| / (dim + 1) per vertex
    return assemble_region(mesh, dofs.region_map(region), dofs.region_size(region), region,
                           [dim](Index, const LocalP1& e, int i, int j) {
                             return i == j ? e.measure / (dim + 1) : 0.0;
                           });
  }
  return assemble_region(mesh, dofs.region_map(region), dofs.region_size(region), region,
                         [dim](Index, const LocalP1& e, int i, int j) {
                           if (dim == 1) return e.measure / 6.0 * (i == j ? 2.0 : 1.0);
                           return e.measure / 12.0 * (i == j ? 2.0 : 1.0);
                         });
}

SparseMatrix assemble_interface_mass(const Mesh& mesh, const DofMap& dofs) {
  TripletBuilder tb(dofs.num_jumps(), dofs.num_jumps());
  const int nf = mesh.vertices_per_facet();
  for (std::size_t f = 0; f < mesh.interface().size(); ++f) {
    const auto& F = mesh.interface()[f];
    for (int a = 0; a < nf; ++a) {
      const Index ja = dofs.jump_index(F.v[a]);
      if (ja < 0) continue;
      for (int b = 0; b < nf; ++b) {
        const Index jb = dofs.jump_index(F.v[b]);
        if (jb >= 0) tb.add(ja, jb, facet_mass(mesh, f, a, b));
      }
    }
  }
  return tb.build(true);
}

SparseMatrix assemble_interface_jump_mass(const Mesh& mesh, const DofMap& dofs) {
  const SparseMatrix m = assemble_interface_mass(mesh, dofs);
  const Index nub = Index(dofs.num_ub());
  TripletBuilder tb(dofs.num_u(), dofs.num_u());
  const auto rp = m.row_offsets();
  const auto ci = m.col_indices();
  const auto val = m.values();
  const auto pairs = dofs.jump_pairs();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto& pr = pairs[r];
    for (Index k = rp[r]; k < rp[r + 1]; ++k) {
      const auto& pc = pairs[ci[k]];
      tb.add(pr.b, pc.b, val[k]);
      tb.add(pr.b, nub + pc.d, -val[k]);
      tb.add(nub + pr.d, pc.b, -val[k]);
      tb.add(nub + pr.d, nub + pc.d, val[k]);
    }
  }
  return tb.build(true);
}

Vector assemble_volume_load(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFn& f,
                            Region region, double t) {
  const auto map = dofs.region_map(region);
  Vector out(dofs.region_size(region), 0.0);
  if (!f) return out;
  const int nv = mesh.vertices_per_cell();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    if (cell.region != region) continue;
    const double w = mesh.cell_measure(Index(c)) / nv;
    for (int k = 0; k < nv; ++k) {
      const Index i = map[cell.v[k]];
      if (i >= 0) out[i] += w * f(mesh.vertices()[cell.v[k]], t);
    }
  }
  return out;
}

Vector assemble_interface_load(const Mesh& mesh, const DofMap& dofs, const SpaceTimeFn& g,
                               InterfaceTarget target, double t) {
  if (!g)
    return Vector(target == InterfaceTarget::Jump ? dofs.num_u() : dofs.num_ub(), 0.0);
  return interface_load_impl(mesh, dofs, target,
                             [&](Index v) { return g(mesh.vertices()[v], t); });
}

Vector assemble_interface_load(const Mesh& mesh, const DofMap& dofs,
                               std::span<const double> g_on_jumps, InterfaceTarget target) {
  if (g_on_jumps.size() != dofs.num_jumps())
    throw DimensionError("interface load: expected one value per jump pair");
  return interface_load_impl(mesh, dofs, target, [&](Index v) {
    const Index j = dofs.jump_index(v);
    return j < 0 ? 0.0 : g_on_jumps[j];
  });
}

Vector interpolate_region(const Mesh& mesh, const DofMap& dofs, Region region, const SpaceFn& f) {
  const auto verts = region == Region::B ? dofs.b_vertices() : dofs.d_vertices();
  Vector out(verts.size(), 0.0);
  if (!f) return out;
  for (std::size_t i = 0; i < verts.size(); ++i) out[i] = f(mesh.vertices()[verts[i]]);
  return out;
}

Vector interpolate_jumps(const Mesh& mesh, const DofMap& dofs, const SpaceFn& f) {
  Vector out(dofs.num_jumps(), 0.0);
  if (!f) return out;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = f(mesh.vertices()[dofs.jump_pairs()[k].vertex]);
  return out;
}

Operators assemble_operators(const Mesh& mesh, const DofMap& dofs, const Conductivities& sigma) {
  Operators op;
  op.stiff_i = assemble_stiffness(mesh, dofs, sigma.intra, Region::B, Block::VV);
  op.stiff_e = assemble_stiffness(mesh, dofs, sigma.extra, Region::B, Block::UBUB);
  op.stiff_d = assemble_stiffness(mesh, dofs, sigma.damaged, Region::D, Block::UDUD);
  op.lap_b = assemble_laplacian(mesh, dofs, Region::B);
  op.lap_d = assemble_laplacian(mesh, dofs, Region::D);
  op.mass_b = assemble_mass(mesh, dofs, Region::B, false);
  op.mass_d = assemble_mass(mesh, dofs, Region::D, false);
  op.lumped_b = assemble_mass(mesh, dofs, Region::B, true).diagonal();
  op.gamma_mass = assemble_interface_mass(mesh, dofs);
  op.jump_mass = assemble_interface_jump_mass(mesh, dofs);
  return op;
}

}  // namespace bidomain
