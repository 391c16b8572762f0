#include "bidomain/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "bidomain/errors.hpp"

namespace bidomain {

std::string to_string(Region r) { return r == Region::B ? "B" : "D"; }

std::string to_string(GeometryCase c) {
  return c == GeometryCase::ConnectedConnected ? "connected/connected"
                                               : "connected/disconnected";
}

Mesh::Mesh(int dim, std::vector<Point> vertices, std::vector<Cell> cells,
           std::vector<InterfaceFacet> interface, std::vector<BoundaryFacet> boundary,
           GeometryCase case_tag)
    : dim_(dim),
      vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      interface_(std::move(interface)),
      boundary_(std::move(boundary)),
      case_tag_(case_tag) {
  if (dim_ != 1 && dim_ != 2) throw ConfigError("mesh: dim must be 1 or 2");
}

namespace {

using FacetKey = std::pair<Index, Index>;  // dim 1: (v, -1)

// Facets of a cell with sorted vertex indices.
std::vector<FacetKey> cell_facets(int dim, const Cell& c) {
  if (dim == 1) return {{c.v[0], -1}, {c.v[1], -1}};
  std::vector<FacetKey> out;
  for (int k = 0; k < 3; ++k) {
    Index a = c.v[k], b = c.v[(k + 1) % 3];
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  return out;
}

std::map<FacetKey, std::vector<Index>> facet_to_cells(const Mesh& m) {
  std::map<FacetKey, std::vector<Index>> out;
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    for (const auto& f : cell_facets(m.dim(), m.cells()[c])) out[f].push_back(Index(c));
  return out;
}

double signed_measure(int dim, const std::vector<Point>& v, const Cell& c) {
  const Point& a = v[c.v[0]];
  const Point& b = v[c.v[1]];
  if (dim == 1) return b.x - a.x;
  const Point& p = v[c.v[2]];
  return 0.5 * ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y));
}

Point facet_normal(int dim, const std::vector<Point>& v, const FacetKey& f) {
  if (dim == 1) return {1.0, 0.0};
  const Point& p = v[f.first];
  const Point& q = v[f.second];
  double tx = q.x - p.x, ty = q.y - p.y;
  double len = std::hypot(tx, ty);
  return {ty / len, -tx / len};
}

}  // namespace

Mesh Mesh::from_cells(int dim, std::vector<Point> vertices, std::vector<Cell> cells) {
  Mesh m(dim, std::move(vertices), std::move(cells), {}, {},
         GeometryCase::ConnectedConnected);
  bool any_dirichlet_d = false;
  for (const auto& [key, adj] : facet_to_cells(m)) {
    if (adj.size() == 1) {
      BoundaryFacet bf;
      bf.v = {key.first, key.second};
      bf.cell = adj[0];
      bf.marker = m.cells_[adj[0]].region == Region::B ? BoundaryMarker::DirichletB
                                                       : BoundaryMarker::DirichletD;
      any_dirichlet_d |= bf.marker == BoundaryMarker::DirichletD;
      m.boundary_.push_back(bf);
    } else if (adj.size() == 2 && m.cells_[adj[0]].region != m.cells_[adj[1]].region) {
      InterfaceFacet f;
      f.v = {key.first, key.second};
      f.b_cell = m.cells_[adj[0]].region == Region::B ? adj[0] : adj[1];
      f.d_cell = m.cells_[adj[0]].region == Region::B ? adj[1] : adj[0];
      Point n = facet_normal(dim, m.vertices_, key);
      Point cb = m.cell_centroid(f.b_cell), cd = m.cell_centroid(f.d_cell);
      if (n.x * (cb.x - cd.x) + n.y * (cb.y - cd.y) < 0.0) n = {-n.x, -n.y};
      f.normal = n;
      m.interface_.push_back(f);
    }
  }
  m.case_tag_ = any_dirichlet_d ? GeometryCase::ConnectedConnected
                                : GeometryCase::ConnectedDisconnected;
  return m;
}

double Mesh::cell_measure(Index c) const {
  return std::abs(signed_measure(dim_, vertices_, cells_[c]));
}

Point Mesh::cell_centroid(Index c) const {
  Point p;
  const int nv = vertices_per_cell();
  for (int k = 0; k < nv; ++k) {
    p.x += vertices_[cells_[c].v[k]].x;
    p.y += vertices_[cells_[c].v[k]].y;
  }
  return {p.x / nv, p.y / nv};
}

double Mesh::interface_facet_measure(std::size_t f) const {
  if (dim_ == 1) return 1.0;
  const Point& p = vertices_[interface_[f].v[0]];
  const Point& q = vertices_[interface_[f].v[1]];
  return std::hypot(q.x - p.x, q.y - p.y);
}

double Mesh::region_measure(Region r) const {
  double s = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (cells_[c].region == r) s += cell_measure(Index(c));
  return s;
}

double Mesh::interface_measure() const {
  double s = 0.0;
  for (std::size_t f = 0; f < interface_.size(); ++f) s += interface_facet_measure(f);
  return s;
}

Mesh build_interval_mesh(int n_b, int n_d, double split) {
  if (n_b < 1 || n_d < 1) throw ConfigError("interval mesh: n_b and n_d must be >= 1");
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("interval mesh: split must lie in (0,1)");
  std::vector<Point> vertices;
  vertices.reserve(n_b + n_d + 1);
  for (int i = 0; i <= n_b; ++i) vertices.push_back({split * i / n_b, 0.0});
  for (int i = 1; i <= n_d; ++i) vertices.push_back({split + (1.0 - split) * i / n_d, 0.0});
  vertices.back().x = 1.0;
  std::vector<Cell> cells;
  for (int i = 0; i < n_b + n_d; ++i)
    cells.push_back({{Index(i), Index(i + 1), -1}, i < n_b ? Region::B : Region::D});
  return Mesh::from_cells(1, std::move(vertices), std::move(cells));
}

namespace {

// Structured unit-square triangulation; label(i, j) picks the region of square (i, j).
template <typename Label>
Mesh structured_square(int nx, int ny, Label label) {
  std::vector<Point> vertices;
  vertices.reserve(std::size_t(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) vertices.push_back({double(i) / nx, double(j) / ny});
  auto vid = [nx](int i, int j) { return Index(j * (nx + 1) + i); };
  std::vector<Cell> cells;
  cells.reserve(std::size_t(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Region r = label(i, j);
      Index v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      cells.push_back({{v00, v10, v11}, r});
      cells.push_back({{v00, v11, v01}, r});
    }
  }
  return Mesh::from_cells(2, std::move(vertices), std::move(cells));
}

}  // namespace

Mesh build_split_rectangle_mesh(int nx, int ny, double split) {
  if (nx < 2 || ny < 1) throw ConfigError("split rectangle: need nx >= 2 and ny >= 1");
  const double cut = split * nx;
  const long icut = std::lround(cut);
  if (std::abs(cut - double(icut)) > 1e-9 || icut <= 0 || icut >= nx) {
    std::ostringstream msg;
    msg << "split rectangle: split=" << split << " is not aligned to an interior grid line of nx="
        << nx;
    throw ConfigError(msg.str());
  }
  return structured_square(nx, ny, [icut](int i, int) { return i < icut ? Region::B : Region::D; });
}

Mesh build_inclusion_mesh(int n, const std::vector<CellBox>& boxes) {
  if (n < 3) throw ConfigError("inclusion mesh: n must be >= 3");
  if (boxes.empty()) throw ConfigError("inclusion mesh: at least one box required");
  std::vector<char> in_box(std::size_t(n) * n, 0);
  for (const auto& b : boxes) {
    if (b.i0 >= b.i1 || b.j0 >= b.j1) throw ConfigError("inclusion mesh: empty box");
    if (b.i0 < 1 || b.j0 < 1 || b.i1 > n - 1 || b.j1 > n - 1)
      throw ConfigError("inclusion mesh: box touches the outer boundary (D must be compactly inside)");
    for (int j = b.j0; j < b.j1; ++j)
      for (int i = b.i0; i < b.i1; ++i) {
        char& slot = in_box[std::size_t(j) * n + i];
        if (slot) throw ConfigError("inclusion mesh: boxes overlap");
        slot = 1;
      }
  }
  return structured_square(n, n, [&](int i, int j) {
    return in_box[std::size_t(j) * n + i] ? Region::D : Region::B;
  });
}

MeshReport validate_mesh(const Mesh& mesh) {
  MeshReport rep;
  auto violation = [&rep](const std::string& s) { rep.violations.push_back(s); };
  const int dim = mesh.dim();
  const auto& verts = mesh.vertices();
  const auto& cells = mesh.cells();

  rep.min_cell_measure = cells.empty() ? 0.0 : 1e300;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    bool bad_index = false;
    for (int k = 0; k < mesh.vertices_per_cell(); ++k)
      bad_index |= cells[c].v[k] < 0 || std::size_t(cells[c].v[k]) >= verts.size();
    if (bad_index) {
      violation("cell " + std::to_string(c) + " references a missing vertex");
      continue;
    }
    double m = signed_measure(dim, verts, cells[c]);
    if (!(m > 0.0)) violation("cell " + std::to_string(c) + " has non-positive measure");
    rep.min_cell_measure = std::min(rep.min_cell_measure, m);
    rep.max_cell_measure = std::max(rep.max_cell_measure, m);
    (cells[c].region == Region::B ? rep.measure_b : rep.measure_d) += std::abs(m);
  }
  if (!rep.violations.empty()) return rep;

  // Tiling: total measure equals the bounding box measure and the facet graph is conforming.
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : verts) {
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  }
  double box = dim == 1 ? xmax - xmin : (xmax - xmin) * (ymax - ymin);
  if (std::abs(rep.measure_b + rep.measure_d - box) > 1e-12 * box)
    violation("cells do not tile the bounding box");

  const auto topo = facet_to_cells(mesh);
  std::size_t n_boundary = 0, n_mixed = 0;
  for (const auto& [key, adj] : topo) {
    if (adj.size() > 2) violation("facet shared by more than two cells");
    if (adj.size() == 1) ++n_boundary;
    if (adj.size() == 2 && cells[adj[0]].region != cells[adj[1]].region) ++n_mixed;
  }
  long n_facets = long(topo.size());
  rep.euler_characteristic = dim == 1 ? long(verts.size()) - long(cells.size())
                                      : long(verts.size()) - n_facets + long(cells.size());
  if (rep.euler_characteristic != 1)
    violation("Euler characteristic " + std::to_string(rep.euler_characteristic) + " != 1");

  auto facet_in_cell = [&](const std::array<Index, 2>& fv, Index c) {
    if (c < 0 || std::size_t(c) >= cells.size()) return false;
    for (int k = 0; k < mesh.vertices_per_facet(); ++k) {
      const auto& cv = cells[c].v;
      if (std::find(cv.begin(), cv.begin() + mesh.vertices_per_cell(), fv[k]) ==
          cv.begin() + mesh.vertices_per_cell())
        return false;
    }
    return true;
  };

  rep.interface_facets = mesh.interface().size();
  for (std::size_t f = 0; f < mesh.interface().size(); ++f) {
    const auto& F = mesh.interface()[f];
    const std::string tag = "interface facet " + std::to_string(f);
    if (!facet_in_cell(F.v, F.b_cell) || !facet_in_cell(F.v, F.d_cell)) {
      violation(tag + " is not shared by its listed cells");
      continue;
    }
    if (cells[F.b_cell].region != Region::B || cells[F.d_cell].region != Region::D) {
      violation(tag + " not B|D");
      continue;
    }
    if (std::abs(std::hypot(F.normal.x, F.normal.y) - 1.0) > 1e-12)
      violation(tag + " normal is not a unit vector");
    Point cb = mesh.cell_centroid(F.b_cell), cd = mesh.cell_centroid(F.d_cell);
    if (!(F.normal.x * (cb.x - cd.x) + F.normal.y * (cb.y - cd.y) > 0.0))
      violation(tag + " normal does not point from D into B");
  }
  if (n_mixed != mesh.interface().size())
    violation("interface list has " + std::to_string(mesh.interface().size()) +
              " facets but the labelling has " + std::to_string(n_mixed) + " B|D facets");

  for (std::size_t f = 0; f < mesh.boundary().size(); ++f) {
    const auto& F = mesh.boundary()[f];
    if (!facet_in_cell(F.v, F.cell)) {
      violation("boundary facet " + std::to_string(f) + " not attached to its cell");
      continue;
    }
    bool is_b = F.marker == BoundaryMarker::DirichletB;
    (is_b ? rep.dirichlet_b_facets : rep.dirichlet_d_facets)++;
    if ((cells[F.cell].region == Region::B) != is_b)
      violation("boundary facet " + std::to_string(f) + " marker disagrees with its cell label");
  }
  if (n_boundary != mesh.boundary().size()) violation("boundary facet list is incomplete");

  if (mesh.case_tag() == GeometryCase::ConnectedDisconnected) {
    if (rep.dirichlet_d_facets != 0)
      violation("connected/disconnected mesh has D facets on the outer boundary");
  } else {
    if (rep.dirichlet_d_facets == 0 || rep.dirichlet_b_facets == 0)
      violation("connected/connected mesh needs both DirichletB and DirichletD facets");
  }
  if (rep.dirichlet_b_facets == 0) violation("B has no Dirichlet boundary");
  return rep;
}

}  // namespace bidomain
