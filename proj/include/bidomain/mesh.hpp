#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bidomain {

using Index = std::int32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Healthy tissue (bidomain) or damaged tissue (passive diffusion).
enum class Region : std::uint8_t { B, D };

enum class BoundaryMarker : std::uint8_t { DirichletB, DirichletD };

enum class GeometryCase : std::uint8_t { ConnectedConnected, ConnectedDisconnected };

std::string to_string(Region r);
std::string to_string(GeometryCase c);

/// Segment (dim 1, uses v[0], v[1]) or triangle (dim 2).
struct Cell {
  std::array<Index, 3> v{-1, -1, -1};
  Region region = Region::B;
};

/// A facet on Gamma. The normal points from the D cell into the B cell.
struct InterfaceFacet {
  std::array<Index, 2> v{-1, -1};  // dim 1 uses v[0] only
  Index b_cell = -1;
  Index d_cell = -1;
  Point normal;
};

struct BoundaryFacet {
  std::array<Index, 2> v{-1, -1};
  Index cell = -1;
  BoundaryMarker marker = BoundaryMarker::DirichletB;
};

/// Desk-scale simplicial mesh of Omega split into Omega^B and Omega^D.
///
/// Immutable after construction. The raw constructor does not check anything;
/// use validate_mesh() for diagnostics. Builders always produce valid meshes.
class Mesh {
 public:
  Mesh(int dim, std::vector<Point> vertices, std::vector<Cell> cells,
       std::vector<InterfaceFacet> interface, std::vector<BoundaryFacet> boundary,
       GeometryCase case_tag);

  /// Derives interface/boundary facets, normals and the geometry case from
  /// labelled cells.
  static Mesh from_cells(int dim, std::vector<Point> vertices, std::vector<Cell> cells);

  int dim() const { return dim_; }
  int vertices_per_cell() const { return dim_ + 1; }
  int vertices_per_facet() const { return dim_; }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<InterfaceFacet>& interface() const { return interface_; }
  const std::vector<BoundaryFacet>& boundary() const { return boundary_; }
  GeometryCase case_tag() const { return case_tag_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }

  double cell_measure(Index c) const;
  Point cell_centroid(Index c) const;
  double interface_facet_measure(std::size_t f) const;

  /// Total measure of the cells carrying the given label.
  double region_measure(Region r) const;
  /// Total measure of Gamma.
  double interface_measure() const;

 private:
  int dim_;
  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<InterfaceFacet> interface_;
  std::vector<BoundaryFacet> boundary_;
  GeometryCase case_tag_;
};

/// Cell-index rectangle [i0, i1) x [j0, j1) of a structured grid.
struct CellBox {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;
  bool operator==(const CellBox&) const = default;
};

/// Omega = (0,1), B = (0, split) with n_b segments, D = (split, 1) with n_d.
Mesh build_interval_mesh(int n_b, int n_d, double split);

/// Unit square, nx x ny squares cut into two triangles each; cells left of
/// `split` are B. `split * nx` must be an integer in (0, nx).
Mesh build_split_rectangle_mesh(int nx, int ny, double split);

/// Unit square n x n; cells inside any box are D. Boxes must stay clear of
/// the outer boundary and must not overlap.
Mesh build_inclusion_mesh(int n, const std::vector<CellBox>& boxes);

struct MeshReport {
  std::vector<std::string> violations;
  double min_cell_measure = 0.0;
  double max_cell_measure = 0.0;
  double measure_b = 0.0;
  double measure_d = 0.0;
  std::size_t interface_facets = 0;
  std::size_t dirichlet_b_facets = 0;
  std::size_t dirichlet_d_facets = 0;
  long euler_characteristic = 0;

  bool ok() const { return violations.empty(); }
};

/// Checks the mesh invariants. Never throws; problems go to `violations`.
MeshReport validate_mesh(const Mesh& mesh);

}  // namespace bidomain
