#include <cmath>

#include "bidomain/errors.hpp"
#include "bidomain/mesh.hpp"
#include "doctest.h"

using namespace bidomain;

namespace {

std::vector<Mesh> builder_sweep() {
  return {build_interval_mesh(2, 2, 0.5),   build_interval_mesh(3, 7, 0.3),
          build_split_rectangle_mesh(4, 4, 0.5), build_split_rectangle_mesh(10, 3, 0.3),
          build_inclusion_mesh(8, {{3, 5, 3, 5}}), build_inclusion_mesh(12, {{1, 3, 2, 5}, {6, 10, 6, 9}})};
}

bool has_violation(const MeshReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("interval mesh counts and labels") {
  const Mesh m = build_interval_mesh(2, 2, 0.5);
  CHECK(m.dim() == 1);
  CHECK(m.num_vertices() == 5);
  CHECK(m.num_cells() == 4);
  REQUIRE(m.interface().size() == 1);
  CHECK(m.vertices()[m.interface()[0].v[0]].x == doctest::Approx(0.5));

  const Mesh one = build_interval_mesh(1, 1, 0.25);
  REQUIRE(one.num_cells() == 2);
  for (Index c = 0; c < 2; ++c) {
    const auto& cell = one.cells()[c];
    const double a = one.vertices()[cell.v[0]].x, b = one.vertices()[cell.v[1]].x;
    if (cell.region == Region::B) {
      CHECK(std::min(a, b) == 0.0);
      CHECK(std::max(a, b) == doctest::Approx(0.25));
    } else {
      CHECK(std::min(a, b) == doctest::Approx(0.25));
      CHECK(std::max(a, b) == 1.0);
    }
  }
}

TEST_CASE("interval mesh cell lengths on an uneven split") {
  const Mesh m = build_interval_mesh(3, 2, 0.6);
  double total = 0.0;
  for (Index c = 0; c < Index(m.num_cells()); ++c) {
    CHECK(m.cell_measure(c) == doctest::Approx(0.2).epsilon(1e-14));
    total += m.cell_measure(c);
  }
  CHECK(std::abs(total - 1.0) <= 1e-15);
}

TEST_CASE("interval mesh rejects bad arguments") {
  CHECK_THROWS_AS(build_interval_mesh(0, 2, 0.5), ConfigError);
  CHECK_THROWS_AS(build_interval_mesh(2, 0, 0.5), ConfigError);
  CHECK_THROWS_AS(build_interval_mesh(2, 2, 0.0), ConfigError);
  CHECK_THROWS_AS(build_interval_mesh(2, 2, 1.0), ConfigError);
}

TEST_CASE("split rectangle counts and normals") {
  const Mesh m = build_split_rectangle_mesh(4, 4, 0.5);
  CHECK(m.num_cells() == 32);
  CHECK(m.num_vertices() == 25);
  CHECK(m.interface().size() == 4);
  for (const auto& f : m.interface()) {
    CHECK(f.normal.x == -1.0);
    CHECK(f.normal.y == 0.0);
  }
  const Mesh small = build_split_rectangle_mesh(2, 1, 0.5);
  CHECK(small.num_cells() == 4);
  CHECK(small.interface().size() == 1);
}

TEST_CASE("split rectangle rejects a split off the grid lines") {
  CHECK_THROWS_AS(build_split_rectangle_mesh(3, 2, 0.5), ConfigError);
  CHECK_THROWS_AS(build_split_rectangle_mesh(4, 0, 0.5), ConfigError);
}

TEST_CASE("inclusion mesh") {
  const Mesh m = build_inclusion_mesh(8, {{3, 5, 3, 5}});
  CHECK(m.interface().size() == 8);
  CHECK(m.region_measure(Region::D) == doctest::Approx(4.0 / 64.0).epsilon(1e-12));
  CHECK(m.case_tag() == GeometryCase::ConnectedDisconnected);

  const Mesh smallest = build_inclusion_mesh(4, {{1, 2, 1, 2}});
  CHECK(smallest.interface().size() == 4);

  CHECK_THROWS_AS(build_inclusion_mesh(8, {{0, 2, 3, 5}}), ConfigError);
  CHECK_THROWS_AS(build_inclusion_mesh(8, {{3, 8, 3, 5}}), ConfigError);
  CHECK_THROWS_AS(build_inclusion_mesh(8, {{2, 5, 2, 5}, {4, 6, 4, 6}}), ConfigError);
}

TEST_CASE("validate_mesh accepts builder output") {
  for (const Mesh& m : builder_sweep()) {
    const MeshReport r = validate_mesh(m);
    CHECK(r.ok());
    CHECK(r.euler_characteristic == 1);
    CHECK(r.interface_facets == m.interface().size());
    CHECK(r.min_cell_measure > 0.0);
  }
}

TEST_CASE("validate_mesh flags an interface facet between two B cells") {
  const Mesh m = build_split_rectangle_mesh(2, 1, 0.5);
  // cells 0 and 1 are the two halves of the first (B) grid square and share its diagonal
  REQUIRE(m.cells()[0].region == Region::B);
  REQUIRE(m.cells()[1].region == Region::B);
  auto iface = m.interface();
  iface[0].v = {m.cells()[0].v[0], m.cells()[0].v[2]};
  iface[0].b_cell = 0;
  iface[0].d_cell = 1;
  const Mesh bad(m.dim(), m.vertices(), m.cells(), iface, m.boundary(), m.case_tag());
  const MeshReport r = validate_mesh(bad);
  CHECK_FALSE(r.ok());
  CHECK(has_violation(r, "not B|D"));
}

TEST_CASE("validate_mesh reports an empty DirichletD set on inclusion meshes") {
  const Mesh m = build_inclusion_mesh(8, {{3, 5, 3, 5}});
  const MeshReport r = validate_mesh(m);
  CHECK(r.ok());
  CHECK(r.dirichlet_d_facets == 0);
  CHECK(r.dirichlet_b_facets == 32);
}

TEST_CASE("validate_mesh catches a flipped normal and a wrong case tag") {
  const Mesh m = build_split_rectangle_mesh(4, 2, 0.5);
  auto iface = m.interface();
  iface[1].normal = {1.0, 0.0};
  CHECK(has_violation(validate_mesh(Mesh(2, m.vertices(), m.cells(), iface, m.boundary(), m.case_tag())),
                      "does not point from D into B"));
  CHECK_FALSE(validate_mesh(Mesh(2, m.vertices(), m.cells(), m.interface(), m.boundary(),
                                 GeometryCase::ConnectedDisconnected))
                  .ok());
}

TEST_CASE("normals point from D into B on every builder") {
  for (const Mesh& m : builder_sweep()) {
    for (const auto& f : m.interface()) {
      const Point cb = m.cell_centroid(f.b_cell), cd = m.cell_centroid(f.d_cell);
      CHECK(m.cells()[f.b_cell].region == Region::B);
      CHECK(m.cells()[f.d_cell].region == Region::D);
      CHECK(f.normal.x * (cb.x - cd.x) + f.normal.y * (cb.y - cd.y) > 0.0);
    }
  }
}

TEST_CASE("region measures match the analytic geometry") {
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const Mesh iv = build_interval_mesh(3, 7, 0.3);
  CHECK(rel(iv.region_measure(Region::B), 0.3) <= 1e-12);
  CHECK(rel(iv.region_measure(Region::D), 0.7) <= 1e-12);
  const Mesh sr = build_split_rectangle_mesh(10, 3, 0.3);
  CHECK(rel(sr.region_measure(Region::B), 0.3) <= 1e-12);
  CHECK(rel(sr.region_measure(Region::D), 0.7) <= 1e-12);
  CHECK(rel(sr.interface_measure(), 1.0) <= 1e-12);
  const Mesh inc = build_inclusion_mesh(12, {{1, 3, 2, 5}, {6, 10, 6, 9}});
  const double d = (2.0 * 3.0 + 4.0 * 3.0) / 144.0;
  CHECK(rel(inc.region_measure(Region::D), d) <= 1e-12);
  CHECK(rel(inc.region_measure(Region::B), 1.0 - d) <= 1e-12);
  CHECK(rel(inc.interface_measure(), (10.0 + 14.0) / 12.0) <= 1e-12);
}

TEST_CASE("geometry case matches the DirichletD set") {
  for (const Mesh& m : builder_sweep()) {
    bool any_d = false;
    for (const auto& f : m.boundary()) any_d |= f.marker == BoundaryMarker::DirichletD;
    CHECK((m.case_tag() == GeometryCase::ConnectedDisconnected) == !any_d);
  }
}

TEST_CASE("from_cells derives the same facets as the builder") {
  const Mesh m = build_inclusion_mesh(6, {{2, 4, 2, 4}});
  const Mesh again = Mesh::from_cells(2, m.vertices(), m.cells());
  CHECK(again.interface().size() == m.interface().size());
  CHECK(again.boundary().size() == m.boundary().size());
  CHECK(again.case_tag() == m.case_tag());
  CHECK(validate_mesh(again).ok());
}
