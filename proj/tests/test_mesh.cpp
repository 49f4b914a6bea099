#include <doctest.h>

#include "pico/mesh/shapes.hpp"
#include "pico/mesh/surface_mesh.hpp"

#include <map>
#include <random>

using namespace pico;

namespace {

// Brute-force edge census straight from the face list.
std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge_census(const SurfaceMesh& m) {
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> census;
  for (const Face& f : m.faces())
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      census[std::minmax(a, b)].emplace_back(a, b);
    }
  return census;
}

}  // namespace

TEST_CASE("two triangles form a unit square with one interior edge") {
  const SurfaceMesh m = shapes::unit_square();
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_faces() == 2);
  int interior = 0;
  for (int e = 0; e < m.num_edges(); ++e) interior += m.edge_faces(e).second >= 0;
  CHECK(interior == 1);
  CHECK_FALSE(m.is_closed());
}

TEST_CASE("opposite windings of the same triangle are rejected") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  try {
    build_mesh(v, {{0, 1, 2}, {0, 2, 1}});
    FAIL("expected NonManifold");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonManifold);
  }
}

TEST_CASE("build_mesh error paths") {
  SUBCASE("inconsistent winding across an edge") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    CHECK_THROWS_AS(build_mesh(v, {{0, 1, 2}, {0, 3, 2}}), Error);
  }
  SUBCASE("edge with three faces") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
    try {
      build_mesh(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}});
      FAIL("expected NonManifold");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonManifold);
    }
  }
  SUBCASE("degenerate face") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    try {
      build_mesh(v, {{0, 1, 2}});
      FAIL("expected DegenerateFace");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateFace);
    }
  }
  SUBCASE("pinched vertex") {
    // Two triangles touching at a single vertex.
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
    try {
      build_mesh(v, {{0, 1, 2}, {0, 3, 4}});
      FAIL("expected NonManifold");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonManifold);
    }
  }
  SUBCASE("index out of range") { CHECK_THROWS_AS(build_mesh({{0, 0, 0}}, {{0, 1, 2}}), Error); }
}

TEST_CASE("icosphere with 320 faces passes a brute-force edge census") {
  const SurfaceMesh m = shapes::icosphere(2, 1.0);
  REQUIRE(m.num_faces() == 320);
  const auto census = edge_census(m);
  CHECK(static_cast<int>(census.size()) == m.num_edges());
  for (const auto& [edge, uses] : census) {
    REQUIRE(uses.size() == 2);
    // Consistent winding: the two faces traverse the edge in opposite directions.
    CHECK(uses[0].first == uses[1].second);
    CHECK(uses[0].second == uses[1].first);
  }
  CHECK(m.is_closed());
  CHECK(m.num_components() == 1);
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(m.fan(v).closed);
}

TEST_CASE("manifold census holds for generated shapes") {
  for (const SurfaceMesh& m : {shapes::plane_grid(6, 1.0), shapes::box(Vec3::Zero(), Vec3(1, 2, 3), 3),
                               shapes::icosphere(3, 0.5)}) {
    for (const auto& [edge, uses] : edge_census(m)) {
      CHECK((uses.size() == 1 || uses.size() == 2));
      if (uses.size() == 2) CHECK(uses[0].first == uses[1].second);
    }
  }
  CHECK(shapes::box(Vec3::Zero(), Vec3::Ones(), 2).is_closed());
}

TEST_CASE("closest point on a vertex and above the square") {
  const SurfaceMesh m = shapes::unit_square();
  const ClosestPoint onv = m.closest_point(Vec3(1, 0, 0));
  CHECK(onv.distance == doctest::Approx(0.0));
  CHECK((onv.position - Vec3(1, 0, 0)).norm() < 1e-12);

  const ClosestPoint above = m.closest_point(Vec3(0.5, 0.5, 1.0));
  CHECK(above.distance == doctest::Approx(1.0));
  CHECK((above.position - Vec3(0.5, 0.5, 0.0)).norm() < 1e-12);
  CHECK(above.point.valid_weights());
}

TEST_CASE("BVH closest point equals exhaustive search") {
  const SurfaceMesh m = shapes::icosphere(2, 1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 q(u(rng), u(rng), u(rng));
    const ClosestPoint fast = m.closest_point(q);
    const ClosestPoint slow = m.closest_point_exhaustive(q);
    CHECK(fast.point.face == slow.point.face);
    CHECK((fast.point.bary - slow.point.bary).norm() <= 1e-9);
    CHECK(fast.distance == slow.distance);
  }
  // The batched kernel agrees with the single query.
  std::vector<Vec3> qs;
  for (int i = 0; i < 50; ++i) qs.emplace_back(u(rng), u(rng), u(rng));
  const auto batch = closest_points(m, qs);
  const auto serial = reference::closest_points(m, qs);
  for (size_t i = 0; i < qs.size(); ++i) {
    CHECK(batch[i].point.face == m.closest_point(qs[i]).point.face);
    CHECK(batch[i].point.face == serial[i].point.face);
    CHECK(batch[i].distance == serial[i].distance);
  }
}

TEST_CASE("vertex fans are ordered counterclockwise and sum to the angle defect") {
  const SurfaceMesh plane = shapes::plane_grid(4, 1.0);
  // An interior vertex of a flat grid has total angle 2*pi.
  const int center = 2 * 5 + 2;
  CHECK(plane.fan(center).closed);
  CHECK(plane.fan(center).total_angle == doctest::Approx(2 * kPi));
  CHECK_FALSE(plane.fan(0).closed);
  CHECK(plane.fan(0).total_angle == doctest::Approx(kPi / 2));

  const SurfaceMesh cube = shapes::box(Vec3::Zero(), Vec3::Ones(), 1);
  double defect = 0.0;
  for (int v = 0; v < cube.num_vertices(); ++v) defect += 2 * kPi - cube.fan(v).total_angle;
  CHECK(defect == doctest::Approx(4 * kPi));  // Gauss-Bonnet, genus 0
}

TEST_CASE("ray hits count parity for a closed box") {
  const SurfaceMesh cube = shapes::box(Vec3::Zero(), Vec3::Ones(), 2);
  const Vec3 dir = Vec3(0.31, 0.27, 0.91).normalized();
  bool grazing = false;
  CHECK(cube.ray_hits(Vec3(0.05, 0.02, -0.01), dir, -1, &grazing).size() % 2 == 1);
  CHECK(cube.ray_hits(Vec3(2.0, 0.0, 0.0), dir, -1, &grazing).size() % 2 == 0);
}
