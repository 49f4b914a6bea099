#include <doctest.h>

#include "pico/contact/transfer.hpp"
#include "pico/mesh/shapes.hpp"

#include "contact_oracles.hpp"
#include "geometry_oracles.hpp"

#include <random>
#include <set>

using namespace pico;
using namespace pico::testing;

namespace {

int nearest_vertex(const SurfaceMesh& m, const Vec3& p) {
  int best = 0;
  for (int v = 1; v < m.num_vertices(); ++v)
    if ((m.vertex(v) - p).squaredNorm() < (m.vertex(best) - p).squaredNorm()) best = v;
  return best;
}

std::vector<int> vertices_within(const SurfaceMesh& m, const Vec3& c, double r) {
  std::vector<int> out;
  for (int v = 0; v < m.num_vertices(); ++v)
    if ((m.vertex(v) - c).norm() <= r) out.push_back(v);
  return out;
}

std::vector<int> closest_n(const SurfaceMesh& m, const Vec3& c, size_t n) {
  std::vector<int> idx(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) idx[v] = v;
  std::partial_sort(idx.begin(), idx.begin() + n, idx.end(), [&](int a, int b) {
    return (m.vertex(a) - c).squaredNorm() < (m.vertex(b) - c).squaredNorm();
  });
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

ContactAxis straight_axis(const SurfaceMesh& m, const Vec3& a, const Vec3& b) {
  return make_axis(m, shortest_geodesic_path(m, m.closest_point(a).point, m.closest_point(b).point));
}

}  // namespace

TEST_CASE("extract_patches") {
  const SurfaceMesh sphere = shapes::icosphere(2, 1.0);
  CHECK(extract_patches(sphere, std::vector<int>{}).empty());

  const auto [a, b] = sphere.edge_vertices(0);
  const auto two = extract_patches(sphere, std::vector<int>{b, a});
  REQUIRE(two.size() == 1);
  CHECK(two[0].vertices.size() == 2);

  std::mt19937 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<int> all(sphere.num_vertices());
    for (int v = 0; v < sphere.num_vertices(); ++v) all[v] = v;
    std::shuffle(all.begin(), all.end(), rng);
    const std::set<int> subset(all.begin(), all.begin() + 50);
    const std::vector<int> input(subset.begin(), subset.end());
    const auto patches = extract_patches(sphere, input);
    const std::vector<Face> faces(sphere.faces().begin(), sphere.faces().end());
    const auto expect = induced_components(faces, sphere.num_vertices(), subset);
    REQUIRE(patches.size() == expect.size());
    for (size_t i = 0; i < patches.size(); ++i) {
      CHECK(patches[i].vertices == expect[i]);
      CHECK(patches[i].id == static_cast<int>(i));
    }
  }
}

TEST_CASE("synthesize_axis on planar patches") {
  const SurfaceMesh plane = shapes::plane_grid(20, 2.0);
  const double h = 0.1;

  SUBCASE("collinear strip") {
    std::vector<int> strip;
    for (int i = 0; i < 5; ++i) strip.push_back(nearest_vertex(plane, Vec3(-0.2 + i * h, 0.3, 0)));
    std::sort(strip.begin(), strip.end());
    const ContactAxis axis = synthesize_axis(plane, {strip, 0});
    CHECK(axis.length() == doctest::Approx(0.4).epsilon(1e-9));
    for (const Vec3& p : axis.path.positions(plane)) CHECK(std::abs(p.y() - 0.3) < 1e-9);
  }

  SUBCASE("disc") {
    const Vec3 c(0.013, 0.021, 0.0);
    const double r = 0.5;
    const auto members = vertices_within(plane, c, r);
    const ContactAxis axis = synthesize_axis(plane, {members, 0});
    CHECK(std::abs(axis.length() - 2 * r) < h);

    Vec3 mean = Vec3::Zero();
    for (int v : members) mean += plane.vertex(v);
    mean /= members.size();
    Mat3 cov = Mat3::Zero();
    for (int v : members) cov += (plane.vertex(v) - mean) * (plane.vertex(v) - mean).transpose();
    const Vec3 top = jacobi_top_eigenvector(cov);
    const auto pos = axis.path.positions(plane);
    const Vec3 dir = (pos.back() - pos.front()).normalized();
    CHECK(std::abs(dir.dot(top)) > 1 - 1e-9);
    // Smallest-index vertex projects nonpositively: the axis starts on its side.
    CHECK((plane.vertex(members.front()) - mean).dot(dir) <= 0.0);
  }

  SUBCASE("single vertex") {
    try {
      synthesize_axis(plane, {{7}, 0});
      FAIL("expected DegeneratePatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegeneratePatch);
    }
  }
}

TEST_CASE("synthesize_axis on a curved band") {
  const SurfaceMesh sphere = shapes::icosphere(3, 1.0);
  std::vector<int> band;
  for (int v = 0; v < sphere.num_vertices(); ++v) {
    const Vec3& p = sphere.vertex(v);
    if (std::abs(p.z()) < 0.12 && p.x() > 0.2) band.push_back(v);
  }
  const ContactAxis axis = synthesize_axis(sphere, {band, 0});
  CHECK(axis.length() > 1.0);
  for (size_t i = 1; i + 1 < axis.path.waypoints.size(); ++i)
    CHECK(axis.path.waypoints[i].bary.minCoeff() < 1e-9);
  CHECK(max_unfolded_bend(sphere, axis.path) < 1e-6);
  CHECK(consecutive_waypoints_share_face(sphere, axis.path));
  for (size_t i = 1; i < axis.arclengths.size(); ++i) CHECK(axis.arclengths[i] > axis.arclengths[i - 1]);
  const Vec3& n0 = sphere.normal(axis.path.waypoints.front().face);
  CHECK(std::abs(axis.start_tangent.dot(n0)) < 1e-7);
}

TEST_CASE("parameterize_patch on the plane") {
  const SurfaceMesh plane = shapes::plane_grid(10, 2.0);
  const ContactAxis axis = straight_axis(plane, Vec3(-0.4, 0, 0), Vec3(0.4, 0, 0));
  const int on_axis = nearest_vertex(plane, Vec3(0.2, 0, 0));
  const int above = nearest_vertex(plane, Vec3(0, 0.2, 0));
  const int below = nearest_vertex(plane, Vec3(0, -0.2, 0));
  const ParamPatch pp = parameterize_patch(plane, {{on_axis, above, below}, 3}, axis);
  REQUIRE(pp.records.size() == 3);
  CHECK(pp.patch_id == 3);
  CHECK(pp.axis_length == doctest::Approx(0.8));
  CHECK(pp.records[0].d == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pp.records[0].t == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(pp.records[1].t == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(pp.records[1].d == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(pp.records[1].alpha == doctest::Approx(kPi / 2).epsilon(1e-9));
  CHECK(pp.records[2].alpha == doctest::Approx(-kPi / 2).epsilon(1e-9));
}

TEST_CASE("a 300-vertex patch reconstructs itself through exp_map") {
  const SurfaceMesh sphere = shapes::icosphere(4, 1.0);
  const auto members = closest_n(sphere, Vec3(0.3, 0.5, 0.8).normalized(), 300);
  const ContactPatch patch{members, 0};
  const ContactAxis axis = synthesize_axis(sphere, patch);
  const ParamPatch pp = parameterize_patch(sphere, patch, axis);
  REQUIRE(pp.records.size() == 300);
  double worst = 0.0;
  for (const ParamRecord& r : pp.records) {
    CHECK(r.t >= 0.0);
    CHECK(r.t <= axis.length());
    CHECK(r.d >= 0.0);
    const TangentDirection base = point_at_arclength(sphere, axis.path, axis.arclengths, r.t);
    const Vec3 back = sphere.position(exp_map(sphere, base, r.d, r.alpha));
    worst = std::max(worst, (back - sphere.vertex(r.vertex)).norm());
  }
  CHECK(worst < 1e-4);

  SUBCASE("self-transfer identity, bijectivity, parallel matches serial") {
    const TransferResult tr = transfer_patch(sphere, pp, axis);
    CHECK(tr.failed == 0);
    REQUIRE(tr.correspondences.pairs.size() == 300);
    std::set<int> seen;
    for (size_t i = 0; i < tr.correspondences.pairs.size(); ++i) {
      const Correspondence& c = tr.correspondences.pairs[i];
      CHECK(c.body_vertex == pp.records[i].vertex);
      seen.insert(c.body_vertex);
      CHECK((sphere.position(c.object_point) - sphere.vertex(c.body_vertex)).norm() < 1e-4);
    }
    CHECK(seen.size() == 300);
    const TransferResult serial = reference::transfer_patch(sphere, pp, axis);
    for (size_t i = 0; i < serial.points.size(); ++i) {
      CHECK(serial.points[i].face == tr.points[i].face);
      CHECK(serial.points[i].bary == tr.points[i].bary);
    }
  }
}

TEST_CASE("axis and parameterization are invariant to rigid motion and deterministic") {
  const SurfaceMesh sphere = shapes::icosphere(3, 1.0);
  const Mat3 r = Eigen::AngleAxisd(-1.1, Vec3(0.2, 1, -0.4).normalized()).toRotationMatrix();
  const SurfaceMesh moved = transformed(sphere, r, Vec3(1, 2, 3));
  const ContactPatch patch{closest_n(sphere, Vec3(1, 0.2, 0.1).normalized(), 40), 0};
  const ContactAxis a0 = synthesize_axis(sphere, patch);
  const ContactAxis a1 = synthesize_axis(moved, patch);
  CHECK(std::abs(a0.length() - a1.length()) < 1e-9);
  const ParamPatch p0 = parameterize_patch(sphere, patch, a0);
  const ParamPatch p1 = parameterize_patch(moved, patch, a1);
  for (size_t i = 0; i < p0.records.size(); ++i) {
    CHECK(std::abs(p0.records[i].t - p1.records[i].t) < 1e-9);
    CHECK(std::abs(p0.records[i].d - p1.records[i].d) < 1e-9);
    CHECK(std::abs(p0.records[i].alpha - p1.records[i].alpha) < 1e-9);
  }
  const ParamPatch again = parameterize_patch(sphere, patch, a0);
  for (size_t i = 0; i < p0.records.size(); ++i) {
    CHECK(again.records[i].t == p0.records[i].t);
    CHECK(again.records[i].d == p0.records[i].d);
    CHECK(again.records[i].alpha == p0.records[i].alpha);
  }
}

TEST_CASE("unpack_axis") {
  SUBCASE("identity on the same mesh") {
    const SurfaceMesh sphere = shapes::icosphere(3, 1.0);
    const ContactAxis src = synthesize_axis(sphere, {closest_n(sphere, Vec3(0, 0.6, 0.8), 60), 0});
    const SurfacePoint start = src.path.waypoints.front();
    const ContactAxis out = unpack_axis(sphere, src, start, sphere.position(start) + 0.01 * src.start_tangent);
    const auto a = src.path.positions(sphere);
    const auto b = out.path.positions(sphere);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() < 1e-6);
  }
  SUBCASE("plane to plane is a straight segment") {
    const SurfaceMesh plane = shapes::plane_grid(10, 2.0);
    const ContactAxis src = straight_axis(plane, Vec3(-0.2, 0, 0), Vec3(0.2, 0, 0));
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-0.3, 0.3), ang(-kPi, kPi);
    for (int i = 0; i < 10; ++i) {
      const SurfacePoint s = plane.closest_point(Vec3(u(rng), u(rng), 0)).point;
      const double a = ang(rng);
      const ContactAxis out =
          unpack_axis(plane, src, s, plane.position(s) + Vec3(std::cos(a), std::sin(a), 0.3));
      CHECK(out.length() == doctest::Approx(0.4).epsilon(1e-9));
      const auto pos = out.path.positions(plane);
      const Vec3 dir = (pos.back() - pos.front()).normalized();
      for (const Vec3& p : pos) CHECK(point_to_line_distance(p, pos.front(), dir) < 1e-9);
    }
  }
  SUBCASE("plane axis onto the icosphere keeps its arclength") {
    const SurfaceMesh plane = shapes::plane_grid(10, 2.0);
    const SurfaceMesh sphere = shapes::icosphere(3, 1.0);
    REQUIRE(sphere.num_faces() == 1280);
    const ContactAxis src = straight_axis(plane, Vec3(-0.3, 0.1, 0), Vec3(0.4, -0.1, 0));
    const SurfacePoint s = sphere.closest_point(Vec3(0.1, 0.2, 1)).point;
    const ContactAxis out = unpack_axis(sphere, src, s, Vec3(1, 0.2, 1));
    CHECK(std::abs(out.length() - src.length()) < 1e-4);
  }
  SUBCASE("degenerate click") {
    const SurfaceMesh plane = shapes::plane_grid(4, 2.0);
    const ContactAxis src = straight_axis(plane, Vec3(-0.2, 0, 0), Vec3(0.2, 0, 0));
    const SurfacePoint s = plane.closest_point(Vec3(0.1, 0.1, 0)).point;
    CHECK_THROWS_AS(unpack_axis(plane, src, s, Vec3(0.1, 0.1, 0.5)), Error);
  }
}

TEST_CASE("transfer between planes related by a rigid motion is congruent") {
  const SurfaceMesh plane = shapes::plane_grid(16, 2.0);
  const ContactPatch patch{vertices_within(plane, Vec3(0.05, 0.02, 0), 0.3), 0};
  const ContactAxis axis = synthesize_axis(plane, patch);
  const ParamPatch pp = parameterize_patch(plane, patch, axis);

  const Mat3 r = Eigen::AngleAxisd(0.9, Vec3(1, -1, 0.5).normalized()).toRotationMatrix();
  const SurfaceMesh moved = transformed(plane, r, Vec3(0.5, 0.1, -2));
  const SurfacePoint start = moved.closest_point(r * Vec3(-0.1, 0.05, 0) + Vec3(0.5, 0.1, -2)).point;
  const ContactAxis target = unpack_axis(moved, axis, start, moved.position(start) + r * Vec3(0.3, 1, 0));
  const TransferResult tr = transfer_patch(moved, pp, target);
  REQUIRE(tr.failed == 0);
  double worst = 0.0;
  for (size_t i = 0; i < tr.points.size(); ++i)
    for (size_t j = i + 1; j < tr.points.size(); ++j) {
      const double src = (plane.vertex(pp.records[i].vertex) - plane.vertex(pp.records[j].vertex)).norm();
      const double dst = (moved.position(tr.points[i]) - moved.position(tr.points[j])).norm();
      worst = std::max(worst, std::abs(src - dst));
    }
  CHECK(worst < 1e-6);
}

TEST_CASE("plane to icosphere transfer is nearly isometric") {
  const double radius = 1.0;
  const SurfaceMesh plane = shapes::plane_grid(20, 2.0);
  const SurfaceMesh sphere = shapes::icosphere(4, radius);
  const ContactPatch patch{vertices_within(plane, Vec3(0.01, 0.02, 0), 0.2 * radius), 0};
  const ContactAxis axis = synthesize_axis(plane, patch);
  const ParamPatch pp = parameterize_patch(plane, patch, axis);
  for (const ParamRecord& rec : pp.records) REQUIRE(rec.d <= 0.2 * radius);

  const SurfacePoint start = sphere.closest_point(Vec3(0.2, -0.1, 1)).point;
  const ContactAxis target = unpack_axis(sphere, axis, start, Vec3(1, 0.5, 1));
  const TransferResult tr = transfer_patch(sphere, pp, target);
  REQUIRE(tr.failed == 0);

  std::mt19937 rng(8);
  std::uniform_int_distribution<size_t> pick(0, tr.points.size() - 1);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const size_t i = pick(rng), j = pick(rng);
    const double src = (plane.vertex(pp.records[i].vertex) - plane.vertex(pp.records[j].vertex)).norm();
    if (src < 0.1 * radius) continue;
    const double dst = shortest_geodesic_path(sphere, tr.points[i], tr.points[j]).length;
    worst = std::max(worst, std::abs(dst - src) / src);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("project_contacts") {
  const SurfaceMesh sphere = shapes::icosphere(2, 1.0);
  std::vector<int> contacts;
  for (int v = 0; v < sphere.num_vertices(); v += 7) contacts.push_back(v);
  CHECK(project_contacts(sphere, sphere, contacts) == contacts);

  const SurfaceMesh bigger = transformed(sphere, Mat3::Identity(), Vec3::Zero(), 1.001);
  CHECK(project_contacts(sphere, bigger, contacts) == contacts);

  const SurfaceMesh fine = shapes::icosphere(3, 1.0);
  std::set<int> expect;
  for (int v : contacts) expect.insert(nearest_vertex(fine, sphere.vertex(v)));
  CHECK(project_contacts(sphere, fine, contacts) == std::vector<int>(expect.begin(), expect.end()));
}
