#pragma once

#include "pico/common.hpp"

#include <limits>
#include <optional>
#include <span>
#include <utility>

namespace pico {

/// A point on a mesh given as a face and barycentric weights over its corners.
struct SurfacePoint {
  int face = -1;
  Vec3 bary = Vec3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);

  bool valid_weights(double tol = 1e-9) const {
    return bary.minCoeff() >= -tol && std::abs(bary.sum() - 1.0) <= tol;
  }
};

/// Face and local corner of one wedge in a vertex fan.
struct FanEntry {
  int face;
  int corner;
  double angle;  // interior angle of the face at the vertex
};

/// Faces around a vertex ordered counterclockwise about the surface normal.
/// For boundary vertices `closed` is false and the fan runs from one boundary
/// edge to the other.
struct VertexFan {
  std::vector<FanEntry> wedges;
  bool closed = true;
  double total_angle = 0.0;
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
    return d.squaredNorm();
  }
};

struct ClosestPoint {
  SurfacePoint point;
  Vec3 position;
  double distance = 0.0;
};

/// Closest point on triangle (a, b, c) to p; returns barycentric weights.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Manifold triangle mesh. Immutable after construction; all queries are const
/// and safe to run concurrently.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;

  std::span<const Vec3> vertices() const { return vertices_; }
  std::span<const Face> faces() const { return faces_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return static_cast<int>(edge_verts_.size()); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Face& face(int f) const { return faces_[f]; }
  const Vec3& normal(int f) const { return normals_[f]; }
  double area(int f) const { return areas_[f]; }
  Vec3 corner(int f, int k) const { return vertices_[faces_[f][k]]; }

  /// Face across the edge opposite corner `k` of face `f`, or -1 on a boundary.
  int neighbor(int f, int k) const { return neighbors_[3 * f + k]; }
  /// Undirected edge id of the edge opposite corner `k` of face `f`.
  int edge_id(int f, int k) const { return face_edges_[3 * f + k]; }
  std::pair<int, int> edge_vertices(int e) const { return edge_verts_[e]; }
  /// Faces incident to edge `e` (second entry -1 for boundary edges).
  std::pair<int, int> edge_faces(int e) const { return edge_faces_[e]; }

  const VertexFan& fan(int v) const { return fans_[v]; }
  int component(int f) const { return face_component_[f]; }
  int num_components() const { return num_components_; }

  bool is_closed() const { return boundary_edges_ == 0; }
  double mean_edge_length() const { return mean_edge_length_; }
  const Aabb& bounds() const { return bounds_; }

  Vec3 position(const SurfacePoint& p) const;
  /// Local corner index of vertex `v` in face `f`, or -1.
  int corner_of(int f, int v) const;
  /// Surface point sitting exactly on vertex `v`.
  SurfacePoint vertex_point(int v) const;

  /// Closest surface point via the BVH. Ties resolve to the lowest face index.
  ClosestPoint closest_point(const Vec3& query) const;
  /// Exhaustive per-face search with the same tie rule as `closest_point`.
  ClosestPoint closest_point_exhaustive(const Vec3& query) const;

  /// Parameters `s` of every ray-triangle hit along origin + s*dir, s > 0,
  /// restricted to faces of `component` when it is non-negative. Sets
  /// `grazing` if any hit lands within 1e-9 barycentric of an edge.
  std::vector<double> ray_hits(const Vec3& origin, const Vec3& dir, int component,
                               bool* grazing) const;

  friend SurfaceMesh build_mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

 private:
  struct BvhNode {
    Aabb box;
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
  };

  void build_topology();
  void build_fans();
  void build_bvh();
  int build_bvh_node(int first, int count, std::vector<Vec3>& centroids);

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  std::vector<int> neighbors_;
  std::vector<int> face_edges_;
  std::vector<std::pair<int, int>> edge_verts_;
  std::vector<std::pair<int, int>> edge_faces_;
  std::vector<VertexFan> fans_;
  std::vector<int> face_component_;
  int num_components_ = 0;
  int boundary_edges_ = 0;
  double mean_edge_length_ = 0.0;
  Aabb bounds_;

  std::vector<BvhNode> nodes_;
  std::vector<int> bvh_faces_;
  std::vector<Aabb> face_boxes_;
};

/// Validates and builds a mesh. Throws NonManifold or DegenerateFace.
SurfaceMesh build_mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

/// Same mesh with every vertex mapped through x -> scale * R x + t.
SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation,
                        double scale = 1.0);

/// Closest points for many queries. OpenMP-parallel; output order matches input.
std::vector<ClosestPoint> closest_points(const SurfaceMesh& mesh, std::span<const Vec3> queries);

namespace reference {
/// Serial exhaustive scan per query.
std::vector<ClosestPoint> closest_points(const SurfaceMesh& mesh, std::span<const Vec3> queries);
}

}  // namespace pico
