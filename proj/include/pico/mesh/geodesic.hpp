#pragma once

#include "pico/mesh/surface_mesh.hpp"

namespace pico {

/// A unit direction lying in the plane of `base.face`.
struct TangentDirection {
  SurfacePoint base;
  Vec3 direction;
};

/// Polyline on a surface. Interior waypoints lie on triangle edges (or on
/// vertices); segment i runs from waypoint i to waypoint i+1 inside
/// `segment_faces[i]`.
struct GeodesicPath {
  std::vector<SurfacePoint> waypoints;
  std::vector<int> segment_faces;
  double length = 0.0;
  /// Unit direction of the first nonzero segment, in the plane of the first
  /// waypoint's face (which may differ from the query face when the start
  /// lies on an edge or vertex). Zero for a zero-length path.
  Vec3 initial_direction = Vec3::Zero();

  std::vector<Vec3> positions(const SurfaceMesh& mesh) const;
  /// Cumulative arclength at each waypoint (starts at 0, ends at `length`).
  std::vector<double> arclengths(const SurfaceMesh& mesh) const;
};

struct LogCoordinates {
  double distance = 0.0;
  /// Radians counterclockwise about the base face normal, in (-pi, pi]. At a
  /// vertex base this is a fan angle in (-T/2, T/2] for total vertex angle T.
  double angle = 0.0;
};

/// Rotates `dir` counterclockwise by `angle` about the unit normal `n`.
Vec3 rotate_about(const Vec3& dir, const Vec3& n, double angle);
/// Signed angle from `a` to `b` counterclockwise about `n`, in (-pi, pi].
double signed_angle(const Vec3& n, const Vec3& a, const Vec3& b);

/// Barycentric weights of `pos` (assumed on or near face `f`) in face `f`,
/// clamped to the triangle.
Vec3 barycentric_in_face(const SurfaceMesh& mesh, int f, const Vec3& pos);
/// The same point re-expressed in another face that contains it.
SurfacePoint express_in_face(const SurfaceMesh& mesh, const SurfacePoint& p, int f);
/// Faces whose closure contains `p` (1 for interior points, 2 on edges, the
/// vertex fan at vertices).
std::vector<int> faces_containing(const SurfaceMesh& mesh, const SurfacePoint& p,
                                  double tol = 1e-9);
/// Vertex index if `p` sits on a vertex within `tol`, else -1.
int vertex_at(const SurfaceMesh& mesh, const SurfacePoint& p, double tol = 1e-9);

/// Walks a straightest geodesic of the given length from `start`. Edge
/// crossings unfold the next face about the shared edge; vertex hits continue
/// on the direction splitting the total vertex angle in half. Throws
/// TracingStuck on boundaries.
GeodesicPath trace_straightest_geodesic(const SurfaceMesh& mesh, const TangentDirection& start,
                                        double length);

/// Shortest path from `a` to `b`: A* over the vertex + Steiner-point graph
/// (3 points per edge), then repeated funnel straightening in the unfolded
/// face strip with reroutes around vertices until locally shortest. The first
/// segment lies in a face containing `a`. Throws Disconnected.
GeodesicPath shortest_geodesic_path(const SurfaceMesh& mesh, const SurfacePoint& a,
                                    const SurfacePoint& b);

LogCoordinates log_map(const SurfaceMesh& mesh, const TangentDirection& base,
                       const SurfacePoint& target);

SurfacePoint exp_map(const SurfaceMesh& mesh, const TangentDirection& base, double distance,
                     double angle);

/// Approximate geodesic Voronoi labelling: for every mesh vertex, the index
/// of the nearest source and its distance along the vertex + Steiner graph.
/// Vertices on other components get source -1 and infinite distance.
struct NearestSource {
  int source = -1;
  double distance = 0.0;
};
std::vector<NearestSource> nearest_sources(const SurfaceMesh& mesh,
                                           std::span<const SurfacePoint> sources);

/// Point and unit tangent at arclength `s` along `path` (clamped to [0, L]).
TangentDirection point_at_arclength(const SurfaceMesh& mesh, const GeodesicPath& path,
                                    std::span<const double> arclengths, double s);

}  // namespace pico
