#pragma once

#include "pico/mesh/geodesic.hpp"

#include <string>

namespace pico {

struct ContactPatch {
  std::vector<int> vertices;  // sorted ascending
  int id = 0;
};

struct ContactAxis {
  GeodesicPath path;
  Vec3 start_tangent = Vec3::Zero();
  std::vector<double> arclengths;  // cumulative, one per waypoint

  double length() const { return arclengths.empty() ? 0.0 : arclengths.back(); }
};

struct ParamRecord {
  int vertex = -1;
  double t = 0.0;      // arclength of the closest axis point
  double d = 0.0;      // log-map distance from that point
  double alpha = 0.0;  // log-map angle against the axis tangent
};

struct ParamPatch {
  int patch_id = 0;
  double axis_length = 0.0;
  std::vector<ParamRecord> records;
};

struct Correspondence {
  int body_vertex = -1;
  SurfacePoint object_point;
  int patch_id = 0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
};

struct TransferResult {
  std::vector<SurfacePoint> points;  // in record order, failures removed
  CorrespondenceSet correspondences;
  int failed = 0;
};

/// Edge-connected components of the vertex set, ordered by smallest member.
std::vector<ContactPatch> extract_patches(const SurfaceMesh& mesh, std::span<const int> contact_vertices);

/// PCA axis spanning the patch; endpoints projected onto the surface and
/// joined by a shortest geodesic. Throws DegeneratePatch.
ContactAxis synthesize_axis(const SurfaceMesh& mesh, const ContactPatch& patch);

/// Axis from an explicit geodesic path.
ContactAxis make_axis(const SurfaceMesh& mesh, GeodesicPath path);

ParamPatch parameterize_patch(const SurfaceMesh& mesh, const ContactPatch& patch,
                              const ContactAxis& axis);

/// Two-click placement: traces the source axis length from `start` toward
/// `click_direction` on the target mesh.
ContactAxis unpack_axis(const SurfaceMesh& target, const ContactAxis& source, const SurfacePoint& start,
                        const Vec3& click_direction);

TransferResult transfer_patch(const SurfaceMesh& target, const ParamPatch& param, const ContactAxis& axis);

/// Nearest target vertex for each source contact vertex, deduplicated and sorted.
std::vector<int> project_contacts(const SurfaceMesh& source, const SurfaceMesh& target,
                                  std::span<const int> contact_vertices);

namespace reference {
TransferResult transfer_patch(const SurfaceMesh& target, const ParamPatch& param, const ContactAxis& axis);
}

}  // namespace pico
