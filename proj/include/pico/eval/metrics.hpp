#pragma once

#include "pico/mesh/surface_mesh.hpp"

#include <cstdint>
#include <optional>

namespace pico {

struct SimilarityTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  std::vector<Vec3> apply(std::span<const Vec3> points) const;
};

/// Exact nearest-neighbour index over a fixed point set (median-split k-d tree).
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec3> points);
  /// Index and distance of the nearest point; ties go to the lower index.
  std::pair<int, double> nearest(const Vec3& q) const;
  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int begin, end;     // range in order_
    int left = -1, right = -1;
    int axis = -1;      // -1 for leaves
    double split = 0.0;
  };
  int build(int begin, int end);
  void search(int node, const Vec3& q, int& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Least-squares similarity (Umeyama) with s R x_i + t ~ y_i. With
/// `with_scale` false the scale stays 1. Throws DegenerateConfiguration.
SimilarityTransform procrustes_align(std::span<const Vec3> source, std::span<const Vec3> target,
                                     bool with_scale = true);

/// Symmetric mean nearest-neighbour distance, in centimetres.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);

/// `count` area-uniform surface samples with a fixed seed.
std::vector<SurfacePoint> sample_surface(const SurfaceMesh& mesh, int count, std::uint64_t seed = 0);

struct PaChamfer {
  double human = 0.0;     // CD_h, cm
  double object = 0.0;    // CD_o, cm
  double combined = 0.0;  // CD_{h+o}, cm
  SimilarityTransform alignment;
};

/// Samples the ground-truth surfaces and the same face/barycentric positions
/// on the predictions (which must share the ground-truth topology), fits one
/// similarity on the concatenated samples, and reports per-entity Chamfer.
/// `human_mask`, when given, keeps only samples on faces whose three vertices
/// are all set. Throws DimensionMismatch for topology mismatch.
PaChamfer pa_cd(const SurfaceMesh& pred_human, const SurfaceMesh& pred_object, const SurfaceMesh& gt_human,
                const SurfaceMesh& gt_object, int samples = 8192, std::uint64_t seed = 0,
                const std::vector<bool>* human_mask = nullptr);

struct IcpResult {
  SimilarityTransform transform;
  std::vector<double> residuals;  // mean correspondence distance per iteration
};

/// Rigid ICP from the identity. Stops when the mean correspondence distance
/// improves by less than 1e-6 or after `max_iters` iterations.
IcpResult icp_align(std::span<const Vec3> source, std::span<const Vec3> target, int max_iters = 50);

struct ContactSets {
  std::vector<int> body;
  std::vector<int> object;
};

/// Vertices of each mesh within `threshold` of the other's surface.
ContactSets gt_contact_extract(const SurfaceMesh& human, const SurfaceMesh& object, double threshold = 0.05);

struct F1Score {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Set precision/recall/F1. Two empty sets score (1, 1, 1).
F1Score contact_f1(std::span<const int> pred, std::span<const int> gt);

namespace reference {
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);
ContactSets gt_contact_extract(const SurfaceMesh& human, const SurfaceMesh& object, double threshold = 0.05);
}  // namespace reference

}  // namespace pico
