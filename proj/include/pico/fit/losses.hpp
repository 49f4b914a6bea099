#pragma once

#include "pico/body/sdf.hpp"
#include "pico/contact/transfer.hpp"

namespace pico {

using Vec7 = Eigen::Matrix<double, 7, 1>;

/// Object placement p -> scale * R(rotation) p + translation, applied to an
/// object mesh centered at its vertex centroid.
struct RigidPose {
  Vec3 rotation = Vec3::Zero();  // axis-angle
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Mat3 matrix() const;
  Vec3 apply(const Vec3& p) const;
  /// (rotation, translation, scale)
  Vec7 to_vector() const;
  static RigidPose from_vector(const Vec7& x);
};

/// Throws InvalidArgument for non-finite values or scale <= 0.
void validate(const RigidPose& pose);

/// Right Jacobian of the axis-angle exponential: R(r + d) ~ R(r) exp([J_r(r) d]x).
Mat3 right_jacobian(const Vec3& r);

/// Axis-angle vector of a rotation matrix.
Vec3 rotation_vector(const Mat3& r);

/// Mean of |s R p_i + t - v_i| over paired points. Gradient is with respect
/// to (rotation, translation, scale). Throws EmptyCorrespondences.
double contact_loss(std::span<const Vec3> body_points, std::span<const Vec3> object_points,
                    const RigidPose& pose, Vec7* grad = nullptr);

/// L_c over a correspondence set: body vertices against object surface points.
double loss_contact(const SurfaceMesh& body, const SurfaceMesh& object, const RigidPose& pose,
                    const CorrespondenceSet& s, Vec7* grad = nullptr);

/// L_p = sum over posed object vertices of -min(SDF, 0).
double loss_penetration(const SdfGrid& sdf, std::span<const Vec3> object_vertices, const RigidPose& pose,
                        Vec7* grad = nullptr);
double loss_penetration(const SdfGrid& sdf, const SurfaceMesh& object, const RigidPose& pose,
                        Vec7* grad = nullptr);

/// Vertex centroid, the point the object pose rotates and scales about.
Vec3 vertex_centroid(const SurfaceMesh& mesh);

}  // namespace pico
