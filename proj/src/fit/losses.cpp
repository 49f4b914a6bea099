#include "pico/fit/losses.hpp"

#include "pico/body/body_model.hpp"

#include <cmath>

namespace pico {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Accumulates the gradient of a scalar with spatial gradient g at the posed
// position of local point p.
void chain_rule(const Mat3& r, const Mat3& jr, double scale, const Vec3& p, const Vec3& g, Vec7& out) {
  out.segment<3>(0) += scale * jr.transpose() * p.cross(r.transpose() * g);
  out.segment<3>(3) += g;
  out[6] += g.dot(r * p);
}

}  // namespace

Mat3 RigidPose::matrix() const { return axis_angle_matrix(rotation); }

Vec3 RigidPose::apply(const Vec3& p) const { return scale * (matrix() * p) + translation; }

Vec7 RigidPose::to_vector() const {
  Vec7 x;
  x << rotation, translation, scale;
  return x;
}

RigidPose RigidPose::from_vector(const Vec7& x) { return {x.segment<3>(0), x.segment<3>(3), x[6]}; }

void validate(const RigidPose& pose) {
  require(pose.to_vector().allFinite(), ErrorKind::InvalidArgument, "non-finite object pose");
  require(pose.scale > 0.0, ErrorKind::InvalidArgument, "object scale must be positive");
}

Mat3 right_jacobian(const Vec3& r) {
  const double theta = r.norm();
  const Mat3 k = skew(r);
  if (theta < 1e-5) return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  const double t2 = theta * theta;
  return Mat3::Identity() - (1.0 - std::cos(theta)) / t2 * k + (theta - std::sin(theta)) / (t2 * theta) * k * k;
}

Vec3 rotation_vector(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

double contact_loss(std::span<const Vec3> body_points, std::span<const Vec3> object_points,
                    const RigidPose& pose, Vec7* grad) {
  require(!body_points.empty(), ErrorKind::EmptyCorrespondences, "contact loss needs correspondences");
  require(body_points.size() == object_points.size(), ErrorKind::DimensionMismatch,
          "body and object point counts differ");
  const Mat3 r = pose.matrix();
  Mat3 jr;
  if (grad != nullptr) {
    grad->setZero();
    jr = right_jacobian(pose.rotation);
  }
  double sum = 0.0;
  for (size_t i = 0; i < body_points.size(); ++i) {
    const Vec3 d = pose.scale * (r * object_points[i]) + pose.translation - body_points[i];
    const double n = d.norm();
    sum += n;
    if (grad != nullptr && n > 0.0) chain_rule(r, jr, pose.scale, object_points[i], d / n, *grad);
  }
  const double inv = 1.0 / static_cast<double>(body_points.size());
  if (grad != nullptr) *grad *= inv;
  return sum * inv;
}

double loss_contact(const SurfaceMesh& body, const SurfaceMesh& object, const RigidPose& pose,
                    const CorrespondenceSet& s, Vec7* grad) {
  require(!s.pairs.empty(), ErrorKind::EmptyCorrespondences, "contact loss needs correspondences");
  std::vector<Vec3> v, p;
  v.reserve(s.pairs.size());
  p.reserve(s.pairs.size());
  for (const Correspondence& c : s.pairs) {
    require(c.body_vertex >= 0 && c.body_vertex < body.num_vertices(), ErrorKind::InvalidArgument,
            "correspondence body vertex out of range");
    require(c.object_point.face >= 0 && c.object_point.face < object.num_faces(), ErrorKind::InvalidArgument,
            "correspondence object face out of range");
    v.push_back(body.vertex(c.body_vertex));
    p.push_back(object.position(c.object_point));
  }
  return contact_loss(v, p, pose, grad);
}

double loss_penetration(const SdfGrid& sdf, std::span<const Vec3> object_vertices, const RigidPose& pose,
                        Vec7* grad) {
  const Mat3 r = pose.matrix();
  Mat3 jr;
  if (grad != nullptr) {
    grad->setZero();
    jr = right_jacobian(pose.rotation);
  }
  double sum = 0.0;
  Vec3 g;
  for (const Vec3& p : object_vertices) {
    const Vec3 q = pose.scale * (r * p) + pose.translation;
    const double d = query_sdf(sdf, q, grad != nullptr ? &g : nullptr);
    if (d >= 0.0) continue;
    sum -= d;
    if (grad != nullptr) chain_rule(r, jr, pose.scale, p, -g, *grad);
  }
  return sum;
}

double loss_penetration(const SdfGrid& sdf, const SurfaceMesh& object, const RigidPose& pose, Vec7* grad) {
  return loss_penetration(sdf, object.vertices(), pose, grad);
}

Vec3 vertex_centroid(const SurfaceMesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : mesh.vertices()) c += v;
  return mesh.num_vertices() > 0 ? Vec3(c / mesh.num_vertices()) : c;
}

}  // namespace pico
