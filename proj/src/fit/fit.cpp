#include "pico/fit/fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace pico {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MinimizeOptions options_of(const FitConfig& c) {
  return {c.iterations, c.patience, c.tolerance, c.plateau, c.max_halvings};
}

std::vector<Vec3> posed_points(std::span<const Vec3> local, const RigidPose& pose) {
  const Mat3 r = pose.matrix();
  std::vector<Vec3> out(local.size());
  for (size_t i = 0; i < local.size(); ++i) out[i] = pose.scale * (r * local[i]) + pose.translation;
  return out;
}

std::vector<Vec3> object_points(const SurfaceMesh& object, const CorrespondenceSet& s) {
  std::vector<Vec3> p;
  p.reserve(s.pairs.size());
  for (const Correspondence& c : s.pairs) {
    require(c.object_point.face >= 0 && c.object_point.face < object.num_faces(), ErrorKind::InvalidArgument,
            "correspondence object face out of range");
    p.push_back(object.position(c.object_point));
  }
  return p;
}

std::vector<Vec3> gather(std::span<const Vec3> vertices, const CorrespondenceSet& s) {
  std::vector<Vec3> v;
  v.reserve(s.pairs.size());
  for (const Correspondence& c : s.pairs) {
    require(c.body_vertex >= 0 && c.body_vertex < static_cast<int>(vertices.size()), ErrorKind::InvalidArgument,
            "correspondence body vertex out of range");
    v.push_back(vertices[c.body_vertex]);
  }
  return v;
}

// Penetration never grows past its value at the start of the stage.
constexpr double kPenetrationSlack = 1e-12;

// Body SDF frozen at one pose. Between rebuilds each query point rides with
// the joint dominating its closest body point, so penetration still responds
// to the limb moving.
struct PosedSdf {
  SdfGrid grid;
  std::vector<Mat4> joints;  // transforms at build time
  std::vector<int> bone;     // per query point
};

PosedSdf build_posed_sdf(const BodyModel& body, const PoseVector& theta, std::span<const Vec3> points,
                         const FitConfig& c) {
  PosedSdf s;
  const SurfaceMesh posed = pose_body(body, theta);
  s.grid = build_sdf(posed, c.sdf_voxel, c.sdf_padding);
  s.joints = joint_transforms(body, theta);
  s.bone.resize(points.size());
  const std::vector<ClosestPoint> cps = closest_points(posed, points);
  for (size_t i = 0; i < points.size(); ++i) {
    const SurfacePoint& sp = cps[i].point;
    int k;
    sp.bary.maxCoeff(&k);
    const auto& w = body.weights[posed.face(sp.face)[k]];
    s.bone[i] = std::max_element(w.begin(), w.end(), [](const SkinWeight& a, const SkinWeight& b) {
                  return a.weight < b.weight;
                })->joint;
  }
  return s;
}

double posed_penetration(const PosedSdf& s, const std::vector<Mat4>& current, std::span<const Vec3> points) {
  double sum = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    const Mat4& b = s.joints[s.bone[i]];
    const Mat4& c = current[s.bone[i]];
    const Vec3 local = c.topLeftCorner<3, 3>().transpose() * (points[i] - c.topRightCorner<3, 1>());
    const double d = query_sdf(s.grid, b.topLeftCorner<3, 3>() * local + b.topRightCorner<3, 1>());
    if (d < 0.0) sum -= d;
  }
  return sum;
}

}  // namespace

void validate(const FitConfig& c) {
  for (double w : {c.s2_contact, c.s2_penetration, c.s2_mask, c.s2_scale, c.s3_contact, c.s3_penetration,
                   c.s3_mask, c.s3_pose})
    require(w >= 0.0 && std::isfinite(w), ErrorKind::InvalidArgument, "loss weights must be >= 0");
  for (double lr : {c.lr_rotation, c.lr_translation, c.lr_scale, c.lr_joint})
    require(lr > 0.0 && lr < 1.0, ErrorKind::InvalidArgument, "learning rates must lie in (0, 1)");
  for (double h : {c.fd_rotation, c.fd_translation, c.fd_scale, c.fd_joint})
    require(h > 0.0, ErrorKind::InvalidArgument, "finite-difference steps must be positive");
  require(c.iterations >= 0 && c.patience >= 0 && c.tolerance >= 0.0 && c.plateau >= 0 && c.max_halvings >= 0, ErrorKind::InvalidArgument,
          "iteration settings must be non-negative");
  require(c.sdf_voxel > 0.0 && c.sdf_padding >= 0.0 && c.sdf_rebuild >= 1, ErrorKind::InvalidArgument,
          "invalid SDF settings");
  require(c.stages >= 1 && c.stages <= 3, ErrorKind::InvalidArgument, "stages must be 1, 2 or 3");
}

RigidPose stage1_register(const CorrespondenceSet& s, const SurfaceMesh& body, const SurfaceMesh& object,
                          double scale, const FitConfig& config, StageReport* report) {
  const auto t0 = Clock::now();
  require(!s.pairs.empty(), ErrorKind::EmptyCorrespondences, "no body-object correspondences");
  require(scale > 0.0, ErrorKind::InvalidArgument, "object scale must be positive");
  const std::vector<Vec3> v = gather(body.vertices(), s);
  std::vector<Vec3> p = object_points(object, s);

  const size_t n = v.size();
  Vec3 vbar = Vec3::Zero(), pbar = Vec3::Zero();
  for (size_t i = 0; i < n; ++i) {
    vbar += v[i];
    pbar += scale * p[i];
  }
  vbar /= static_cast<double>(n);
  pbar /= static_cast<double>(n);
  Eigen::MatrixXd pc(3, n), vc(3, n);
  for (size_t i = 0; i < n; ++i) {
    pc.col(i) = scale * p[i] - pbar;
    vc.col(i) = v[i] - vbar;
  }
  auto rank_ok = [](const Eigen::MatrixXd& m) {
    const Vec3 sv = Eigen::JacobiSVD<Mat3>(m * m.transpose()).singularValues();
    return sv[0] > 1e-24 && sv[1] > 1e-12 * sv[0];
  };
  require(n >= 3 && rank_ok(pc) && rank_ok(vc), ErrorKind::DegenerateCorrespondences,
          "correspondences are collinear or coincident");

  const Mat3 h = pc * vc.transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  RigidPose pose{rotation_vector(r), vbar - r * pbar, scale};

  // Refine the squared-residual solution on the unsquared loss.
  VecX x0(6);
  x0 << pose.rotation, pose.translation;
  VecX lr(6);
  lr << Vec3::Constant(config.lr_rotation), Vec3::Constant(config.lr_translation);
  auto pose_of = [&](const VecX& x) { return RigidPose{x.segment<3>(0), x.segment<3>(3), scale}; };
  const MinimizeResult m = minimize(
      x0, lr, [&](const VecX& x) { return Evaluation{contact_loss(v, p, pose_of(x))}; },
      [&](const VecX& x) {
        Vec7 g;
        contact_loss(v, p, pose_of(x), &g);
        return VecX(g.head<6>());
      },
      options_of(config));
  if (report != nullptr) {
    report->trace = m.trace;
    report->initial_loss = m.initial_loss;
    report->final_loss = m.best_loss;
    report->iterations = m.iterations;
    report->seconds = seconds_since(t0);
  }
  return pose_of(m.best);
}

RigidPose stage2_refine(const FitState& st, const FitConfig& c, StageReport* report) {
  const auto t0 = Clock::now();
  require(st.body != nullptr, ErrorKind::InvalidArgument, "fit state has no body model");
  const std::vector<Vec3> body_verts = posed_vertices(*st.body, st.theta);
  const std::vector<Vec3> v = gather(body_verts, st.correspondences);
  const std::vector<Vec3> p = object_points(st.object, st.correspondences);
  const SdfGrid sdf = build_sdf(pose_body(*st.body, st.theta), c.sdf_voxel, c.sdf_padding);
  const std::span<const Vec3> local = st.object.vertices();
  const std::span<const Face> faces = st.object.faces();
  require(st.object_mask.width() == st.camera.width && st.object_mask.height() == st.camera.height,
          ErrorKind::DimensionMismatch, "object mask does not match the camera");

  auto penetration = [&](const RigidPose& pose) { return loss_penetration(sdf, local, pose); };
  auto total = [&](const RigidPose& pose, double* lp) {
    const double pen = penetration(pose);
    if (lp != nullptr) *lp = pen;
    const SilhouetteMask mask = rasterize_silhouette(posed_points(local, pose), faces, st.camera);
    return c.s2_contact * contact_loss(v, p, pose) + c.s2_penetration * pen +
           c.s2_mask * loss_mask(mask, st.object_mask) + c.s2_scale * std::abs(pose.scale - st.scale_prior);
  };
  const double lp0 = penetration(st.object_pose);

  VecX lr(7), step(7);
  lr << Vec3::Constant(c.lr_rotation), Vec3::Constant(c.lr_translation), c.lr_scale;
  step << Vec3::Constant(c.fd_rotation), Vec3::Constant(c.fd_translation), c.fd_scale;
  auto eval = [&](const VecX& x) {
    const RigidPose pose = RigidPose::from_vector(x);
    if (!(pose.scale > 0.0)) return Evaluation{std::numeric_limits<double>::max(), false};
    double lp = 0.0;
    const double loss = total(pose, &lp);
    return Evaluation{loss, !c.penetration_guard || lp <= lp0 + kPenetrationSlack};
  };
  const MinimizeResult m = minimize(
      st.object_pose.to_vector(), lr, eval,
      [&](const VecX& x) { return central_difference([&](const VecX& y) { return eval(y).loss; }, x, step); },
      options_of(c));
  const RigidPose best = RigidPose::from_vector(m.best);
  if (report != nullptr) {
    report->trace = m.trace;
    report->initial_loss = m.initial_loss;
    report->final_loss = m.best_loss;
    report->initial_penetration = lp0;
    report->final_penetration = penetration(best);
    report->iterations = m.iterations;
    report->seconds = seconds_since(t0);
  }
  return best;
}

PoseVector stage3_refine(const FitState& st, const FitConfig& c, const std::vector<ChainSpec>& chains,
                         StageReport* report) {
  const auto t0 = Clock::now();
  require(st.body != nullptr, ErrorKind::InvalidArgument, "fit state has no body model");
  const BodyModel& body = *st.body;
  std::set<int> joint_set;
  for (const ChainSpec& ch : chains) joint_set.insert(ch.begin(), ch.end());
  require(!joint_set.empty(), ErrorKind::EmptyChains, "no contacting limb to refine");
  const std::vector<int> joints(joint_set.begin(), joint_set.end());
  for (int j : joints)
    require(j >= 0 && j < body.num_joints(), ErrorKind::InvalidArgument, "chain joint out of range");
  require(static_cast<int>(st.theta.rotations.size()) == body.num_joints() &&
              st.theta_init.rotations.size() == st.theta.rotations.size(),
          ErrorKind::DimensionMismatch, "pose size does not match the body model");
  require(st.human_mask.width() == st.camera.width && st.human_mask.height() == st.camera.height,
          ErrorKind::DimensionMismatch, "human mask does not match the camera");

  const int n = static_cast<int>(joints.size()) * 3;
  auto theta_of = [&](const VecX& x) {
    PoseVector th = st.theta;
    for (size_t k = 0; k < joints.size(); ++k) th.rotations[joints[k]] = x.segment<3>(3 * k);
    return th;
  };
  VecX x0(n), prior(n);
  for (size_t k = 0; k < joints.size(); ++k) {
    x0.segment<3>(3 * k) = st.theta.rotations[joints[k]];
    prior.segment<3>(3 * k) = st.theta_init.rotations[joints[k]];
  }

  const std::vector<Vec3> p = posed_points(object_points(st.object, st.correspondences), st.object_pose);
  const std::vector<Vec3> q = posed_points(st.object.vertices(), st.object_pose);
  const std::span<const Face> faces = body.mesh.faces();
  const RigidPose identity;
  auto rebuild = [&](const VecX& x) { return build_posed_sdf(body, theta_of(x), q, c); };
  PosedSdf sdf = rebuild(x0);
  auto penetration = [&](const PoseVector& th) { return posed_penetration(sdf, joint_transforms(body, th), q); };
  const double lp0 = penetration(st.theta);

  auto eval = [&](const VecX& x) {
    const PoseVector th = theta_of(x);
    const std::vector<Vec3> verts = posed_vertices(body, th);
    const double lp = penetration(th);
    const double loss = c.s3_contact * contact_loss(gather(verts, st.correspondences), p, identity) +
                        c.s3_penetration * lp +
                        c.s3_mask * loss_mask(rasterize_silhouette(verts, faces, st.camera), st.human_mask) +
                        c.s3_pose * (x - prior).norm();
    return Evaluation{loss, !c.penetration_guard || lp <= lp0 + kPenetrationSlack};
  };
  VecX lr = VecX::Constant(n, c.lr_joint);
  VecX step = VecX::Constant(n, c.fd_joint);
  const MinimizeResult m = minimize(
      x0, lr, eval,
      [&](const VecX& x) { return central_difference([&](const VecX& y) { return eval(y).loss; }, x, step); },
      options_of(c), [&](int it, const VecX& x) {
        if (it == 0 || it % c.sdf_rebuild != 0) return false;
        sdf = rebuild(x);
        return true;
      });
  const PoseVector best = theta_of(m.best);
  if (report != nullptr) {
    report->trace = m.trace;
    report->initial_loss = m.initial_loss;
    report->final_loss = m.best_loss;
    report->initial_penetration = lp0;
    sdf = rebuild(m.best);
    report->final_penetration = penetration(best);
    report->iterations = m.iterations;
    report->seconds = seconds_since(t0);
  }
  return best;
}

std::vector<ChainSpec> contact_chains(const BodyModel& body, const CorrespondenceSet& s) {
  std::set<int> parts;
  for (const Correspondence& c : s.pairs) {
    require(c.body_vertex >= 0 && c.body_vertex < static_cast<int>(body.vertex_part.size()),
            ErrorKind::InvalidArgument, "correspondence body vertex out of range");
    parts.insert(body.vertex_part[c.body_vertex]);
  }
  std::vector<ChainSpec> chains;
  for (int part : parts) {
    ChainSpec ch = kinematic_chain(body, body.part_names[part]);
    if (!ch.empty() && std::find(chains.begin(), chains.end(), ch) == chains.end()) chains.push_back(ch);
  }
  return chains;
}

FitResult fit(const FitInputs& in, const FitConfig& config) {
  validate(config);
  validate(in.camera);
  require(in.body != nullptr, ErrorKind::InvalidArgument, "fit needs a body model");
  require(!in.correspondences.pairs.empty(), ErrorKind::EmptyCorrespondences, "no body-object correspondences");
  require(in.object.num_faces() > 0, ErrorKind::InvalidArgument, "empty object mesh");

  FitResult result;
  result.dropped = in.dropped;
  result.theta = in.theta;
  result.object_center = vertex_centroid(in.object);

  FitState st;
  st.body = in.body;
  st.theta = in.theta;
  st.theta_init = in.theta;
  st.camera = in.camera;
  st.object = transformed(in.object, Mat3::Identity(), -result.object_center);
  st.scale_prior = in.scale;
  st.correspondences = in.correspondences;
  st.object_mask = in.object_mask;
  st.human_mask = in.human_mask;

  auto staged = [](int stage, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      throw Error(e.kind(), "stage " + std::to_string(stage) + ": " + e.message());
    }
  };

  result.stages.resize(config.stages);
  staged(1, [&] {
    const SurfaceMesh posed = pose_body(*in.body, in.theta);
    st.object_pose = stage1_register(st.correspondences, posed, st.object, in.scale, config, &result.stages[0]);
  });
  if (config.stages >= 2)
    staged(2, [&] { st.object_pose = stage2_refine(st, config, &result.stages[1]); });
  if (config.stages >= 3)
    staged(3, [&] {
      const std::vector<ChainSpec> chains = contact_chains(*in.body, st.correspondences);
      if (chains.empty()) {
        result.chains_empty = true;
        return;
      }
      st.theta = stage3_refine(st, config, chains, &result.stages[2]);
    });
  result.object_pose = st.object_pose;
  result.theta = st.theta;
  return result;
}

SurfaceMesh posed_object(const SurfaceMesh& object, const FitResult& r) {
  const Mat3 rot = r.object_pose.matrix();
  return transformed(object, rot, r.object_pose.translation - r.object_pose.scale * (rot * r.object_center),
                     r.object_pose.scale);
}

}  // namespace pico
