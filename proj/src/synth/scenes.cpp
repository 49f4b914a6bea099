#include "pico/synth/scenes.hpp"

#include "pico/mesh/shapes.hpp"

#include <algorithm>
#include <cmath>

namespace pico {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec3 random_unit(std::mt19937_64& rng) {
  const double z = 2.0 * uniform01(rng) - 1.0;
  const double phi = 2.0 * kPi * uniform01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

FitInputs GraspScene::inputs() const {
  FitInputs in;
  in.body = body.get();
  in.theta = init_theta;
  in.camera = camera;
  in.object = object;
  in.scale = init_scale;
  in.correspondences = correspondences;
  in.object_mask = object_mask;
  in.human_mask = human_mask;
  return in;
}

SurfaceMesh GraspScene::gt_human_mesh() const { return pose_body(*body, gt_theta); }

SurfaceMesh GraspScene::gt_object_mesh() const {
  return transformed(object, gt_object.matrix(), gt_object.translation, gt_object.scale);
}

GraspScene grasp_scene(std::uint64_t seed, const GraspOptions& opt) {
  GraspScene s;
  auto body = std::make_shared<BodyModel>(toy_humanoid(opt.body_subdivisions));
  s.body = body;
  const BodyModel& m = *body;
  // Upright, facing the camera 2.6 m away, portrait frame.
  s.camera = Camera{700.0, 700.0, 240.0, 320.0, 480, 640};

  // Forearms bent forward so the hands hold a box in front of the chest.
  s.gt_theta = PoseVector::zero(m.num_joints());
  s.gt_theta.translation = Vec3(0.0, 0.1, 2.6);
  const int relbow = m.joint_index("rightElbow");
  const int lelbow = m.joint_index("leftElbow");
  s.gt_theta.rotations[relbow] = Vec3(-kPi / 2, 0.0, 0.0);
  s.gt_theta.rotations[lelbow] = Vec3(-kPi / 2, 0.0, 0.0);
  const std::vector<Vec3> posed = posed_vertices(m, s.gt_theta);

  // The box rests on both hands and leans against the chest; the hand tops
  // and the covered part of the chest front are its contact.
  const std::vector<int> right = m.part_vertices("rightHand");
  const std::vector<int> left = m.part_vertices("leftHand");
  const std::vector<int> torso = m.part_vertices("torso");
  Aabb hands;
  for (int v : right) hands.grow(posed[v]);
  for (int v : left) hands.grow(posed[v]);
  double chest = -1e9;
  for (int v : torso) chest = std::max(chest, -posed[v].z());
  const double top = hands.lo.y();  // y points down
  const Vec3 lo(hands.lo.x() - 0.025, top - 0.2, hands.lo.z() - 0.065);
  const Vec3 hi(hands.hi.x() + 0.025, top, -chest);
  const Vec3 center = 0.5 * (lo + hi);
  s.object = shapes::box(Vec3::Zero(), hi - lo, opt.object_subdivisions);
  s.gt_object = RigidPose{Vec3::Zero(), center, 1.0};

  constexpr double kFlush = 1e-9;
  auto add = [&](int v, int patch) {
    const ClosestPoint cp = s.object.closest_point(posed[v] - center);
    s.correspondences.pairs.push_back({v, cp.point, patch});
  };
  for (int v : right)
    if (posed[v].y() <= top + kFlush) add(v, 0);
  for (int v : left)
    if (posed[v].y() <= top + kFlush) add(v, 1);
  for (int v : torso)
    if (-posed[v].z() >= chest - kFlush && posed[v].y() >= lo.y() && posed[v].y() <= hi.y()) add(v, 2);

  s.human_mask = rasterize_silhouette(posed, m.mesh.faces(), s.camera);
  s.object_mask = rasterize_silhouette(s.gt_object_mesh(), s.camera);

  std::mt19937_64 rng(seed);
  s.init_object = s.gt_object;
  s.init_object.translation += opt.translation * random_unit(rng);
  s.init_object.rotation = opt.rotation * random_unit(rng);
  s.init_scale = uniform01(rng) < 0.5 ? 1.0 - opt.scale : 1.0 + opt.scale;
  s.init_object.scale = s.init_scale;
  s.init_theta = s.gt_theta;
  s.perturbed_joint = relbow;
  s.init_theta.rotations[relbow] = rotation_vector(axis_angle_matrix(opt.elbow * random_unit(rng)) *
                                                   axis_angle_matrix(s.gt_theta.rotations[relbow]));
  return s;
}

}  // namespace pico
