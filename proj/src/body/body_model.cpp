#include "pico/body/body_model.hpp"

#include "pico/mesh/shapes.hpp"

#include <algorithm>
#include <cmath>

namespace pico {

int BodyModel::joint_index(const std::string& name) const {
  for (int j = 0; j < num_joints(); ++j)
    if (joints[j].name == name) return j;
  return -1;
}

std::vector<int> BodyModel::part_vertices(const std::string& part) const {
  const auto it = std::find(part_names.begin(), part_names.end(), part);
  if (it == part_names.end()) throw Error(ErrorKind::UnknownPart, "unknown body part '" + part + "'");
  const int p = static_cast<int>(it - part_names.begin());
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(vertex_part.size()); ++v)
    if (vertex_part[v] == p) out.push_back(v);
  return out;
}

void validate(const BodyModel& model) {
  const int nj = model.num_joints();
  const int nv = model.mesh.num_vertices();
  require(nj > 0, ErrorKind::InvalidArgument, "body model has no joints");
  require(model.joints[0].parent == -1, ErrorKind::InvalidArgument, "joint 0 must be the root");
  for (int j = 1; j < nj; ++j)
    require(model.joints[j].parent >= 0 && model.joints[j].parent < j, ErrorKind::InvalidArgument,
            "joint parents must precede their children");
  require(static_cast<int>(model.weights.size()) == nv, ErrorKind::InvalidArgument,
          "one skinning weight list per vertex required");
  for (const auto& w : model.weights) {
    require(!w.empty() && w.size() <= 8, ErrorKind::InvalidArgument, "each vertex needs 1 to 8 weights");
    double sum = 0.0;
    for (const SkinWeight& s : w) {
      require(s.joint >= 0 && s.joint < nj, ErrorKind::InvalidArgument, "weight joint out of range");
      require(s.weight >= 0.0, ErrorKind::InvalidArgument, "negative skinning weight");
      sum += s.weight;
    }
    require(std::abs(sum - 1.0) <= 1e-6, ErrorKind::InvalidArgument, "skinning weights must sum to 1");
  }
  require(static_cast<int>(model.vertex_part.size()) == nv, ErrorKind::InvalidArgument,
          "one part label per vertex required");
  for (int p : model.vertex_part)
    require(p >= 0 && p < static_cast<int>(model.part_names.size()), ErrorKind::InvalidArgument,
            "part label out of range");
  for (const auto& [name, j] : model.part_joint)
    require(j >= 0 && j < nj, ErrorKind::InvalidArgument, "part joint out of range");
}

Mat3 axis_angle_matrix(const Vec3& r) {
  const double angle = r.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, r / angle).toRotationMatrix();
}

std::vector<Mat4> joint_transforms(const BodyModel& model, const PoseVector& pose) {
  const int nj = model.num_joints();
  require(static_cast<int>(pose.rotations.size()) == nj, ErrorKind::DimensionMismatch,
          "pose has " + std::to_string(pose.rotations.size()) + " rotations for " + std::to_string(nj) +
              " joints");
  std::vector<Mat4> g(nj, Mat4::Identity());
  for (int j = 0; j < nj; ++j) {
    const Joint& joint = model.joints[j];
    const Mat3 local = axis_angle_matrix(pose.rotations[j]);
    if (joint.parent < 0) {
      g[j].topLeftCorner<3, 3>() = local;
      g[j].topRightCorner<3, 1>() = joint.rest + pose.translation;
    } else {
      const Mat4& gp = g[joint.parent];
      const Mat3 rp = gp.topLeftCorner<3, 3>();
      g[j].topLeftCorner<3, 3>() = rp * local;
      g[j].topRightCorner<3, 1>() =
          gp.topRightCorner<3, 1>() + rp * (joint.rest - model.joints[joint.parent].rest);
    }
  }
  return g;
}

std::vector<Vec3> posed_vertices(const BodyModel& model, const PoseVector& pose) {
  const int nj = model.num_joints();
  require(static_cast<int>(pose.rotations.size()) == nj, ErrorKind::DimensionMismatch,
          "pose has " + std::to_string(pose.rotations.size()) + " rotations for " + std::to_string(nj) +
              " joints");
  // Written as displacements from the rest pose so the identity pose is exact.
  std::vector<Mat3> rot(nj);
  std::vector<Mat3> delta(nj);
  std::vector<Vec3> shift(nj);
  for (int j = 0; j < nj; ++j) {
    const Joint& joint = model.joints[j];
    const Mat3 local = axis_angle_matrix(pose.rotations[j]);
    if (joint.parent < 0) {
      rot[j] = local;
      shift[j] = pose.translation;
    } else {
      const int p = joint.parent;
      rot[j] = rot[p] * local;
      shift[j] = shift[p] + delta[p] * (joint.rest - model.joints[p].rest);
    }
    delta[j] = rot[j] - Mat3::Identity();
  }
  const int nv = model.mesh.num_vertices();
  std::vector<Vec3> out(nv);
  for (int v = 0; v < nv; ++v) {
    const Vec3& x = model.mesh.vertex(v);
    Vec3 d = Vec3::Zero();
    for (const SkinWeight& s : model.weights[v])
      d += s.weight * (delta[s.joint] * (x - model.joints[s.joint].rest) + shift[s.joint]);
    out[v] = x + d;
  }
  return out;
}

SurfaceMesh pose_body(const BodyModel& model, const PoseVector& pose) {
  return build_mesh(posed_vertices(model, pose),
                    std::vector<Face>(model.mesh.faces().begin(), model.mesh.faces().end()));
}

ChainSpec kinematic_chain(const BodyModel& model, const std::string& part) {
  const auto it = model.part_joint.find(part);
  if (it == model.part_joint.end()) throw Error(ErrorKind::UnknownPart, "unknown body part '" + part + "'");
  ChainSpec chain;
  for (int j = it->second; j >= 0 && !model.joints[j].torso; j = model.joints[j].parent) chain.push_back(j);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

const std::vector<std::string>& contact_part_vocabulary() {
  static const std::vector<std::string> names{
      "head",          "neck",          "torso",         "hips",          "leftUpperArm",   "rightUpperArm",
      "leftForeArm",   "rightForeArm",  "leftHand",      "rightHand",     "leftUpperLeg",   "rightUpperLeg",
      "leftLowerLeg",  "rightLowerLeg", "leftFootSole",  "rightFootSole", "topOfLeftFoot",  "topOfRightFoot"};
  return names;
}

BodyModel toy_humanoid(int subdivisions) {
  BodyModel m;
  auto add_joint = [&](const std::string& name, int parent, Vec3 rest, bool torso = false) {
    m.joints.push_back({name, parent, rest, torso});
    return static_cast<int>(m.joints.size()) - 1;
  };
  // y points down, the body faces -z, so the body's left is +x.
  const int pelvis = add_joint("pelvis", -1, {0, 0, 0}, true);
  const int spine = add_joint("spine", pelvis, {0, -0.12, 0}, true);
  const int chest = add_joint("chest", spine, {0, -0.32, 0}, true);
  const int neck = add_joint("neck", chest, {0, -0.52, 0});
  const int head = add_joint("head", neck, {0, -0.6, 0});
  int shoulder[2], elbow[2], wrist[2], hip[2], knee[2], ankle[2];
  const char* side[2] = {"left", "right"};
  for (int s = 0; s < 2; ++s) {
    const double x = s == 0 ? 0.21 : -0.21;
    shoulder[s] = add_joint(std::string(side[s]) + "Shoulder", chest, {x, -0.47, 0});
    elbow[s] = add_joint(std::string(side[s]) + "Elbow", shoulder[s], {x, -0.19, 0});
    wrist[s] = add_joint(std::string(side[s]) + "Wrist", elbow[s], {x, 0.06, 0});
  }
  for (int s = 0; s < 2; ++s) {
    const double x = s == 0 ? 0.1 : -0.1;
    hip[s] = add_joint(std::string(side[s]) + "Hip", pelvis, {x, 0.06, 0});
    knee[s] = add_joint(std::string(side[s]) + "Knee", hip[s], {x, 0.5, 0});
    ankle[s] = add_joint(std::string(side[s]) + "Ankle", knee[s], {x, 0.92, 0});
  }

  std::vector<Vec3> verts;
  std::vector<Face> faces;
  auto part_id = [&](const std::string& name) {
    const auto it = std::find(m.part_names.begin(), m.part_names.end(), name);
    if (it != m.part_names.end()) return static_cast<int>(it - m.part_names.begin());
    m.part_names.push_back(name);
    return static_cast<int>(m.part_names.size()) - 1;
  };
  auto add_box = [&](int joint, const std::string& part, const Vec3& center, const Vec3& extent) {
    const size_t first = verts.size();
    shapes::append_box(center, extent, subdivisions, verts, faces);
    const int p = part_id(part);
    for (size_t v = first; v < verts.size(); ++v) {
      m.weights.push_back({{joint, 1.0}});
      m.vertex_part.push_back(p);
    }
    m.part_joint.emplace(part, joint);
  };

  add_box(pelvis, "hips", {0, 0.0, 0}, {0.3, 0.14, 0.18});
  add_box(spine, "torso", {0, -0.2, 0}, {0.28, 0.2, 0.16});
  add_box(chest, "torso", {0, -0.4, 0}, {0.34, 0.2, 0.2});
  add_box(neck, "neck", {0, -0.535, 0}, {0.08, 0.07, 0.08});
  add_box(head, "head", {0, -0.69, 0}, {0.16, 0.2, 0.18});
  const char* limb[2] = {"left", "right"};
  const char* foot[2] = {"Left", "Right"};
  for (int s = 0; s < 2; ++s) {
    const std::string L = limb[s];
    const double ax = m.joints[shoulder[s]].rest.x();
    add_box(shoulder[s], L + "UpperArm", {ax, -0.33, 0}, {0.08, 0.27, 0.08});
    add_box(elbow[s], L + "ForeArm", {ax, -0.065, 0}, {0.07, 0.24, 0.07});
    add_box(wrist[s], L + "Hand", {ax, 0.13, 0}, {0.03, 0.13, 0.09});
    const double lx = m.joints[hip[s]].rest.x();
    add_box(hip[s], L + "UpperLeg", {lx, 0.28, 0}, {0.13, 0.42, 0.13});
    add_box(knee[s], L + "LowerLeg", {lx, 0.71, 0}, {0.1, 0.4, 0.1});
    // Foot: the bottom face is the sole, everything else the top of the foot.
    const size_t first = verts.size();
    const Vec3 center(lx, 0.96, -0.05);
    const Vec3 extent(0.1, 0.06, 0.24);
    shapes::append_box(center, extent, subdivisions, verts, faces);
    const int sole = part_id(L + "FootSole");
    const int top = part_id(std::string("topOf") + foot[s] + "Foot");
    for (size_t v = first; v < verts.size(); ++v) {
      m.weights.push_back({{ankle[s], 1.0}});
      const bool bottom = verts[v].y() >= center.y() + 0.5 * extent.y() - 1e-12;
      m.vertex_part.push_back(bottom ? sole : top);
    }
    m.part_joint.emplace(L + "FootSole", ankle[s]);
    m.part_joint.emplace(std::string("topOf") + foot[s] + "Foot", ankle[s]);
  }
  m.mesh = build_mesh(std::move(verts), std::move(faces));
  validate(m);
  return m;
}

}  // namespace pico
