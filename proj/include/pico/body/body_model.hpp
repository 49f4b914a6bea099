#pragma once

#include "pico/mesh/surface_mesh.hpp"

#include <map>
#include <string>

namespace pico {

struct Joint {
  std::string name;
  int parent = -1;
  Vec3 rest = Vec3::Zero();
  bool torso = false;  // torso joints are never refined
};

struct SkinWeight {
  int joint;
  double weight;
};

/// Articulated linear-blend-skinned body. Part names follow the contact
/// vocabulary (head, neck, torso, hips, leftUpperArm, ..., topOfRightFoot).
struct BodyModel {
  SurfaceMesh mesh;
  std::vector<Joint> joints;
  std::vector<std::vector<SkinWeight>> weights;  // per vertex, <= 8 entries
  std::vector<std::string> part_names;
  std::vector<int> vertex_part;                  // index into part_names
  std::map<std::string, int> part_joint;         // part name -> joint index

  int num_joints() const { return static_cast<int>(joints.size()); }
  int joint_index(const std::string& name) const;
  /// Vertices labelled with `part`. Throws UnknownPart.
  std::vector<int> part_vertices(const std::string& part) const;
};

/// Throws InvalidArgument describing the first violated model invariant.
void validate(const BodyModel& model);

struct PoseVector {
  std::vector<Vec3> rotations;  // axis-angle per joint
  Vec3 translation = Vec3::Zero();

  static PoseVector zero(int joints) { return {std::vector<Vec3>(joints, Vec3::Zero()), Vec3::Zero()}; }
};

/// Ordered joint indices from the torso-adjacent ancestor down to the part's joint.
using ChainSpec = std::vector<int>;

/// World transform of each joint (rotation + joint position) after forward kinematics.
std::vector<Mat4> joint_transforms(const BodyModel& model, const PoseVector& pose);

/// Posed vertex positions (forward kinematics then linear blend skinning).
std::vector<Vec3> posed_vertices(const BodyModel& model, const PoseVector& pose);

/// Posed mesh; topology unchanged. Throws DimensionMismatch.
SurfaceMesh pose_body(const BodyModel& model, const PoseVector& pose);

/// Throws UnknownPart.
ChainSpec kinematic_chain(const BodyModel& model, const std::string& part);

Mat3 axis_angle_matrix(const Vec3& r);

/// The 18 contact part names, in prompt order.
const std::vector<std::string>& contact_part_vocabulary();

/// 17-joint humanoid of subdivided boxes, y down and facing -z, pelvis at
/// the origin. Each box is rigidly bound to one joint.
BodyModel toy_humanoid(int subdivisions = 3);

}  // namespace pico
