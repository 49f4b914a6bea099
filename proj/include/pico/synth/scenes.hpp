#pragma once

#include "pico/fit/fit.hpp"

#include <cstdint>
#include <memory>
#include <random>

namespace pico {

struct GraspOptions {
  double translation = 0.10;            // m, object init offset
  double rotation = 15.0 * kPi / 180;   // rad, object init rotation
  double scale = 0.10;                  // relative error of s*_o
  double elbow = 0.2;                   // rad, contacting elbow perturbation
  int body_subdivisions = 3;
  int object_subdivisions = 10;
};

/// Toy humanoid carrying a box on both upturned hands and against its chest,
/// facing the camera, with ground truth, rendered masks and a perturbed initialization.
/// The right elbow is the perturbed contacting joint.
struct GraspScene {
  std::shared_ptr<const BodyModel> body;
  Camera camera;
  SurfaceMesh object;  // centered at its vertex centroid
  PoseVector gt_theta;
  RigidPose gt_object;
  PoseVector init_theta;
  RigidPose init_object;
  double init_scale = 1.0;
  int perturbed_joint = -1;
  CorrespondenceSet correspondences;
  SilhouetteMask object_mask;
  SilhouetteMask human_mask;

  FitInputs inputs() const;
  SurfaceMesh gt_human_mesh() const;
  SurfaceMesh gt_object_mesh() const;
};

GraspScene grasp_scene(std::uint64_t seed, const GraspOptions& options = {});

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);
/// Uniformly distributed unit vector.
Vec3 random_unit(std::mt19937_64& rng);

}  // namespace pico
