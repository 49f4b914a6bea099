#pragma once

#include "pico/body/body_model.hpp"
#include "pico/fit/camera.hpp"
#include "pico/fit/losses.hpp"
#include "pico/fit/optimize.hpp"

namespace pico {

struct FitConfig {
  // Stage 2: contact, penetration, object mask, scale prior.
  double s2_contact = 4.0;
  double s2_penetration = 100.0;
  double s2_mask = 0.4;
  double s2_scale = 4.0;
  // Stage 3: contact, penetration, human mask, chain pose prior.
  double s3_contact = 4.0;
  double s3_penetration = 50.0;
  double s3_mask = 0.1;
  double s3_pose = 0.05;

  double lr_rotation = 0.04;
  double lr_translation = 0.02;
  double lr_scale = 0.01;
  double lr_joint = 0.02;

  int iterations = 300;
  int patience = 20;
  double tolerance = 1e-5;
  int plateau = 10;      // restart from the best at half rate after this many idle iterations
  int max_halvings = 6;

  // Finite-difference half-steps; the mask terms need a pixel or so of motion.
  double fd_rotation = 0.01;
  double fd_translation = 0.003;
  double fd_scale = 0.01;
  double fd_joint = 0.01;

  double sdf_voxel = 0.02;
  double sdf_padding = 0.1;
  int sdf_rebuild = 25;

  int stages = 3;  // run stages 1..stages
  bool penetration_guard = false;  // best iterate must not raise L_p above its stage-start value
};

/// Throws InvalidArgument.
void validate(const FitConfig& config);

/// Everything `fit` consumes. The object mesh is in its own frame; `fit`
/// centers it at its vertex centroid before posing.
struct FitInputs {
  const BodyModel* body = nullptr;
  PoseVector theta;              // theta*, the initial body pose
  Camera camera;
  SurfaceMesh object;
  double scale = 1.0;            // s*_o
  CorrespondenceSet correspondences;
  SilhouetteMask object_mask;
  SilhouetteMask human_mask;
  int dropped = 0;               // correspondences lost during transfer
};

/// Working state shared by stages 2 and 3. `object` is centered.
struct FitState {
  const BodyModel* body = nullptr;
  PoseVector theta;
  PoseVector theta_init;
  Camera camera;
  SurfaceMesh object;
  RigidPose object_pose;
  double scale_prior = 1.0;
  CorrespondenceSet correspondences;
  SilhouetteMask object_mask;
  SilhouetteMask human_mask;
};

struct StageReport {
  std::vector<double> trace;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double initial_penetration = 0.0;
  double final_penetration = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct FitResult {
  RigidPose object_pose;
  Vec3 object_center = Vec3::Zero();  // world point = pose.apply(x - object_center)
  PoseVector theta;
  std::vector<StageReport> stages;
  int dropped = 0;
  bool chains_empty = false;  // stage 3 had no contacting limb; theta unchanged
};

/// Kabsch alignment of s * p_i onto v_i, then Adam on the mean unsquared
/// distance. Scale is held at `scale`. Throws EmptyCorrespondences,
/// DegenerateCorrespondences.
RigidPose stage1_register(const CorrespondenceSet& s, const SurfaceMesh& body, const SurfaceMesh& object,
                          double scale = 1.0, const FitConfig& config = {}, StageReport* report = nullptr);

/// Object rotation, translation and scale against contact, penetration,
/// object mask and scale prior. Finite-difference gradients.
RigidPose stage2_refine(const FitState& state, const FitConfig& config = {}, StageReport* report = nullptr);

/// Rotations of the chain joints against contact, penetration, human mask
/// and the chain pose prior; the body SDF is rebuilt every
/// `config.sdf_rebuild` iterations. Throws EmptyChains for an empty list.
PoseVector stage3_refine(const FitState& state, const FitConfig& config, const std::vector<ChainSpec>& chains,
                         StageReport* report = nullptr);

/// Chains of every non-torso part touched by the correspondences, deduplicated.
std::vector<ChainSpec> contact_chains(const BodyModel& body, const CorrespondenceSet& s);

/// Stage 1 -> 2 -> 3. Errors carry the failing stage in their message.
FitResult fit(const FitInputs& inputs, const FitConfig& config = {});

/// The object mesh placed by a fit result.
SurfaceMesh posed_object(const SurfaceMesh& object, const FitResult& result);

}  // namespace pico
