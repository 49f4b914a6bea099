#pragma once

#include "pico/body/body_model.hpp"
#include "pico/contact/transfer.hpp"
#include "pico/eval/metrics.hpp"
#include "pico/fit/fit.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace pico {

using Json = nlohmann::json;

/// Parses structured text; ParseError with the byte offset on failure.
Json parse_json(std::string_view text, const std::string& what = "document");
Json load_json(const std::string& path);
/// Two-space indented, trailing newline. Doubles round-trip exactly.
void save_json(const Json& doc, const std::string& path);

// Each *_from_json throws ParseError naming the offending key, then the
// type's own validation errors.

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

Json to_json(const SurfacePoint& p);
SurfacePoint surface_point_from_json(const Json& j);

Json to_json(const Camera& c);
Camera camera_from_json(const Json& j);

/// Missing keys keep their defaults; unknown keys are rejected.
Json to_json(const FitConfig& c);
FitConfig fit_config_from_json(const Json& j);

Json to_json(const PoseVector& p);
PoseVector pose_from_json(const Json& j);

Json to_json(const RigidPose& p);
RigidPose rigid_pose_from_json(const Json& j);

/// {vertices, faces, joints[{name, parent, rest, torso}], weights[[[joint, w]...]],
///  part_names, vertex_part, part_joint{name: joint}}
Json to_json(const BodyModel& m);
BodyModel body_model_from_json(const Json& j);
BodyModel load_body_model(const std::string& path);

Json to_json(const CorrespondenceSet& s);
CorrespondenceSet correspondences_from_json(const Json& j);

Json to_json(const ParamPatch& p);
ParamPatch param_patch_from_json(const Json& j);

Json to_json(const GeodesicPath& p);
GeodesicPath geodesic_path_from_json(const Json& j);

Json to_json(const StageReport& r);
Json to_json(const FitResult& r);
FitResult fit_result_from_json(const Json& j);

struct EvalReport {
  PaChamfer chamfer;
  std::optional<F1Score> body_contact;
  std::optional<F1Score> object_contact;
  int samples = 8192;
  std::uint64_t seed = 0;
};

Json to_json(const EvalReport& r);

}  // namespace pico
