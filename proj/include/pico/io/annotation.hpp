#pragma once

#include "pico/io/documents.hpp"

namespace pico {

/// One transferred contact patch as stored in an annotation.
struct AnnotationPatch {
  int patch_id = 0;
  GeodesicPath source_axis;  // on the body
  ParamPatch param;
  std::string object_id;
  SurfacePoint click1;       // axis start on the object
  Vec3 click2 = Vec3::Zero();  // direction point on the object
  CorrespondenceSet correspondences;
  int dropped = 0;           // patch vertices that failed to transfer
  Json extra = Json::object();
};

struct AnnotationDocument {
  std::string schema_version = "1.0";
  std::string image_id;
  std::string image_path;
  std::vector<int> body_contacts;
  std::string object_id;
  std::string object_path;       // relative to the document unless absolute
  std::optional<int> object_rank;  // which of the retrieved candidates was picked
  std::vector<AnnotationPatch> patches;
  std::string annotator;
  std::string created;
  std::string updated;
  std::optional<PoseVector> init_theta;
  std::optional<double> init_scale;
  Json extra = Json::object();   // unknown fields, kept on rewrite

  bool operator==(const AnnotationDocument& other) const;
  /// Every patch's correspondences, in patch order.
  CorrespondenceSet correspondences() const;
};

/// Schema "1.x" accepted; another major is SchemaVersionUnsupported.
/// Throws ParseError, InvalidArgument (duplicate patch ids).
AnnotationDocument annotation_from_json(const Json& j);
Json to_json(const AnnotationDocument& doc);
AnnotationDocument load_annotation(const std::string& path);
void save_annotation(const AnnotationDocument& doc, const std::string& path);

/// Duplicate patch ids and unsorted contacts. Throws InvalidArgument.
void validate(const AnnotationDocument& doc);
/// Clicks and correspondence points lie on `object` within `tol`.
/// Throws InvalidArgument.
void validate_on_object(const AnnotationDocument& doc, const SurfaceMesh& object, double tol = 1e-6);
/// `p` indexes a face of `mesh` with barycentric residual below `tol`.
bool on_mesh(const SurfaceMesh& mesh, const SurfacePoint& p, double tol = 1e-6);

/// A body contact patch ready to be placed: id, axis and parameterization.
struct PreparedPatch {
  ContactPatch patch;
  ContactAxis axis;
  ParamPatch param;
};

/// Patches of the contact set with synthesized axes; patch ids 0, 1, ...
/// in extract_patches order.
std::vector<PreparedPatch> prepare_patches(const SurfaceMesh& body, std::span<const int> contacts);

/// Two-click transfer of one prepared patch onto the object.
AnnotationPatch place_patch(const SurfaceMesh& object, const std::string& object_id, const PreparedPatch& prepared,
                            const SurfacePoint& click1, const Vec3& click2);

}  // namespace pico
