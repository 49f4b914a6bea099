#include "pico/io/annotation.hpp"

#include "pico/io/bytes.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace pico {

namespace {

const std::set<std::string> kDocKeys{"schema_version", "image",   "body_contacts", "object", "patches",
                                     "annotator",      "created", "updated",       "init"};
const std::set<std::string> kPatchKeys{"patch_id", "source_axis",     "param",  "object_id",
                                       "click1",   "click2",          "correspondences", "dropped"};

Json unknown(const Json& j, const std::set<std::string>& known) {
  Json extra = Json::object();
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) extra[k] = v;
  return extra;
}

void merge(Json& j, const Json& extra) {
  for (const auto& [k, v] : extra.items())
    if (!j.contains(k)) j[k] = v;
}

void check_version(const std::string& v) {
  const auto dot = v.find('.');
  int major = 0, minor = 0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  if (dot == std::string::npos || std::from_chars(b, b + dot, major).ptr != b + dot ||
      std::from_chars(b + dot + 1, e, minor).ptr != e || dot == 0 || dot + 1 == v.size())
    throw Error(ErrorKind::ParseError, "schema_version '" + v + "' is not MAJOR.MINOR");
  if (major != 1) throw Error(ErrorKind::SchemaVersionUnsupported, "schema version " + v + " (supported: 1.x)");
}

std::string opt_string(const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) throw Error(ErrorKind::ParseError, std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace

bool AnnotationDocument::operator==(const AnnotationDocument& other) const {
  return to_json(*this) == to_json(other);
}

CorrespondenceSet AnnotationDocument::correspondences() const {
  CorrespondenceSet s;
  for (const AnnotationPatch& p : patches)
    s.pairs.insert(s.pairs.end(), p.correspondences.pairs.begin(), p.correspondences.pairs.end());
  return s;
}

Json to_json(const AnnotationDocument& d) {
  Json patches = Json::array();
  for (const AnnotationPatch& p : d.patches) {
    Json pj = {{"patch_id", p.patch_id},
               {"source_axis", to_json(p.source_axis)},
               {"param", to_json(p.param)},
               {"object_id", p.object_id},
               {"click1", to_json(p.click1)},
               {"click2", to_json(p.click2)},
               {"correspondences", to_json(p.correspondences)},
               {"dropped", p.dropped}};
    merge(pj, p.extra);
    patches.push_back(std::move(pj));
  }
  Json object = {{"id", d.object_id}, {"path", d.object_path}};
  if (d.object_rank) object["rank"] = *d.object_rank;
  Json j = {{"schema_version", d.schema_version},
            {"image", {{"id", d.image_id}, {"path", d.image_path}}},
            {"body_contacts", d.body_contacts},
            {"object", object},
            {"patches", patches},
            {"annotator", d.annotator},
            {"created", d.created},
            {"updated", d.updated}};
  if (d.init_theta || d.init_scale) {
    Json init = Json::object();
    if (d.init_theta) init["theta"] = to_json(*d.init_theta);
    if (d.init_scale) init["scale"] = *d.init_scale;
    j["init"] = init;
  }
  merge(j, d.extra);
  return j;
}

AnnotationDocument annotation_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "annotation must be an object");
  if (!j.contains("schema_version") || !j["schema_version"].is_string())
    throw Error(ErrorKind::ParseError, "missing string 'schema_version'");
  AnnotationDocument d;
  d.schema_version = j["schema_version"].get<std::string>();
  check_version(d.schema_version);
  try {
    if (j.contains("image")) {
      d.image_id = opt_string(j["image"], "id");
      d.image_path = opt_string(j["image"], "path");
    }
    d.body_contacts = j.at("body_contacts").get<std::vector<int>>();
    if (j.contains("object")) {
      const Json& o = j["object"];
      d.object_id = opt_string(o, "id");
      d.object_path = opt_string(o, "path");
      if (o.contains("rank")) d.object_rank = o["rank"].get<int>();
    }
    for (const Json& pj : j.at("patches")) {
      AnnotationPatch p;
      p.patch_id = pj.at("patch_id").get<int>();
      p.source_axis = geodesic_path_from_json(pj.at("source_axis"));
      p.param = param_patch_from_json(pj.at("param"));
      p.object_id = pj.at("object_id").get<std::string>();
      p.click1 = surface_point_from_json(pj.at("click1"));
      p.click2 = vec3_from_json(pj.at("click2"));
      p.correspondences = correspondences_from_json(pj.at("correspondences"));
      if (pj.contains("dropped")) p.dropped = pj["dropped"].get<int>();
      p.extra = unknown(pj, kPatchKeys);
      d.patches.push_back(std::move(p));
    }
    d.annotator = opt_string(j, "annotator");
    d.created = opt_string(j, "created");
    d.updated = opt_string(j, "updated");
    if (j.contains("init")) {
      const Json& init = j["init"];
      if (init.contains("theta")) d.init_theta = pose_from_json(init["theta"]);
      if (init.contains("scale")) d.init_scale = init["scale"].get<double>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("annotation: ") + e.what());
  }
  d.extra = unknown(j, kDocKeys);
  validate(d);
  return d;
}

AnnotationDocument load_annotation(const std::string& path) {
  try {
    return annotation_from_json(load_json(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IoError) throw;
    throw Error(e.kind(), path + ": " + e.message());
  }
}

void save_annotation(const AnnotationDocument& doc, const std::string& path) {
  validate(doc);
  save_json(to_json(doc), path);
}

void validate(const AnnotationDocument& doc) {
  check_version(doc.schema_version);
  std::set<int> ids;
  for (const AnnotationPatch& p : doc.patches)
    require(ids.insert(p.patch_id).second, ErrorKind::InvalidArgument,
            "duplicate patch id " + std::to_string(p.patch_id));
  require(std::is_sorted(doc.body_contacts.begin(), doc.body_contacts.end()) &&
              std::adjacent_find(doc.body_contacts.begin(), doc.body_contacts.end()) == doc.body_contacts.end(),
          ErrorKind::InvalidArgument, "body contacts must be sorted and unique");
  if (doc.init_scale) require(*doc.init_scale > 0.0, ErrorKind::InvalidArgument, "init scale must be positive");
}

bool on_mesh(const SurfaceMesh& mesh, const SurfacePoint& p, double tol) {
  return p.face >= 0 && p.face < mesh.num_faces() && p.bary.allFinite() && p.valid_weights(tol);
}

void validate_on_object(const AnnotationDocument& doc, const SurfaceMesh& object, double tol) {
  for (const AnnotationPatch& p : doc.patches) {
    const std::string tag = "patch " + std::to_string(p.patch_id) + ": ";
    require(on_mesh(object, p.click1, tol), ErrorKind::InvalidArgument, tag + "click1 is not on the object");
    require(object.closest_point(p.click2).distance <= tol, ErrorKind::InvalidArgument,
            tag + "click2 is not on the object surface");
    for (const Correspondence& c : p.correspondences.pairs)
      require(on_mesh(object, c.object_point, tol), ErrorKind::InvalidArgument,
              tag + "correspondence point is not on the object");
  }
}

std::vector<PreparedPatch> prepare_patches(const SurfaceMesh& body, std::span<const int> contacts) {
  std::vector<PreparedPatch> out;
  for (ContactPatch& patch : extract_patches(body, contacts)) {
    PreparedPatch p;
    p.axis = synthesize_axis(body, patch);
    p.param = parameterize_patch(body, patch, p.axis);
    p.param.patch_id = patch.id;
    p.patch = std::move(patch);
    out.push_back(std::move(p));
  }
  return out;
}

AnnotationPatch place_patch(const SurfaceMesh& object, const std::string& object_id, const PreparedPatch& prepared,
                            const SurfacePoint& click1, const Vec3& click2) {
  require(on_mesh(object, click1), ErrorKind::InvalidArgument, "click1 is not on the object");
  const ContactAxis axis = unpack_axis(object, prepared.axis, click1, click2);
  TransferResult t = transfer_patch(object, prepared.param, axis);
  AnnotationPatch p;
  p.patch_id = prepared.param.patch_id;
  p.source_axis = prepared.axis.path;
  p.param = prepared.param;
  p.object_id = object_id;
  p.click1 = click1;
  p.click2 = click2;
  p.correspondences = std::move(t.correspondences);
  p.dropped = t.failed;
  return p;
}

}  // namespace pico
