#include "pico/io/documents.hpp"

#include "pico/io/bytes.hpp"

#include <cmath>

namespace pico {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing key '") + key + "'");
  return *it;
}

template <class T>
T as(const Json& j, const char* key) {
  try {
    if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) bad(std::string("'") + key + "' must be a number");
      const T v = j.get<T>();
      if (!std::isfinite(v)) bad(std::string("'") + key + "' must be finite");
      return v;
    } else {
      return j.get<T>();
    }
  } catch (const Json::exception& e) {
    bad(std::string("'") + key + "': " + e.what());
  }
}

template <class T>
T get(const Json& j, const char* key) {
  return as<T>(field(j, key), key);
}

template <class T>
void get_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = as<T>(j[key], key);
}

const Json& array(const Json& j, const char* key) {
  const Json& a = field(j, key);
  if (!a.is_array()) bad(std::string("'") + key + "' must be a list");
  return a;
}

template <class T, class F>
std::vector<T> list(const Json& j, const char* key, F&& item) {
  std::vector<T> out;
  for (const Json& x : array(j, key)) out.push_back(item(x));
  return out;
}

struct DoubleField {
  const char* name;
  double FitConfig::*member;
};
struct IntField {
  const char* name;
  int FitConfig::*member;
};

constexpr DoubleField kConfigDoubles[] = {
    {"s2_contact", &FitConfig::s2_contact},       {"s2_penetration", &FitConfig::s2_penetration},
    {"s2_mask", &FitConfig::s2_mask},             {"s2_scale", &FitConfig::s2_scale},
    {"s3_contact", &FitConfig::s3_contact},       {"s3_penetration", &FitConfig::s3_penetration},
    {"s3_mask", &FitConfig::s3_mask},             {"s3_pose", &FitConfig::s3_pose},
    {"lr_rotation", &FitConfig::lr_rotation},     {"lr_translation", &FitConfig::lr_translation},
    {"lr_scale", &FitConfig::lr_scale},           {"lr_joint", &FitConfig::lr_joint},
    {"tolerance", &FitConfig::tolerance},         {"fd_rotation", &FitConfig::fd_rotation},
    {"fd_translation", &FitConfig::fd_translation}, {"fd_scale", &FitConfig::fd_scale},
    {"fd_joint", &FitConfig::fd_joint},           {"sdf_voxel", &FitConfig::sdf_voxel},
    {"sdf_padding", &FitConfig::sdf_padding},
};
constexpr IntField kConfigInts[] = {
    {"iterations", &FitConfig::iterations}, {"patience", &FitConfig::patience},
    {"plateau", &FitConfig::plateau},       {"max_halvings", &FitConfig::max_halvings},
    {"sdf_rebuild", &FitConfig::sdf_rebuild}, {"stages", &FitConfig::stages},
};

Json to_json(const F1Score& s) { return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}}; }

}  // namespace

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ParseError, what + ": " + e.what() + " (at byte " + std::to_string(e.byte) + ")");
  }
}

Json load_json(const std::string& path) { return parse_json(read_file(path), path); }

void save_json(const Json& doc, const std::string& path) { write_file(path, doc.dump(2) + "\n"); }

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) bad("expected a 3-vector");
  return {as<double>(j[0], "x"), as<double>(j[1], "y"), as<double>(j[2], "z")};
}

Json to_json(const SurfacePoint& p) { return {{"face", p.face}, {"bary", to_json(p.bary)}}; }

SurfacePoint surface_point_from_json(const Json& j) {
  return {get<int>(j, "face"), vec3_from_json(field(j, "bary"))};
}

Json to_json(const Camera& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

Camera camera_from_json(const Json& j) {
  Camera c{get<double>(j, "fx"), get<double>(j, "fy"), get<double>(j, "cx"),
           get<double>(j, "cy"), get<int>(j, "width"), get<int>(j, "height")};
  validate(c);
  return c;
}

Json to_json(const FitConfig& c) {
  Json j = Json::object();
  for (const auto& f : kConfigDoubles) j[f.name] = c.*f.member;
  for (const auto& f : kConfigInts) j[f.name] = c.*f.member;
  j["penetration_guard"] = c.penetration_guard;
  return j;
}

FitConfig fit_config_from_json(const Json& j) {
  if (!j.is_object()) bad("config must be an object");
  FitConfig c;
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& f : kConfigDoubles)
      if (key == f.name) c.*f.member = as<double>(value, f.name), known = true;
    for (const auto& f : kConfigInts)
      if (key == f.name) c.*f.member = as<int>(value, f.name), known = true;
    if (key == "penetration_guard") c.penetration_guard = as<bool>(value, "penetration_guard"), known = true;
    if (!known) bad("unknown config key '" + key + "'");
  }
  validate(c);
  return c;
}

Json to_json(const PoseVector& p) {
  Json rot = Json::array();
  for (const Vec3& r : p.rotations) rot.push_back(to_json(r));
  return {{"rotations", rot}, {"translation", to_json(p.translation)}};
}

PoseVector pose_from_json(const Json& j) {
  return {list<Vec3>(j, "rotations", vec3_from_json), vec3_from_json(field(j, "translation"))};
}

Json to_json(const RigidPose& p) {
  return {{"rotation", to_json(p.rotation)}, {"translation", to_json(p.translation)}, {"scale", p.scale}};
}

RigidPose rigid_pose_from_json(const Json& j) {
  RigidPose p{vec3_from_json(field(j, "rotation")), vec3_from_json(field(j, "translation")), get<double>(j, "scale")};
  require(p.scale > 0.0, ErrorKind::InvalidArgument, "object scale must be positive");
  return p;
}

Json to_json(const BodyModel& m) {
  Json verts = Json::array(), faces = Json::array(), joints = Json::array(), weights = Json::array();
  for (const Vec3& v : m.mesh.vertices()) verts.push_back(to_json(v));
  for (const Face& f : m.mesh.faces()) faces.push_back({f[0], f[1], f[2]});
  for (const Joint& jt : m.joints)
    joints.push_back({{"name", jt.name}, {"parent", jt.parent}, {"rest", to_json(jt.rest)}, {"torso", jt.torso}});
  for (const auto& w : m.weights) {
    Json row = Json::array();
    for (const SkinWeight& s : w) row.push_back({s.joint, s.weight});
    weights.push_back(row);
  }
  return {{"vertices", verts},          {"faces", faces},
          {"joints", joints},           {"weights", weights},
          {"part_names", m.part_names}, {"vertex_part", m.vertex_part},
          {"part_joint", m.part_joint}};
}

BodyModel body_model_from_json(const Json& j) {
  BodyModel m;
  std::vector<Vec3> verts = list<Vec3>(j, "vertices", vec3_from_json);
  std::vector<Face> faces = list<Face>(j, "faces", [](const Json& f) {
    if (!f.is_array() || f.size() != 3) bad("faces must be index triples");
    return Face{as<int>(f[0], "faces"), as<int>(f[1], "faces"), as<int>(f[2], "faces")};
  });
  for (const Face& f : faces)
    for (int v : f)
      if (v < 0 || v >= static_cast<int>(verts.size())) bad("face index " + std::to_string(v) + " out of range");
  m.mesh = build_mesh(std::move(verts), std::move(faces));
  m.joints = list<Joint>(j, "joints", [](const Json& x) {
    Joint jt{get<std::string>(x, "name"), get<int>(x, "parent"), vec3_from_json(field(x, "rest")), false};
    get_opt(x, "torso", jt.torso);
    return jt;
  });
  m.weights = list<std::vector<SkinWeight>>(j, "weights", [](const Json& row) {
    if (!row.is_array()) bad("weights must be lists of [joint, weight]");
    std::vector<SkinWeight> out;
    for (const Json& p : row) {
      if (!p.is_array() || p.size() != 2) bad("weights must be lists of [joint, weight]");
      out.push_back({as<int>(p[0], "weights"), as<double>(p[1], "weights")});
    }
    return out;
  });
  m.part_names = get<std::vector<std::string>>(j, "part_names");
  m.vertex_part = get<std::vector<int>>(j, "vertex_part");
  m.part_joint = get<std::map<std::string, int>>(j, "part_joint");
  validate(m);
  return m;
}

BodyModel load_body_model(const std::string& path) {
  try {
    return body_model_from_json(load_json(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.message());
  }
}

Json to_json(const CorrespondenceSet& s) {
  Json out = Json::array();
  for (const Correspondence& c : s.pairs)
    out.push_back({{"body_vertex", c.body_vertex}, {"object_point", to_json(c.object_point)}, {"patch_id", c.patch_id}});
  return out;
}

CorrespondenceSet correspondences_from_json(const Json& j) {
  if (!j.is_array()) bad("correspondences must be a list");
  CorrespondenceSet s;
  for (const Json& c : j)
    s.pairs.push_back({get<int>(c, "body_vertex"), surface_point_from_json(field(c, "object_point")),
                       get<int>(c, "patch_id")});
  return s;
}

Json to_json(const ParamPatch& p) {
  Json recs = Json::array();
  for (const ParamRecord& r : p.records) recs.push_back({r.vertex, r.t, r.d, r.alpha});
  return {{"patch_id", p.patch_id}, {"axis_length", p.axis_length}, {"records", recs}};
}

ParamPatch param_patch_from_json(const Json& j) {
  ParamPatch p{get<int>(j, "patch_id"), get<double>(j, "axis_length"), {}};
  p.records = list<ParamRecord>(j, "records", [](const Json& r) {
    if (!r.is_array() || r.size() != 4) bad("param records must be [vertex, t, d, alpha]");
    return ParamRecord{as<int>(r[0], "vertex"), as<double>(r[1], "t"), as<double>(r[2], "d"), as<double>(r[3], "alpha")};
  });
  return p;
}

Json to_json(const GeodesicPath& p) {
  Json wps = Json::array();
  for (const SurfacePoint& w : p.waypoints) wps.push_back(to_json(w));
  return {{"waypoints", wps},
          {"segment_faces", p.segment_faces},
          {"length", p.length},
          {"initial_direction", to_json(p.initial_direction)}};
}

GeodesicPath geodesic_path_from_json(const Json& j) {
  GeodesicPath p;
  p.waypoints = list<SurfacePoint>(j, "waypoints", surface_point_from_json);
  p.segment_faces = get<std::vector<int>>(j, "segment_faces");
  p.length = get<double>(j, "length");
  p.initial_direction = vec3_from_json(field(j, "initial_direction"));
  return p;
}

Json to_json(const StageReport& r) {
  return {{"trace", r.trace},
          {"initial_loss", r.initial_loss},
          {"final_loss", r.final_loss},
          {"initial_penetration", r.initial_penetration},
          {"final_penetration", r.final_penetration},
          {"iterations", r.iterations},
          {"seconds", r.seconds}};
}

Json to_json(const FitResult& r) {
  Json stages = Json::array();
  for (const StageReport& s : r.stages) stages.push_back(to_json(s));
  return {{"object_pose", to_json(r.object_pose)},
          {"object_center", to_json(r.object_center)},
          {"theta", to_json(r.theta)},
          {"stages", stages},
          {"dropped", r.dropped},
          {"chains_empty", r.chains_empty}};
}

FitResult fit_result_from_json(const Json& j) {
  FitResult r;
  r.object_pose = rigid_pose_from_json(field(j, "object_pose"));
  r.object_center = vec3_from_json(field(j, "object_center"));
  r.theta = pose_from_json(field(j, "theta"));
  r.stages = list<StageReport>(j, "stages", [](const Json& s) {
    StageReport out;
    out.trace = get<std::vector<double>>(s, "trace");
    out.initial_loss = get<double>(s, "initial_loss");
    out.final_loss = get<double>(s, "final_loss");
    out.initial_penetration = get<double>(s, "initial_penetration");
    out.final_penetration = get<double>(s, "final_penetration");
    out.iterations = get<int>(s, "iterations");
    out.seconds = get<double>(s, "seconds");
    return out;
  });
  get_opt(j, "dropped", r.dropped);
  get_opt(j, "chains_empty", r.chains_empty);
  return r;
}

Json to_json(const EvalReport& r) {
  Json j = {{"pa_cd_cm",
             {{"human", r.chamfer.human}, {"object", r.chamfer.object}, {"combined", r.chamfer.combined}}},
            {"alignment",
             {{"scale", r.chamfer.alignment.scale},
              {"translation", to_json(r.chamfer.alignment.translation)},
              {"rotation",
               {to_json(r.chamfer.alignment.rotation.row(0).transpose()),
                to_json(r.chamfer.alignment.rotation.row(1).transpose()),
                to_json(r.chamfer.alignment.rotation.row(2).transpose())}}}},
            {"samples", r.samples},
            {"seed", r.seed}};
  if (r.body_contact) j["body_contact"] = to_json(*r.body_contact);
  if (r.object_contact) j["object_contact"] = to_json(*r.object_contact);
  return j;
}

}  // namespace pico
