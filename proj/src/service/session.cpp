#include "pico/service/session.hpp"

#include "pico/io/mesh_io.hpp"

#include <chrono>
#include <filesystem>
#include <regex>

namespace pico {

namespace fs = std::filesystem;

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json mesh_json(const SurfaceMesh& m) {
  Json verts = Json::array(), faces = Json::array();
  for (const Vec3& v : m.vertices()) verts.push_back(to_json(v));
  for (const Face& f : m.faces()) faces.push_back({f[0], f[1], f[2]});
  return {{"vertices", verts}, {"faces", faces}};
}

std::string resolve(const std::string& dir, const std::string& p) {
  return fs::path(p).is_absolute() ? p : (fs::path(dir) / p).string();
}

}  // namespace

Session::Session(std::string id, const std::string& dir) : id_(std::move(id)) {
  const Json j = load_json((fs::path(dir) / "session.json").string());
  try {
    image_id_ = j.at("image").at("id").get<std::string>();
    image_path_ = j.at("image").value("path", "");
    object_id_ = j.at("object").at("id").get<std::string>();
    object_path_ = j.at("object").at("path").get<std::string>();
    contacts_ = j.at("contacts").get<std::vector<int>>();
    annotator_ = j.value("annotator", "");
    body_ = load_mesh_file(resolve(dir, j.at("body").get<std::string>()));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, "session '" + id_ + "': " + e.what());
  }
  object_ = load_mesh_file(resolve(dir, object_path_));
  std::sort(contacts_.begin(), contacts_.end());
  contacts_.erase(std::unique(contacts_.begin(), contacts_.end()), contacts_.end());
  patches_ = prepare_patches(body_, contacts_);
  created_ = updated_ = now_utc();
}

const PreparedPatch& Session::prepared(int patch_id) const {
  for (const PreparedPatch& p : patches_)
    if (p.param.patch_id == patch_id) return p;
  throw Error(ErrorKind::InvalidArgument, "no patch " + std::to_string(patch_id));
}

Json Session::view() const {
  Json patches = Json::array();
  for (const PreparedPatch& p : patches_) {
    Json positions = Json::array();
    for (const Vec3& x : p.axis.path.positions(body_)) positions.push_back(to_json(x));
    patches.push_back({{"patch_id", p.param.patch_id},
                       {"vertices", p.patch.vertices},
                       {"axis", to_json(p.axis.path)},
                       {"axis_positions", positions}});
  }
  Json body = mesh_json(body_);
  body["contacts"] = contacts_;
  body["patches"] = patches;
  Json object = mesh_json(object_);
  object["id"] = object_id_;
  return {{"session", id_},
          {"image", {{"id", image_id_}, {"path", image_path_}}},
          {"body", body},
          {"object", object},
          {"status", status()}};
}

void Session::push_undo() {
  undo_.push_back(state_);
  if (undo_.size() > kUndoDepth) undo_.pop_front();
}

Json Session::transfer(int patch_id, const SurfacePoint& click1, const Vec3& click2) {
  const PreparedPatch& p = prepared(patch_id);
  require(on_mesh(object_, click1), ErrorKind::InvalidArgument,
          "click1 is not a valid point on the object (barycentric residual above 1e-6)");
  AnnotationPatch placed = place_patch(object_, object_id_, p, click1, click2);
  push_undo();
  state_.committed.erase(patch_id);
  state_.pending = placed;
  updated_ = now_utc();

  Json points = Json::array(), positions = Json::array();
  for (const Correspondence& c : placed.correspondences.pairs) {
    points.push_back(to_json(c.object_point));
    positions.push_back(to_json(object_.position(c.object_point)));
  }
  return {{"patch_id", patch_id},
          {"points", points},
          {"positions", positions},
          {"correspondences", to_json(placed.correspondences)},
          {"dropped", placed.dropped},
          {"status", status()}};
}

Json Session::commit(int patch_id) {
  require(state_.pending && state_.pending->patch_id == patch_id, ErrorKind::Conflict,
          "patch " + std::to_string(patch_id) + " has no pending transfer");
  push_undo();
  state_.committed[patch_id] = std::move(*state_.pending);
  state_.pending.reset();
  updated_ = now_utc();
  return status();
}

Json Session::undo() {
  require(!undo_.empty(), ErrorKind::Conflict, "nothing to undo");
  state_ = std::move(undo_.back());
  undo_.pop_back();
  updated_ = now_utc();
  return status();
}

Json Session::status() const {
  Json committed = Json::array();
  for (const auto& [pid, _] : state_.committed) committed.push_back(pid);
  return {{"committed", committed},
          {"pending", state_.pending ? Json(state_.pending->patch_id) : Json(nullptr)},
          {"undo_depth", undo_.size()},
          {"patches", patches_.size()}};
}

AnnotationDocument Session::export_document() const {
  AnnotationDocument d;
  d.image_id = image_id_;
  d.image_path = image_path_;
  d.body_contacts = contacts_;
  d.object_id = object_id_;
  d.object_path = object_path_;
  d.annotator = annotator_;
  d.created = created_;
  d.updated = updated_;
  for (const auto& [_, p] : state_.committed) d.patches.push_back(p);
  return d;
}

SessionStore::SessionStore(std::string assets_dir) : assets_(std::move(assets_dir)) {
  require(fs::is_directory(assets_), ErrorKind::IoError, "assets directory '" + assets_ + "' not found");
}

SessionStore::Entry& SessionStore::entry(const std::string& id) {
  static const std::regex valid(R"([A-Za-z0-9_\-]{1,64})");
  require(std::regex_match(id, valid), ErrorKind::NotFound, "no session '" + id + "'");
  Entry* e = nullptr;
  {
    std::lock_guard lock(mutex_);
    auto& slot = sessions_[id];
    if (!slot) slot = std::make_unique<Entry>();
    e = slot.get();
  }
  std::lock_guard lock(e->mutex);
  if (!e->session) {
    const fs::path dir = fs::path(assets_) / id;
    require(fs::exists(dir / "session.json"), ErrorKind::NotFound, "no session '" + id + "'");
    e->session = std::make_unique<Session>(id, dir.string());
  }
  return *e;
}

void write_session(const std::string& dir, const SurfaceMesh& body, std::span<const int> contacts,
                   const SurfaceMesh& object, const std::string& object_id, const std::string& image_id) {
  fs::create_directories(dir);
  save_mesh_file(body, (fs::path(dir) / "body.ply").string());
  save_mesh_file(object, (fs::path(dir) / "object.ply").string());
  save_json({{"image", {{"id", image_id}, {"path", image_id + ".png"}}},
             {"body", "body.ply"},
             {"contacts", std::vector<int>(contacts.begin(), contacts.end())},
             {"object", {{"id", object_id}, {"path", "object.ply"}}}},
            (fs::path(dir) / "session.json").string());
}

}  // namespace pico
