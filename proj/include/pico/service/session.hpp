#pragma once

#include "pico/io/annotation.hpp"

#include <deque>
#include <memory>
#include <mutex>

namespace pico {

/// One annotation session, loaded from `<assets>/<id>/session.json`:
///   {"image": {"id", "path"}, "body": <mesh>, "contacts": [...],
///    "object": {"id", "path"}, "annotator": "..."}
/// with mesh paths relative to the session directory.
class Session {
 public:
  static constexpr size_t kUndoDepth = 64;

  Session(std::string id, const std::string& dir);

  const std::string& id() const { return id_; }

  /// Three-panel payload: image ref, body mesh with patches and axes, object mesh.
  Json view() const;
  /// Places `patch_id` from the two clicks; the result becomes the pending
  /// patch (replacing any pending or committed placement of that id).
  Json transfer(int patch_id, const SurfacePoint& click1, const Vec3& click2);
  /// Commits the pending patch. Throws Conflict unless it is `patch_id`.
  Json commit(int patch_id);
  /// Restores the state before the last transfer or commit. Throws Conflict
  /// when there is nothing to undo.
  Json undo();
  AnnotationDocument export_document() const;
  /// Committed ids, pending id, undo depth.
  Json status() const;

 private:
  struct Snapshot {
    std::map<int, AnnotationPatch> committed;
    std::optional<AnnotationPatch> pending;
  };
  void push_undo();
  const PreparedPatch& prepared(int patch_id) const;

  std::string id_;
  std::string image_id_, image_path_, annotator_;
  std::string object_id_, object_path_;
  SurfaceMesh body_, object_;
  std::vector<int> contacts_;
  std::vector<PreparedPatch> patches_;
  Snapshot state_;
  std::deque<Snapshot> undo_;
  std::string created_, updated_;
};

/// Sessions by id, loaded on first use. Each session is mutated under its own
/// lock; different sessions proceed in parallel.
class SessionStore {
 public:
  explicit SessionStore(std::string assets_dir);

  /// Runs `f(session)` under the session's lock. Throws NotFound for an
  /// unknown or malformed id.
  template <class F>
  auto with_session(const std::string& id, F&& f) {
    Entry& e = entry(id);
    std::lock_guard lock(e.mutex);
    return f(*e.session);
  }

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Session> session;
  };
  Entry& entry(const std::string& id);

  std::string assets_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
};

/// Writes a session directory with the given meshes and contacts.
void write_session(const std::string& dir, const SurfaceMesh& body, std::span<const int> contacts,
                   const SurfaceMesh& object, const std::string& object_id, const std::string& image_id);

}  // namespace pico
