#include "pico/service/server.hpp"

#include <httplib.h>

namespace pico {

namespace {

constexpr const char* kId = R"(/session/([A-Za-z0-9_\-]+))";

void reply(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
httplib::Server::Handler guarded(SessionStore& store, F f) {
  return [&store, f](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string id = req.matches[1];
      reply(res, store.with_session(id, [&](Session& s) { return f(s, req); }));
    } catch (const Error& e) {
      reply(res, {{"error", to_string(e.kind())}, {"message", e.message()}}, http_status(e.kind()));
    } catch (const std::exception& e) {
      reply(res, {{"error", "Internal"}, {"message", e.what()}}, 500);
    }
  };
}

Json body_of(const httplib::Request& req) {
  const Json j = parse_json(req.body, "request body");
  require(j.is_object(), ErrorKind::ParseError, "request body must be an object");
  return j;
}

int patch_id_of(const Json& j) {
  require(j.contains("patch_id") && j["patch_id"].is_number_integer(), ErrorKind::ParseError,
          "missing integer 'patch_id'");
  return j["patch_id"].get<int>();
}

}  // namespace

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Conflict: return 409;
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::SchemaVersionUnsupported:
    case ErrorKind::DimensionMismatch: return 400;
    case ErrorKind::TracingStuck:
    case ErrorKind::DegenerateDirection:
    case ErrorKind::DegeneratePatch:
    case ErrorKind::Disconnected: return 422;
    default: return 500;
  }
}

void register_routes(httplib::Server& server, SessionStore& store) {
  const std::string id = kId;
  server.Get(id, guarded(store, [](Session& s, const httplib::Request&) { return s.view(); }));
  server.Post(id + "/transfer", guarded(store, [](Session& s, const httplib::Request& req) {
                const Json j = body_of(req);
                require(j.contains("click1") && j.contains("click2"), ErrorKind::ParseError,
                        "transfer needs click1 and click2");
                SurfacePoint c1;
                Vec3 c2;
                try {
                  c1 = surface_point_from_json(j["click1"]);
                  c2 = vec3_from_json(j["click2"]);
                } catch (const Json::exception& e) {
                  throw Error(ErrorKind::ParseError, e.what());
                }
                return s.transfer(patch_id_of(j), c1, c2);
              }));
  server.Post(id + "/commit", guarded(store, [](Session& s, const httplib::Request& req) {
                return s.commit(patch_id_of(body_of(req)));
              }));
  server.Post(id + "/undo", guarded(store, [](Session& s, const httplib::Request&) { return s.undo(); }));
  server.Get(id + "/export", guarded(store, [](Session& s, const httplib::Request&) {
               return to_json(s.export_document());
             }));
}

void serve(const std::string& assets, int port, const std::string& host) {
  SessionStore store(assets);
  httplib::Server server;
  register_routes(server, store);
  require(server.listen(host, port), ErrorKind::IoError, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace pico
