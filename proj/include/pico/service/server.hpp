#pragma once

#include "pico/service/session.hpp"

namespace httplib {
class Server;
}

namespace pico {

/// HTTP status for an error kind (NotFound 404, Conflict 409, input errors
/// 400, geometry failures 422, anything else 500).
int http_status(ErrorKind kind);

/// Registers the session routes:
///   GET  /session/{id}           POST /session/{id}/transfer
///   POST /session/{id}/commit    POST /session/{id}/undo
///   GET  /session/{id}/export
/// Errors answer {"error": kind, "message": ...}.
void register_routes(httplib::Server& server, SessionStore& store);

/// Blocks serving `assets` on 127.0.0.1:`port` until the process ends.
void serve(const std::string& assets, int port, const std::string& host = "127.0.0.1");

}  // namespace pico
