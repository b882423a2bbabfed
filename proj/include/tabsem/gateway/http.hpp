#pragma once

#include <memory>
#include <string>

#include "tabsem/gateway/workspace.hpp"

namespace httplib {
class Server;
}

namespace tabsem::gateway {

// HTTP status for an engine error code.
int http_status(const std::string& code);

// Registers every endpoint on `server`:
//
//   GET  /healthz
//   POST /sessions                        multipart field `file` (CSV) or a text/csv body
//   GET  /sessions/:id
//   POST /sessions/:id/decisions          one decision record
//   GET  /sessions/:id/candidates?row=&col=
//   POST /sessions/:id/finalize
//   GET  /sessions/:id/export?format=jsonld|ntriples
//   POST /sessions/:id/integrate
//   GET  /sessions/:id/stage
//   GET  /store/search?q=&kind=entity|predicate&limit=
//
// Every response body is an envelope: {"status":"ok","payload":...} or
// {"status":"error","error":{"code","message","details"}}.
void register_routes(httplib::Server& server, Workspace& workspace);

// Blocks until the server stops.
bool serve(Workspace& workspace, const std::string& host, int port);

}  // namespace tabsem::gateway
