#include "tabsem/gateway/http.hpp"

#include <httplib.h>

#include <set>

#include "tabsem/decision_log.hpp"
#include "tabsem/error.hpp"
#include "tabsem/gateway/views.hpp"

namespace tabsem::gateway {

int http_status(const std::string& code) {
    static const std::set<std::string> bad_request = {
        "ValidationError", "IntegrityError",        "ReplayError", "ParseError",  "EncodingError",
        "EmptyInputError", "InsufficientRowsError", "SpecError",   "ClassifyError"};
    if (bad_request.count(code)) return 400;
    if (code == "NotFoundError") return 404;
    if (code == "PhaseError" || code == "FinalizeBlockedError") return 409;
    return 500;
}

namespace {

using Handler = std::function<std::pair<int, ordered_json>(const httplib::Request&)>;

void reply(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
        try {
            auto [status, payload] = h(req);
            reply(res, status, ok_envelope(std::move(payload)));
        } catch (const Error& e) {
            reply(res, http_status(e.code()), error_envelope(e));
        } catch (const nlohmann::json::exception& e) {
            reply(res, 400, error_envelope("ValidationError", std::string("malformed JSON: ") + e.what()));
        } catch (const std::exception& e) {
            reply(res, 500, error_envelope("InternalError", e.what()));
        }
    };
}

std::size_t index_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) throw ValidationError(std::string("missing query parameter '") + name + "'");
    const auto v = req.get_param_value(name);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError(std::string("query parameter '") + name + "' must be a non-negative integer");
    return std::stoul(v);
}

HeaderMode header_mode(const std::string& s) {
    if (s == "auto") return HeaderMode::automatic;
    if (s == "present") return HeaderMode::present;
    if (s == "absent") return HeaderMode::absent;
    throw ValidationError("header must be auto|present|absent");
}

std::string form_value(const httplib::Request& req, const char* key) {
    if (req.has_file(key)) return req.get_file_value(key).content;
    if (req.has_param(key)) return req.get_param_value(key);
    return {};
}

}  // namespace

void register_routes(httplib::Server& server, Workspace& ws) {
    server.Get("/healthz", guarded([](const httplib::Request&) {
                   return std::pair{200, ordered_json{{"healthy", true}}};
               }));

    server.Post("/sessions", guarded([&ws](const httplib::Request& req) {
                    ImportOptions opt;
                    std::string csv;
                    if (req.is_multipart_form_data()) {
                        if (!req.has_file("file")) throw ValidationError("multipart field 'file' is required");
                        const auto file = req.get_file_value("file");
                        csv = file.content;
                        if (!file.filename.empty()) opt.source_id = file.filename;
                        if (auto h = form_value(req, "header"); !h.empty()) opt.csv.header_mode = header_mode(h);
                        if (auto d = form_value(req, "delimiter"); !d.empty()) {
                            if (d.size() != 1) throw ValidationError("delimiter must be one character");
                            opt.csv.delimiter = d[0];
                        }
                        if (auto sid = form_value(req, "source_id"); !sid.empty()) opt.source_id = sid;
                        if (auto m = form_value(req, "metadata"); !m.empty()) {
                            const auto meta = nlohmann::json::parse(m);
                            if (!meta.is_object()) throw ValidationError("metadata must be a JSON object");
                            for (const auto& [k, v] : meta.items())
                                opt.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
                        }
                    } else {
                        csv = req.body;
                        if (req.has_param("header")) opt.csv.header_mode = header_mode(req.get_param_value("header"));
                        if (req.has_param("source_id")) opt.source_id = req.get_param_value("source_id");
                    }
                    auto r = ws.import_csv(csv, opt);
                    auto body = session_json(r.session);
                    ordered_json warnings = ordered_json::array();
                    for (const auto& w : r.warnings) warnings.push_back({{"line", w.line}, {"message", w.message}});
                    body["warnings"] = std::move(warnings);
                    return std::pair{201, body};
                }));

    server.Get("/sessions/:id", guarded([&ws](const httplib::Request& req) {
                   return std::pair{200, session_json(ws.get(req.path_params.at("id")))};
               }));

    server.Post("/sessions/:id/decisions", guarded([&ws](const httplib::Request& req) {
                    const auto d = decision_from_json(nlohmann::json::parse(req.body));
                    const auto r = ws.decide(req.path_params.at("id"), d);
                    ordered_json body;
                    body["decision"] = decision_to_json(r.after.log().back());
                    body["delta"] = session_delta(r.before, r.after);
                    return std::pair{200, body};
                }));

    server.Get("/sessions/:id/candidates", guarded([&ws](const httplib::Request& req) {
                   const auto s = ws.get(req.path_params.at("id"));
                   const auto row = index_param(req, "row");
                   const auto col = index_param(req, "col");
                   if (col >= s.table().column_count() || row >= s.table().rows.size())
                       throw NotFoundError("no cell (" + std::to_string(row) + ", " + std::to_string(col) + ")");
                   auto it = s.cell_annotations().find({row, col});
                   if (it == s.cell_annotations().end())
                       throw ValidationError("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                                             ") is not entity-linkable");
                   return std::pair{200, cell_json(it->second)};
               }));

    server.Post("/sessions/:id/finalize", guarded([&ws](const httplib::Request& req) {
                    const auto& id = req.path_params.at("id");
                    const auto model = ws.finalize(id);
                    ordered_json body;
                    body["model"] = model_summary_json(model);
                    body["stage_report"] = report_json(ws.stage(id));
                    return std::pair{200, body};
                }));

    server.Get("/sessions/:id/export", guarded([&ws](const httplib::Request& req) {
                   const auto format = req.has_param("format") ? req.get_param_value("format") : "jsonld";
                   ordered_json body;
                   body["format"] = format;
                   body["content"] = ws.export_model(req.path_params.at("id"), format);
                   return std::pair{200, body};
               }));

    server.Post("/sessions/:id/integrate", guarded([&ws](const httplib::Request& req) {
                    const auto r = ws.integrate(req.path_params.at("id"));
                    return std::pair{200, receipt_json(r.receipt)};
                }));

    server.Get("/sessions/:id/stage", guarded([&ws](const httplib::Request& req) {
                   return std::pair{200, report_json(ws.stage(req.path_params.at("id")))};
               }));

    server.Get("/store/search", guarded([&ws](const httplib::Request& req) {
                   const auto q = req.has_param("q") ? req.get_param_value("q") : "";
                   const auto kind_text = req.has_param("kind") ? req.get_param_value("kind") : "entity";
                   const auto kind = target_kind_from_string(kind_text);
                   if (!kind) throw ValidationError("kind must be entity|predicate");
                   const std::size_t limit = req.has_param("limit") ? index_param(req, "limit") : 10;
                   ordered_json out = ordered_json::array();
                   for (const auto& c : ws.search(q, *kind, limit)) out.push_back(candidate_json(c));
                   return std::pair{200, out};
               }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 404) reply(res, 404, error_envelope("NotFoundError", "no such endpoint"));
        else if (res.status >= 400)
            reply(res, res.status, error_envelope("HttpError", "request failed"));
    });
}

bool serve(Workspace& workspace, const std::string& host, int port) {
    httplib::Server server;
    register_routes(server, workspace);
    return server.listen(host, port);
}

}  // namespace tabsem::gateway
