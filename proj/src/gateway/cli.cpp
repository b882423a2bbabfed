#include "tabsem/gateway/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tabsem/decision_log.hpp"
#include "tabsem/error.hpp"
#include "tabsem/gateway/http.hpp"
#include "tabsem/gateway/views.hpp"
#include "tabsem/gateway/workspace.hpp"

namespace tabsem::gateway {

namespace fs = std::filesystem;

namespace {

std::string read_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> parse_meta(const std::vector<std::string>& pairs) {
    std::map<std::string, std::string> out;
    for (const auto& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("--meta expects key=value, got '" + p + "'");
        out[p.substr(0, eq)] = p.substr(eq + 1);
    }
    return out;
}

std::string fmt_score(double s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", s);
    return buf;
}

std::string fmt_candidate(const Candidate& c) {
    return c.target + " \"" + c.label + "\" (" + std::string(to_string(c.match_kind)) + ", " +
           fmt_score(c.score) + ")";
}

std::string fmt_flag(const InconsistencyFlag& f) {
    return "flag (row " + std::to_string(f.row) + ", column " + std::to_string(f.column) + "): found " +
           std::string(to_string(f.found_type)) + ", expected " + std::string(to_string(f.expected_type)) +
           (f.resolution == Resolution::unresolved ? "" : " [" + std::string(to_string(f.resolution)) + "]");
}

void print_columns(std::ostream& out, const Session& s) {
    for (const auto& c : s.column_annotations()) {
        out << "column " << c.column << " \"" << s.properties()[c.column] << "\": type=" << to_string(c.assigned_type);
        if (c.assigned_type != c.inferred_type) out << " (inferred " << to_string(c.inferred_type) << ")";
        out << " predicate=";
        if (c.chosen_predicate) {
            const auto* p = s.store().find_predicate(*c.chosen_predicate);
            out << c.chosen_predicate->str() << " \"" << (p ? p->label : "?") << "\" by " << to_string(c.chosen_by);
        } else if (!c.predicate_candidates.empty()) {
            out << "pending, best " << fmt_candidate(c.predicate_candidates.front());
        } else if (c.create_new_label) {
            out << "pending, create \"" << *c.create_new_label << "\"";
        } else {
            out << "none";
        }
        out << " flags=" << c.flags.size() << "\n";
    }
}

void print_report(std::ostream& out, const StageReport& r) {
    out << "stage: " << r.achieved_stage << "\n";
    for (const auto& c : r.criteria) {
        out << "  [" << (c.pass ? "pass" : "fail") << "] " << c.id << " (stage " << c.stage << "): " << c.evidence
            << "\n";
    }
}

int exit_code_for(const Error& e) {
    return e.code() == "IOError" || e.code() == "InternalError" ? kExitInternal : kExitUser;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semantic table annotation: CSV import, human/machine annotation, KG export", "tabsem"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string state_dir;
    bool json_mode = false;
    std::string base = kDefaultBase;
    app.add_option("--state-dir", state_dir, "Workspace directory (default $TABSEM_STATE or .tabsem)");
    app.add_flag("--json", json_mode, "Machine-readable envelopes on standard output");
    app.add_option("--base", base, "Namespace for exported IRIs");

    // import
    auto* import = app.add_subcommand("import", "Import a CSV file and open an annotation session");
    std::string import_path;
    std::string import_store;
    std::string header = "auto";
    std::string delimiter = ",";
    std::string source_id;
    std::vector<std::string> import_meta;
    import->add_option("csv", import_path, "CSV file")->required();
    import->add_option("--store", import_store, "KG store snapshot to annotate against");
    import->add_option("--header", header, "Header row: auto|present|absent")
        ->check(CLI::IsMember({"auto", "present", "absent"}));
    import->add_option("--delimiter", delimiter, "Field delimiter (one character)");
    import->add_option("--source-id", source_id, "Source identifier (default: file name)");
    import->add_option("--meta", import_meta, "Metadata key=value (repeatable)");

    // suggest
    auto* suggest = app.add_subcommand("suggest", "Show pending machine suggestions");
    std::string session_id;
    suggest->add_option("session", session_id, "Session id")->required();

    // decide
    auto* decide = app.add_subcommand("decide", "Apply a decision log to a session");
    std::string log_path;
    decide->add_option("session", session_id, "Session id")->required();
    decide->add_option("--apply", log_path, "Decision log (one JSON record per line)")->required();

    // finalize
    auto* fin = app.add_subcommand("finalize", "Finalize a session into an annotated model");
    fin->add_option("session", session_id, "Session id")->required();

    // stage
    auto* stage = app.add_subcommand("stage", "Classify an artifact (file or session id) against the evolution model");
    std::string artifact;
    std::vector<std::string> stage_meta;
    stage->add_option("artifact", artifact, "Artifact file or session id")->required();
    stage->add_option("--meta", stage_meta, "Metadata key=value (repeatable)");

    // export
    auto* exp = app.add_subcommand("export", "Export a finalized session");
    std::string format;
    std::string out_path;
    exp->add_option("session", session_id, "Session id")->required();
    exp->add_option("--format", format, "jsonld|ntriples")->required()->check(CLI::IsMember({"jsonld", "ntriples"}));
    exp->add_option("--out", out_path, "Write to a file instead of standard output");

    // integrate
    auto* integ = app.add_subcommand("integrate", "Integrate a finalized session into the KG store");
    std::string target_store;
    integ->add_option("session", session_id, "Session id")->required();
    integ->add_option("--store", target_store, "Target store (default: workspace store)");

    // log
    auto* logc = app.add_subcommand("log", "Print a session's decision log");
    logc->add_option("session", session_id, "Session id")->required();

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    int port = 8080;
    std::string host = "127.0.0.1";
    serve_cmd->add_option("--port", port, "Port");
    serve_cmd->add_option("--host", host, "Bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return kExitOk;
        err << "error: " << e.what() << "\n\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUser;
    }

    auto emit = [&](const ordered_json& payload, const std::function<void()>& text) {
        if (json_mode) out << ok_envelope(payload).dump() << "\n";
        else text();
    };

    try {
        Workspace ws(state_dir.empty() ? Workspace::default_root() : fs::path(state_dir), ExportConfig{base});

        if (*import) {
            ImportOptions opt;
            if (header == "present") opt.csv.header_mode = HeaderMode::present;
            else if (header == "absent") opt.csv.header_mode = HeaderMode::absent;
            if (delimiter.size() != 1) throw ValidationError("--delimiter must be one character");
            opt.csv.delimiter = delimiter == "\\t" ? '\t' : delimiter[0];
            opt.source_id = source_id.empty() ? fs::path(import_path).filename().string() : source_id;
            if (!import_store.empty()) opt.store = import_store;
            // sidecar metadata, then explicit --meta
            const fs::path sidecar = import_path + ".meta.json";
            if (fs::exists(sidecar)) {
                const auto meta = nlohmann::json::parse(read_input(sidecar.string()));
                if (!meta.is_object()) throw ValidationError(sidecar.string() + ": metadata must be an object");
                for (const auto& [k, v] : meta.items())
                    opt.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
            for (const auto& [k, v] : parse_meta(import_meta)) opt.metadata[k] = v;

            const auto r = ws.import_csv(read_input(import_path), opt);
            auto payload = session_json(r.session);
            ordered_json warnings = ordered_json::array();
            for (const auto& w : r.warnings) warnings.push_back({{"line", w.line}, {"message", w.message}});
            payload["warnings"] = std::move(warnings);
            emit(payload, [&] {
                const auto& t = r.session.table();
                out << "session: " << r.id << "\n";
                out << "source: " << t.source_id << " (" << t.column_count() << " columns, " << t.rows.size()
                    << " rows)\n";
                out << "phase: " << to_string(r.session.phase()) << "\n";
                print_columns(out, r.session);
                out << "unresolved flags: " << r.session.unresolved_flags().size() << "\n";
                for (const auto& w : r.warnings) out << "warning: line " << w.line << ": " << w.message << "\n";
            });
        } else if (*suggest) {
            const auto s = ws.get(session_id);
            emit(session_json(s), [&] {
                out << "session: " << s.id() << "\nphase: " << to_string(s.phase()) << "\n";
                for (const auto& c : s.column_annotations()) {
                    if (c.chosen_predicate) continue;
                    out << "column " << c.column << " \"" << s.properties()[c.column] << "\": ";
                    if (c.predicate_candidates.empty()) {
                        out << "create \"" << c.create_new_label.value_or("") << "\"\n";
                        continue;
                    }
                    for (std::size_t i = 0; i < c.predicate_candidates.size(); ++i)
                        out << (i ? ", " : "") << fmt_candidate(c.predicate_candidates[i]);
                    out << "\n";
                }
                for (const auto& f : s.unresolved_flags()) out << fmt_flag(f) << "\n";
                for (const auto& [key, cell] : s.cell_annotations()) {
                    for (std::size_t i = 0; i < cell.values.size(); ++i) {
                        const auto& v = cell.values[i];
                        if (v.alignment) continue;
                        out << "cell (row " << key.first << ", column " << key.second << ") value " << i << " \""
                            << v.value_text << "\": ";
                        if (v.candidates.empty()) out << "no candidates";
                        for (std::size_t k = 0; k < v.candidates.size(); ++k)
                            out << (k ? ", " : "") << fmt_candidate(v.candidates[k]);
                        out << "\n";
                    }
                }
                out << "finalize blockers: " << s.finalize_blockers().size() << "\n";
            });
        } else if (*decide) {
            const auto log = read_decision_log(read_input(log_path));
            const auto before = ws.get(session_id);
            const auto s = ws.apply_log(session_id, log);
            ordered_json payload;
            payload["applied"] = s.log().size() - before.log().size();
            payload["session"] = session_json(s);
            emit(payload, [&] {
                out << "applied " << (s.log().size() - before.log().size()) << " decisions (log length "
                    << s.log().size() << ")\n";
                out << "phase: " << to_string(s.phase()) << "\n";
                out << "unresolved flags: " << s.unresolved_flags().size() << "\n";
                out << "finalize blockers: " << s.finalize_blockers().size() << "\n";
            });
        } else if (*fin) {
            const auto model = ws.finalize(session_id);
            const auto report = ws.stage(session_id);
            ordered_json payload;
            payload["model"] = model_summary_json(model);
            payload["stage_report"] = report_json(report);
            emit(payload, [&] {
                out << "finalized " << session_id << ": " << model.structure.contributions.size()
                    << " contributions\n";
                print_report(out, report);
            });
        } else if (*stage) {
            StageReport report;
            if (!fs::exists(artifact) && artifact.size() > 1 && artifact[0] == 's') {
                report = ws.stage(artifact);
            } else {
                report = classify_stage(describe_artifact(artifact, parse_meta(stage_meta)));
            }
            emit(report_json(report), [&] { print_report(out, report); });
        } else if (*exp) {
            const auto content = ws.export_model(session_id, format);
            if (!out_path.empty()) {
                std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
                f << content;
                if (!f.flush()) throw Error("IOError", "cannot write " + out_path);
            }
            ordered_json payload;
            payload["format"] = format;
            if (out_path.empty()) payload["content"] = content;
            else payload["path"] = out_path;
            emit(payload, [&] {
                if (out_path.empty()) out << content;
                else out << "wrote " << out_path << "\n";
            });
        } else if (*integ) {
            const auto r = ws.integrate(session_id, target_store.empty() ? std::nullopt
                                                                         : std::optional<fs::path>(target_store));
            auto payload = receipt_json(r.receipt);
            payload["manifest"] = r.manifest.string();
            emit(payload, [&] {
                out << "statements: " << r.receipt.statements.size() << " (added " << r.receipt.statements_added
                    << ", existing " << r.receipt.statements_existing << ")\n";
                out << "entities created: " << r.receipt.entities_created.size() << "\n";
                out << "predicates created: " << r.receipt.predicates_created.size() << "\n";
                out << "manifest: " << r.manifest.string() << "\n";
                print_report(out, r.receipt.report);
            });
        } else if (*logc) {
            const auto s = ws.get(session_id);
            ordered_json payload = ordered_json::array();
            for (const auto& d : s.log()) payload.push_back(decision_to_json(d));
            emit(payload, [&] { out << write_decision_log(s.log()); });
        } else if (*serve_cmd) {
            err << "listening on http://" << host << ":" << port << "\n";
            if (!serve(ws, host, port)) throw Error("IOError", "cannot listen on " + host + ":" + std::to_string(port));
        }
        return kExitOk;
    } catch (const Error& e) {
        if (json_mode) {
            out << error_envelope(e).dump() << "\n";
        } else {
            err << e.code() << ": " << e.what() << "\n";
            for (const auto& d : e.details()) err << "  " << d << "\n";
        }
        return exit_code_for(e);
    } catch (const std::exception& e) {
        if (json_mode) out << error_envelope("InternalError", e.what()).dump() << "\n";
        else err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace tabsem::gateway
