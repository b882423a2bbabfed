#include "tabsem/gateway/views.hpp"

#include "tabsem/decision_log.hpp"
#include "tabsem/text.hpp"

namespace tabsem::gateway {

using nlohmann::json;

ordered_json table_to_json(const Table& t) {
    ordered_json j;
    j["source_id"] = t.source_id;
    j["synthetic_header"] = t.synthetic_header;
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    j["metadata"] = std::move(meta);
    ordered_json header = ordered_json::array();
    for (const auto& h : t.header) header.push_back(h.raw_label);
    j["header"] = std::move(header);
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
        ordered_json r = ordered_json::array();
        for (const auto& cell : row) {
            if (cell.delimiter || cell.values != Cell::from_raw(cell.raw_text).values) {
                ordered_json c;
                c["raw"] = cell.raw_text;
                c["values"] = cell.values;
                if (cell.delimiter) c["delimiter"] = *cell.delimiter;
                r.push_back(std::move(c));
            } else {
                r.push_back(cell.raw_text);
            }
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

Table table_from_json(const json& j) {
    try {
        Table t;
        t.source_id = j.at("source_id").get<std::string>();
        t.synthetic_header = j.value("synthetic_header", false);
        const auto meta = j.value("metadata", json::object());
        for (const auto& [k, v] : meta.items()) t.metadata[k] = v.get<std::string>();
        std::size_t i = 0;
        for (const auto& label : j.at("header")) {
            const auto raw = label.get<std::string>();
            t.header.push_back({i++, raw, text::normalize_label(raw)});
        }
        for (const auto& row : j.at("rows")) {
            Row r;
            for (const auto& c : row) {
                if (c.is_string()) {
                    r.push_back(Cell::from_raw(c.get<std::string>()));
                } else {
                    Cell cell;
                    cell.raw_text = c.at("raw").get<std::string>();
                    cell.values = c.at("values").get<std::vector<std::string>>();
                    if (c.contains("delimiter")) cell.delimiter = c["delimiter"].get<std::string>();
                    r.push_back(std::move(cell));
                }
            }
            t.rows.push_back(std::move(r));
        }
        validate_table(t);
        return t;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed table document: ") + e.what());
    }
}

ordered_json candidate_json(const Candidate& c) {
    ordered_json j;
    j["target"] = c.target;
    j["label"] = c.label;
    j["score"] = c.score;
    j["match"] = to_string(c.match_kind);
    return j;
}

ordered_json flag_json(const InconsistencyFlag& f) {
    ordered_json j;
    j["row"] = f.row;
    j["column"] = f.column;
    j["found"] = to_string(f.found_type);
    j["expected"] = to_string(f.expected_type);
    j["resolution"] = to_string(f.resolution);
    return j;
}

ordered_json object_json(const Object& o) {
    ordered_json j;
    if (const auto* e = std::get_if<EntityId>(&o)) {
        j["entity"] = e->str();
    } else {
        const auto& lit = std::get<Literal>(o);
        j["literal"] = lit.lexical;
        j["datatype"] = to_string(lit.datatype);
    }
    return j;
}

ordered_json column_json(const ColumnAnnotation& c, const std::vector<PropertyRef>& properties) {
    ordered_json j;
    j["column"] = c.column;
    if (c.column < properties.size()) j["property"] = properties[c.column];
    j["inferred_type"] = to_string(c.inferred_type);
    j["assigned_type"] = to_string(c.assigned_type);
    j["type_by"] = to_string(c.type_by);
    ordered_json hist = ordered_json::object();
    for (const auto& [t, n] : c.vote_histogram) hist[std::string(to_string(t))] = n;
    j["votes"] = std::move(hist);
    ordered_json cands = ordered_json::array();
    for (const auto& cand : c.predicate_candidates) cands.push_back(candidate_json(cand));
    j["predicate_candidates"] = std::move(cands);
    j["create_new_label"] = c.create_new_label ? json(*c.create_new_label) : json(nullptr);
    j["chosen_predicate"] = c.chosen_predicate ? json(c.chosen_predicate->str()) : json(nullptr);
    j["chosen_by"] = to_string(c.chosen_by);
    ordered_json flags = ordered_json::array();
    for (const auto& f : c.flags) flags.push_back(flag_json(f));
    j["flags"] = std::move(flags);
    return j;
}

ordered_json cell_json(const CellAnnotation& c) {
    ordered_json j;
    j["row"] = c.row;
    j["column"] = c.column;
    j["delimiter"] = c.delimiter ? json(*c.delimiter) : json(nullptr);
    ordered_json values = ordered_json::array();
    for (const auto& v : c.values) {
        ordered_json vj;
        vj["text"] = v.value_text;
        ordered_json cands = ordered_json::array();
        for (const auto& cand : v.candidates) cands.push_back(candidate_json(cand));
        vj["candidates"] = std::move(cands);
        vj["alignment"] = v.alignment ? object_json(*v.alignment) : ordered_json(nullptr);
        vj["alignment_origin"] = v.alignment ? json(to_string(v.alignment_origin)) : json(nullptr);
        values.push_back(std::move(vj));
    }
    j["values"] = std::move(values);
    return j;
}

ordered_json session_json(const Session& s) {
    ordered_json j;
    j["id"] = s.id();
    j["phase"] = to_string(s.phase());
    j["table"] = table_to_json(s.table());
    j["properties"] = s.properties();
    ordered_json cols = ordered_json::array();
    for (const auto& c : s.column_annotations()) cols.push_back(column_json(c, s.properties()));
    j["columns"] = std::move(cols);
    ordered_json cells = ordered_json::array();
    for (const auto& [_, c] : s.cell_annotations()) cells.push_back(cell_json(c));
    j["cells"] = std::move(cells);
    ordered_json flags = ordered_json::array();
    for (const auto& f : s.flags()) flags.push_back(flag_json(f));
    j["flags"] = std::move(flags);
    j["unresolved_flags"] = s.unresolved_flags().size();
    j["hierarchy"] = hierarchy_to_json(s.hierarchy());
    ordered_json groups = ordered_json::array();
    for (const auto& g : s.groups()) groups.push_back(group_to_json(g));
    j["groups"] = std::move(groups);
    j["finalize_blockers"] = s.finalize_blockers();
    j["log_length"] = s.log().size();
    return j;
}

ordered_json session_delta(const Session& before, const Session& after) {
    ordered_json j;
    j["phase"] = to_string(after.phase());
    ordered_json cols = ordered_json::array();
    for (std::size_t i = 0; i < after.column_annotations().size(); ++i) {
        const auto& c = after.column_annotations()[i];
        if (i >= before.column_annotations().size() || !(before.column_annotations()[i] == c))
            cols.push_back(column_json(c, after.properties()));
    }
    j["columns"] = std::move(cols);
    ordered_json cells = ordered_json::array();
    for (const auto& [key, c] : after.cell_annotations()) {
        auto it = before.cell_annotations().find(key);
        if (it == before.cell_annotations().end() || !(it->second == c)) cells.push_back(cell_json(c));
    }
    j["cells"] = std::move(cells);
    ordered_json removed = ordered_json::array();
    for (const auto& [key, _] : before.cell_annotations()) {
        if (!after.cell_annotations().count(key)) removed.push_back({key.first, key.second});
    }
    j["removed_cells"] = std::move(removed);
    ordered_json flags = ordered_json::array();
    for (const auto& f : after.flags()) flags.push_back(flag_json(f));
    j["flags"] = std::move(flags);
    j["unresolved_flags"] = after.unresolved_flags().size();
    j["finalize_blockers"] = after.finalize_blockers().size();
    return j;
}

ordered_json report_json(const StageReport& r) {
    ordered_json j;
    j["achieved_stage"] = r.achieved_stage;
    ordered_json crit = ordered_json::array();
    for (const auto& c : r.criteria) {
        ordered_json cj;
        cj["stage"] = c.stage;
        cj["id"] = c.id;
        cj["description"] = c.description;
        cj["result"] = c.pass ? "pass" : "fail";
        cj["evidence"] = c.evidence;
        crit.push_back(std::move(cj));
    }
    j["criteria"] = std::move(crit);
    return j;
}

ordered_json receipt_json(const IntegrationReceipt& r) {
    ordered_json j;
    ordered_json ents = ordered_json::array();
    for (const auto& id : r.entities_created) ents.push_back(id.str());
    j["entities_created"] = std::move(ents);
    ordered_json preds = ordered_json::array();
    for (const auto& id : r.predicates_created) preds.push_back(id.str());
    j["predicates_created"] = std::move(preds);
    j["statements"] = r.statements.size();
    j["statements_added"] = r.statements_added;
    j["statements_existing"] = r.statements_existing;
    j["stage_report"] = report_json(r.report);
    return j;
}

ordered_json model_summary_json(const AnnotatedModel& m) {
    ordered_json j;
    j["source_id"] = m.source_id;
    j["contributions"] = m.structure.contributions.size();
    ordered_json schema = ordered_json::array();
    for (const auto& n : m.structure.schema) schema.push_back(n.label);
    j["top_level"] = std::move(schema);
    return j;
}

ordered_json ok_envelope(ordered_json payload) {
    ordered_json j;
    j["status"] = "ok";
    j["payload"] = std::move(payload);
    return j;
}

ordered_json error_envelope(const std::string& code, const std::string& message,
                            const std::vector<std::string>& details) {
    ordered_json j;
    j["status"] = "error";
    j["error"] = {{"code", code}, {"message", message}, {"details", details}};
    return j;
}

ordered_json error_envelope(const Error& e) { return error_envelope(e.code(), e.what(), e.details()); }

}  // namespace tabsem::gateway
