#include "tabsem/decision_log.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tabsem/error.hpp"

namespace tabsem {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, std::string_view where) {
    if (!j.is_object()) throw ValidationError(std::string(where) + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, _] : j.items()) {
        if (!ok.count(k)) throw ValidationError("unexpected key '" + k + "' in " + std::string(where));
    }
}

const json& required(const json& j, const char* key, std::string_view where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        throw ValidationError(std::string(where) + " needs '" + key + "'");
    return *it;
}

std::size_t index_field(const json& j, const char* key, std::string_view where) {
    const auto& v = required(j, key, where);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ValidationError(std::string(where) + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string string_field(const json& j, const char* key, std::string_view where) {
    const auto& v = required(j, key, where);
    if (!v.is_string()) throw ValidationError(std::string(where) + "." + key + " must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key, std::string_view where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string(where) + "." + key + " must be a string");
    return it->get<std::string>();
}

template <class Id>
std::optional<Id> optional_id(const json& j, const char* key, std::string_view where) {
    auto s = optional_string(j, key, where);
    if (!s) return std::nullopt;
    auto id = Id::parse(*s);
    if (!id) throw ValidationError(std::string(where) + "." + key + ": malformed id '" + *s + "'");
    return id;
}

CellType type_field(const std::string& s, std::string_view where) {
    auto t = cell_type_from_string(s);
    if (!t) throw ValidationError(std::string(where) + ": unknown type '" + s + "'");
    return *t;
}

std::vector<std::string> string_list(const json& j, const char* key, std::string_view where) {
    const auto& v = required(j, key, where);
    if (!v.is_array()) throw ValidationError(std::string(where) + "." + key + " must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string())
            throw ValidationError(std::string(where) + "." + key + " must hold strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

ordered_json payload_to_json(const DecisionPayload& payload) {
    namespace dc = decision;
    ordered_json p = ordered_json::object();
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, dc::AcceptPredicate>) {
                p["column"] = d.column;
                if (d.predicate) p["predicate"] = d.predicate->str();
            } else if constexpr (std::is_same_v<T, dc::SetPredicate>) {
                p["column"] = d.column;
                if (d.predicate) p["predicate"] = d.predicate->str();
                if (d.label) p["label"] = *d.label;
            } else if constexpr (std::is_same_v<T, dc::SetColumnType>) {
                p["column"] = d.column;
                p["type"] = to_string(d.type);
            } else if constexpr (std::is_same_v<T, dc::ResolveFlag>) {
                p["row"] = d.row;
                p["column"] = d.column;
                p["resolution"] = to_string(d.resolution);
                if (d.type) p["type"] = to_string(*d.type);
                if (d.value) p["value"] = *d.value;
            } else if constexpr (std::is_same_v<T, dc::AcceptAlignment>) {
                p["row"] = d.row;
                p["column"] = d.column;
                p["value_index"] = d.value_index;
            } else if constexpr (std::is_same_v<T, dc::SetAlignment>) {
                p["row"] = d.row;
                p["column"] = d.column;
                p["value_index"] = d.value_index;
                if (d.entity) p["entity"] = d.entity->str();
                if (d.literal) p["literal"] = true;
            } else if constexpr (std::is_same_v<T, dc::CreateEntityAndAlign>) {
                p["row"] = d.row;
                p["column"] = d.column;
                p["value_index"] = d.value_index;
                if (d.label) p["label"] = *d.label;
                if (d.class_ref) p["class"] = *d.class_ref;
            } else if constexpr (std::is_same_v<T, dc::SplitCell>) {
                p["row"] = d.row;
                p["column"] = d.column;
                p["delimiters"] = d.delimiters;
            } else if constexpr (std::is_same_v<T, dc::DefineHierarchy>) {
                p = hierarchy_to_json(d.spec);
            } else if constexpr (std::is_same_v<T, dc::DefineGroup>) {
                p = group_to_json(d.spec);
            }
        },
        payload);
    return p;
}

DecisionPayload payload_from_json(DecisionKind kind, const json& p) {
    namespace dc = decision;
    const std::string where = "payload of " + std::string(to_string(kind));
    switch (kind) {
        case DecisionKind::accept_predicate:
            only_keys(p, {"column", "predicate"}, where);
            return dc::AcceptPredicate{index_field(p, "column", where),
                                       optional_id<PredicateId>(p, "predicate", where)};
        case DecisionKind::set_predicate:
            only_keys(p, {"column", "predicate", "label"}, where);
            return dc::SetPredicate{index_field(p, "column", where),
                                    optional_id<PredicateId>(p, "predicate", where),
                                    optional_string(p, "label", where)};
        case DecisionKind::set_column_type:
            only_keys(p, {"column", "type"}, where);
            return dc::SetColumnType{index_field(p, "column", where),
                                     type_field(string_field(p, "type", where), where)};
        case DecisionKind::resolve_flag: {
            only_keys(p, {"row", "column", "resolution", "type", "value"}, where);
            const auto res_text = string_field(p, "resolution", where);
            auto res = resolution_from_string(res_text);
            if (!res) throw ValidationError(where + ": unknown resolution '" + res_text + "'");
            std::optional<CellType> type;
            if (auto t = optional_string(p, "type", where)) type = type_field(*t, where);
            return dc::ResolveFlag{index_field(p, "row", where), index_field(p, "column", where), *res,
                                   type, optional_string(p, "value", where)};
        }
        case DecisionKind::accept_alignment:
            only_keys(p, {"row", "column", "value_index"}, where);
            return dc::AcceptAlignment{index_field(p, "row", where), index_field(p, "column", where),
                                       index_field(p, "value_index", where)};
        case DecisionKind::set_alignment: {
            only_keys(p, {"row", "column", "value_index", "entity", "literal"}, where);
            bool literal = false;
            if (auto it = p.find("literal"); it != p.end() && !it->is_null()) {
                if (!it->is_boolean()) throw ValidationError(where + ".literal must be a boolean");
                literal = it->get<bool>();
            }
            return dc::SetAlignment{index_field(p, "row", where), index_field(p, "column", where),
                                    index_field(p, "value_index", where),
                                    optional_id<EntityId>(p, "entity", where), literal};
        }
        case DecisionKind::create_entity_and_align:
            only_keys(p, {"row", "column", "value_index", "label", "class"}, where);
            return dc::CreateEntityAndAlign{
                index_field(p, "row", where), index_field(p, "column", where),
                index_field(p, "value_index", where), optional_string(p, "label", where),
                optional_string(p, "class", where)};
        case DecisionKind::split_cell:
            only_keys(p, {"row", "column", "delimiters"}, where);
            return dc::SplitCell{index_field(p, "row", where), index_field(p, "column", where),
                                 string_list(p, "delimiters", where)};
        case DecisionKind::define_hierarchy: return dc::DefineHierarchy{hierarchy_from_json(p)};
        case DecisionKind::define_group: return dc::DefineGroup{group_from_json(p)};
    }
    throw ValidationError("unknown decision kind");
}

}  // namespace

ordered_json hierarchy_to_json(const HierarchySpec& spec) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : spec.edges) edges.push_back({{"parent", e.parent}, {"child", e.child}});
    ordered_json out;
    out["edges"] = std::move(edges);
    return out;
}

HierarchySpec hierarchy_from_json(const json& j) {
    only_keys(j, {"edges"}, "hierarchy");
    const auto& edges = required(j, "edges", "hierarchy");
    if (!edges.is_array()) throw ValidationError("hierarchy.edges must be an array");
    HierarchySpec spec;
    for (const auto& e : edges) {
        only_keys(e, {"parent", "child"}, "hierarchy edge");
        spec.edges.push_back(
            {string_field(e, "parent", "hierarchy edge"), string_field(e, "child", "hierarchy edge")});
    }
    return spec;
}

ordered_json group_to_json(const GroupSpec& spec) {
    ordered_json out;
    out["label"] = spec.group_label;
    out["members"] = spec.members;
    return out;
}

GroupSpec group_from_json(const json& j) {
    only_keys(j, {"label", "members"}, "group");
    return GroupSpec{string_field(j, "label", "group"), string_list(j, "members", "group")};
}

ordered_json decision_to_json(const Decision& d) {
    ordered_json j;
    j["seq"] = d.seq;
    j["actor"] = to_string(d.actor);
    j["kind"] = to_string(d.kind());
    j["payload"] = payload_to_json(d.payload);
    j["timestamp"] = d.timestamp;
    return j;
}

Decision decision_from_json(const json& j) {
    only_keys(j, {"seq", "actor", "kind", "payload", "timestamp"}, "decision");
    Decision d;
    if (auto it = j.find("seq"); it != j.end() && !it->is_null()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
            throw ValidationError("decision.seq must be a non-negative integer");
        d.seq = it->get<std::size_t>();
    }
    if (auto actor = optional_string(j, "actor", "decision")) {
        auto o = origin_from_string(*actor);
        if (!o) throw ValidationError("unknown actor '" + *actor + "'");
        d.actor = *o;
    }
    const auto kind_text = string_field(j, "kind", "decision");
    auto kind = decision_kind_from_string(kind_text);
    if (!kind) throw ValidationError("unknown decision kind '" + kind_text + "'");
    auto it = j.find("payload");
    d.payload = payload_from_json(*kind, it == j.end() ? json::object() : *it);
    if (auto ts = optional_string(j, "timestamp", "decision")) d.timestamp = *ts;
    return d;
}

std::string write_decision_log(const std::vector<Decision>& log) {
    std::string out;
    for (const auto& d : log) {
        out += decision_to_json(d).dump();
        out += '\n';
    }
    return out;
}

std::vector<Decision> read_decision_log(std::string_view text) {
    std::vector<Decision> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("malformed decision record: ") + e.what());
        }
        try {
            out.push_back(decision_from_json(j));
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
        if (end == text.size()) break;
    }
    return out;
}

std::vector<Decision> load_decision_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot read decision log " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_decision_log(buf.str());
}

void append_decision(const std::filesystem::path& path, const Decision& d) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("IOError", "cannot write decision log " + path.string());
    out << decision_to_json(d).dump() << '\n';
    if (!out.flush()) throw Error("IOError", "cannot write decision log " + path.string());
}

}  // namespace tabsem
