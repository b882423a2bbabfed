#include "tabsem/structurer.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "tabsem/error.hpp"
#include "tabsem/text.hpp"

namespace tabsem {

std::vector<PropertyRef> property_labels(const Table& table) {
    std::vector<PropertyRef> out;
    std::map<std::string, int> seen;
    for (const auto& h : table.header) {
        std::string label = text::trim(h.raw_label).empty()
                                ? "column_" + std::to_string(h.index + 1)
                                : h.raw_label;
        const int n = ++seen[label];
        if (n > 1) label += " (" + std::to_string(n) + ")";
        out.push_back(std::move(label));
    }
    return out;
}

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::cycle: return "cycle";
        case ViolationKind::multi_parent: return "multi_parent";
        case ViolationKind::unknown_property: return "unknown_property";
        case ViolationKind::self_reference: return "self_reference";
    }
    return "cycle";
}

std::string Violation::describe() const {
    std::string out(to_string(kind));
    out += ": [";
    for (std::size_t i = 0; i < properties.size(); ++i) {
        if (i > 0) out += ", ";
        out += properties[i];
    }
    out += "]";
    return out;
}

std::vector<Violation> validate_hierarchy(const HierarchySpec& spec,
                                          const std::vector<PropertyRef>& properties) {
    std::vector<Violation> out;
    const std::set<PropertyRef> known(properties.begin(), properties.end());

    std::set<PropertyRef> unknown;
    std::map<PropertyRef, std::set<PropertyRef>> parents_of;
    std::map<PropertyRef, std::set<PropertyRef>> children_of;
    for (const auto& e : spec.edges) {
        if (!known.count(e.parent)) unknown.insert(e.parent);
        if (!known.count(e.child)) unknown.insert(e.child);
        if (e.parent == e.child) {
            out.push_back({ViolationKind::self_reference, {e.parent}});
            continue;
        }
        parents_of[e.child].insert(e.parent);
        children_of[e.parent].insert(e.child);
    }
    for (const auto& u : unknown) out.push_back({ViolationKind::unknown_property, {u}});
    for (const auto& [child, parents] : parents_of) {
        if (parents.size() < 2) continue;
        Violation v{ViolationKind::multi_parent, {child}};
        v.properties.insert(v.properties.end(), parents.begin(), parents.end());
        out.push_back(std::move(v));
    }

    // Report one cycle per cyclic component, starting at its smallest label.
    std::set<PropertyRef> in_reported_cycle;
    for (const auto& [start, _] : children_of) {
        if (in_reported_cycle.count(start)) continue;
        std::vector<PropertyRef> path;
        std::set<PropertyRef> visited;
        std::function<bool(const PropertyRef&)> dfs = [&](const PropertyRef& node) {
            path.push_back(node);
            visited.insert(node);
            auto it = children_of.find(node);
            if (it != children_of.end()) {
                for (const auto& next : it->second) {
                    if (next == start) return true;
                    if (next < start || visited.count(next)) continue;
                    if (dfs(next)) return true;
                }
            }
            path.pop_back();
            return false;
        };
        if (dfs(start)) {
            in_reported_cycle.insert(path.begin(), path.end());
            out.push_back({ViolationKind::cycle, path});
        }
    }
    return out;
}

std::vector<Violation> validate_hierarchy(const HierarchySpec& spec, const Table& table) {
    return validate_hierarchy(spec, property_labels(table));
}

std::vector<std::string> validate_group(const GroupSpec& spec) {
    std::vector<std::string> problems;
    if (text::trim(spec.group_label).empty()) problems.push_back("group label is empty");
    if (spec.members.size() < 2) problems.push_back("a group needs at least two members");
    std::set<PropertyRef> seen;
    for (const auto& m : spec.members) {
        if (!seen.insert(m).second) problems.push_back("duplicate member '" + m + "'");
    }
    return problems;
}

Literal literal_for(std::string_view raw, CellType column_type) {
    const auto trimmed = text::trim(raw);
    const CellType type =
        lexeme_valid(column_type, trimmed) ? column_type : infer_cell_type(trimmed);
    return Literal{std::string(trimmed), type};
}

StructuredModel flat_model(const AnnotatedTable& annotated) {
    const Table& table = *annotated.table;
    const auto& columns = *annotated.columns;
    const auto labels = property_labels(table);

    StructuredModel model;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        SchemaNode node;
        node.kind = NodeKind::property;
        node.label = labels[c];
        node.column = c;
        node.predicate = columns.at(c).chosen_predicate;
        model.schema.push_back(std::move(node));
    }

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        Contribution contribution;
        contribution.row = r;
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            const Cell& cell = table.rows[r][c];
            if (text::trim(cell.raw_text).empty()) continue;
            std::vector<LeafValue> values;
            const CellType type = columns.at(c).assigned_type;
            if (entity_linkable(type)) {
                const CellAnnotation* ca = nullptr;
                if (annotated.cells) {
                    if (auto it = annotated.cells->find({r, c}); it != annotated.cells->end())
                        ca = &it->second;
                }
                if (ca) {
                    for (const auto& v : ca->values) values.push_back({v.value_text, v.alignment});
                } else {
                    for (const auto& v : split_cell(cell).values) values.push_back({v, std::nullopt});
                }
            } else {
                values.push_back({std::string(text::trim(cell.raw_text)),
                                  Object{literal_for(cell.raw_text, type)}});
            }
            if (!values.empty()) contribution.leaves[labels[c]] = std::move(values);
        }
        model.contributions.push_back(std::move(contribution));
    }
    return model;
}

StructuredModel apply_hierarchy(const HierarchySpec& spec, const StructuredModel& model) {
    if (spec.empty()) return model;

    std::vector<PropertyRef> top;
    std::map<PropertyRef, const SchemaNode*> by_label;
    for (const auto& n : model.schema) {
        top.push_back(n.label);
        by_label[n.label] = &n;
    }
    const auto violations = validate_hierarchy(spec, top);
    if (!violations.empty()) {
        std::vector<std::string> details;
        for (const auto& v : violations) details.push_back(v.describe());
        throw SpecError("hierarchy cannot be applied", details);
    }

    std::map<PropertyRef, PropertyRef> parent_of;
    for (const auto& e : spec.edges) parent_of[e.child] = e.parent;

    std::function<SchemaNode(const PropertyRef&)> build = [&](const PropertyRef& label) {
        SchemaNode node = *by_label.at(label);
        for (const auto& candidate : top) {
            auto it = parent_of.find(candidate);
            if (it != parent_of.end() && it->second == label) node.children.push_back(build(candidate));
        }
        return node;
    };

    StructuredModel out;
    out.contributions = model.contributions;
    for (const auto& label : top) {
        if (!parent_of.count(label)) out.schema.push_back(build(label));
    }
    return out;
}

StructuredModel apply_grouping(const GroupSpec& spec, const StructuredModel& model, KgStore& store) {
    auto problems = validate_group(spec);
    std::set<PropertyRef> top;
    for (const auto& n : model.schema) top.insert(n.label);
    if (top.count(spec.group_label))
        problems.push_back("group label '" + spec.group_label + "' clashes with a property");
    for (const auto& m : spec.members) {
        if (!top.count(m)) problems.push_back("member '" + m + "' is not a top-level property");
    }
    if (!problems.empty()) throw SpecError("group cannot be applied", problems);

    const std::set<PropertyRef> members(spec.members.begin(), spec.members.end());
    SchemaNode group;
    group.kind = NodeKind::group;
    group.label = spec.group_label;
    group.concept_entity = store.upsert_entity(spec.group_label, "Concept", Origin::human);
    group.predicate = store.upsert_predicate(spec.group_label, "property group");

    StructuredModel out;
    out.contributions = model.contributions;
    std::optional<std::size_t> slot;
    for (const auto& n : model.schema) {
        if (!members.count(n.label)) {
            out.schema.push_back(n);
            continue;
        }
        group.children.push_back(n);
        if (!slot) slot = out.schema.size();
    }
    out.schema.insert(out.schema.begin() + static_cast<std::ptrdiff_t>(*slot), std::move(group));
    return out;
}

namespace {

void instantiate_into(const SchemaNode& node, const Contribution& c, std::vector<PropertyNode>& out) {
    PropertyNode p;
    p.schema = &node;
    if (node.kind == NodeKind::property) {
        if (auto it = c.leaves.find(node.label); it != c.leaves.end()) p.values = it->second;
    }
    for (const auto& child : node.children) instantiate_into(child, c, p.children);
    if (!p.values.empty() || !p.children.empty()) out.push_back(std::move(p));
}

std::string object_repr(const std::optional<Object>& o) {
    if (!o) return "unaligned";
    if (const auto* e = std::get_if<EntityId>(&*o)) return e->str();
    const auto& lit = std::get<Literal>(*o);
    return std::string(to_string(lit.datatype)) + ":" + lit.lexical;
}

void collect(const std::vector<PropertyNode>& nodes,
             std::vector<std::pair<PropertyRef, std::string>>& out) {
    for (const auto& n : nodes) {
        for (const auto& v : n.values) out.emplace_back(n.schema->label, v.text + "|" + object_repr(v.object));
        collect(n.children, out);
    }
}

}  // namespace

std::vector<PropertyNode> instantiate(const StructuredModel& model, const Contribution& c) {
    std::vector<PropertyNode> out;
    for (const auto& node : model.schema) instantiate_into(node, c, out);
    return out;
}

std::vector<std::pair<PropertyRef, std::string>> leaf_pairs(const StructuredModel& model,
                                                            const Contribution& c) {
    std::vector<std::pair<PropertyRef, std::string>> out;
    collect(instantiate(model, c), out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace tabsem
