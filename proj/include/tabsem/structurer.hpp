#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tabsem/annotator.hpp"
#include "tabsem/kg_store.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

// Properties are referred to by their column label.
using PropertyRef = std::string;

// One unique property label per column: the raw label, `column_N` when it is
// blank, and a ` (k)` suffix on repeated labels.
std::vector<PropertyRef> property_labels(const Table& table);

struct HierarchyEdge {
    PropertyRef parent;
    PropertyRef child;

    bool operator==(const HierarchyEdge&) const = default;
};

struct HierarchySpec {
    std::vector<HierarchyEdge> edges;

    bool empty() const { return edges.empty(); }
    bool operator==(const HierarchySpec&) const = default;
};

struct GroupSpec {
    std::string group_label;
    std::vector<PropertyRef> members;

    bool operator==(const GroupSpec&) const = default;
};

enum class ViolationKind { cycle, multi_parent, unknown_property, self_reference };

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::vector<PropertyRef> properties;

    std::string describe() const;
    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_hierarchy(const HierarchySpec& spec,
                                          const std::vector<PropertyRef>& properties);
std::vector<Violation> validate_hierarchy(const HierarchySpec& spec, const Table& table);

// GroupSpec invariants that hold independently of any model.
std::vector<std::string> validate_group(const GroupSpec& spec);

enum class NodeKind { property, group };

struct SchemaNode {
    NodeKind kind = NodeKind::property;
    std::string label;
    std::optional<std::size_t> column;
    std::optional<PredicateId> predicate;
    // Group nodes: the shared concept every per-contribution instance refers to.
    std::optional<EntityId> concept_entity;
    std::vector<SchemaNode> children;

    bool operator==(const SchemaNode&) const = default;
};

struct LeafValue {
    std::string text;
    // Entity or literal; unset while a linkable value awaits alignment.
    std::optional<Object> object;

    bool operator==(const LeafValue&) const = default;
};

struct Contribution {
    std::size_t row = 0;
    std::map<PropertyRef, std::vector<LeafValue>> leaves;

    bool operator==(const Contribution&) const = default;
};

struct StructuredModel {
    std::vector<SchemaNode> schema;
    std::vector<Contribution> contributions;

    bool operator==(const StructuredModel&) const = default;
};

// Per-contribution view of the schema, with nodes lacking values pruned.
struct PropertyNode {
    const SchemaNode* schema = nullptr;
    std::vector<LeafValue> values;
    std::vector<PropertyNode> children;
};

std::vector<PropertyNode> instantiate(const StructuredModel& model, const Contribution& c);

struct AnnotatedTable {
    const Table* table = nullptr;
    const std::vector<ColumnAnnotation>* columns = nullptr;
    const std::map<std::pair<std::size_t, std::size_t>, CellAnnotation>* cells = nullptr;
};

// Leaf value of a literal-typed cell: typed by the column when the lexeme
// fits, otherwise by its own lexed type.
Literal literal_for(std::string_view text, CellType column_type);

StructuredModel flat_model(const AnnotatedTable& annotated);

// Nests child properties under their parents for every contribution.
StructuredModel apply_hierarchy(const HierarchySpec& spec, const StructuredModel& model);

// Interposes a group node over top-level members; creates (or reuses) the
// group concept and its linking predicate in `store`.
StructuredModel apply_grouping(const GroupSpec& spec, const StructuredModel& model, KgStore& store);

// (property, value) leaf pairs of one contribution, sorted.
std::vector<std::pair<PropertyRef, std::string>> leaf_pairs(const StructuredModel& model,
                                                            const Contribution& c);

}  // namespace tabsem
