#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "tabsem/annotator.hpp"
#include "tabsem/kg_store.hpp"
#include "tabsem/structurer.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

enum class Phase { imported, cta, cea, structuring, finalized };

std::string_view to_string(Phase p);

enum class DecisionKind {
    accept_predicate,
    set_predicate,
    set_column_type,
    resolve_flag,
    accept_alignment,
    set_alignment,
    create_entity_and_align,
    split_cell,
    define_hierarchy,
    define_group,
};

std::string_view to_string(DecisionKind k);
std::optional<DecisionKind> decision_kind_from_string(std::string_view s);

// Phase a decision kind belongs to; submitting it moves the session forward
// to that phase (never backward).
Phase phase_of(DecisionKind k);

namespace decision {

// `predicate` unset: accept the column's create-new proposal.
struct AcceptPredicate {
    std::size_t column = 0;
    std::optional<PredicateId> predicate;
    bool operator==(const AcceptPredicate&) const = default;
};

// Exactly one of `predicate` / `label`; neither clears the choice.
struct SetPredicate {
    std::size_t column = 0;
    std::optional<PredicateId> predicate;
    std::optional<std::string> label;
    bool operator==(const SetPredicate&) const = default;
};

struct SetColumnType {
    std::size_t column = 0;
    CellType type = CellType::string;
    bool operator==(const SetColumnType&) const = default;
};

struct ResolveFlag {
    std::size_t row = 0;
    std::size_t column = 0;
    Resolution resolution = Resolution::coerced;
    std::optional<CellType> type;      // type_changed
    std::optional<std::string> value;  // value_edited
    bool operator==(const ResolveFlag&) const = default;
};

struct AcceptAlignment {
    std::size_t row = 0;
    std::size_t column = 0;
    std::size_t value_index = 0;
    bool operator==(const AcceptAlignment&) const = default;
};

// Exactly one of `entity` / `literal`.
struct SetAlignment {
    std::size_t row = 0;
    std::size_t column = 0;
    std::size_t value_index = 0;
    std::optional<EntityId> entity;
    bool literal = false;
    bool operator==(const SetAlignment&) const = default;
};

struct CreateEntityAndAlign {
    std::size_t row = 0;
    std::size_t column = 0;
    std::size_t value_index = 0;
    std::optional<std::string> label;  // defaults to the value text
    std::optional<std::string> class_ref;
    bool operator==(const CreateEntityAndAlign&) const = default;
};

// An empty delimiter list keeps the cell as a single value.
struct SplitCell {
    std::size_t row = 0;
    std::size_t column = 0;
    std::vector<std::string> delimiters;
    bool operator==(const SplitCell&) const = default;
};

struct DefineHierarchy {
    HierarchySpec spec;
    bool operator==(const DefineHierarchy&) const = default;
};

struct DefineGroup {
    GroupSpec spec;
    bool operator==(const DefineGroup&) const = default;
};

}  // namespace decision

// Alternative order matches DecisionKind.
using DecisionPayload =
    std::variant<decision::AcceptPredicate, decision::SetPredicate, decision::SetColumnType,
                 decision::ResolveFlag, decision::AcceptAlignment, decision::SetAlignment,
                 decision::CreateEntityAndAlign, decision::SplitCell, decision::DefineHierarchy,
                 decision::DefineGroup>;

struct Decision {
    std::size_t seq = 0;  // 0 on submission: assigned by the session
    Origin actor = Origin::human;
    DecisionPayload payload;
    std::string timestamp;  // empty on submission: stamped by the session clock

    DecisionKind kind() const { return static_cast<DecisionKind>(payload.index()); }
    // Same actor and payload, ignoring seq and timestamp.
    bool same_action(const Decision& other) const {
        return actor == other.actor && payload == other.payload;
    }
    bool operator==(const Decision&) const = default;
};

using Clock = std::function<std::string()>;

// ISO-8601 UTC wall clock with millisecond precision.
std::string utc_timestamp();

struct AnnotatedModel {
    std::string source_id;
    std::map<std::string, std::string> metadata;
    StructuredModel structure;

    bool operator==(const AnnotatedModel&) const = default;
};

using CellKey = std::pair<std::size_t, std::size_t>;

class Session {
public:
    const std::string& id() const { return id_; }
    Phase phase() const { return phase_; }
    // Working copy of the imported table, with value edits applied.
    const Table& table() const { return table_; }
    // Frozen store snapshot plus the entities and predicates this session created.
    const KgStore& store() const { return store_; }
    const std::vector<ColumnAnnotation>& column_annotations() const { return columns_; }
    const std::map<CellKey, CellAnnotation>& cell_annotations() const { return cells_; }
    const HierarchySpec& hierarchy() const { return hierarchy_; }
    const std::vector<GroupSpec>& groups() const { return groups_; }
    const std::vector<Decision>& log() const { return log_; }
    const std::optional<AnnotatedModel>& model() const { return model_; }
    const std::vector<PropertyRef>& properties() const { return properties_; }

    std::vector<InconsistencyFlag> flags() const;
    std::vector<InconsistencyFlag> unresolved_flags() const;
    // Reasons finalize would fail; empty when the session can be finalized.
    std::vector<std::string> finalize_blockers() const;

    void set_clock(Clock clock) { clock_ = std::move(clock); }

    // Everything except the clock.
    bool operator==(const Session& other) const;

private:
    friend Session open_session(const Table&, const KgStore&, std::string, Clock);
    friend Session apply_decision(const Session&, Decision);
    friend Session apply_log(const Session&, const std::vector<Decision>&, bool);
    friend AnnotatedModel finalize(Session&);

    void apply_in_place(Decision d);
    void refresh();
    void change_column_type(std::size_t column, CellType type, Origin actor);
    ColumnAnnotation& column_at(std::size_t column);
    CellAnnotation& cell_at(std::size_t row, std::size_t column);
    ValueAnnotation& value_at(std::size_t row, std::size_t column, std::size_t index);
    void set_human_alignment(std::size_t row, std::size_t column, std::size_t index, Alignment a,
                             Origin actor);
    void clear_alignments(std::size_t row, std::size_t column);
    void clear_column_alignments(std::size_t column);

    std::string id_;
    Phase phase_ = Phase::imported;
    Table table_;
    KgStore store_;
    std::vector<PropertyRef> properties_;
    std::vector<ColumnAnnotation> columns_;
    std::map<CellKey, CellAnnotation> cells_;
    std::set<CellKey> coerced_;
    std::map<CellKey, std::vector<std::string>> splits_;
    // (row, column, value index) -> decided alignment and who decided it.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<Alignment, Origin>>
        decided_alignments_;
    HierarchySpec hierarchy_;
    std::vector<GroupSpec> groups_;
    std::vector<Decision> log_;
    std::optional<AnnotatedModel> model_;
    Clock clock_ = utc_timestamp;
};

// Imports a table: runs machine CTA immediately and logs one machine
// decision per inferred column type and per auto-chosen predicate.
Session open_session(const Table& table, const KgStore& store, std::string id = "s1",
                     Clock clock = utc_timestamp);

// Applies one decision to a copy of the session; the input is left untouched
// when the decision is rejected.
Session apply_decision(const Session& session, Decision decision);

// Applies a recorded log on top of a session. Entries whose seq is already in
// the session's log must repeat the recorded action (with `adopt_timestamps`
// they also take over the logged timestamp); later entries must continue the
// sequence densely. Any mismatch or rejected entry raises ReplayError.
Session apply_log(const Session& session, const std::vector<Decision>& log,
                  bool adopt_timestamps = false);

// Rebuilds a session from its inputs and decision log.
Session replay(const Table& table, const KgStore& store, const std::vector<Decision>& log,
               std::string id = "s1", Clock clock = utc_timestamp);

// Builds the structured, annotated model and freezes the session.
AnnotatedModel finalize(Session& session);

}  // namespace tabsem
