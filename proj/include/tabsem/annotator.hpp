#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabsem/cell_type.hpp"
#include "tabsem/kg_store.hpp"
#include "tabsem/table.hpp"

namespace tabsem {

enum class Resolution { unresolved, coerced, type_changed, value_edited };

std::string_view to_string(Resolution r);
std::optional<Resolution> resolution_from_string(std::string_view s);

struct InconsistencyFlag {
    std::size_t row = 0;
    std::size_t column = 0;
    CellType found_type = CellType::string;
    CellType expected_type = CellType::string;
    Resolution resolution = Resolution::unresolved;

    bool operator==(const InconsistencyFlag&) const = default;
};

using VoteHistogram = std::map<CellType, std::size_t>;

struct ColumnTypeResult {
    CellType type = CellType::string;
    VoteHistogram histogram;
    std::vector<InconsistencyFlag> flags;
};

// Majority vote over the lexed cell types; empty cells do not vote, ties go to
// the more general type and an all-empty column is `string`.
ColumnTypeResult infer_column_type(const std::vector<std::string>& cells, std::size_t column = 0);

// Flags every non-empty cell whose lexed type differs from `type`, except
// integer cells under a decimal type.
std::vector<InconsistencyFlag> compute_flags(const std::vector<std::string>& cells, CellType type,
                                             std::size_t column = 0);

struct PredicateSuggestion {
    std::vector<Candidate> candidates;
    // Set when nothing in the store matches: the label a new predicate would get.
    std::optional<std::string> create_new_label;

    bool operator==(const PredicateSuggestion&) const = default;
};

inline constexpr std::size_t kSuggestionLimit = 5;

PredicateSuggestion suggest_predicates(const ColumnHeader& header, const KgStore& store);

struct ColumnAnnotation {
    std::size_t column = 0;
    CellType inferred_type = CellType::string;
    // The type currently in force; starts as the inferred type.
    CellType assigned_type = CellType::string;
    // machine: the assigned type follows the vote; human: pinned by a decision.
    Origin type_by = Origin::machine;
    VoteHistogram vote_histogram;
    std::vector<Candidate> predicate_candidates;
    std::optional<std::string> create_new_label;
    std::optional<PredicateId> chosen_predicate;
    Origin chosen_by = Origin::machine;
    std::vector<InconsistencyFlag> flags;

    bool operator==(const ColumnAnnotation&) const = default;
};

std::vector<ColumnAnnotation> annotate_table_cta(const Table& table, const KgStore& store);

using Alignment = Object;

struct ValueAnnotation {
    std::string value_text;
    std::vector<Candidate> candidates;
    std::optional<Alignment> alignment;
    Origin alignment_origin = Origin::machine;

    bool operator==(const ValueAnnotation&) const = default;
};

struct CellAnnotation {
    std::size_t row = 0;
    std::size_t column = 0;
    std::optional<std::string> delimiter;
    std::vector<ValueAnnotation> values;

    bool operator==(const CellAnnotation&) const = default;
};

// Whether cells of a column with this type are linked to entities (CEA)
// rather than emitted as literals.
bool entity_linkable(CellType type);

// Machine CEA proposal for one cell: splits enumerations with the default
// delimiters, looks up entity candidates per value and pre-aligns only
// normalized-exact (score 1.0) matches.
CellAnnotation suggest_cell_entities(const Cell& cell, std::size_t row,
                                     const ColumnAnnotation& column, const KgStore& store);

// Same, with an explicit cell split already applied (`cell.values` used as is).
CellAnnotation annotate_cell_values(const Cell& cell, std::size_t row, std::size_t column,
                                    const KgStore& store);

}  // namespace tabsem
