#include "tabsem/annotator.hpp"

#include "tabsem/error.hpp"
#include "tabsem/text.hpp"

namespace tabsem {

std::string_view to_string(Resolution r) {
    switch (r) {
        case Resolution::unresolved: return "unresolved";
        case Resolution::coerced: return "coerced";
        case Resolution::type_changed: return "type_changed";
        case Resolution::value_edited: return "value_edited";
    }
    return "unresolved";
}

std::optional<Resolution> resolution_from_string(std::string_view s) {
    for (auto r : {Resolution::unresolved, Resolution::coerced, Resolution::type_changed,
                   Resolution::value_edited}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::vector<InconsistencyFlag> compute_flags(const std::vector<std::string>& cells, CellType type,
                                             std::size_t column) {
    std::vector<InconsistencyFlag> flags;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const auto found = infer_cell_type(cells[r]);
        if (found == CellType::empty || found == type) continue;
        if (found == CellType::integer && type == CellType::decimal) continue;
        flags.push_back(InconsistencyFlag{r, column, found, type, Resolution::unresolved});
    }
    return flags;
}

ColumnTypeResult infer_column_type(const std::vector<std::string>& cells, std::size_t column) {
    if (cells.empty()) throw ValidationError("column has no cells");
    ColumnTypeResult result;
    for (const auto& c : cells) {
        const auto t = infer_cell_type(c);
        if (t != CellType::empty) ++result.histogram[t];
    }
    if (result.histogram.empty()) {
        result.type = CellType::string;
        return result;
    }
    auto best = result.histogram.begin();
    for (auto it = result.histogram.begin(); it != result.histogram.end(); ++it) {
        if (it->second > best->second ||
            (it->second == best->second && generality(it->first) > generality(best->first)))
            best = it;
    }
    result.type = best->first;
    result.flags = compute_flags(cells, result.type, column);
    return result;
}

PredicateSuggestion suggest_predicates(const ColumnHeader& header, const KgStore& store) {
    if (text::trim(header.raw_label).empty()) throw ValidationError("column label is empty");
    PredicateSuggestion s;
    const auto& label = header.normalized_label.empty() ? header.raw_label : header.normalized_label;
    s.candidates = store.lookup_candidates(label, TargetKind::predicate, kSuggestionLimit);
    if (s.candidates.empty()) s.create_new_label = label;
    return s;
}

std::vector<ColumnAnnotation> annotate_table_cta(const Table& table, const KgStore& store) {
    validate_table(table);
    std::vector<ColumnAnnotation> out;
    out.reserve(table.column_count());
    for (const auto& header : table.header) {
        ColumnAnnotation a;
        a.column = header.index;
        if (!table.rows.empty()) {
            auto typed = infer_column_type(table.column_values(header.index), header.index);
            a.inferred_type = typed.type;
            a.vote_histogram = std::move(typed.histogram);
            a.flags = std::move(typed.flags);
        }
        a.assigned_type = a.inferred_type;

        if (table.synthetic_header || text::trim(header.raw_label).empty()) {
            a.create_new_label = header.normalized_label.empty()
                                     ? "column_" + std::to_string(header.index + 1)
                                     : header.normalized_label;
        } else {
            auto s = suggest_predicates(header, store);
            a.predicate_candidates = std::move(s.candidates);
            a.create_new_label = std::move(s.create_new_label);
            if (!a.predicate_candidates.empty() && a.predicate_candidates.front().score == 1.0) {
                a.chosen_predicate = PredicateId::parse(a.predicate_candidates.front().target);
                a.chosen_by = Origin::machine;
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

bool entity_linkable(CellType type) { return type == CellType::string || type == CellType::url; }

CellAnnotation annotate_cell_values(const Cell& cell, std::size_t row, std::size_t column,
                                    const KgStore& store) {
    CellAnnotation a;
    a.row = row;
    a.column = column;
    a.delimiter = cell.delimiter;
    for (const auto& value : cell.values) {
        ValueAnnotation v;
        v.value_text = value;
        if (!text::trim(value).empty())
            v.candidates = store.lookup_candidates(value, TargetKind::entity, kSuggestionLimit);
        if (!v.candidates.empty() && v.candidates.front().score == 1.0) {
            v.alignment = Alignment{*EntityId::parse(v.candidates.front().target)};
            v.alignment_origin = Origin::machine;
        }
        a.values.push_back(std::move(v));
    }
    return a;
}

CellAnnotation suggest_cell_entities(const Cell& cell, std::size_t row,
                                     const ColumnAnnotation& column, const KgStore& store) {
    if (!entity_linkable(column.assigned_type))
        throw ValidationError("column " + std::to_string(column.column) + " has type " +
                              std::string(to_string(column.assigned_type)) +
                              "; entity linking applies to string and url columns only");
    return annotate_cell_values(split_cell(cell), row, column.column, store);
}

}  // namespace tabsem
