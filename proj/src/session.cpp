#include "tabsem/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "tabsem/error.hpp"
#include "tabsem/text.hpp"

namespace tabsem {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::imported: return "imported";
        case Phase::cta: return "cta";
        case Phase::cea: return "cea";
        case Phase::structuring: return "structuring";
        case Phase::finalized: return "finalized";
    }
    return "imported";
}

namespace {

constexpr std::string_view kKindNames[] = {
    "accept_predicate", "set_predicate",           "set_column_type", "resolve_flag",
    "accept_alignment", "set_alignment",           "create_entity_and_align",
    "split_cell",       "define_hierarchy",        "define_group"};

}  // namespace

std::string_view to_string(DecisionKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<DecisionKind> decision_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
        if (kKindNames[i] == s) return static_cast<DecisionKind>(i);
    }
    return std::nullopt;
}

Phase phase_of(DecisionKind k) {
    switch (k) {
        case DecisionKind::accept_predicate:
        case DecisionKind::set_predicate:
        case DecisionKind::set_column_type:
        case DecisionKind::resolve_flag: return Phase::cta;
        case DecisionKind::accept_alignment:
        case DecisionKind::set_alignment:
        case DecisionKind::create_entity_and_align:
        case DecisionKind::split_cell: return Phase::cea;
        case DecisionKind::define_hierarchy:
        case DecisionKind::define_group: return Phase::structuring;
    }
    return Phase::cta;
}

std::string utc_timestamp() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto secs = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0')
        << ms << 'Z';
    return out.str();
}

bool Session::operator==(const Session& o) const {
    return id_ == o.id_ && phase_ == o.phase_ && table_ == o.table_ && store_ == o.store_ &&
           properties_ == o.properties_ && columns_ == o.columns_ && cells_ == o.cells_ &&
           coerced_ == o.coerced_ && splits_ == o.splits_ &&
           decided_alignments_ == o.decided_alignments_ && hierarchy_ == o.hierarchy_ &&
           groups_ == o.groups_ && log_ == o.log_ && model_ == o.model_;
}

std::vector<InconsistencyFlag> Session::flags() const {
    std::vector<InconsistencyFlag> out;
    for (const auto& c : columns_) out.insert(out.end(), c.flags.begin(), c.flags.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.row, a.column) < std::tie(b.row, b.column);
    });
    return out;
}

std::vector<InconsistencyFlag> Session::unresolved_flags() const {
    auto all = flags();
    std::erase_if(all, [](const auto& f) { return f.resolution != Resolution::unresolved; });
    return all;
}

std::vector<std::string> Session::finalize_blockers() const {
    std::vector<std::string> out;
    for (const auto& f : unresolved_flags()) {
        out.push_back("unresolved flag at (row " + std::to_string(f.row) + ", column " +
                      std::to_string(f.column) + "): found " + std::string(to_string(f.found_type)) +
                      ", expected " + std::string(to_string(f.expected_type)));
    }
    for (const auto& [key, cell] : cells_) {
        for (std::size_t i = 0; i < cell.values.size(); ++i) {
            if (cell.values[i].alignment) continue;
            out.push_back("unaligned value at (row " + std::to_string(key.first) + ", column " +
                          std::to_string(key.second) + ") value " + std::to_string(i) + " '" +
                          cell.values[i].value_text + "'");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// State access

ColumnAnnotation& Session::column_at(std::size_t column) {
    if (column >= columns_.size())
        throw IntegrityError("unknown column " + std::to_string(column));
    return columns_[column];
}

CellAnnotation& Session::cell_at(std::size_t row, std::size_t column) {
    column_at(column);
    if (row >= table_.rows.size()) throw IntegrityError("unknown row " + std::to_string(row));
    auto it = cells_.find({row, column});
    if (it == cells_.end())
        throw IntegrityError("cell (" + std::to_string(row) + ", " + std::to_string(column) +
                             ") is not entity-linkable");
    return it->second;
}

ValueAnnotation& Session::value_at(std::size_t row, std::size_t column, std::size_t index) {
    auto& cell = cell_at(row, column);
    if (index >= cell.values.size())
        throw IntegrityError("cell (" + std::to_string(row) + ", " + std::to_string(column) +
                             ") has no value " + std::to_string(index));
    return cell.values[index];
}

void Session::set_human_alignment(std::size_t row, std::size_t column, std::size_t index,
                                  Alignment a, Origin actor) {
    decided_alignments_[{row, column, index}] = {std::move(a), actor};
}

void Session::clear_alignments(std::size_t row, std::size_t column) {
    std::erase_if(decided_alignments_, [&](const auto& kv) {
        return std::get<0>(kv.first) == row && std::get<1>(kv.first) == column;
    });
}

void Session::clear_column_alignments(std::size_t column) {
    std::erase_if(decided_alignments_,
                  [&](const auto& kv) { return std::get<1>(kv.first) == column; });
}

void Session::change_column_type(std::size_t column, CellType type, Origin actor) {
    if (type == CellType::empty) throw ValidationError("a column cannot be typed as empty");
    auto& col = column_at(column);
    if (entity_linkable(col.assigned_type) != entity_linkable(type)) clear_column_alignments(column);
    std::erase_if(coerced_, [&](const CellKey& k) { return k.second == column; });
    col.assigned_type = type;
    col.type_by = actor;
}

// ---------------------------------------------------------------------------
// Recomputation of every machine-derived field from the decided state.

void Session::refresh() {
    for (auto& col : columns_) {
        const auto& header = table_.header[col.column];
        if (table_.rows.empty()) {
            col.inferred_type = CellType::string;
            col.vote_histogram.clear();
        } else {
            auto typed = infer_column_type(table_.column_values(col.column), col.column);
            col.inferred_type = typed.type;
            col.vote_histogram = std::move(typed.histogram);
        }
        if (col.type_by == Origin::machine) col.assigned_type = col.inferred_type;

        if (!table_.synthetic_header && !text::trim(header.raw_label).empty()) {
            auto s = suggest_predicates(header, store_);
            col.predicate_candidates = std::move(s.candidates);
            col.create_new_label = std::move(s.create_new_label);
        }

        col.flags = compute_flags(table_.column_values(col.column), col.assigned_type, col.column);
        for (auto& f : col.flags) {
            if (coerced_.count({f.row, f.column})) f.resolution = Resolution::coerced;
        }
    }

    cells_.clear();
    for (const auto& col : columns_) {
        if (!entity_linkable(col.assigned_type)) continue;
        for (std::size_t r = 0; r < table_.rows.size(); ++r) {
            const Cell& cell = table_.rows[r][col.column];
            if (text::trim(cell.raw_text).empty()) continue;
            Cell split;
            if (auto it = splits_.find({r, col.column}); it != splits_.end()) {
                split = it->second.empty() ? Cell::from_raw(cell.raw_text)
                                           : split_cell(cell, it->second);
            } else {
                split = split_cell(cell);
            }
            auto ca = annotate_cell_values(split, r, col.column, store_);
            for (std::size_t i = 0; i < ca.values.size(); ++i) {
                auto it = decided_alignments_.find({r, col.column, i});
                if (it == decided_alignments_.end()) continue;
                ca.values[i].alignment = it->second.first;
                ca.values[i].alignment_origin = it->second.second;
            }
            cells_.emplace(CellKey{r, col.column}, std::move(ca));
        }
    }
}

// ---------------------------------------------------------------------------
// Decisions

namespace {

const Candidate* find_candidate(const std::vector<Candidate>& list, const std::string& target) {
    for (const auto& c : list) {
        if (c.target == target) return &c;
    }
    return nullptr;
}

void require_exact_for_machine(Origin actor, double score, const std::string& what) {
    if (actor == Origin::machine && score < 1.0)
        throw IntegrityError("machine may only commit exact matches; " + what + " scored " +
                             std::to_string(score));
}

}  // namespace

void Session::apply_in_place(Decision d) {
    namespace dc = decision;
    if (phase_ == Phase::finalized) throw PhaseError("session " + id_ + " is finalized");
    if (d.seq != 0 && d.seq != log_.size() + 1)
        throw ValidationError("decision seq " + std::to_string(d.seq) + " does not continue log at " +
                              std::to_string(log_.size() + 1));
    d.seq = log_.size() + 1;
    if (d.timestamp.empty()) d.timestamp = clock_ ? clock_() : utc_timestamp();
    const Origin actor = d.actor;

    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, dc::AcceptPredicate>) {
                auto& col = column_at(p.column);
                if (p.predicate) {
                    const auto* cand = find_candidate(col.predicate_candidates, p.predicate->str());
                    if (!cand)
                        throw IntegrityError(p.predicate->str() + " is not a candidate for column " +
                                             std::to_string(p.column));
                    require_exact_for_machine(actor, cand->score, cand->target);
                    col.chosen_predicate = *p.predicate;
                } else {
                    if (actor == Origin::machine)
                        throw IntegrityError("machine may not create predicates");
                    if (!col.create_new_label)
                        throw IntegrityError("column " + std::to_string(p.column) +
                                             " has no create-new proposal");
                    col.chosen_predicate = store_.upsert_predicate(*col.create_new_label);
                }
                col.chosen_by = actor;
            } else if constexpr (std::is_same_v<T, dc::SetPredicate>) {
                auto& col = column_at(p.column);
                if (p.predicate && p.label)
                    throw ValidationError("set_predicate takes a predicate id or a label, not both");
                if (p.predicate) {
                    if (!store_.find_predicate(*p.predicate))
                        throw IntegrityError("unknown predicate " + p.predicate->str());
                    if (actor == Origin::machine) {
                        const auto* cand = find_candidate(col.predicate_candidates, p.predicate->str());
                        require_exact_for_machine(actor, cand ? cand->score : 0.0, p.predicate->str());
                    }
                    col.chosen_predicate = *p.predicate;
                } else if (p.label) {
                    if (actor == Origin::machine)
                        throw IntegrityError("machine may not create predicates by label");
                    col.chosen_predicate = store_.upsert_predicate(*p.label);
                } else {
                    col.chosen_predicate.reset();
                }
                col.chosen_by = actor;
            } else if constexpr (std::is_same_v<T, dc::SetColumnType>) {
                change_column_type(p.column, p.type, actor);
            } else if constexpr (std::is_same_v<T, dc::ResolveFlag>) {
                auto& col = column_at(p.column);
                const auto it = std::find_if(col.flags.begin(), col.flags.end(), [&](const auto& f) {
                    return f.row == p.row && f.resolution == Resolution::unresolved;
                });
                if (it == col.flags.end())
                    throw IntegrityError("no unresolved flag at (" + std::to_string(p.row) + ", " +
                                         std::to_string(p.column) + ")");
                switch (p.resolution) {
                    case Resolution::coerced: coerced_.insert({p.row, p.column}); break;
                    case Resolution::type_changed:
                        if (!p.type) throw ValidationError("type_changed needs a type");
                        change_column_type(p.column, *p.type, actor);
                        break;
                    case Resolution::value_edited:
                        if (!p.value) throw ValidationError("value_edited needs a value");
                        table_.rows[p.row][p.column] = Cell::from_raw(*p.value);
                        splits_.erase({p.row, p.column});
                        clear_alignments(p.row, p.column);
                        break;
                    case Resolution::unresolved:
                        throw ValidationError("resolution must not be 'unresolved'");
                }
            } else if constexpr (std::is_same_v<T, dc::AcceptAlignment>) {
                const auto& v = value_at(p.row, p.column, p.value_index);
                Alignment chosen;
                if (v.alignment) {
                    chosen = *v.alignment;
                    if (actor == Origin::machine) {
                        const auto* e = std::get_if<EntityId>(&chosen);
                        const auto* cand = e ? find_candidate(v.candidates, e->str()) : nullptr;
                        require_exact_for_machine(actor, cand ? cand->score : 0.0, "alignment");
                    }
                } else {
                    if (v.candidates.empty())
                        throw IntegrityError("no candidate to accept for '" + v.value_text + "'");
                    const auto& top = v.candidates.front();
                    require_exact_for_machine(actor, top.score, top.target);
                    chosen = *EntityId::parse(top.target);
                }
                set_human_alignment(p.row, p.column, p.value_index, chosen, actor);
            } else if constexpr (std::is_same_v<T, dc::SetAlignment>) {
                const auto& v = value_at(p.row, p.column, p.value_index);
                if (p.entity.has_value() == p.literal)
                    throw ValidationError("set_alignment takes exactly one of entity or literal");
                if (p.entity) {
                    const auto* cand = find_candidate(v.candidates, p.entity->str());
                    if (!cand)
                        throw IntegrityError(p.entity->str() + " is not a candidate for '" +
                                             v.value_text + "'");
                    require_exact_for_machine(actor, cand->score, cand->target);
                    set_human_alignment(p.row, p.column, p.value_index, *p.entity, actor);
                } else {
                    if (actor == Origin::machine)
                        throw IntegrityError("machine may not confirm literals");
                    const auto& col = column_at(p.column);
                    set_human_alignment(p.row, p.column, p.value_index,
                                        literal_for(v.value_text, col.assigned_type), actor);
                }
            } else if constexpr (std::is_same_v<T, dc::CreateEntityAndAlign>) {
                const auto& v = value_at(p.row, p.column, p.value_index);
                if (actor == Origin::machine) throw IntegrityError("machine may not create entities");
                const auto label = p.label ? *p.label : std::string(text::trim(v.value_text));
                const auto id = store_.upsert_entity(label, p.class_ref, actor);
                set_human_alignment(p.row, p.column, p.value_index, id, actor);
            } else if constexpr (std::is_same_v<T, dc::SplitCell>) {
                cell_at(p.row, p.column);
                for (const auto& delim : p.delimiters) {
                    if (delim.empty()) throw ValidationError("empty split delimiter");
                }
                splits_[{p.row, p.column}] = p.delimiters;
                clear_alignments(p.row, p.column);
            } else if constexpr (std::is_same_v<T, dc::DefineHierarchy>) {
                const auto violations = validate_hierarchy(p.spec, properties_);
                std::vector<std::string> details;
                for (const auto& v : violations) details.push_back(v.describe());
                for (const auto& e : p.spec.edges) {
                    for (const auto& g : groups_) {
                        if (std::count(g.members.begin(), g.members.end(), e.child))
                            details.push_back("'" + e.child + "' is a member of group '" +
                                              g.group_label + "'");
                    }
                }
                if (!details.empty()) throw IntegrityError("invalid hierarchy", details);
                hierarchy_ = p.spec;
            } else if constexpr (std::is_same_v<T, dc::DefineGroup>) {
                const auto problems = validate_group(p.spec);
                if (!problems.empty()) throw ValidationError("invalid group: " + problems.front());
                std::vector<std::string> details;
                const std::set<PropertyRef> props(properties_.begin(), properties_.end());
                if (props.count(p.spec.group_label))
                    details.push_back("group label clashes with property '" + p.spec.group_label + "'");
                for (const auto& g : groups_) {
                    if (g.group_label == p.spec.group_label)
                        details.push_back("group '" + g.group_label + "' already exists");
                }
                for (const auto& m : p.spec.members) {
                    if (!props.count(m)) details.push_back("unknown property '" + m + "'");
                    for (const auto& e : hierarchy_.edges) {
                        if (e.child == m) details.push_back("'" + m + "' is nested under '" + e.parent + "'");
                    }
                    for (const auto& g : groups_) {
                        if (std::count(g.members.begin(), g.members.end(), m))
                            details.push_back("'" + m + "' already belongs to '" + g.group_label + "'");
                    }
                }
                if (!details.empty()) throw IntegrityError("invalid group", details);
                groups_.push_back(p.spec);
            }
        },
        d.payload);

    phase_ = std::max(phase_, phase_of(d.kind()));
    refresh();
    log_.push_back(std::move(d));
}

// ---------------------------------------------------------------------------
// Protocol operations

Session open_session(const Table& table, const KgStore& store, std::string id, Clock clock) {
    validate_table(table);
    Session s;
    s.id_ = std::move(id);
    s.clock_ = std::move(clock);
    s.table_ = table;
    s.store_ = store;
    s.properties_ = property_labels(table);
    s.columns_ = annotate_table_cta(table, store);

    std::vector<Decision> machine;
    for (auto& col : s.columns_) {
        machine.push_back(Decision{0, Origin::machine,
                                   decision::SetColumnType{col.column, col.inferred_type}, {}});
        if (col.chosen_predicate) {
            machine.push_back(Decision{
                0, Origin::machine, decision::AcceptPredicate{col.column, col.chosen_predicate}, {}});
        }
        col.chosen_predicate.reset();
    }
    s.refresh();
    s.phase_ = Phase::cta;
    for (auto& d : machine) s.apply_in_place(std::move(d));
    return s;
}

Session apply_decision(const Session& session, Decision decision) {
    Session next = session;
    next.apply_in_place(std::move(decision));
    return next;
}

Session apply_log(const Session& session, const std::vector<Decision>& log, bool adopt_timestamps) {
    Session next = session;
    std::optional<std::size_t> previous;
    for (const auto& entry : log) {
        if (previous && entry.seq != *previous + 1)
            throw ReplayError(entry.seq, "expected seq " + std::to_string(*previous + 1));
        previous = entry.seq;
        if (entry.seq == 0) throw ReplayError(0, "log entries must carry a seq");
        if (entry.seq <= next.log_.size()) {
            auto& recorded = next.log_[entry.seq - 1];
            if (!recorded.same_action(entry))
                throw ReplayError(entry.seq, "does not match the recorded " +
                                                 std::string(to_string(recorded.kind())) + " decision");
            if (adopt_timestamps) recorded.timestamp = entry.timestamp;
            continue;
        }
        if (entry.seq != next.log_.size() + 1)
            throw ReplayError(entry.seq, "gap after seq " + std::to_string(next.log_.size()));
        try {
            next.apply_in_place(entry);
        } catch (const ReplayError&) {
            throw;
        } catch (const Error& e) {
            throw ReplayError(entry.seq, e.code() + ": " + e.what());
        }
    }
    return next;
}

Session replay(const Table& table, const KgStore& store, const std::vector<Decision>& log,
               std::string id, Clock clock) {
    return apply_log(open_session(table, store, std::move(id), std::move(clock)), log, true);
}

AnnotatedModel finalize(Session& session) {
    if (session.phase_ == Phase::finalized)
        throw PhaseError("session " + session.id_ + " is already finalized");
    const auto blockers = session.finalize_blockers();
    if (!blockers.empty())
        throw FinalizeBlockedError("session " + session.id_ + " cannot be finalized", blockers);

    Session next = session;
    auto structure = flat_model({&next.table_, &next.columns_, &next.cells_});
    structure = apply_hierarchy(next.hierarchy_, structure);
    for (const auto& g : next.groups_) structure = apply_grouping(g, structure, next.store_);

    AnnotatedModel model{next.table_.source_id, next.table_.metadata, std::move(structure)};
    next.model_ = model;
    next.phase_ = Phase::finalized;
    session = std::move(next);
    return model;
}

}  // namespace tabsem
