#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tabsem/cell_type.hpp"
#include "tabsem/ids.hpp"

namespace tabsem {

enum class Origin { machine, human };

std::string_view to_string(Origin o);
std::optional<Origin> origin_from_string(std::string_view s);

struct Literal {
    std::string lexical;
    CellType datatype = CellType::string;

    auto operator<=>(const Literal&) const = default;
};

using Object = std::variant<EntityId, Literal>;

struct Entity {
    EntityId id;
    std::string label;
    std::optional<std::string> class_ref;
    Origin created_by = Origin::machine;

    bool operator==(const Entity&) const = default;
};

struct Predicate {
    PredicateId id;
    std::string label;
    std::optional<std::string> description;

    bool operator==(const Predicate&) const = default;
};

struct Statement {
    StatementId id;
    EntityId subject;
    PredicateId predicate;
    Object object;

    bool operator==(const Statement&) const = default;
};

enum class MatchKind { exact, normalized, fuzzy };
enum class TargetKind { entity, predicate };

std::string_view to_string(MatchKind k);
std::string_view to_string(TargetKind k);
std::optional<TargetKind> target_kind_from_string(std::string_view s);

struct Candidate {
    std::string target;  // rendered EntityId or PredicateId
    std::string label;
    double score = 0.0;
    MatchKind match_kind = MatchKind::fuzzy;

    bool operator==(const Candidate&) const = default;
};

// Total order used for every ranked candidate list.
bool candidate_before(const Candidate& a, const Candidate& b);

struct LookupOptions {
    double threshold = 0.5;
    // Only entities whose class equals this value (ignored for predicates).
    std::optional<std::string> class_filter;
};

inline constexpr int kSnapshotVersion = 1;

// In-memory knowledge graph with a trigram candidate index.
//
// Not internally synchronized: callers serialize writers and may share a
// const store between readers.
class KgStore {
public:
    EntityId upsert_entity(std::string_view label, std::optional<std::string> class_ref,
                           Origin origin);
    PredicateId upsert_predicate(std::string_view label,
                                 std::optional<std::string> description = std::nullopt);

    const Entity* find_entity(EntityId id) const;
    const Predicate* find_predicate(PredicateId id) const;
    const Statement* find_statement(StatementId id) const;
    std::optional<EntityId> find_entity_by_label(std::string_view label,
                                                 const std::optional<std::string>& class_ref) const;
    std::optional<PredicateId> find_predicate_by_label(std::string_view label) const;
    std::optional<StatementId> find_statement(EntityId s, PredicateId p, const Object& o) const;

    // Fails with IntegrityError while any statement still references the entity.
    void remove_entity(EntityId id);

    StatementId add_statement(EntityId s, PredicateId p, Object o);

    std::vector<Candidate> lookup_candidates(std::string_view query, TargetKind kind,
                                             std::size_t limit,
                                             const LookupOptions& options = {}) const;

    // Throws IntegrityError listing every dangling reference.
    void check_integrity() const;

    const std::map<EntityId, Entity>& entities() const { return entities_; }
    const std::map<PredicateId, Predicate>& predicates() const { return predicates_; }
    const std::map<StatementId, Statement>& statements() const { return statements_; }

    std::string to_snapshot() const;
    static KgStore from_snapshot(std::string_view bytes);
    void save(const std::filesystem::path& path) const;
    static KgStore load(const std::filesystem::path& path);

    bool operator==(const KgStore& other) const;

private:
    struct LabelIndex {
        std::unordered_map<std::u32string, std::vector<std::uint64_t>> postings;
        std::unordered_map<std::string, std::vector<std::uint64_t>> by_normalized;
        std::unordered_map<std::uint64_t, std::size_t> gram_count;

        void add(std::uint64_t id, std::string_view label);
        void remove(std::uint64_t id, std::string_view label);
    };

    using StatementKey = std::tuple<std::uint64_t, std::uint64_t, std::string>;
    static StatementKey key_of(EntityId s, PredicateId p, const Object& o);

    void insert_entity(Entity e);
    void insert_predicate(Predicate p);
    void insert_statement(Statement st);

    std::map<EntityId, Entity> entities_;
    std::map<PredicateId, Predicate> predicates_;
    std::map<StatementId, Statement> statements_;
    std::map<StatementKey, StatementId> statement_keys_;
    std::map<std::pair<std::string, std::optional<std::string>>, EntityId> entity_keys_;
    std::map<std::string, PredicateId> predicate_keys_;
    LabelIndex entity_index_;
    LabelIndex predicate_index_;
    std::uint64_t next_entity_ = 1;
    std::uint64_t next_predicate_ = 1;
    std::uint64_t next_statement_ = 1;
};

}  // namespace tabsem
