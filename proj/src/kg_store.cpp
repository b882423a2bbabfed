#include "tabsem/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tabsem/error.hpp"
#include "tabsem/similarity.hpp"
#include "tabsem/text.hpp"

namespace tabsem {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Origin o) { return o == Origin::machine ? "machine" : "human"; }

std::optional<Origin> origin_from_string(std::string_view s) {
    if (s == "machine") return Origin::machine;
    if (s == "human") return Origin::human;
    return std::nullopt;
}

std::string_view to_string(MatchKind k) {
    switch (k) {
        case MatchKind::exact: return "exact";
        case MatchKind::normalized: return "normalized";
        case MatchKind::fuzzy: return "fuzzy";
    }
    return "fuzzy";
}

std::string_view to_string(TargetKind k) { return k == TargetKind::entity ? "entity" : "predicate"; }

std::optional<TargetKind> target_kind_from_string(std::string_view s) {
    if (s == "entity") return TargetKind::entity;
    if (s == "predicate") return TargetKind::predicate;
    return std::nullopt;
}

namespace {

// Ids of one kind share a prefix, so numeric order is the id order.
std::uint64_t id_number(const std::string& rendered) {
    return std::stoull(rendered.substr(1));
}

}  // namespace

bool candidate_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.label != b.label) return a.label < b.label;
    return id_number(a.target) < id_number(b.target);
}

// ---------------------------------------------------------------------------
// Label index

void KgStore::LabelIndex::add(std::uint64_t id, std::string_view label) {
    const auto norm = text::normalize_label(label);
    const auto grams = trigrams(norm);
    for (const auto& g : grams) postings[g].push_back(id);
    gram_count[id] = grams.size();
    by_normalized[norm].push_back(id);
}

void KgStore::LabelIndex::remove(std::uint64_t id, std::string_view label) {
    const auto norm = text::normalize_label(label);
    auto erase_from = [id](std::vector<std::uint64_t>& v) {
        v.erase(std::remove(v.begin(), v.end(), id), v.end());
    };
    for (const auto& g : trigrams(norm)) {
        auto it = postings.find(g);
        if (it == postings.end()) continue;
        erase_from(it->second);
        if (it->second.empty()) postings.erase(it);
    }
    gram_count.erase(id);
    if (auto it = by_normalized.find(norm); it != by_normalized.end()) {
        erase_from(it->second);
        if (it->second.empty()) by_normalized.erase(it);
    }
}

// ---------------------------------------------------------------------------
// Mutation

void KgStore::insert_entity(Entity e) {
    entity_index_.add(e.id.value, e.label);
    entity_keys_.emplace(std::make_pair(text::normalize_label(e.label), e.class_ref), e.id);
    const auto id = e.id;
    entities_.emplace(id, std::move(e));
}

void KgStore::insert_predicate(Predicate p) {
    predicate_index_.add(p.id.value, p.label);
    predicate_keys_.emplace(text::normalize_label(p.label), p.id);
    const auto id = p.id;
    predicates_.emplace(id, std::move(p));
}

void KgStore::insert_statement(Statement st) {
    statement_keys_.emplace(key_of(st.subject, st.predicate, st.object), st.id);
    const auto id = st.id;
    statements_.emplace(id, std::move(st));
}

EntityId KgStore::upsert_entity(std::string_view label, std::optional<std::string> class_ref,
                                Origin origin) {
    const auto trimmed = text::trim(label);
    if (trimmed.empty()) throw ValidationError("entity label is empty");
    if (auto existing = find_entity_by_label(trimmed, class_ref)) return *existing;
    Entity e{EntityId{next_entity_++}, std::string(trimmed), std::move(class_ref), origin};
    const auto id = e.id;
    insert_entity(std::move(e));
    return id;
}

PredicateId KgStore::upsert_predicate(std::string_view label,
                                      std::optional<std::string> description) {
    const auto trimmed = text::trim(label);
    if (trimmed.empty()) throw ValidationError("predicate label is empty");
    if (auto existing = find_predicate_by_label(trimmed)) return *existing;
    Predicate p{PredicateId{next_predicate_++}, std::string(trimmed), std::move(description)};
    const auto id = p.id;
    insert_predicate(std::move(p));
    return id;
}

const Entity* KgStore::find_entity(EntityId id) const {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

const Predicate* KgStore::find_predicate(PredicateId id) const {
    auto it = predicates_.find(id);
    return it == predicates_.end() ? nullptr : &it->second;
}

const Statement* KgStore::find_statement(StatementId id) const {
    auto it = statements_.find(id);
    return it == statements_.end() ? nullptr : &it->second;
}

std::optional<EntityId> KgStore::find_entity_by_label(
    std::string_view label, const std::optional<std::string>& class_ref) const {
    auto it = entity_keys_.find(std::make_pair(text::normalize_label(label), class_ref));
    if (it == entity_keys_.end()) return std::nullopt;
    return it->second;
}

std::optional<PredicateId> KgStore::find_predicate_by_label(std::string_view label) const {
    auto it = predicate_keys_.find(text::normalize_label(label));
    if (it == predicate_keys_.end()) return std::nullopt;
    return it->second;
}

KgStore::StatementKey KgStore::key_of(EntityId s, PredicateId p, const Object& o) {
    std::string obj;
    if (const auto* e = std::get_if<EntityId>(&o)) {
        obj = "E:" + e->str();
    } else {
        const auto& lit = std::get<Literal>(o);
        obj = "L:" + std::string(to_string(lit.datatype)) + ":" + lit.lexical;
    }
    return {s.value, p.value, std::move(obj)};
}

std::optional<StatementId> KgStore::find_statement(EntityId s, PredicateId p,
                                                   const Object& o) const {
    auto it = statement_keys_.find(key_of(s, p, o));
    if (it == statement_keys_.end()) return std::nullopt;
    return it->second;
}

void KgStore::remove_entity(EntityId id) {
    auto it = entities_.find(id);
    if (it == entities_.end()) throw NotFoundError("unknown entity " + id.str());
    for (const auto& [sid, st] : statements_) {
        const auto* obj = std::get_if<EntityId>(&st.object);
        if (st.subject == id || (obj && *obj == id))
            throw IntegrityError("entity " + id.str() + " is referenced by " + sid.str());
    }
    entity_index_.remove(id.value, it->second.label);
    entity_keys_.erase(std::make_pair(text::normalize_label(it->second.label), it->second.class_ref));
    entities_.erase(it);
}

StatementId KgStore::add_statement(EntityId s, PredicateId p, Object o) {
    std::vector<std::string> dangling;
    if (!find_entity(s)) dangling.push_back("subject " + s.str());
    if (!find_predicate(p)) dangling.push_back("predicate " + p.str());
    if (const auto* e = std::get_if<EntityId>(&o); e && !find_entity(*e))
        dangling.push_back("object " + e->str());
    if (!dangling.empty()) throw IntegrityError("dangling statement reference", dangling);
    if (const auto* lit = std::get_if<Literal>(&o); lit && !lexeme_valid(lit->datatype, lit->lexical))
        throw ValidationError("literal '" + lit->lexical + "' is not a valid " +
                              std::string(to_string(lit->datatype)));

    if (auto existing = find_statement(s, p, o)) return *existing;
    Statement st{StatementId{next_statement_++}, s, p, std::move(o)};
    const auto id = st.id;
    insert_statement(std::move(st));
    return id;
}

// ---------------------------------------------------------------------------
// Lookup

std::vector<Candidate> KgStore::lookup_candidates(std::string_view query, TargetKind kind,
                                                  std::size_t limit,
                                                  const LookupOptions& options) const {
    if (text::trim(query).empty()) throw ValidationError("candidate query is empty");
    if (limit == 0) throw ValidationError("candidate limit must be positive");

    const auto& index = kind == TargetKind::entity ? entity_index_ : predicate_index_;
    const auto norm = text::normalize_label(query);
    const auto grams = trigrams(norm);

    // Every item with a positive score shares a trigram with the query or has
    // the same normalized label; a non-positive threshold admits all items.
    std::unordered_map<std::uint64_t, std::size_t> shared;
    if (options.threshold <= 0.0) {
        for (const auto& [id, _] : index.gram_count) shared.emplace(id, 0);
    }
    for (const auto& g : grams) {
        auto it = index.postings.find(g);
        if (it == index.postings.end()) continue;
        for (auto id : it->second) ++shared[id];
    }
    if (auto it = index.by_normalized.find(norm); it != index.by_normalized.end()) {
        for (auto id : it->second) shared.try_emplace(id, 0);
    }

    std::vector<Candidate> out;
    for (const auto& [id, common] : shared) {
        std::string label;
        std::string rendered;
        if (kind == TargetKind::entity) {
            const auto& e = entities_.at(EntityId{id});
            if (options.class_filter && e.class_ref != options.class_filter) continue;
            label = e.label;
            rendered = e.id.str();
        } else {
            const auto& p = predicates_.at(PredicateId{id});
            label = p.label;
            rendered = p.id.str();
        }
        const bool same = text::normalize_label(label) == norm;
        const double score =
            same ? 1.0 : jaccard_score(common, grams.size(), index.gram_count.at(id));
        if (score < options.threshold) continue;
        MatchKind mk = MatchKind::fuzzy;
        if (same) mk = label == query ? MatchKind::exact : MatchKind::normalized;
        out.push_back(Candidate{std::move(rendered), std::move(label), score, mk});
    }
    std::sort(out.begin(), out.end(), candidate_before);
    if (out.size() > limit) out.resize(limit);
    return out;
}

void KgStore::check_integrity() const {
    std::vector<std::string> dangling;
    for (const auto& [sid, st] : statements_) {
        if (!find_entity(st.subject)) dangling.push_back(sid.str() + " subject " + st.subject.str());
        if (!find_predicate(st.predicate))
            dangling.push_back(sid.str() + " predicate " + st.predicate.str());
        if (const auto* e = std::get_if<EntityId>(&st.object); e && !find_entity(*e))
            dangling.push_back(sid.str() + " object " + e->str());
    }
    if (!dangling.empty()) throw IntegrityError("store has dangling references", dangling);
}

bool KgStore::operator==(const KgStore& other) const {
    return entities_ == other.entities_ && predicates_ == other.predicates_ &&
           statements_ == other.statements_ && next_entity_ == other.next_entity_ &&
           next_predicate_ == other.next_predicate_ && next_statement_ == other.next_statement_;
}

// ---------------------------------------------------------------------------
// Snapshot: one JSON record per line, header first, `end` record last.

namespace {

ojson optional_string(const std::optional<std::string>& s) {
    return s ? ojson(*s) : ojson(nullptr);
}

std::optional<std::string> read_optional(const ojson& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
}

}  // namespace

std::string KgStore::to_snapshot() const {
    std::ostringstream out;
    out << ojson{{"format", "tabsem-kg-snapshot"}, {"version", kSnapshotVersion}}.dump() << '\n';
    for (const auto& [id, e] : entities_) {
        out << ojson{{"record", "entity"},
                     {"id", id.str()},
                     {"label", e.label},
                     {"class", optional_string(e.class_ref)},
                     {"origin", to_string(e.created_by)}}
                   .dump()
            << '\n';
    }
    for (const auto& [id, p] : predicates_) {
        out << ojson{{"record", "predicate"},
                     {"id", id.str()},
                     {"label", p.label},
                     {"description", optional_string(p.description)}}
                   .dump()
            << '\n';
    }
    for (const auto& [id, st] : statements_) {
        ojson obj;
        if (const auto* e = std::get_if<EntityId>(&st.object)) {
            obj = ojson{{"entity", e->str()}};
        } else {
            const auto& lit = std::get<Literal>(st.object);
            obj = ojson{{"literal", lit.lexical}, {"datatype", to_string(lit.datatype)}};
        }
        out << ojson{{"record", "statement"},
                     {"id", id.str()},
                     {"subject", st.subject.str()},
                     {"predicate", st.predicate.str()},
                     {"object", obj}}
                   .dump()
            << '\n';
    }
    out << ojson{{"record", "end"},
                 {"entities", entities_.size()},
                 {"predicates", predicates_.size()},
                 {"statements", statements_.size()},
                 {"next_entity", next_entity_},
                 {"next_predicate", next_predicate_},
                 {"next_statement", next_statement_}}
               .dump()
        << '\n';
    return out.str();
}

KgStore KgStore::from_snapshot(std::string_view bytes) {
    KgStore store;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool end_seen = false;
    std::size_t pos = 0;

    auto fail = [&](const std::string& why) -> SnapshotError {
        return SnapshotError("line " + std::to_string(line_no) + ": " + why);
    };
    auto need_id = [&](auto parsed, const std::string& raw) {
        if (!parsed) throw fail("malformed id '" + raw + "'");
        return *parsed;
    };

    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) throw SnapshotError("truncated snapshot (missing final newline)");
        const auto line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (end_seen) throw fail("data after end record");

        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw fail(std::string("unparseable record: ") + e.what());
        }
        try {
            if (!header_seen) {
                if (j.value("format", "") != "tabsem-kg-snapshot") throw fail("not a KG snapshot");
                const int version = j.at("version").get<int>();
                if (version != kSnapshotVersion)
                    throw fail("unsupported snapshot version " + std::to_string(version));
                header_seen = true;
                continue;
            }
            const auto record = j.at("record").get<std::string>();
            if (record == "entity") {
                const auto raw = j.at("id").get<std::string>();
                const auto id = need_id(EntityId::parse(raw), raw);
                const auto origin = origin_from_string(j.at("origin").get<std::string>());
                if (!origin) throw fail("bad origin");
                if (store.entities_.count(id)) throw fail("duplicate id " + raw);
                store.insert_entity(
                    Entity{id, j.at("label").get<std::string>(), read_optional(j, "class"), *origin});
            } else if (record == "predicate") {
                const auto raw = j.at("id").get<std::string>();
                const auto id = need_id(PredicateId::parse(raw), raw);
                if (store.predicates_.count(id)) throw fail("duplicate id " + raw);
                store.insert_predicate(
                    Predicate{id, j.at("label").get<std::string>(), read_optional(j, "description")});
            } else if (record == "statement") {
                const auto raw = j.at("id").get<std::string>();
                const auto id = need_id(StatementId::parse(raw), raw);
                if (store.statements_.count(id)) throw fail("duplicate id " + raw);
                const auto s_raw = j.at("subject").get<std::string>();
                const auto p_raw = j.at("predicate").get<std::string>();
                Statement st{id, need_id(EntityId::parse(s_raw), s_raw),
                             need_id(PredicateId::parse(p_raw), p_raw), EntityId{}};
                const auto& obj = j.at("object");
                if (obj.contains("entity")) {
                    const auto o_raw = obj.at("entity").get<std::string>();
                    st.object = need_id(EntityId::parse(o_raw), o_raw);
                } else {
                    const auto dt = cell_type_from_string(obj.at("datatype").get<std::string>());
                    if (!dt) throw fail("bad literal datatype");
                    st.object = Literal{obj.at("literal").get<std::string>(), *dt};
                }
                store.insert_statement(std::move(st));
            } else if (record == "end") {
                if (j.at("entities").get<std::size_t>() != store.entities_.size() ||
                    j.at("predicates").get<std::size_t>() != store.predicates_.size() ||
                    j.at("statements").get<std::size_t>() != store.statements_.size())
                    throw fail("record counts do not match end record");
                store.next_entity_ = j.at("next_entity").get<std::uint64_t>();
                store.next_predicate_ = j.at("next_predicate").get<std::uint64_t>();
                store.next_statement_ = j.at("next_statement").get<std::uint64_t>();
                end_seen = true;
            } else {
                throw fail("unknown record '" + record + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw fail(std::string("malformed record: ") + e.what());
        }
    }
    if (!header_seen) throw SnapshotError("empty snapshot");
    if (!end_seen) throw SnapshotError("truncated snapshot (missing end record)");

    auto max_id = [](const auto& m) { return m.empty() ? 0 : m.rbegin()->first.value; };
    if (store.next_entity_ <= max_id(store.entities_) ||
        store.next_predicate_ <= max_id(store.predicates_) ||
        store.next_statement_ <= max_id(store.statements_))
        throw SnapshotError("id counters behind stored ids");
    try {
        store.check_integrity();
    } catch (const IntegrityError& e) {
        throw SnapshotError(std::string("corrupt snapshot: ") + e.what());
    }
    return store;
}

void KgStore::save(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SnapshotError("cannot write " + tmp);
        out << to_snapshot();
        if (!out) throw SnapshotError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

KgStore KgStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_snapshot(buf.str());
}

}  // namespace tabsem
