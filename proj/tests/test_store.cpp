#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "tabsem/error.hpp"
#include "tabsem/kg_store.hpp"
#include "tabsem/similarity.hpp"

using namespace tabsem;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "tabsem_store_tests";
    fs::create_directories(dir);
    return dir / name;
}

// 32 entities across four classes, a few predicates and statements.
KgStore comparison_store() {
    KgStore s;
    const std::vector<std::pair<std::string, std::string>> items = {
        {"prompting", "Approach"},  {"fine-tuning", "Approach"}, {"in-context learning", "Approach"},
        {"retrieval augmentation", "Approach"}, {"distillation", "Approach"}, {"GPT-4", "Model"},
        {"GPT-3.5", "Model"},       {"ChatGPT", "Model"},        {"Flan-T5", "Model"},
        {"BERT", "Model"},          {"RoBERTa", "Model"},        {"LLaMA 2", "Model"},
        {"Mistral 7B", "Model"},    {"Falcon", "Model"},         {"WebNLG", "Dataset"},
        {"DocRED", "Dataset"},      {"SciERC", "Dataset"},       {"FB15k-237", "Dataset"},
        {"TACRED", "Dataset"},      {"ZESHEL", "Dataset"},       {"Wikidata5M", "Dataset"},
        {"OntoNotes", "Dataset"},   {"CoNLL-2003", "Dataset"},   {"NYT", "Dataset"},
        {"relation extraction", "Task"}, {"named entity recognition", "Task"},
        {"knowledge graph completion", "Task"}, {"entity linking", "Task"}, {"ontology learning", "Task"},
        {"event extraction", "Task"}, {"question answering", "Task"}, {"text classification", "Task"}};
    for (const auto& [label, cls] : items) s.upsert_entity(label, cls, Origin::human);
    const auto uses = s.upsert_predicate("uses model");
    const auto year = s.upsert_predicate("year", "publication year");
    s.add_statement(EntityId{1}, uses, EntityId{6});
    s.add_statement(EntityId{2}, uses, EntityId{9});
    s.add_statement(EntityId{1}, year, Literal{"2023", CellType::integer});
    s.add_statement(EntityId{3}, year, Literal{"0.5", CellType::decimal});
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// similarity

TEST(Similarity, Examples) {
    EXPECT_EQ(similarity("Abc ", "abc"), 1.0);
    for (const std::string x : {"", "a", "method", "Study Type", "ü"}) EXPECT_EQ(similarity(x, x), 1.0);
}

// Frozen from the brute-force trigram oracle: "method" has 4 trigrams,
// "methods" the same 4 plus "ods".
TEST(Similarity, FrozenValues) {
    EXPECT_DOUBLE_EQ(oracle::similarity("method", "methods"), 0.8);
    EXPECT_DOUBLE_EQ(similarity("method", "methods"), 0.8);
    EXPECT_DOUBLE_EQ(oracle::similarity("Study Types", "study type"), 8.0 / 9.0);
    EXPECT_DOUBLE_EQ(similarity("Study Types", "study type"), 8.0 / 9.0);
    EXPECT_EQ(similarity("zzz", "method"), 0.0);
}

TEST(Similarity, DistinctLabelsStayBelowOne) {
    // Same trigram set, different strings.
    EXPECT_LT(similarity("aaa", "aaaa"), 1.0);
    EXPECT_GT(similarity("aaa", "aaaa"), 0.99);
}

TEST(Similarity, SymmetricAndMatchesOracle) {
    std::mt19937 rng(5);
    const std::string alphabet = "abcde AB-";
    for (int i = 0; i < 5000; ++i) {
        std::string a, b;
        for (int k = 0, n = static_cast<int>(rng() % 9); k < n; ++k) a += alphabet[rng() % alphabet.size()];
        for (int k = 0, n = static_cast<int>(rng() % 9); k < n; ++k) b += alphabet[rng() % alphabet.size()];
        ASSERT_EQ(similarity(a, b), similarity(b, a));
        ASSERT_EQ(similarity(a, b), oracle::similarity(a, b)) << a << " / " << b;
    }
}

TEST(Similarity, CodePointTrigrams) {
    EXPECT_EQ(trigrams("größe").size(), 3u);
    EXPECT_TRUE(trigrams("ab").empty());
}

// ---------------------------------------------------------------------------
// upsert

TEST(Store, UpsertIsIdempotentUnderNormalization) {
    KgStore s;
    const auto a = s.upsert_entity("Berlin", std::nullopt, Origin::human);
    EXPECT_EQ(s.upsert_entity("Berlin", std::nullopt, Origin::human), a);
    EXPECT_EQ(s.upsert_entity("berlin", std::nullopt, Origin::machine), a);
    EXPECT_EQ(s.upsert_entity("  BERLIN.", std::nullopt, Origin::machine), a);
    EXPECT_NE(s.upsert_entity("Berlin", std::string("City"), Origin::human), a);
    EXPECT_EQ(s.entities().size(), 2u);
    EXPECT_EQ(s.find_entity(a)->label, "Berlin");
    EXPECT_THROW(s.upsert_entity("", std::nullopt, Origin::human), ValidationError);
    EXPECT_THROW(s.upsert_entity("   ", std::nullopt, Origin::human), ValidationError);

    const auto p = s.upsert_predicate("study type");
    EXPECT_EQ(s.upsert_predicate("Study Type"), p);
    EXPECT_THROW(s.upsert_predicate(""), ValidationError);
}

TEST(Store, IdsAreMonotoneAndPrefixed) {
    KgStore s;
    EXPECT_EQ(s.upsert_entity("a", std::nullopt, Origin::human).str(), "E1");
    EXPECT_EQ(s.upsert_entity("b", std::nullopt, Origin::human).str(), "E2");
    EXPECT_EQ(s.upsert_predicate("p").str(), "P1");
    EXPECT_EQ(EntityId::parse("E12")->value, 12u);
    EXPECT_FALSE(EntityId::parse("P12"));
    EXPECT_FALSE(EntityId::parse("E"));
}

// ---------------------------------------------------------------------------
// statements

TEST(Store, AddStatementDedupAndIntegrity) {
    KgStore s;
    const auto e1 = s.upsert_entity("e1", std::nullopt, Origin::human);
    const auto p1 = s.upsert_predicate("p1");
    const auto id = s.add_statement(e1, p1, Literal{"42", CellType::integer});
    EXPECT_EQ(s.add_statement(e1, p1, Literal{"42", CellType::integer}), id);
    EXPECT_EQ(s.statements().size(), 1u);
    EXPECT_NE(s.add_statement(e1, p1, Literal{"42", CellType::string}), id);
    EXPECT_THROW(s.add_statement(EntityId{99}, p1, Literal{"1", CellType::integer}), IntegrityError);
    EXPECT_THROW(s.add_statement(e1, PredicateId{99}, Literal{"1", CellType::integer}), IntegrityError);
    EXPECT_THROW(s.add_statement(e1, p1, EntityId{99}), IntegrityError);
    EXPECT_THROW(s.add_statement(e1, p1, Literal{"abc", CellType::integer}), ValidationError);
    EXPECT_NO_THROW(s.check_integrity());
}

TEST(Store, RemoveEntityGuardsReferences) {
    KgStore s;
    const auto a = s.upsert_entity("a", std::nullopt, Origin::human);
    const auto b = s.upsert_entity("b", std::nullopt, Origin::human);
    s.add_statement(a, s.upsert_predicate("p"), b);
    EXPECT_THROW(s.remove_entity(b), IntegrityError);
    const auto c = s.upsert_entity("c", std::nullopt, Origin::human);
    s.remove_entity(c);
    EXPECT_EQ(s.find_entity(c), nullptr);
    EXPECT_TRUE(s.lookup_candidates("c", TargetKind::entity, 5).empty());
}

// ---------------------------------------------------------------------------
// lookup

TEST(Lookup, Examples) {
    KgStore s;
    const auto st = s.upsert_predicate("study type");
    s.upsert_predicate("method");

    const auto exact = s.lookup_candidates("Study Type", TargetKind::predicate, 5);
    ASSERT_FALSE(exact.empty());
    EXPECT_EQ(exact[0].target, st.str());
    EXPECT_EQ(exact[0].score, 1.0);
    EXPECT_EQ(exact[0].match_kind, MatchKind::normalized);
    EXPECT_EQ(s.lookup_candidates("study type", TargetKind::predicate, 5)[0].match_kind, MatchKind::exact);

    const auto fuzzy = s.lookup_candidates("methods", TargetKind::predicate, 5);
    ASSERT_EQ(fuzzy.size(), 1u);
    EXPECT_EQ(fuzzy[0].label, "method");
    EXPECT_DOUBLE_EQ(fuzzy[0].score, 0.8);
    EXPECT_EQ(fuzzy[0].match_kind, MatchKind::fuzzy);

    EXPECT_TRUE(s.lookup_candidates("zzz", TargetKind::predicate, 5).empty());
    EXPECT_THROW(s.lookup_candidates("", TargetKind::predicate, 5), ValidationError);
    EXPECT_THROW(s.lookup_candidates("x", TargetKind::predicate, 0), ValidationError);
}

TEST(Lookup, ScoreOneIffExactOrNormalized) {
    const auto s = comparison_store();
    for (const std::string q : {"gpt-4", "GPT 4", "bert", "Mistral", "entity linking", "linking", "ontology"}) {
        for (const auto& c : s.lookup_candidates(q, TargetKind::entity, 10)) {
            EXPECT_EQ(c.score == 1.0, c.match_kind != MatchKind::fuzzy) << q << " -> " << c.label;
        }
    }
}

TEST(Lookup, ClassFilter) {
    const auto s = comparison_store();
    const auto all = s.lookup_candidates("extraction", TargetKind::entity, 10, {.threshold = 0.2});
    const auto tasks =
        s.lookup_candidates("extraction", TargetKind::entity, 10, {.threshold = 0.2, .class_filter = "Task"});
    const auto models =
        s.lookup_candidates("extraction", TargetKind::entity, 10, {.threshold = 0.2, .class_filter = "Model"});
    EXPECT_FALSE(tasks.empty());
    EXPECT_TRUE(models.empty());
    EXPECT_LE(tasks.size(), all.size());
}

TEST(Lookup, MatchesLinearScan) {
    const auto s = comparison_store();
    for (const std::string q : {"gpt", "GPT-4", "relation", "extraction", "Llama-2", "ontonotes", "x"}) {
        for (double th : {0.0, 0.2, 0.5}) {
            EXPECT_EQ(s.lookup_candidates(q, TargetKind::entity, 7, {.threshold = th}),
                      oracle::lookup(s, q, TargetKind::entity, 7, th))
                << q << " @ " << th;
        }
    }
}

TEST(Lookup, OrderingIsTotal) {
    KgStore s;
    // Same label under two classes: ties broken by id.
    const auto a = s.upsert_entity("Paris", std::string("City"), Origin::human);
    const auto b = s.upsert_entity("Paris", std::string("Person"), Origin::human);
    const auto r = s.lookup_candidates("paris", TargetKind::entity, 5);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].target, a.str());
    EXPECT_EQ(r[1].target, b.str());
    EXPECT_TRUE(candidate_before(r[0], r[1]));
    EXPECT_FALSE(candidate_before(r[1], r[0]));
}

// ---------------------------------------------------------------------------
// snapshots

TEST(Snapshot, EmptyRoundTrip) {
    const KgStore empty;
    EXPECT_EQ(KgStore::from_snapshot(empty.to_snapshot()), empty);
}

TEST(Snapshot, FixtureRoundTrip) {
    const auto s = comparison_store();
    EXPECT_EQ(s.entities().size(), 32u);
    const auto path = temp_file("fixture.kg");
    s.save(path);
    const auto back = KgStore::load(path);
    EXPECT_EQ(back, s);
    EXPECT_EQ(back.to_snapshot(), s.to_snapshot());
    // Id counters survive: the next entity continues the sequence.
    auto copy = back;
    EXPECT_EQ(copy.upsert_entity("new one", std::nullopt, Origin::human).str(), "E33");
    EXPECT_EQ(copy.lookup_candidates("GPT-4", TargetKind::entity, 1)[0].target, "E6");
}

TEST(Snapshot, FormatHeader) {
    const auto text = comparison_store().to_snapshot();
    EXPECT_EQ(text.substr(0, text.find('\n')), R"({"format":"tabsem-kg-snapshot","version":1})");
}

TEST(Snapshot, CorruptInputs) {
    const auto text = comparison_store().to_snapshot();
    // Drop the trailing end record.
    const auto cut = text.rfind('\n', text.size() - 2);
    EXPECT_THROW(KgStore::from_snapshot(text.substr(0, cut + 1)), SnapshotError);
    EXPECT_THROW(KgStore::from_snapshot(text.substr(0, text.size() / 2)), SnapshotError);
    EXPECT_THROW(KgStore::from_snapshot(""), SnapshotError);
    std::string future = text;
    future.replace(future.find("\"version\":1"), 11, "\"version\":9");
    EXPECT_THROW(KgStore::from_snapshot(future), SnapshotError);
    EXPECT_THROW(KgStore::load(temp_file("missing.kg")), SnapshotError);
}

TEST(Snapshot, DanglingStatementRejected) {
    KgStore s;
    const auto e = s.upsert_entity("e", std::nullopt, Origin::human);
    s.add_statement(e, s.upsert_predicate("p"), Literal{"x", CellType::string});
    auto text = s.to_snapshot();
    text.replace(text.find("\"subject\":\"E1\""), 14, "\"subject\":\"E7\"");
    EXPECT_THROW(KgStore::from_snapshot(text), SnapshotError);
}
