#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "stage_fixtures.hpp"
#include "tabsem/error.hpp"
#include "tabsem/evolution.hpp"
#include "tabsem/ntriples.hpp"

using namespace tabsem;
namespace fs = std::filesystem;
namespace dc = tabsem::decision;
using stage_fixtures::human;

namespace {

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Opens a session on `csv` against a store that knows every header and every
// string value exactly, so the machine aligns everything.
Session aligned_session(const std::string& csv, const std::vector<std::string>& labels) {
    auto t = parse_csv(csv, {.header_mode = HeaderMode::present});
    t.source_id = "aligned.csv";
    KgStore store;
    for (const auto& h : t.header) store.upsert_predicate(h.raw_label);
    for (const auto& l : labels) store.upsert_entity(l, std::nullopt, Origin::human);
    return open_session(t, store, "s", stage_fixtures::counter_clock());
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("tabsem_evolution_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// N-Triples

TEST(NTriples, WriterIsSortedAndDeduplicated) {
    const auto a = nt::Triple{nt::Term::iri("http://x/b"), nt::Term::iri("http://x/p"),
                              nt::Term::literal("1", "http://www.w3.org/2001/XMLSchema#integer")};
    const auto b = nt::Triple{nt::Term::iri("http://x/a"), nt::Term::iri("http://x/p"),
                              nt::Term::literal("say \"hi\"\n", std::string(nt::kXsdString))};
    EXPECT_EQ(nt::write_ntriples({a, b, a}),
              "<http://x/a> <http://x/p> \"say \\\"hi\\\"\\n\" .\n"
              "<http://x/b> <http://x/p> \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n");
    EXPECT_EQ(nt::write_ntriples({}), "");
}

TEST(NTriples, ParserGrammar) {
    const auto t = nt::parse_ntriples(
        "# comment\n"
        "\n"
        "_:b0 <http://x/p> \"caf\\u00E9\"@fr .\n"
        "<http://x/s> <http://x/p> \"tab\\there\" .\n");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0].subject.kind, nt::Term::Kind::blank);
    EXPECT_EQ(t[0].object.value, "caf\xc3\xa9");
    EXPECT_EQ(t[0].object.language, "fr");
    EXPECT_EQ(t[1].object.value, "tab\there");
    EXPECT_EQ(t[1].object.datatype, nt::kXsdString);

    for (const char* bad : {"<http://x/s> <http://x/p> \"x\"\n", "<http://x/s> \"p\" \"x\" .\n",
                            "<http://x/s> <http://x/p> \"x .\n"}) {
        try {
            nt::parse_ntriples(std::string("<http://x/s> <http://x/p> <http://x/o> .\n") + bad);
            FAIL() << bad;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), 2u);
        }
    }
}

TEST(NTriples, ExportIsAFixedPoint) {
    const auto s = stage_fixtures::finalized_session();
    const auto doc = export_triples(*s.model(), s.store());
    EXPECT_EQ(nt::write_ntriples(nt::parse_ntriples(doc)), doc);
    EXPECT_EQ(export_triples(*s.model(), s.store()), doc);
}

TEST(NTriples, RandomLiteralsRoundTrip) {
    std::mt19937 rng(5);
    const std::string alphabet = "ab \"\\\n\r\t<>.\x7f\xc3\xa9";
    for (int i = 0; i < 300; ++i) {
        std::vector<nt::Triple> ts;
        for (int k = 0; k < 4; ++k) {
            std::string lex;
            for (std::size_t n = rng() % 12; n > 0; --n) {
                const char c = alphabet[rng() % alphabet.size()];
                if (c == '\xc3') lex += "\xc3\xa9";
                else if (c != '\xa9') lex += c;
            }
            ts.push_back({nt::Term::iri("http://x/s" + std::to_string(k)), nt::Term::iri("http://x/p"),
                          nt::Term::literal(lex, std::string(nt::kXsdString))});
        }
        const auto doc = nt::write_ntriples(ts);
        ASSERT_EQ(nt::write_ntriples(nt::parse_ntriples(doc)), doc);
    }
}

// ---------------------------------------------------------------------------
// export

TEST(Export, TwoByThreeAlignedTable) {
    auto s = aligned_session("method,dataset,metric\nBERT,SQuAD,F1\nGPT,GLUE,accuracy\n",
                             {"BERT", "SQuAD", "F1", "GPT", "GLUE", "accuracy"});
    ASSERT_TRUE(s.finalize_blockers().empty());
    const auto model = finalize(s);
    const auto doc = export_triples(model, s.store());
    EXPECT_EQ(lines(doc), 8u);
    TripleCounts counts;
    model_triples(model, s.store(), {}, &counts);
    EXPECT_EQ(counts.type, 2u);
    EXPECT_EQ(counts.leaf, 6u);
    EXPECT_EQ(counts.link + counts.group_type, 0u);
    // Every object is an entity IRI or the contribution class.
    for (const auto& t : nt::parse_ntriples(doc)) EXPECT_EQ(t.object.kind, nt::Term::Kind::iri);
}

TEST(Export, EmptyModelHasNoTriples) {
    auto s = open_session(parse_csv("a,b\n", {.header_mode = HeaderMode::present}), KgStore{});
    const auto model = finalize(s);
    EXPECT_EQ(export_triples(model, s.store()), "");
    const auto doc = nlohmann::json::parse(export_semantic_doc(model, s.store()));
    EXPECT_TRUE(doc["contributions"].empty());
    EXPECT_EQ(doc["schema"].size(), 2u);
}

TEST(Export, OneNestedNodeGivesOneLink) {
    auto s = aligned_session("metric,value\nF1,0.9\n", {"F1"});
    s = apply_decision(s, human(dc::DefineHierarchy{{{{"metric", "value"}}}}));
    const auto model = finalize(s);
    TripleCounts counts;
    const auto ts = model_triples(model, s.store(), {}, &counts);
    EXPECT_EQ(counts.type, 1u);
    EXPECT_EQ(counts.link, 1u);
    EXPECT_EQ(counts.leaf, 2u);
    EXPECT_EQ(lines(export_triples(model, s.store())), counts.total());
    const auto value = std::count_if(ts.begin(), ts.end(), [](const nt::Triple& t) {
        return t.predicate.value == nt::kRdfValue;
    });
    EXPECT_EQ(value, 1);
}

TEST(Export, CountingRuleMatchesAnIndependentTally) {
    const auto s = stage_fixtures::finalized_session();
    const auto& m = *s.model();
    TripleCounts counts;
    model_triples(m, s.store(), {}, &counts);
    std::size_t values = 0, grouped = 0;
    for (const auto& c : m.structure.contributions) {
        bool any = false;
        for (const auto& [prop, vs] : c.leaves) {
            values += vs.size();
            any |= (prop == "study type" || prop == "year") && !vs.empty();
        }
        grouped += any;
    }
    EXPECT_EQ(counts.type, 3u);
    EXPECT_EQ(counts.leaf, values);
    EXPECT_EQ(counts.link, grouped);
    EXPECT_EQ(counts.group_type, grouped);
    EXPECT_EQ(lines(export_triples(m, s.store())), counts.total());
}

TEST(Export, GroupNestsInSemanticDocument) {
    auto s = aligned_session("name,city,country\nA,Berlin,Germany\nB,Lyon,\n",
                             {"A", "B", "Berlin", "Lyon", "Germany"});
    s = apply_decision(s, human(dc::DefineGroup{{"location", {"city", "country"}}}));
    const auto model = finalize(s);
    const auto doc = nlohmann::json::parse(export_semantic_doc(model, s.store()));

    EXPECT_TRUE(doc["@context"].contains("location"));
    ASSERT_EQ(doc["schema"].size(), 2u);
    EXPECT_EQ(doc["schema"][1]["kind"], "group");
    EXPECT_EQ(doc["schema"][1]["children"].size(), 2u);

    const auto& first = doc["contributions"][0];
    ASSERT_TRUE(first.contains("location"));
    EXPECT_FALSE(first.contains("city"));
    const auto& loc = first["location"][0];
    EXPECT_EQ(loc["label"], "location");
    EXPECT_TRUE(loc.contains("@type"));
    EXPECT_EQ(loc["city"][0]["label"], "Berlin");
    EXPECT_EQ(loc["country"][0]["label"], "Germany");
    EXPECT_FALSE(doc["contributions"][1]["location"][0].contains("country"));
}

TEST(Export, LiteralDatatypes) {
    EXPECT_EQ(xsd_datatype({"2021", CellType::date}), "http://www.w3.org/2001/XMLSchema#gYear");
    EXPECT_EQ(xsd_datatype({"2021-01-02", CellType::date}), "http://www.w3.org/2001/XMLSchema#date");
    EXPECT_EQ(xsd_datatype({"1e3", CellType::decimal}), "http://www.w3.org/2001/XMLSchema#double");
    for (auto t : {CellType::boolean, CellType::integer, CellType::decimal, CellType::date, CellType::url,
                   CellType::string})
        EXPECT_EQ(cell_type_from_xsd(xsd_datatype({"x", t})), t);
    EXPECT_THROW(cell_type_from_xsd("http://www.w3.org/2001/XMLSchema#float"), ValidationError);
}

// ---------------------------------------------------------------------------
// integration

TEST(Integrate, IsIdempotent) {
    const auto s = stage_fixtures::finalized_session();
    KgStore target = stage_fixtures::fixture_store();
    const auto first = integrate(*s.model(), s.store(), target);
    EXPECT_GT(first.statements_added, 0u);
    EXPECT_EQ(first.statements_existing, 0u);
    EXPECT_EQ(first.report.achieved_stage, 5);
    const KgStore after_first = target;

    const auto second = integrate(*s.model(), s.store(), target);
    EXPECT_EQ(target, after_first);
    EXPECT_EQ(second.statements, first.statements);
    EXPECT_EQ(second.statements_added, 0u);
    EXPECT_EQ(second.statements_existing, first.statements.size());
    EXPECT_TRUE(second.entities_created.empty());
    EXPECT_TRUE(second.predicates_created.empty());
    EXPECT_NO_THROW(target.check_integrity());
}

TEST(Integrate, ReceiptMatchesExport) {
    const auto s = stage_fixtures::finalized_session();
    KgStore target;
    const auto r = integrate(*s.model(), s.store(), target);
    const auto exported = export_triples(*s.model(), s.store());
    EXPECT_EQ(r.statements.size(), lines(exported));
    EXPECT_EQ(lines(store_triples(target, r.statements)), lines(exported));
    // Pre-existing entities keep their ids; the model is re-keyed to the target.
    const auto survey = target.find_entity_by_label("survey", std::string("StudyType"));
    ASSERT_TRUE(survey);
    const auto& leaves = r.model.structure.contributions[0].leaves.at("study type");
    EXPECT_EQ(leaves[0].object, Object{*survey});
}

TEST(Integrate, DanglingEntityIsRejected) {
    const auto s = stage_fixtures::finalized_session();
    KgStore source = s.store();
    source.remove_entity(*source.find_entity_by_label("survey", std::string("StudyType")));
    KgStore target;
    EXPECT_THROW(integrate(*s.model(), source, target), IntegrityError);
    EXPECT_EQ(target, KgStore{});
}

// ---------------------------------------------------------------------------
// stage classification

TEST(Stage, FixturesClassifyOneThroughFive) {
    const auto dir = scratch("stages");
    const auto a = stage_fixtures::write_all(dir);
    ASSERT_EQ(a.by_stage.size(), 5u);
    const ArtifactKind kinds[] = {ArtifactKind::pdf_ref, ArtifactKind::tabular_proprietary,
                                  ArtifactKind::tabular_open, ArtifactKind::semantic_doc,
                                  ArtifactKind::kg_integrated};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto d = describe_artifact(a.by_stage[i]);
        EXPECT_EQ(d.kind, kinds[i]);
        const auto r = classify_stage(d);
        EXPECT_EQ(r.achieved_stage, static_cast<int>(i + 1)) << a.by_stage[i];
        EXPECT_EQ(r.criteria.size(), 11u);
        for (const auto& c : r.criteria) EXPECT_FALSE(c.evidence.empty()) << c.id;
    }
}

TEST(Stage, ReportsAreCumulative) {
    const auto dir = scratch("cumulative");
    const auto a = stage_fixtures::write_all(dir);
    for (const auto& p : a.by_stage) {
        const auto r = classify_stage(describe_artifact(p));
        for (const auto& c : r.criteria) {
            if (c.stage <= r.achieved_stage) EXPECT_TRUE(c.pass) << c.id;
        }
        if (r.achieved_stage < 5) {
            const bool blocked = std::any_of(r.criteria.begin(), r.criteria.end(), [&](const auto& c) {
                return c.stage == r.achieved_stage + 1 && !c.pass;
            });
            EXPECT_TRUE(blocked) << p;
        }
    }
}

TEST(Stage, MissingIdentifierIsStageZero) {
    const auto dir = scratch("nometa");
    stage_fixtures::write(dir / "t.csv", "a,b\n1,2\n");
    const auto r = classify_stage(describe_artifact(dir / "t.csv"));
    EXPECT_EQ(r.achieved_stage, 0);
    const auto later = classify_stage(describe_artifact(dir / "t.csv", {{"doi", "10.1/x"}, {"title", "T"}}));
    EXPECT_EQ(later.achieved_stage, 3);
}

TEST(Stage, UnmappedPropertyHoldsStageFour) {
    auto s = open_session(parse_csv("a,b\nx,1\n", {.header_mode = HeaderMode::present}), KgStore{});
    s = apply_decision(s, human(dc::AcceptPredicate{0, std::nullopt}));
    s = apply_decision(s, human(dc::SetAlignment{0, 0, 0, std::nullopt, true}));
    auto model = finalize(s);
    model.metadata = {{"doi", "10.1/x"}, {"title", "T"}};
    ArtifactDescriptor d;
    d.kind = ArtifactKind::semantic_doc;
    d.payload = export_semantic_doc(model, s.store());
    d.metadata = model.metadata;
    const auto r = classify_stage(d);
    EXPECT_EQ(r.achieved_stage, 3);
    const auto it = std::find_if(r.criteria.begin(), r.criteria.end(),
                                 [](const auto& c) { return c.id == "S4.predicates"; });
    ASSERT_NE(it, r.criteria.end());
    EXPECT_FALSE(it->pass);
    EXPECT_NE(it->evidence.find("b"), std::string::npos);
}

TEST(Stage, StoreMissingTheTriplesHoldsStageFour) {
    const auto dir = scratch("stale");
    const auto a = stage_fixtures::write_all(dir);
    KgStore().save(dir / "store.kg");
    const auto r = classify_stage(describe_artifact(a.by_stage[4]));
    EXPECT_EQ(r.achieved_stage, 4);
}

TEST(Stage, DescribeErrors) {
    const auto dir = scratch("errors");
    stage_fixtures::write(dir / "fake.pdf", "not a pdf");
    stage_fixtures::write(dir / "x.docx", "?");
    stage_fixtures::write(dir / "plain.json", "{\"a\":1}");
    stage_fixtures::write(dir / "broken.jsonld", "{");
    EXPECT_THROW(describe_artifact(dir / "fake.pdf"), ClassifyError);
    EXPECT_THROW(describe_artifact(dir / "x.docx"), ClassifyError);
    EXPECT_THROW(describe_artifact(dir / "plain.json"), ClassifyError);
    EXPECT_THROW(describe_artifact(dir / "broken.jsonld"), ClassifyError);
    EXPECT_THROW(describe_artifact(dir / "missing.csv"), ClassifyError);
}
