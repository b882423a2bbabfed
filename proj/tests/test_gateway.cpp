#include <gtest/gtest.h>

#include <httplib.h>

#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stage_fixtures.hpp"
#include "tabsem/decision_log.hpp"
#include "tabsem/error.hpp"
#include "tabsem/gateway/cli.hpp"
#include "tabsem/gateway/http.hpp"
#include "tabsem/gateway/workspace.hpp"

using namespace tabsem;
using namespace tabsem::gateway;
namespace fs = std::filesystem;
namespace dc = tabsem::decision;
using nlohmann::json;
using stage_fixtures::human;

namespace {

const std::string kFixture = std::string(TABSEM_FIXTURES) + "/fixture.csv";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("tabsem_gateway_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::vector<const char*> argv = {"tabsem"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path write_script(const fs::path& dir) {
    std::vector<Decision> log = stage_fixtures::fixture_script();
    const auto p = dir / "decisions.jsonl";
    stage_fixtures::write(p, write_decision_log(log));
    return p;
}

fs::path fixture_store_file(const fs::path& dir) {
    const auto p = dir / "seed.kg";
    stage_fixtures::fixture_store().save(p);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// CLI

TEST(Cli, ImportAndStageAFile) {
    const auto dir = scratch("cli_import");
    const auto state = (dir / "state").string();
    const auto r = cli({"--state-dir", state, "import", kFixture, "--store", fixture_store_file(dir).string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("session: s1"), std::string::npos);
    EXPECT_NE(r.out.find("phase: cta"), std::string::npos);
    EXPECT_NE(r.out.find("unresolved flags: 1"), std::string::npos);

    const auto s = cli({"--state-dir", state, "stage", kFixture});
    EXPECT_EQ(s.code, kExitOk);
    EXPECT_EQ(s.out.rfind("stage: 3\n", 0), 0u) << s.out;
}

TEST(Cli, FullFlowReachesStageFive) {
    const auto dir = scratch("cli_flow");
    const auto state = (dir / "state").string();
    ASSERT_EQ(cli({"--state-dir", state, "import", kFixture, "--store", fixture_store_file(dir).string()}).code, 0);
    const auto d = cli({"--state-dir", state, "decide", "s1", "--apply", write_script(dir).string()});
    ASSERT_EQ(d.code, 0) << d.err;
    EXPECT_NE(d.out.find("applied 5 decisions"), std::string::npos);
    EXPECT_NE(d.out.find("finalize blockers: 0"), std::string::npos);

    const auto f = cli({"--state-dir", state, "finalize", "s1"});
    ASSERT_EQ(f.code, 0) << f.err;
    EXPECT_NE(f.out.find("stage: 4"), std::string::npos);

    const auto e = cli({"--state-dir", state, "export", "s1", "--format", "ntriples"});
    ASSERT_EQ(e.code, 0);
    EXPECT_EQ(nt::write_ntriples(nt::parse_ntriples(e.out)), e.out);

    const auto i = cli({"--state-dir", state, "--json", "integrate", "s1"});
    ASSERT_EQ(i.code, 0) << i.out;
    const auto receipt = json::parse(i.out);
    EXPECT_EQ(receipt["status"], "ok");
    EXPECT_EQ(receipt["payload"]["stage_report"]["achieved_stage"], 5);

    EXPECT_EQ(cli({"--state-dir", state, "stage", "s1"}).out.rfind("stage: 5\n", 0), 0u);

    // The log printed by the CLI replays to the same session.
    const auto l = cli({"--state-dir", state, "log", "s1"});
    EXPECT_EQ(read_decision_log(l.out).size(), 9u);
}

TEST(Cli, MismatchedLogIsRejected) {
    const auto dir = scratch("cli_mismatch");
    const auto state = (dir / "state").string();
    ASSERT_EQ(cli({"--state-dir", state, "import", kFixture}).code, 0);
    const Decision wrong{1, Origin::machine, dc::SetColumnType{0, CellType::integer}, "t"};
    stage_fixtures::write(dir / "bad.jsonl", write_decision_log({wrong}));
    const auto r = cli({"--state-dir", state, "decide", "s1", "--apply", (dir / "bad.jsonl").string()});
    EXPECT_EQ(r.code, kExitUser);
    EXPECT_NE(r.err.find("ReplayError"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
    const auto dir = scratch("cli_usage");
    const auto state = (dir / "state").string();
    EXPECT_EQ(cli({"--state-dir", state, "import", kFixture, "--bogus"}).code, kExitUser);
    EXPECT_EQ(cli({"--state-dir", state}).code, kExitUser);
    EXPECT_EQ(cli({"--state-dir", state, "import", kFixture, "--header", "maybe"}).code, kExitUser);
    EXPECT_EQ(cli({"--state-dir", state, "suggest", "s9"}).code, kExitUser);
    EXPECT_EQ(cli({"--state-dir", state, "import", (dir / "none.csv").string()}).code, kExitUser);
    EXPECT_EQ(cli({"--help"}).code, kExitOk);

    const auto j = cli({"--state-dir", state, "--json", "finalize", "s9"});
    EXPECT_EQ(j.code, kExitUser);
    const auto env = json::parse(j.out);
    EXPECT_EQ(env["status"], "error");
    EXPECT_EQ(env["error"]["code"], "NotFoundError");
}

// ---------------------------------------------------------------------------
// workspace

TEST(Workspace, StateSurvivesRestart) {
    const auto dir = scratch("ws_restart");
    stage_fixtures::fixture_store().save(dir / "store.kg");
    Session expected = [&] {
        Workspace ws(dir);
        ImportOptions opt;
        opt.source_id = "fixture.csv";
        const auto r = ws.import_csv(stage_fixtures::read(kFixture), opt);
        for (const auto& d : stage_fixtures::fixture_script()) ws.decide(r.id, d);
        return ws.get(r.id);
    }();
    Workspace again(dir);
    EXPECT_EQ(again.session_ids(), std::vector<std::string>{"s1"});
    EXPECT_EQ(again.get("s1"), expected);
    again.finalize("s1");
    Workspace third(dir);
    EXPECT_EQ(third.get("s1").phase(), Phase::finalized);
    EXPECT_THROW(third.decide("s1", human(dc::SetColumnType{1, CellType::string})), PhaseError);
}

TEST(Workspace, FailedBatchPersistsNothing) {
    const auto dir = scratch("ws_batch");
    Workspace ws(dir);
    const auto r = ws.import_csv(stage_fixtures::read(kFixture), {});
    const auto before = ws.get(r.id);
    std::vector<Decision> batch = {human(dc::SetColumnType{1, CellType::string}),
                                   human(dc::SetAlignment{0, 0, 0, EntityId{99}, false})};
    EXPECT_THROW(ws.apply_log(r.id, batch), IntegrityError);
    EXPECT_EQ(ws.get(r.id), before);
    EXPECT_EQ(Workspace(dir).get(r.id), before);
}

TEST(Workspace, HttpStatusMapping) {
    EXPECT_EQ(http_status("ValidationError"), 400);
    EXPECT_EQ(http_status("IntegrityError"), 400);
    EXPECT_EQ(http_status("ReplayError"), 400);
    EXPECT_EQ(http_status("ParseError"), 400);
    EXPECT_EQ(http_status("NotFoundError"), 404);
    EXPECT_EQ(http_status("PhaseError"), 409);
    EXPECT_EQ(http_status("FinalizeBlockedError"), 409);
    EXPECT_EQ(http_status("IOError"), 500);
}

// ---------------------------------------------------------------------------
// HTTP

class Http : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = scratch("http");
        stage_fixtures::fixture_store().save(dir_ / "store.kg");
        ws_ = std::make_unique<Workspace>(dir_);
        register_routes(server_, *ws_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }

    void TearDown() override {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    static json body(const httplib::Result& r) { return json::parse(r->body); }

    httplib::Result post_decision(const std::string& id, const Decision& d) {
        return client_->Post("/sessions/" + id + "/decisions", decision_to_json(d).dump(), "application/json");
    }

    std::string open() {
        httplib::MultipartFormDataItems items = {
            {"file", stage_fixtures::read(kFixture), "fixture.csv", "text/csv"},
            {"metadata", R"({"doi":"10.1234/example.0001","title":"Study designs"})", "", ""},
        };
        auto r = client_->Post("/sessions", items);
        EXPECT_EQ(r->status, 201) << r->body;
        return body(r)["payload"]["id"].get<std::string>();
    }

    fs::path dir_;
    std::unique_ptr<Workspace> ws_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

TEST_F(Http, ImportReturnsTheSession) {
    httplib::MultipartFormDataItems items = {{"file", stage_fixtures::read(kFixture), "fixture.csv", "text/csv"}};
    auto r = client_->Post("/sessions", items);
    ASSERT_EQ(r->status, 201);
    const auto j = body(r);
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["payload"]["phase"], "cta");
    EXPECT_EQ(j["payload"]["columns"].size(), 3u);

    auto raw = client_->Post("/sessions?header=present", "a,b\nx,1\n", "text/csv");
    EXPECT_EQ(raw->status, 201);
    auto empty = client_->Post("/sessions", "", "text/csv");
    EXPECT_EQ(empty->status, 400);
    EXPECT_EQ(body(empty)["error"]["code"], "EmptyInputError");
    EXPECT_EQ(client_->Get("/healthz")->status, 200);
}

TEST_F(Http, DecisionsReturnDeltas) {
    const auto id = open();
    auto r = post_decision(id, human(dc::ResolveFlag{1, 2, Resolution::type_changed, CellType::decimal, std::nullopt}));
    ASSERT_EQ(r->status, 200) << r->body;
    const auto j = body(r)["payload"];
    EXPECT_EQ(j["decision"]["seq"], 5);
    EXPECT_EQ(j["decision"]["actor"], "human");
    EXPECT_EQ(j["delta"]["unresolved_flags"], 0);
    ASSERT_EQ(j["delta"]["columns"].size(), 1u);
    EXPECT_EQ(j["delta"]["columns"][0]["assigned_type"], "decimal");
}

TEST_F(Http, RejectedDecisionLeavesStateUnchanged) {
    const auto id = open();
    const auto before = client_->Get("/sessions/" + id)->body;
    auto bad = post_decision(id, human(dc::SetAlignment{0, 0, 0, EntityId{99}, false}));
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(body(bad)["error"]["code"], "IntegrityError");
    auto garbage = client_->Post("/sessions/" + id + "/decisions", R"({"kind":"nope","payload":{}})", "application/json");
    EXPECT_EQ(garbage->status, 400);
    EXPECT_EQ(client_->Get("/sessions/" + id)->body, before);
}

TEST_F(Http, FinalizeExportIntegrate) {
    const auto id = open();
    auto blocked = client_->Post("/sessions/" + id + "/finalize");
    EXPECT_EQ(blocked->status, 409);
    EXPECT_EQ(body(blocked)["error"]["code"], "FinalizeBlockedError");
    EXPECT_FALSE(body(blocked)["error"]["details"].empty());
    EXPECT_EQ(client_->Get("/sessions/" + id + "/export?format=jsonld")->status, 409);

    for (const auto& d : stage_fixtures::fixture_script()) ASSERT_EQ(post_decision(id, d)->status, 200);
    EXPECT_EQ(client_->Post("/sessions/" + id + "/finalize")->status, 200);
    EXPECT_EQ(client_->Post("/sessions/" + id + "/finalize")->status, 409);

    auto doc = client_->Get("/sessions/" + id + "/export?format=jsonld");
    ASSERT_EQ(doc->status, 200);
    auto nt = client_->Get("/sessions/" + id + "/export?format=ntriples");
    ASSERT_EQ(nt->status, 200);
    EXPECT_EQ(client_->Get("/sessions/" + id + "/export?format=xml")->status, 400);

    EXPECT_EQ(body(client_->Get("/sessions/" + id + "/stage"))["payload"]["achieved_stage"], 4);
    auto in = client_->Post("/sessions/" + id + "/integrate");
    ASSERT_EQ(in->status, 200) << in->body;
    EXPECT_EQ(body(client_->Get("/sessions/" + id + "/stage"))["payload"]["achieved_stage"], 5);
}

TEST_F(Http, LookupsAndNotFound) {
    const auto id = open();
    auto cand = client_->Get("/sessions/" + id + "/candidates?row=2&col=0");
    ASSERT_EQ(cand->status, 200);
    EXPECT_EQ(body(cand)["payload"]["values"][0]["candidates"][0]["label"], "experiments");
    EXPECT_EQ(client_->Get("/sessions/" + id + "/candidates?row=0&col=1")->status, 400);
    EXPECT_EQ(client_->Get("/sessions/" + id + "/candidates?row=40&col=0")->status, 404);

    auto search = client_->Get("/store/search?q=survey&kind=entity&limit=3");
    ASSERT_EQ(search->status, 200);
    EXPECT_EQ(body(search)["payload"][0]["score"], 1.0);

    EXPECT_EQ(client_->Get("/sessions/s404")->status, 404);
    EXPECT_EQ(post_decision("s404", human(dc::SetColumnType{0, CellType::string}))->status, 404);
    EXPECT_EQ(client_->Post("/sessions/s404/finalize")->status, 404);
}
