#include "tabsem/gateway/workspace.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tabsem/decision_log.hpp"
#include "tabsem/error.hpp"
#include "tabsem/gateway/views.hpp"

namespace tabsem::gateway {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, std::string_view bytes) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) throw Error("IOError", "cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

bool valid_id(const std::string& id) {
    return id.size() > 1 && id[0] == 's' &&
           std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Workspace::Workspace(fs::path root, ExportConfig config)
    : root_(std::move(root)), config_(std::move(config)) {
    fs::create_directories(root_ / "sessions");
}

fs::path Workspace::default_root() {
    if (const char* env = std::getenv("TABSEM_STATE"); env && *env) return env;
    return ".tabsem";
}

fs::path Workspace::session_dir(const std::string& id) const { return root_ / "sessions" / id; }

KgStore Workspace::load_store() const {
    std::lock_guard lock(store_mutex_);
    if (!fs::exists(store_path())) return {};
    return KgStore::load(store_path());
}

std::vector<std::string> Workspace::session_ids() const {
    std::vector<std::pair<unsigned long, std::string>> ids;
    for (const auto& e : fs::directory_iterator(root_ / "sessions")) {
        const auto name = e.path().filename().string();
        if (e.is_directory() && valid_id(name)) ids.emplace_back(std::stoul(name.substr(1)), name);
    }
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> out;
    for (auto& [_, id] : ids) out.push_back(id);
    return out;
}

std::string Workspace::new_session_id() {
    unsigned long next = 1;
    for (const auto& id : session_ids()) next = std::max(next, std::stoul(id.substr(1)) + 1);
    while (true) {
        const auto id = "s" + std::to_string(next++);
        if (fs::create_directory(session_dir(id))) return id;
    }
}

void Workspace::require_exists(const std::string& id) const {
    if (!valid_id(id) || !fs::is_directory(session_dir(id)) || !fs::exists(session_dir(id) / "table.json"))
        throw NotFoundError("unknown session '" + id + "'");
}

Workspace::Slot& Workspace::slot(const std::string& id) {
    require_exists(id);
    std::lock_guard lock(registry_mutex_);
    auto& s = slots_[id];
    if (!s) s = std::make_unique<Slot>();
    return *s;
}

Session Workspace::load_locked(const std::string& id, Slot& s) {
    if (s.cached) return *s.cached;
    const auto dir = session_dir(id);
    const Table table = table_from_json(nlohmann::json::parse(read_file(dir / "table.json")));
    const KgStore store = KgStore::load(dir / "store.kg");
    const auto log = fs::exists(dir / "log.jsonl") ? load_decision_log(dir / "log.jsonl")
                                                   : std::vector<Decision>{};
    Session session = replay(table, store, log, id);
    if (fs::exists(dir / "finalized")) tabsem::finalize(session);
    s.cached = session;
    return session;
}

ImportResult Workspace::import_csv(std::string_view bytes, const ImportOptions& options) {
    ImportResult result;
    Table table = parse_csv(bytes, options.csv, &result.warnings);
    table.source_id = options.source_id.value_or("table");
    for (const auto& [k, v] : options.metadata) table.metadata[k] = v;

    const KgStore store = options.store ? KgStore::load(*options.store) : load_store();

    const auto id = new_session_id();
    const auto dir = session_dir(id);
    try {
        Session session = open_session(table, store, id);
        store.save(dir / "store.kg");
        write_file(dir / "log.jsonl", write_decision_log(session.log()));
        write_file(dir / "table.json", table_to_json(table).dump(2) + "\n");
        result.id = id;
        result.session = session;
        std::lock_guard lock(registry_mutex_);
        auto& s = slots_[id];
        if (!s) s = std::make_unique<Slot>();
        s->cached = std::move(session);
    } catch (...) {
        fs::remove_all(dir);
        throw;
    }
    return result;
}

Session Workspace::get(const std::string& id) {
    auto& s = slot(id);
    std::lock_guard lock(s.mutex);
    return load_locked(id, s);
}

DecisionResult Workspace::decide(const std::string& id, Decision d) {
    auto& s = slot(id);
    std::lock_guard lock(s.mutex);
    DecisionResult r{load_locked(id, s), {}};
    r.after = apply_decision(r.before, std::move(d));
    append_decision(session_dir(id) / "log.jsonl", r.after.log().back());
    s.cached = r.after;
    return r;
}

Session Workspace::apply_log(const std::string& id, const std::vector<Decision>& log) {
    auto& s = slot(id);
    std::lock_guard lock(s.mutex);
    const Session before = load_locked(id, s);
    // Records without seq are fresh decisions appended in order; sequenced
    // records must line up with the stored log.
    const bool fresh = std::all_of(log.begin(), log.end(), [](const Decision& d) { return d.seq == 0; });
    Session after = before;
    if (fresh) {
        for (const auto& d : log) after = apply_decision(after, d);
    } else {
        after = tabsem::apply_log(before, log);
    }
    write_file(session_dir(id) / "log.jsonl", write_decision_log(after.log()));
    s.cached = after;
    return after;
}

AnnotatedModel Workspace::finalize(const std::string& id) {
    auto& s = slot(id);
    std::lock_guard lock(s.mutex);
    Session session = load_locked(id, s);
    auto model = tabsem::finalize(session);
    write_file(session_dir(id) / "finalized", "");
    s.cached = std::move(session);
    return model;
}

std::string Workspace::export_model(const std::string& id, std::string_view format) {
    if (format != "jsonld" && format != "ntriples")
        throw ValidationError("unknown export format '" + std::string(format) + "' (jsonld|ntriples)");
    const Session session = get(id);
    if (!session.model()) throw PhaseError("session " + id + " is not finalized");
    return format == "jsonld" ? export_semantic_doc(*session.model(), session.store(), config_)
                              : export_triples(*session.model(), session.store(), config_);
}

StageReport Workspace::stage(const std::string& id) {
    const Session session = get(id);
    const auto manifest = session_dir(id) / "integration.json";
    if (fs::exists(manifest)) return classify_stage(describe_artifact(manifest));
    ArtifactDescriptor d;
    d.source = "session " + id;
    if (session.model()) {
        d.kind = ArtifactKind::semantic_doc;
        d.payload = export_semantic_doc(*session.model(), session.store(), config_);
    } else {
        d.kind = ArtifactKind::tabular_open;
        d.payload = table_to_csv(session.table());
    }
    d.metadata = session.table().metadata;
    return classify_stage(d);
}

IntegrateResult Workspace::integrate(const std::string& id, std::optional<fs::path> target) {
    auto& s = slot(id);
    std::lock_guard lock(s.mutex);
    const Session session = load_locked(id, s);
    if (!session.model()) throw PhaseError("session " + id + " is not finalized");

    const fs::path store_file = target.value_or(store_path());
    std::lock_guard store_lock(store_mutex_);
    KgStore store = fs::exists(store_file) ? KgStore::load(store_file) : KgStore{};
    IntegrateResult r{tabsem::integrate(*session.model(), session.store(), store, config_), {}};
    store.save(store_file);

    r.manifest = session_dir(id) / "integration.json";
    std::error_code ec;
    auto ref = fs::relative(fs::absolute(store_file), fs::absolute(session_dir(id)), ec);
    if (ec || ref.empty()) ref = fs::absolute(store_file);
    write_file(r.manifest, integration_manifest(r.receipt, store, ref.generic_string()));
    return r;
}

std::vector<Candidate> Workspace::search(std::string_view q, TargetKind kind, std::size_t limit) const {
    return load_store().lookup_candidates(q, kind, limit);
}

}  // namespace tabsem::gateway
