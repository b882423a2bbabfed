#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabsem/evolution.hpp"
#include "tabsem/kg_store.hpp"
#include "tabsem/session.hpp"
#include "tabsem/table.hpp"

namespace tabsem::gateway {

struct ImportOptions {
    CsvConfig csv;
    std::optional<std::string> source_id;
    // Store to freeze into the session; defaults to the workspace store.
    std::optional<std::filesystem::path> store;
    std::map<std::string, std::string> metadata;
};

struct ImportResult {
    std::string id;
    Session session;
    std::vector<ParseWarning> warnings;
};

struct DecisionResult {
    Session before;
    Session after;
};

struct IntegrateResult {
    IntegrationReceipt receipt;
    std::filesystem::path manifest;
};

// Session state on disk, one directory per session:
//
//   <root>/store.kg                    global KG store (snapshot format)
//   <root>/sessions/<id>/table.json    imported table
//   <root>/sessions/<id>/store.kg      store snapshot frozen at import
//   <root>/sessions/<id>/log.jsonl     decision log
//   <root>/sessions/<id>/finalized     present once finalized
//   <root>/sessions/<id>/integration.json  manifest written by integrate
//
// A session is rebuilt by replaying its log. Calls on one session are
// serialized; distinct sessions proceed independently.
class Workspace {
public:
    explicit Workspace(std::filesystem::path root, ExportConfig config = {});

    // $TABSEM_STATE, else ./.tabsem
    static std::filesystem::path default_root();

    const std::filesystem::path& root() const { return root_; }
    const ExportConfig& config() const { return config_; }
    std::filesystem::path store_path() const { return root_ / "store.kg"; }
    std::filesystem::path session_dir(const std::string& id) const;

    // Empty store when no store file exists yet.
    KgStore load_store() const;

    ImportResult import_csv(std::string_view bytes, const ImportOptions& options);
    std::vector<std::string> session_ids() const;

    Session get(const std::string& id);
    DecisionResult decide(const std::string& id, Decision d);
    // Headless batch: entries already in the log must match, later ones are
    // applied. Nothing is persisted when any entry fails.
    Session apply_log(const std::string& id, const std::vector<Decision>& log);
    AnnotatedModel finalize(const std::string& id);
    // format: jsonld | ntriples
    std::string export_model(const std::string& id, std::string_view format);
    StageReport stage(const std::string& id);
    IntegrateResult integrate(const std::string& id, std::optional<std::filesystem::path> target = {});

    std::vector<Candidate> search(std::string_view q, TargetKind kind, std::size_t limit) const;

private:
    struct Slot {
        std::mutex mutex;
        std::optional<Session> cached;
    };

    Slot& slot(const std::string& id);
    Session load_locked(const std::string& id, Slot& s);
    void require_exists(const std::string& id) const;
    std::string new_session_id();

    std::filesystem::path root_;
    ExportConfig config_;
    std::mutex registry_mutex_;
    std::map<std::string, std::unique_ptr<Slot>> slots_;
    mutable std::mutex store_mutex_;
};

}  // namespace tabsem::gateway
