#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabsem/kg_store.hpp"
#include "tabsem/ntriples.hpp"
#include "tabsem/session.hpp"

namespace tabsem {

inline constexpr const char* kDefaultBase = "http://example.org/tabsem/";

struct ExportConfig {
    // Namespace every minted IRI lives under; must end in '/' or '#'.
    std::string base = kDefaultBase;
};

// IRI scheme under the base namespace.
std::string entity_iri(const ExportConfig& cfg, EntityId id);
std::string predicate_iri(const ExportConfig& cfg, PredicateId id);
std::string contribution_iri(const ExportConfig& cfg, const std::string& source_id, std::size_t row);

std::string xsd_datatype(const Literal& lit);
// Inverse of xsd_datatype; raises ValidationError for datatypes it never emits.
CellType cell_type_from_xsd(std::string_view datatype_iri);

// Breakdown of the triples one model yields:
//   type   1 per contribution (rdf:type Contribution)
//   leaf   1 per leaf value
//   link   1 per nested node instance (hierarchy parent or group)
//   group_type 1 per group node instance (rdf:type of the group concept)
struct TripleCounts {
    std::size_t type = 0;
    std::size_t leaf = 0;
    std::size_t link = 0;
    std::size_t group_type = 0;

    std::size_t total() const { return type + leaf + link + group_type; }
};

// Triples of a model, unsorted, before duplicate removal.
std::vector<nt::Triple> model_triples(const AnnotatedModel& model, const KgStore& store,
                                      const ExportConfig& cfg = {}, TripleCounts* counts = nullptr);

// Canonical N-Triples document of the model.
std::string export_triples(const AnnotatedModel& model, const KgStore& store,
                           const ExportConfig& cfg = {});

// JSON-LD document of the model (2-space indent, trailing newline).
std::string export_semantic_doc(const AnnotatedModel& model, const KgStore& store,
                                const ExportConfig& cfg = {});

// ---------------------------------------------------------------------------
// Stage classification

enum class ArtifactKind { pdf_ref, tabular_proprietary, tabular_open, semantic_doc, kg_integrated };

std::string_view to_string(ArtifactKind k);
std::optional<ArtifactKind> artifact_kind_from_string(std::string_view s);

struct ArtifactDescriptor {
    ArtifactKind kind = ArtifactKind::tabular_open;
    // Where the payload came from (file path or a label); evidence only.
    std::string source;
    std::string payload;
    std::map<std::string, std::string> metadata;
    // kg_integrated only: the store the artifact claims to be integrated in.
    std::shared_ptr<const KgStore> store;
};

struct CriterionResult {
    int stage = 1;
    std::string id;
    std::string description;
    bool pass = false;
    std::string evidence;

    bool operator==(const CriterionResult&) const = default;
};

struct StageReport {
    // Highest k such that every criterion of stages 1..k passes; 0 when a
    // stage-1 criterion fails.
    int achieved_stage = 0;
    std::vector<CriterionResult> criteria;

    bool operator==(const StageReport&) const = default;
};

StageReport classify_stage(const ArtifactDescriptor& artifact);

// Reads a file into a descriptor. The kind follows the extension (.pdf,
// .xlsx/.xls, .csv/.tsv, .jsonld, .json sniffed for the integration manifest
// format). Metadata comes from `<path>.meta.json` when present, then from
// `extra`. Unreadable payloads raise ClassifyError.
ArtifactDescriptor describe_artifact(const std::filesystem::path& path,
                                     const std::map<std::string, std::string>& extra = {});

// ---------------------------------------------------------------------------
// Integration

struct IntegrationReceipt {
    std::vector<EntityId> entities_created;
    std::vector<PredicateId> predicates_created;
    // Every statement the model maps to, in model order, deduplicated.
    std::vector<StatementId> statements;
    std::size_t statements_added = 0;
    std::size_t statements_existing = 0;
    // The model with every id rewritten to the target store.
    AnnotatedModel model;
    ExportConfig config;
    StageReport report;
};

// Inserts the model into `target`. Ids in the model are resolved in `source`
// (the store the model was built against) and re-keyed in `target` by label
// and class; a dangling id raises IntegrityError. Idempotent.
IntegrationReceipt integrate(const AnnotatedModel& model, const KgStore& source, KgStore& target,
                             const ExportConfig& cfg = {});
IntegrationReceipt integrate(const AnnotatedModel& model, KgStore& store, const ExportConfig& cfg = {});

// N-Triples of stored statements with store-id IRIs.
std::string store_triples(const KgStore& store, const std::vector<StatementId>& statements,
                          const ExportConfig& cfg = {});

// Integration manifest (the stage-5 artifact). `store_ref` is written
// verbatim; describe_artifact resolves it relative to the manifest.
std::string integration_manifest(const IntegrationReceipt& receipt, const KgStore& target,
                                 const std::string& store_ref);

inline constexpr const char* kManifestFormat = "tabsem-kg-integration";

}  // namespace tabsem
