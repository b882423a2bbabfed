#include "tabsem/evolution.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tabsem/error.hpp"
#include "tabsem/table.hpp"
#include "tabsem/text.hpp"

namespace tabsem {

using nlohmann::json;
using nlohmann::ordered_json;

std::string entity_iri(const ExportConfig& cfg, EntityId id) {
    return cfg.base + "entity/" + id.str();
}

std::string predicate_iri(const ExportConfig& cfg, PredicateId id) {
    return cfg.base + "predicate/" + id.str();
}

std::string contribution_iri(const ExportConfig& cfg, const std::string& source_id,
                             std::size_t row) {
    return cfg.base + "contribution/" + text::slug(source_id.empty() ? "table" : source_id) + "-" +
           std::to_string(row + 1);
}

std::string xsd_datatype(const Literal& lit) {
    const std::string xsd(nt::kXsd);
    switch (lit.datatype) {
        case CellType::boolean: return xsd + "boolean";
        case CellType::integer: return xsd + "integer";
        case CellType::decimal:
            return lit.lexical.find_first_of("eE") == std::string::npos ? xsd + "decimal"
                                                                        : xsd + "double";
        case CellType::date: return lit.lexical.size() == 4 ? xsd + "gYear" : xsd + "date";
        case CellType::url: return xsd + "anyURI";
        case CellType::empty:
        case CellType::string: return xsd + "string";
    }
    return xsd + "string";
}

CellType cell_type_from_xsd(std::string_view iri) {
    if (iri.substr(0, nt::kXsd.size()) != nt::kXsd)
        throw ValidationError("unsupported datatype <" + std::string(iri) + ">");
    const auto local = iri.substr(nt::kXsd.size());
    if (local == "boolean") return CellType::boolean;
    if (local == "integer") return CellType::integer;
    if (local == "decimal" || local == "double") return CellType::decimal;
    if (local == "date" || local == "gYear") return CellType::date;
    if (local == "anyURI") return CellType::url;
    if (local == "string") return CellType::string;
    throw ValidationError("unsupported datatype <" + std::string(iri) + ">");
}

// ---------------------------------------------------------------------------
// Model walk shared by the exporters and integration.

namespace {

const std::set<std::string> kReservedTerms = {"xsd",    "rdf",           "rdfs", "tabsem", "label",
                                              "metadata", "schema", "contributions", "row"};

struct NodeRef {
    std::size_t row = 0;
    std::string path;   // c<column> or g<ordinal>
    std::string label;  // schema label
};

struct RdfType {};
struct RdfValue {};
struct ContributionClass {};
struct LocalProperty {
    std::string label;
};

struct ContributionRef {
    std::size_t row = 0;
};

using Subject = std::variant<ContributionRef, NodeRef>;
using Pred = std::variant<PredicateId, LocalProperty, RdfType, RdfValue>;
using Obj = std::variant<Object, NodeRef, ContributionClass>;

enum class EdgeKind { type, leaf, link, group_type };

struct Edge {
    Subject s;
    Pred p;
    Obj o;
    EdgeKind kind;
};

class ModelIndex {
public:
    explicit ModelIndex(const StructuredModel& model) {
        std::size_t groups = 0;
        std::function<void(const SchemaNode&)> visit = [&](const SchemaNode& n) {
            order_.push_back(&n);
            if (n.kind == NodeKind::group) path_[&n] = "g" + std::to_string(groups++);
            else path_[&n] = "c" + std::to_string(n.column.value_or(0));
            std::string term = text::slug(n.label);
            std::string candidate = term;
            for (int k = 2; kReservedTerms.count(candidate) || used_.count(candidate); ++k)
                candidate = term + "_" + std::to_string(k);
            used_.insert(candidate);
            term_[&n] = candidate;
            for (const auto& c : n.children) visit(c);
        };
        for (const auto& n : model.schema) visit(n);
    }

    const std::string& path(const SchemaNode* n) const { return path_.at(n); }
    const std::string& term(const SchemaNode* n) const { return term_.at(n); }
    const std::vector<const SchemaNode*>& order() const { return order_; }

private:
    std::vector<const SchemaNode*> order_;
    std::map<const SchemaNode*, std::string> path_;
    std::map<const SchemaNode*, std::string> term_;
    std::set<std::string> used_;
};

Object leaf_object(const LeafValue& v) {
    if (v.object) return *v.object;
    return Literal{v.text, CellType::string};
}

Pred pred_of(const SchemaNode& n) {
    if (n.predicate) return *n.predicate;
    return LocalProperty{n.label};
}

void walk(const std::vector<PropertyNode>& nodes, const Subject& subject, std::size_t row,
          const ModelIndex& index, std::vector<Edge>& out) {
    for (const auto& n : nodes) {
        const SchemaNode& schema = *n.schema;
        if (schema.kind == NodeKind::group) {
            NodeRef node{row, index.path(&schema), schema.label};
            out.push_back({subject, pred_of(schema), node, EdgeKind::link});
            if (schema.concept_entity)
                out.push_back({node, RdfType{}, Object{*schema.concept_entity}, EdgeKind::group_type});
            walk(n.children, node, row, index, out);
        } else if (!schema.children.empty()) {
            NodeRef node{row, index.path(&schema), schema.label};
            out.push_back({subject, pred_of(schema), node, EdgeKind::link});
            for (const auto& v : n.values) out.push_back({node, RdfValue{}, leaf_object(v), EdgeKind::leaf});
            walk(n.children, node, row, index, out);
        } else {
            for (const auto& v : n.values)
                out.push_back({subject, pred_of(schema), leaf_object(v), EdgeKind::leaf});
        }
    }
}

std::vector<Edge> model_edges(const AnnotatedModel& model, const ModelIndex& index) {
    std::vector<Edge> out;
    for (const auto& c : model.structure.contributions) {
        out.push_back({ContributionRef{c.row}, RdfType{}, ContributionClass{}, EdgeKind::type});
        walk(instantiate(model.structure, c), ContributionRef{c.row}, c.row, index, out);
    }
    return out;
}

nt::Term literal_term(const Literal& lit) {
    return nt::Term::literal(lit.lexical, xsd_datatype(lit));
}

class LocalRenderer {
public:
    LocalRenderer(const AnnotatedModel& model, const ModelIndex& index, const ExportConfig& cfg)
        : model_(model), index_(index), cfg_(cfg) {
        for (const auto* n : index.order()) term_by_label_[n->label] = index.term(n);
    }

    std::string subject_iri(const Subject& s) const {
        if (const auto* c = std::get_if<ContributionRef>(&s))
            return contribution_iri(cfg_, model_.source_id, c->row);
        return node_iri(std::get<NodeRef>(s));
    }

    std::string node_iri(const NodeRef& n) const {
        return contribution_iri(cfg_, model_.source_id, n.row) + "/" + n.path;
    }

    std::string local_property_iri(const std::string& label) const {
        return cfg_.base + "property/" + term_by_label_.at(label);
    }

    nt::Triple render(const Edge& e) const {
        nt::Triple t;
        t.subject = nt::Term::iri(subject_iri(e.s));
        t.predicate = nt::Term::iri(std::visit(
            [&](const auto& p) -> std::string {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, PredicateId>) return predicate_iri(cfg_, p);
                else if constexpr (std::is_same_v<T, LocalProperty>) return local_property_iri(p.label);
                else if constexpr (std::is_same_v<T, RdfType>) return std::string(nt::kRdfType);
                else return std::string(nt::kRdfValue);
            },
            e.p));
        t.object = std::visit(
            [&](const auto& o) -> nt::Term {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, Object>) {
                    if (const auto* id = std::get_if<EntityId>(&o)) return nt::Term::iri(entity_iri(cfg_, *id));
                    return literal_term(std::get<Literal>(o));
                } else if constexpr (std::is_same_v<T, NodeRef>) {
                    return nt::Term::iri(node_iri(o));
                } else {
                    return nt::Term::iri(cfg_.base + "class/Contribution");
                }
            },
            e.o);
        return t;
    }

private:
    const AnnotatedModel& model_;
    const ModelIndex& index_;
    const ExportConfig& cfg_;
    std::map<std::string, std::string> term_by_label_;
};

}  // namespace

std::vector<nt::Triple> model_triples(const AnnotatedModel& model, const KgStore&,
                                      const ExportConfig& cfg, TripleCounts* counts) {
    const ModelIndex index(model.structure);
    const LocalRenderer renderer(model, index, cfg);
    std::vector<nt::Triple> out;
    TripleCounts tally;
    for (const auto& e : model_edges(model, index)) {
        out.push_back(renderer.render(e));
        switch (e.kind) {
            case EdgeKind::type: ++tally.type; break;
            case EdgeKind::leaf: ++tally.leaf; break;
            case EdgeKind::link: ++tally.link; break;
            case EdgeKind::group_type: ++tally.group_type; break;
        }
    }
    if (counts) *counts = tally;
    return out;
}

std::string export_triples(const AnnotatedModel& model, const KgStore& store, const ExportConfig& cfg) {
    return nt::write_ntriples(model_triples(model, store, cfg));
}

// ---------------------------------------------------------------------------
// Semantic document

namespace {

ordered_json schema_json(const SchemaNode& n, const ModelIndex& index) {
    ordered_json j;
    j["label"] = n.label;
    j["kind"] = n.kind == NodeKind::group ? "group" : "property";
    j["term"] = index.term(&n);
    if (n.column) j["column"] = *n.column;
    j["predicate"] = n.predicate ? json(n.predicate->str()) : json(nullptr);
    if (n.concept_entity) j["concept"] = n.concept_entity->str();
    ordered_json children = ordered_json::array();
    for (const auto& c : n.children) children.push_back(schema_json(c, index));
    j["children"] = std::move(children);
    return j;
}

std::string compact_xsd(const Literal& lit) {
    auto iri = xsd_datatype(lit);
    return "xsd:" + iri.substr(nt::kXsd.size());
}

ordered_json value_json(const LeafValue& v, const KgStore& store, const ExportConfig& cfg) {
    const Object o = leaf_object(v);
    ordered_json j;
    if (const auto* id = std::get_if<EntityId>(&o)) {
        j["@id"] = entity_iri(cfg, *id);
        const auto* e = store.find_entity(*id);
        j["label"] = e ? e->label : v.text;
        return j;
    }
    const auto& lit = std::get<Literal>(o);
    j["@value"] = lit.lexical;
    if (lit.datatype != CellType::string && lit.datatype != CellType::empty) j["@type"] = compact_xsd(lit);
    return j;
}

void nodes_json(const std::vector<PropertyNode>& nodes, const std::string& contribution,
                const ModelIndex& index, const KgStore& store, const ExportConfig& cfg,
                ordered_json& target) {
    for (const auto& n : nodes) {
        const SchemaNode& schema = *n.schema;
        const auto& term = index.term(&schema);
        ordered_json values = ordered_json::array();
        if (schema.kind == NodeKind::group || !schema.children.empty()) {
            ordered_json node;
            const auto iri = contribution + "/" + index.path(&schema);
            node["@id"] = iri;
            if (schema.kind == NodeKind::group) {
                if (schema.concept_entity) node["@type"] = entity_iri(cfg, *schema.concept_entity);
                node["label"] = schema.label;
            } else {
                ordered_json own = ordered_json::array();
                for (const auto& v : n.values) own.push_back(value_json(v, store, cfg));
                if (!own.empty()) node["rdf:value"] = std::move(own);
            }
            nodes_json(n.children, contribution, index, store, cfg, node);
            values.push_back(std::move(node));
        } else {
            for (const auto& v : n.values) values.push_back(value_json(v, store, cfg));
        }
        target[term] = std::move(values);
    }
}

}  // namespace

std::string export_semantic_doc(const AnnotatedModel& model, const KgStore& store,
                                const ExportConfig& cfg) {
    const ModelIndex index(model.structure);

    ordered_json ctx;
    ctx["xsd"] = std::string(nt::kXsd);
    ctx["rdf"] = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    ctx["rdfs"] = "http://www.w3.org/2000/01/rdf-schema#";
    ctx["tabsem"] = cfg.base;
    ctx["label"] = "rdfs:label";
    ctx["metadata"] = {{"@id", "tabsem:metadata"}, {"@type", "@json"}};
    ctx["schema"] = {{"@id", "tabsem:schema"}, {"@type", "@json"}};
    ctx["contributions"] = {{"@id", "tabsem:contribution"}, {"@container", "@set"}};
    ctx["row"] = {{"@id", "tabsem:row"}, {"@type", "xsd:integer"}};
    for (const auto* n : index.order()) {
        const std::string iri =
            n->predicate ? predicate_iri(cfg, *n->predicate) : cfg.base + "property/" + index.term(n);
        ctx[index.term(n)] = {{"@id", iri}};
    }

    ordered_json doc;
    doc["@context"] = std::move(ctx);
    const std::string source = model.source_id.empty() ? "table" : model.source_id;
    doc["@id"] = cfg.base + "table/" + text::slug(source);
    doc["@type"] = "tabsem:Table";
    doc["label"] = source;
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : model.metadata) meta[k] = v;
    doc["metadata"] = std::move(meta);
    ordered_json schema = ordered_json::array();
    for (const auto& n : model.structure.schema) schema.push_back(schema_json(n, index));
    doc["schema"] = std::move(schema);

    ordered_json contributions = ordered_json::array();
    for (const auto& c : model.structure.contributions) {
        ordered_json node;
        const auto iri = contribution_iri(cfg, model.source_id, c.row);
        node["@id"] = iri;
        node["@type"] = "tabsem:Contribution";
        node["row"] = c.row;
        nodes_json(instantiate(model.structure, c), iri, index, store, cfg, node);
        contributions.push_back(std::move(node));
    }
    doc["contributions"] = std::move(contributions);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Integration

namespace {

std::string contribution_label(const AnnotatedModel& model, std::size_t row) {
    return (model.source_id.empty() ? std::string("table") : model.source_id) + " / row " +
           std::to_string(row + 1);
}

class Remapper {
public:
    Remapper(const KgStore& source, KgStore& target) : source_(source), target_(target) {}

    EntityId entity(EntityId id) {
        const auto* e = source_.find_entity(id);
        if (!e) throw IntegrityError("model references unknown entity " + id.str(), {id.str()});
        return target_.upsert_entity(e->label, e->class_ref, e->created_by);
    }

    PredicateId predicate(PredicateId id) {
        const auto* p = source_.find_predicate(id);
        if (!p) throw IntegrityError("model references unknown predicate " + id.str(), {id.str()});
        return target_.upsert_predicate(p->label, p->description);
    }

    void schema(SchemaNode& n) {
        n.predicate = n.predicate ? predicate(*n.predicate) : target_.upsert_predicate(n.label);
        if (n.concept_entity) n.concept_entity = entity(*n.concept_entity);
        for (auto& c : n.children) schema(c);
    }

    void values(std::vector<LeafValue>& vs) {
        for (auto& v : vs) {
            if (!v.object) {
                v.object = Literal{v.text, CellType::string};
            } else if (auto* id = std::get_if<EntityId>(&*v.object)) {
                *v.object = entity(*id);
            }
        }
    }

private:
    const KgStore& source_;
    KgStore& target_;
};

}  // namespace

IntegrationReceipt integrate(const AnnotatedModel& model, const KgStore& source, KgStore& target,
                             const ExportConfig& cfg) {
    // Work on a copy so a failure leaves the target untouched.
    KgStore work = target;
    std::set<EntityId> entities_before;
    for (const auto& [id, _] : work.entities()) entities_before.insert(id);
    std::set<PredicateId> predicates_before;
    for (const auto& [id, _] : work.predicates()) predicates_before.insert(id);

    IntegrationReceipt receipt;
    receipt.config = cfg;
    receipt.model = model;
    Remapper remap(source, work);
    for (auto& n : receipt.model.structure.schema) remap.schema(n);
    for (auto& c : receipt.model.structure.contributions) {
        for (auto& [_, vs] : c.leaves) remap.values(vs);
    }

    const auto type_pred = work.upsert_predicate("rdf:type", "instance of");
    const auto value_pred = work.upsert_predicate("rdf:value", "main value of a structured node");
    const auto contribution_class = work.upsert_entity("Contribution", "Class", Origin::human);

    const AnnotatedModel& m = receipt.model;
    const ModelIndex index(m.structure);
    auto subject_entity = [&](const Subject& s) {
        if (const auto* c = std::get_if<ContributionRef>(&s))
            return work.upsert_entity(contribution_label(m, c->row), "Contribution", Origin::human);
        const auto& n = std::get<NodeRef>(s);
        return work.upsert_entity(contribution_label(m, n.row) + " / " + n.label, "Node", Origin::human);
    };

    std::set<StatementId> seen;
    for (const auto& e : model_edges(m, index)) {
        const EntityId s = subject_entity(e.s);
        const PredicateId p = std::visit(
            [&](const auto& v) -> PredicateId {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, PredicateId>) return v;
                else if constexpr (std::is_same_v<T, LocalProperty>) return work.upsert_predicate(v.label);
                else if constexpr (std::is_same_v<T, RdfType>) return type_pred;
                else return value_pred;
            },
            e.p);
        const Object o = std::visit(
            [&](const auto& v) -> Object {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Object>) return v;
                else if constexpr (std::is_same_v<T, NodeRef>) return subject_entity(v);
                else return contribution_class;
            },
            e.o);
        const bool existed = work.find_statement(s, p, o).has_value();
        const auto id = work.add_statement(s, p, o);
        if (!seen.insert(id).second) continue;
        receipt.statements.push_back(id);
        if (existed) ++receipt.statements_existing;
        else ++receipt.statements_added;
    }

    for (const auto& [id, _] : work.entities()) {
        if (!entities_before.count(id)) receipt.entities_created.push_back(id);
    }
    for (const auto& [id, _] : work.predicates()) {
        if (!predicates_before.count(id)) receipt.predicates_created.push_back(id);
    }
    target = std::move(work);

    ArtifactDescriptor d;
    d.kind = ArtifactKind::kg_integrated;
    d.source = "integration of " + (model.source_id.empty() ? std::string("table") : model.source_id);
    d.payload = integration_manifest(receipt, target, "");
    d.store = std::shared_ptr<const KgStore>(std::shared_ptr<void>{}, &target);
    receipt.report = classify_stage(d);
    return receipt;
}

IntegrationReceipt integrate(const AnnotatedModel& model, KgStore& store, const ExportConfig& cfg) {
    const KgStore source = store;
    return integrate(model, source, store, cfg);
}

std::string store_triples(const KgStore& store, const std::vector<StatementId>& statements,
                          const ExportConfig& cfg) {
    std::vector<nt::Triple> out;
    for (const auto& id : statements) {
        const auto* st = store.find_statement(id);
        if (!st) throw NotFoundError("no statement " + id.str());
        nt::Triple t;
        t.subject = nt::Term::iri(entity_iri(cfg, st->subject));
        t.predicate = nt::Term::iri(predicate_iri(cfg, st->predicate));
        if (const auto* e = std::get_if<EntityId>(&st->object)) t.object = nt::Term::iri(entity_iri(cfg, *e));
        else t.object = literal_term(std::get<Literal>(st->object));
        out.push_back(std::move(t));
    }
    return nt::write_ntriples(std::move(out));
}

std::string integration_manifest(const IntegrationReceipt& receipt, const KgStore& target,
                                 const std::string& store_ref) {
    ordered_json j;
    j["format"] = kManifestFormat;
    j["version"] = 1;
    j["base"] = receipt.config.base;
    j["source_id"] = receipt.model.source_id;
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : receipt.model.metadata) meta[k] = v;
    j["metadata"] = std::move(meta);
    j["store"] = store_ref;
    j["document"] = ordered_json::parse(export_semantic_doc(receipt.model, target, receipt.config));
    j["triples"] = store_triples(target, receipt.statements, receipt.config);
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Stage classification

std::string_view to_string(ArtifactKind k) {
    switch (k) {
        case ArtifactKind::pdf_ref: return "pdf_ref";
        case ArtifactKind::tabular_proprietary: return "tabular_proprietary";
        case ArtifactKind::tabular_open: return "tabular_open";
        case ArtifactKind::semantic_doc: return "semantic_doc";
        case ArtifactKind::kg_integrated: return "kg_integrated";
    }
    return "pdf_ref";
}

std::optional<ArtifactKind> artifact_kind_from_string(std::string_view s) {
    for (auto k : {ArtifactKind::pdf_ref, ArtifactKind::tabular_proprietary, ArtifactKind::tabular_open,
                   ArtifactKind::semantic_doc, ArtifactKind::kg_integrated}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

namespace {

std::optional<std::string> identifier_of(const std::map<std::string, std::string>& meta) {
    for (const char* key : {"doi", "identifier"}) {
        auto it = meta.find(key);
        if (it != meta.end() && !text::trim(it->second).empty()) return std::string(key) + "=" + it->second;
    }
    return std::nullopt;
}

std::map<std::string, std::string> string_map(const json& j) {
    std::map<std::string, std::string> out;
    if (!j.is_object()) return out;
    for (const auto& [k, v] : j.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return out;
}

json parse_json_payload(const ArtifactDescriptor& a) {
    try {
        return json::parse(a.payload);
    } catch (const json::parse_error& e) {
        throw ClassifyError(a.source + ": unreadable JSON payload: " + e.what());
    }
}

// Facts gathered once per artifact; criteria are evaluated over these.
struct Facts {
    std::map<std::string, std::string> metadata;
    std::optional<json> document;  // semantic document (stage 4 evidence)
    std::optional<std::string> triples;
    std::string base = kDefaultBase;
};

struct DocFacts {
    bool has_context = false;
    bool has_contributions = false;
    std::size_t predicate_terms = 0;
    std::size_t property_terms = 0;
    std::size_t entity_links = 0;
    std::size_t schema_nodes = 0;
    std::size_t nested_nodes = 0;
    bool tree_ok = true;
    std::size_t unmapped = 0;
    std::vector<std::string> unmapped_labels;
    std::map<std::string, std::string> metadata;
};

void count_links(const json& j, const std::string& entity_prefix, std::size_t& n) {
    if (j.is_object()) {
        auto it = j.find("@id");
        if (it != j.end() && it->is_string() && it->get<std::string>().rfind(entity_prefix, 0) == 0) ++n;
        auto ty = j.find("@type");
        if (ty != j.end() && ty->is_string() && ty->get<std::string>().rfind(entity_prefix, 0) == 0) ++n;
        for (const auto& [k, v] : j.items()) {
            if (k != "@id" && k != "@type") count_links(v, entity_prefix, n);
        }
    } else if (j.is_array()) {
        for (const auto& v : j) count_links(v, entity_prefix, n);
    }
}

void walk_schema(const json& nodes, DocFacts& f, int depth) {
    if (!nodes.is_array()) {
        f.tree_ok = false;
        return;
    }
    for (const auto& n : nodes) {
        if (!n.is_object() || !n.contains("label") || !n.contains("children")) {
            f.tree_ok = false;
            continue;
        }
        ++f.schema_nodes;
        if (depth > 0) ++f.nested_nodes;
        const bool is_property = n.value("kind", "property") == "property";
        if (is_property && (!n.contains("predicate") || n["predicate"].is_null())) {
            ++f.unmapped;
            f.unmapped_labels.push_back(n["label"].is_string() ? n["label"].get<std::string>() : "?");
        }
        walk_schema(n["children"], f, depth + 1);
    }
}

DocFacts inspect_document(const json& doc, const std::string& base) {
    DocFacts f;
    if (!doc.is_object()) return f;
    auto ctx = doc.find("@context");
    f.has_context = ctx != doc.end() && ctx->is_object();
    auto contributions = doc.find("contributions");
    f.has_contributions = contributions != doc.end() && contributions->is_array();
    if (f.has_context) {
        for (const auto& [k, v] : ctx->items()) {
            if (!v.is_object() || !v.contains("@id") || !v["@id"].is_string()) continue;
            const auto iri = v["@id"].get<std::string>();
            if (iri.rfind(base + "predicate/", 0) == 0) ++f.predicate_terms;
            else if (iri.rfind(base + "property/", 0) == 0) ++f.property_terms;
        }
    }
    if (f.has_contributions) count_links(*contributions, base + "entity/", f.entity_links);
    if (auto s = doc.find("schema"); s != doc.end()) walk_schema(*s, f, 0);
    else f.tree_ok = false;
    if (auto m = doc.find("metadata"); m != doc.end()) f.metadata = string_map(*m);
    return f;
}

std::string base_of(const json& doc) {
    if (doc.is_object()) {
        auto ctx = doc.find("@context");
        if (ctx != doc.end() && ctx->is_object() && ctx->contains("tabsem") && (*ctx)["tabsem"].is_string())
            return (*ctx)["tabsem"].get<std::string>();
    }
    return kDefaultBase;
}

std::string join(const std::vector<std::string>& xs, std::size_t limit = 5) {
    std::string out;
    for (std::size_t i = 0; i < xs.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += xs[i];
    }
    if (xs.size() > limit) out += ", ...";
    return out;
}

}  // namespace

StageReport classify_stage(const ArtifactDescriptor& a) {
    Facts facts;
    facts.metadata = a.metadata;

    std::optional<Table> table;
    std::string table_error;
    if (a.kind == ArtifactKind::tabular_open) {
        CsvConfig cfg;
        if (auto it = a.metadata.find("format"); it != a.metadata.end() && it->second == "tsv")
            cfg.delimiter = '\t';
        try {
            table = parse_csv(a.payload, cfg);
        } catch (const Error& e) {
            table_error = e.code() + ": " + e.what();
        }
    } else if (a.kind == ArtifactKind::semantic_doc) {
        facts.document = parse_json_payload(a);
    } else if (a.kind == ArtifactKind::kg_integrated) {
        const json manifest = parse_json_payload(a);
        if (!manifest.is_object() || manifest.value("format", "") != kManifestFormat)
            throw ClassifyError(a.source + ": not an integration manifest");
        if (manifest.contains("document")) facts.document = manifest["document"];
        if (manifest.contains("triples") && manifest["triples"].is_string())
            facts.triples = manifest["triples"].get<std::string>();
        if (manifest.contains("base") && manifest["base"].is_string())
            facts.base = manifest["base"].get<std::string>();
        for (auto& [k, v] : string_map(manifest.value("metadata", json::object())))
            facts.metadata.emplace(k, v);
    }

    DocFacts doc;
    if (facts.document) {
        if (a.kind == ArtifactKind::semantic_doc) facts.base = base_of(*facts.document);
        doc = inspect_document(*facts.document, facts.base);
        for (const auto& [k, v] : doc.metadata) facts.metadata.emplace(k, v);
    }

    StageReport r;
    auto add = [&](int stage, std::string id, std::string description, bool pass, std::string evidence) {
        r.criteria.push_back({stage, std::move(id), std::move(description), pass, std::move(evidence)});
    };
    const std::string kind(to_string(a.kind));

    // Stage 1: access through a digital artifact.
    {
        const auto id = identifier_of(facts.metadata);
        add(1, "S1.identifier", "stable identifier (doi or identifier) in metadata", id.has_value(),
            id ? *id : "no doi/identifier key in metadata");
        auto title = facts.metadata.find("title");
        const bool citable = title != facts.metadata.end() && !text::trim(title->second).empty();
        add(1, "S1.citation", "citable metadata (title)", citable,
            citable ? "title=" + title->second : "no title in metadata");
    }

    // Stage 2: structured, machine-readable table.
    {
        bool pass = false;
        std::string evidence;
        switch (a.kind) {
            case ArtifactKind::pdf_ref: evidence = "pdf_ref carries no table"; break;
            case ArtifactKind::tabular_proprietary: {
                auto f = a.metadata.find("format");
                pass = true;
                evidence = "classified from metadata: format=" +
                           (f == a.metadata.end() ? std::string("unknown") : f->second);
                break;
            }
            case ArtifactKind::tabular_open:
                if (table && table->column_count() > 0) {
                    pass = true;
                    evidence = std::to_string(table->column_count()) + " columns, " +
                               std::to_string(table->rows.size()) + " rows";
                } else {
                    evidence = table_error.empty() ? "no columns" : table_error;
                }
                break;
            case ArtifactKind::semantic_doc:
            case ArtifactKind::kg_integrated:
                pass = facts.document && doc.schema_nodes > 0 && doc.has_contributions;
                evidence = pass ? std::to_string(doc.schema_nodes) + " schema nodes"
                                : "document lacks schema or contributions";
                break;
        }
        add(2, "S2.structured", "tabular structure in a machine-readable format", pass, evidence);
    }

    // Stage 3: open, non-proprietary format.
    {
        bool pass = false;
        std::string evidence;
        switch (a.kind) {
            case ArtifactKind::pdf_ref: evidence = "pdf_ref carries no table"; break;
            case ArtifactKind::tabular_proprietary: evidence = "proprietary spreadsheet format"; break;
            case ArtifactKind::tabular_open:
                pass = table.has_value();
                evidence = pass ? "RFC 4180 delimited text" : table_error;
                break;
            case ArtifactKind::semantic_doc: pass = true; evidence = "JSON-LD"; break;
            case ArtifactKind::kg_integrated: pass = true; evidence = "JSON-LD and N-Triples"; break;
        }
        add(3, "S3.open_format", "open, non-proprietary format", pass, evidence);
    }

    // Stage 4: semantic enrichment in a KG format.
    {
        const bool has_doc = facts.document.has_value();
        const std::string none = kind + " has no semantic document";
        add(4, "S4.context", "machine-interpretable document with a @context", has_doc && doc.has_context,
            !has_doc ? none : doc.has_context ? "@context present" : "no @context object");
        const std::size_t alignments = doc.predicate_terms + doc.entity_links;
        add(4, "S4.alignment", "at least one alignment to KG predicates or entities",
            has_doc && alignments > 0,
            !has_doc ? none
                     : std::to_string(doc.predicate_terms) + " predicate terms, " +
                           std::to_string(doc.entity_links) + " entity links");
        const auto docid = identifier_of(doc.metadata);
        add(4, "S4.metadata", "document metadata carries an identifier", has_doc && docid.has_value(),
            !has_doc ? none : docid ? *docid : "no doi/identifier in document metadata");
        add(4, "S4.hierarchy", "schema is a tree that can express nesting",
            has_doc && doc.tree_ok && doc.schema_nodes > 0,
            !has_doc ? none
                     : std::to_string(doc.schema_nodes) + " schema nodes, " +
                           std::to_string(doc.nested_nodes) + " nested");
        add(4, "S4.predicates", "every property is mapped to a KG predicate", has_doc && doc.unmapped == 0,
            !has_doc ? none
            : doc.unmapped == 0 ? "all properties mapped"
                                : std::to_string(doc.unmapped) + " unmapped: " + join(doc.unmapped_labels));
    }

    // Stage 5: integration in the KG.
    {
        std::vector<nt::Triple> triples;
        std::string parse_error;
        if (facts.triples) {
            try {
                triples = nt::parse_ntriples(*facts.triples);
            } catch (const Error& e) {
                parse_error = e.what();
            }
        }
        const bool actionable = facts.triples && parse_error.empty() && !triples.empty();
        add(5, "S5.triples", "machine-actionable RDF (N-Triples)", actionable,
            !facts.triples       ? kind + " has no triples"
            : !parse_error.empty() ? parse_error
                                   : std::to_string(triples.size()) + " triples");

        std::size_t resolved = 0;
        std::vector<std::string> misses;
        if (actionable && a.store) {
            const auto ent = facts.base + "entity/";
            const auto pre = facts.base + "predicate/";
            for (const auto& t : triples) {
                std::optional<EntityId> s;
                std::optional<PredicateId> p;
                std::optional<Object> o;
                if (t.subject.kind == nt::Term::Kind::iri && t.subject.value.rfind(ent, 0) == 0)
                    s = EntityId::parse(t.subject.value.substr(ent.size()));
                if (t.predicate.value.rfind(pre, 0) == 0)
                    p = PredicateId::parse(t.predicate.value.substr(pre.size()));
                if (t.object.kind == nt::Term::Kind::iri && t.object.value.rfind(ent, 0) == 0) {
                    if (auto e = EntityId::parse(t.object.value.substr(ent.size()))) o = Object{*e};
                } else if (t.object.kind == nt::Term::Kind::literal) {
                    try {
                        o = Object{Literal{t.object.value, cell_type_from_xsd(t.object.datatype)}};
                    } catch (const ValidationError&) {
                    }
                }
                if (s && p && o && a.store->find_statement(*s, *p, *o)) ++resolved;
                else misses.push_back(nt::write_triple(t));
            }
        }
        const bool integrated = actionable && a.store && misses.empty();
        add(5, "S5.integrated", "every triple resolves to a statement in the KG store", integrated,
            !actionable ? "no triples to resolve"
            : !a.store  ? "no store available"
                        : std::to_string(resolved) + " of " + std::to_string(triples.size()) +
                             " resolve" + (misses.empty() ? "" : "; first miss: " + misses.front()));
    }

    r.achieved_stage = 0;
    for (int k = 1; k <= 5; ++k) {
        const bool all = std::all_of(r.criteria.begin(), r.criteria.end(),
                                     [&](const auto& c) { return c.stage != k || c.pass; });
        if (!all) break;
        r.achieved_stage = k;
    }
    return r;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ClassifyError("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ArtifactDescriptor describe_artifact(const std::filesystem::path& path,
                                     const std::map<std::string, std::string>& extra) {
    namespace fs = std::filesystem;
    if (!fs::is_regular_file(path)) throw ClassifyError("no such artifact: " + path.string());

    ArtifactDescriptor d;
    d.source = path.string();
    const auto ext = text::ascii_lower(path.extension().string());
    d.payload = read_file(path);

    if (ext == ".pdf") {
        d.kind = ArtifactKind::pdf_ref;
        if (d.payload.rfind("%PDF-", 0) != 0) throw ClassifyError(d.source + ": not a PDF document");
        d.metadata["format"] = "pdf";
    } else if (ext == ".xlsx" || ext == ".xls" || ext == ".xlsm") {
        d.kind = ArtifactKind::tabular_proprietary;
        d.metadata["format"] = ext.substr(1);
    } else if (ext == ".csv" || ext == ".tsv") {
        d.kind = ArtifactKind::tabular_open;
        d.metadata["format"] = ext.substr(1);
    } else if (ext == ".jsonld" || ext == ".json") {
        const json j = parse_json_payload(d);
        if (j.is_object() && j.value("format", "") == kManifestFormat) {
            d.kind = ArtifactKind::kg_integrated;
            const auto ref = j.value("store", "");
            if (ref.empty()) throw ClassifyError(d.source + ": manifest names no store");
            fs::path store_path(ref);
            if (store_path.is_relative()) store_path = path.parent_path() / store_path;
            try {
                d.store = std::make_shared<const KgStore>(KgStore::load(store_path));
            } catch (const Error& e) {
                throw ClassifyError(d.source + ": cannot load store " + store_path.string() + ": " + e.what());
            }
        } else if (j.is_object() && j.contains("@context")) {
            d.kind = ArtifactKind::semantic_doc;
        } else {
            throw ClassifyError(d.source + ": JSON is neither a semantic document nor a manifest");
        }
    } else {
        throw ClassifyError(d.source + ": unsupported artifact type '" + ext + "'");
    }

    fs::path sidecar = path;
    sidecar += ".meta.json";
    if (fs::is_regular_file(sidecar)) {
        json meta;
        try {
            meta = json::parse(read_file(sidecar));
        } catch (const json::parse_error& e) {
            throw ClassifyError(sidecar.string() + ": " + e.what());
        }
        if (!meta.is_object()) throw ClassifyError(sidecar.string() + ": metadata must be an object");
        for (auto& [k, v] : string_map(meta)) d.metadata[k] = v;
    }
    for (const auto& [k, v] : extra) d.metadata[k] = v;
    return d;
}

}  // namespace tabsem
