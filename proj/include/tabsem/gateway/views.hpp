#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabsem/error.hpp"
#include "tabsem/evolution.hpp"
#include "tabsem/session.hpp"
#include "tabsem/table.hpp"

// JSON shapes shared by the CLI `--json` mode and the HTTP API.
namespace tabsem::gateway {

using nlohmann::ordered_json;

ordered_json table_to_json(const Table& t);
Table table_from_json(const nlohmann::json& j);

ordered_json candidate_json(const Candidate& c);
ordered_json flag_json(const InconsistencyFlag& f);
ordered_json object_json(const Object& o);
ordered_json column_json(const ColumnAnnotation& c, const std::vector<PropertyRef>& properties);
ordered_json cell_json(const CellAnnotation& c);
ordered_json session_json(const Session& s);

// Changes between two states of one session: the real-time update a client
// applies after submitting a decision.
ordered_json session_delta(const Session& before, const Session& after);

ordered_json report_json(const StageReport& r);
ordered_json receipt_json(const IntegrationReceipt& r);
ordered_json model_summary_json(const AnnotatedModel& m);

ordered_json ok_envelope(ordered_json payload);
ordered_json error_envelope(const std::string& code, const std::string& message,
                            const std::vector<std::string>& details = {});
ordered_json error_envelope(const Error& e);

}  // namespace tabsem::gateway
