#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabsem/session.hpp"

namespace tabsem {

// One decision per line:
//   {"seq":N,"actor":"human|machine","kind":"...","payload":{...},"timestamp":"..."}
// Keys are written in that order. On input `seq`, `actor` and `timestamp` may
// be omitted (a submission); unknown keys are rejected.
nlohmann::ordered_json decision_to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

nlohmann::ordered_json hierarchy_to_json(const HierarchySpec& spec);
HierarchySpec hierarchy_from_json(const nlohmann::json& j);
nlohmann::ordered_json group_to_json(const GroupSpec& spec);
GroupSpec group_from_json(const nlohmann::json& j);

std::string write_decision_log(const std::vector<Decision>& log);
// Blank lines are skipped; a malformed line raises ParseError with its 1-based
// line number.
std::vector<Decision> read_decision_log(std::string_view text);

std::vector<Decision> load_decision_log(const std::filesystem::path& path);
void append_decision(const std::filesystem::path& path, const Decision& d);

}  // namespace tabsem
