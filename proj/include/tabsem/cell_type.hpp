#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tabsem {

enum class CellType { boolean, integer, decimal, date, url, empty, string };

inline constexpr std::array<CellType, 7> kAllCellTypes = {
    CellType::boolean, CellType::integer, CellType::decimal, CellType::date,
    CellType::url,     CellType::empty,   CellType::string};

std::string_view to_string(CellType t);
std::optional<CellType> cell_type_from_string(std::string_view s);

// Lexes one cell. Lexers are tried in the fixed order
// empty, boolean, integer, decimal, date, url; anything else is a string.
CellType infer_cell_type(std::string_view text);

// Whether `text` is an acceptable lexeme for `type` when the type is imposed
// rather than inferred: integers are valid decimals, four-digit years are
// valid dates, and every non-empty lexeme is a valid string.
bool lexeme_valid(CellType type, std::string_view text);

// Tie-break rank for majority voting; higher means more general.
int generality(CellType t);

}  // namespace tabsem
