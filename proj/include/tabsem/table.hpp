#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabsem {

struct ColumnHeader {
    std::size_t index = 0;
    std::string raw_label;
    std::string normalized_label;

    bool operator==(const ColumnHeader&) const = default;
};

// One table cell. `values` holds the enumeration parts once a split was
// applied; otherwise it is `[raw_text]` (or empty for an empty cell).
struct Cell {
    std::string raw_text;
    std::vector<std::string> values;
    std::optional<std::string> delimiter;

    static Cell from_raw(std::string raw);

    bool operator==(const Cell&) const = default;
};

using Row = std::vector<Cell>;

// Columns are properties, rows are contributions.
struct Table {
    std::string source_id;
    std::vector<ColumnHeader> header;
    std::vector<Row> rows;
    std::map<std::string, std::string> metadata;
    // True when the labels were synthesized (`column_1`, ...) rather than read.
    bool synthetic_header = false;

    std::size_t column_count() const { return header.size(); }
    std::vector<std::string> column_values(std::size_t column) const;

    bool operator==(const Table&) const = default;
};

// Throws ValidationError when a table breaks its structural invariants.
void validate_table(const Table& table);

enum class HeaderMode { automatic, present, absent };

struct CsvConfig {
    char delimiter = ',';
    char quote = '"';
    HeaderMode header_mode = HeaderMode::automatic;
    std::string line_ending = "\n";
    // Minimum share of typed body cells for header auto-detection.
    double header_threshold = 0.5;
};

struct ParseWarning {
    std::size_t line = 0;
    std::string message;
};

Table parse_csv(std::string_view bytes, const CsvConfig& config = {},
                std::vector<ParseWarning>* warnings = nullptr);

std::string table_to_csv(const Table& table, const CsvConfig& config = {});

struct HeaderVerdict {
    bool present = false;
    double confidence = 0.0;
};

// Decides whether rows[0] is a header row: every cell of row 0 must be
// non-numeric and at least `threshold` of the non-empty body cells must lex as
// numeric, boolean or date. Needs at least two rows.
HeaderVerdict detect_header(const std::vector<std::vector<std::string>>& rows,
                            double threshold = 0.5);

inline const std::vector<std::string>& default_split_delimiters() {
    static const std::vector<std::string> d{";", ",", "|"};
    return d;
}

// Splits an enumeration cell on the first delimiter (in priority order) that
// occurs outside double quotes. Parts are trimmed and empty parts dropped.
Cell split_cell(const Cell& cell,
                const std::vector<std::string>& delimiters = default_split_delimiters());

}  // namespace tabsem
