#include "tabsem/table.hpp"

#include "tabsem/cell_type.hpp"
#include "tabsem/error.hpp"
#include "tabsem/text.hpp"

namespace tabsem {

Cell Cell::from_raw(std::string raw) {
    Cell c;
    c.raw_text = std::move(raw);
    if (!c.raw_text.empty()) c.values.push_back(c.raw_text);
    return c;
}

std::vector<std::string> Table::column_values(std::size_t column) const {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.at(column).raw_text);
    return out;
}

void validate_table(const Table& table) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i].index != i)
            throw ValidationError("column index " + std::to_string(table.header[i].index) +
                                  " at position " + std::to_string(i));
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size())
            throw ValidationError("row " + std::to_string(r) + " has " +
                                  std::to_string(table.rows[r].size()) + " cells, expected " +
                                  std::to_string(table.header.size()));
    }
}

namespace {

struct Record {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

std::vector<Record> read_records(std::string_view in, char delim, char quote) {
    std::vector<Record> records;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = in.size();

    while (i < n) {
        Record rec;
        rec.line = line;
        bool any_quoted = false;
        bool end_of_record = false;
        while (!end_of_record) {
            std::string field;
            if (i < n && in[i] == quote) {
                any_quoted = true;
                const std::size_t start_line = line;
                ++i;
                bool closed = false;
                while (i < n) {
                    const char c = in[i];
                    if (c == quote) {
                        if (i + 1 < n && in[i + 1] == quote) {
                            field.push_back(quote);
                            i += 2;
                            continue;
                        }
                        ++i;
                        closed = true;
                        break;
                    }
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                if (!closed) throw ParseError(start_line, "unterminated quoted field");
                if (i < n && in[i] != delim && in[i] != '\n' &&
                    !(in[i] == '\r' && i + 1 < n && in[i + 1] == '\n') &&
                    !(in[i] == '\r' && i + 1 == n))
                    throw ParseError(line, "unexpected character after closing quote");
            } else {
                while (i < n && in[i] != delim && in[i] != '\n' &&
                       !(in[i] == '\r' && (i + 1 == n || in[i + 1] == '\n'))) {
                    field.push_back(in[i]);
                    ++i;
                }
            }
            rec.fields.push_back(std::move(field));

            if (i >= n) {
                end_of_record = true;
            } else if (in[i] == delim) {
                ++i;
                if (i >= n) {
                    rec.fields.emplace_back();
                    end_of_record = true;
                }
            } else {
                if (in[i] == '\r') ++i;
                if (i < n && in[i] == '\n') ++i;
                ++line;
                end_of_record = true;
            }
        }
        const bool blank = rec.fields.size() == 1 && rec.fields[0].empty() && !any_quoted;
        if (!blank) records.push_back(std::move(rec));
    }
    return records;
}

bool is_numeric(CellType t) { return t == CellType::integer || t == CellType::decimal; }

bool is_typed(CellType t) {
    return t == CellType::integer || t == CellType::decimal || t == CellType::boolean ||
           t == CellType::date;
}

bool needs_quoting(std::string_view field, const CsvConfig& config) {
    for (char c : field) {
        if (c == config.delimiter || c == config.quote || c == '\n' || c == '\r') return true;
    }
    return false;
}

void write_field(std::string& out, std::string_view field, const CsvConfig& config,
                 bool force_quote) {
    if (!force_quote && !needs_quoting(field, config)) {
        out.append(field);
        return;
    }
    out.push_back(config.quote);
    for (char c : field) {
        if (c == config.quote) out.push_back(config.quote);
        out.push_back(c);
    }
    out.push_back(config.quote);
}

}  // namespace

HeaderVerdict detect_header(const std::vector<std::vector<std::string>>& rows, double threshold) {
    if (rows.size() < 2)
        throw InsufficientRowsError("header detection needs at least 2 rows, got " +
                                    std::to_string(rows.size()));
    const std::size_t width = rows[0].size();
    if (width == 0) return {false, 0.0};

    auto cell = [&](std::size_t r, std::size_t c) -> std::string_view {
        return c < rows[r].size() ? std::string_view(rows[r][c]) : std::string_view();
    };

    std::size_t nonnumeric_header = 0;
    std::size_t typed_total = 0;
    std::size_t filled_total = 0;
    std::size_t contradicting = 0;
    for (std::size_t c = 0; c < width; ++c) {
        const bool header_like = !is_numeric(infer_cell_type(cell(0, c)));
        if (header_like) ++nonnumeric_header;
        std::size_t typed = 0;
        std::size_t filled = 0;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto t = infer_cell_type(cell(r, c));
            if (t == CellType::empty) continue;
            ++filled;
            if (is_typed(t)) ++typed;
        }
        typed_total += typed;
        filled_total += filled;
        const double column_share = filled == 0 ? 0.0 : static_cast<double>(typed) / filled;
        if (!header_like || column_share < threshold) ++contradicting;
    }

    const double share =
        filled_total == 0 ? 0.0 : static_cast<double>(typed_total) / static_cast<double>(filled_total);
    const double w = static_cast<double>(width);
    if (nonnumeric_header == width && share >= threshold)
        return {true, static_cast<double>(nonnumeric_header) / w};
    return {false, static_cast<double>(contradicting) / w};
}

Table parse_csv(std::string_view bytes, const CsvConfig& config,
                std::vector<ParseWarning>* warnings) {
    if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
    if (!text::is_valid_utf8(bytes)) throw EncodingError("input is not valid UTF-8");

    auto records = read_records(bytes, config.delimiter, config.quote);
    if (records.empty() || records.front().fields.empty())
        throw EmptyInputError("input contains no columns");

    bool has_header = config.header_mode == HeaderMode::present;
    if (config.header_mode == HeaderMode::automatic) {
        std::vector<std::vector<std::string>> sample;
        sample.reserve(records.size());
        for (const auto& r : records) sample.push_back(r.fields);
        has_header = detect_header(sample, config.header_threshold).present;
    }

    const std::size_t width = records.front().fields.size();
    Table table;
    table.metadata["format"] = "csv";
    table.synthetic_header = !has_header;
    for (std::size_t c = 0; c < width; ++c) {
        ColumnHeader h;
        h.index = c;
        h.raw_label = has_header ? records.front().fields[c] : "column_" + std::to_string(c + 1);
        h.normalized_label = text::normalize_label(h.raw_label);
        table.header.push_back(std::move(h));
    }

    for (std::size_t r = has_header ? 1 : 0; r < records.size(); ++r) {
        auto& rec = records[r];
        if (rec.fields.size() > width)
            throw ParseError(rec.line, "row has " + std::to_string(rec.fields.size()) +
                                           " fields, header has " + std::to_string(width));
        if (rec.fields.size() < width) {
            if (warnings)
                warnings->push_back({rec.line, "row padded from " +
                                                    std::to_string(rec.fields.size()) + " to " +
                                                    std::to_string(width) + " cells"});
            rec.fields.resize(width);
        }
        Row row;
        row.reserve(width);
        for (auto& f : rec.fields) row.push_back(Cell::from_raw(std::move(f)));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string table_to_csv(const Table& table, const CsvConfig& config) {
    std::string out;
    const bool single_column = table.header.size() == 1;
    auto emit_line = [&](const std::vector<std::string_view>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out.push_back(config.delimiter);
            // A lone empty field would read back as a blank line.
            write_field(out, fields[i], config, single_column && fields[i].empty());
        }
        out.append(config.line_ending);
    };

    if (!table.synthetic_header) {
        std::vector<std::string_view> labels;
        for (const auto& h : table.header) labels.emplace_back(h.raw_label);
        emit_line(labels);
    }
    for (const auto& row : table.rows) {
        std::vector<std::string_view> fields;
        for (const auto& cell : row) fields.emplace_back(cell.raw_text);
        emit_line(fields);
    }
    return out;
}

Cell split_cell(const Cell& cell, const std::vector<std::string>& delimiters) {
    const std::string& raw = cell.raw_text;
    for (const auto& delim : delimiters) {
        if (delim.empty()) continue;
        std::vector<std::size_t> positions;
        bool quoted = false;
        for (std::size_t i = 0; i < raw.size();) {
            if (raw[i] == '"') {
                quoted = !quoted;
                ++i;
                continue;
            }
            if (!quoted && raw.compare(i, delim.size(), delim) == 0) {
                positions.push_back(i);
                i += delim.size();
                continue;
            }
            ++i;
        }
        if (positions.empty()) continue;

        Cell out;
        out.raw_text = raw;
        out.delimiter = delim;
        std::size_t begin = 0;
        positions.push_back(raw.size());
        for (std::size_t p : positions) {
            const auto part = text::trim(std::string_view(raw).substr(begin, p - begin));
            if (!part.empty()) out.values.emplace_back(part);
            begin = p + delim.size();
        }
        return out;
    }
    return cell;
}

}  // namespace tabsem
