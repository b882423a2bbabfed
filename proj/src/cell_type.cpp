#include "tabsem/cell_type.hpp"

#include <chrono>

#include "tabsem/text.hpp"

namespace tabsem {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!is_digit(c)) return false;
    }
    return true;
}

std::string_view drop_sign(std::string_view s) {
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
    return s;
}

bool lex_boolean(std::string_view s) {
    const auto l = text::ascii_lower(s);
    return l == "true" || l == "false" || l == "yes" || l == "no";
}

bool lex_integer(std::string_view s) { return all_digits(drop_sign(s)); }

// digits '.' digits, optionally followed by an exponent, or digits with an exponent.
bool lex_decimal(std::string_view s) {
    s = drop_sign(s);
    std::string_view mantissa = s;
    std::string_view exponent;
    bool has_exponent = false;
    if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        mantissa = s.substr(0, e);
        exponent = drop_sign(s.substr(e + 1));
        has_exponent = true;
        if (!all_digits(exponent)) return false;
    }
    const auto dot = mantissa.find('.');
    if (dot == std::string_view::npos) return has_exponent && all_digits(mantissa);
    return all_digits(mantissa.substr(0, dot)) && all_digits(mantissa.substr(dot + 1));
}

bool lex_year(std::string_view s) { return s.size() == 4 && all_digits(s); }

bool lex_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
        return false;
    const int y = std::stoi(std::string(s.substr(0, 4)));
    const unsigned m = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
    const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                       std::chrono::day{d}}
        .ok();
}

bool lex_date(std::string_view s) { return lex_iso_date(s) || lex_year(s); }

bool lex_url(std::string_view s) {
    std::string_view rest;
    const auto lower = text::ascii_lower(s.substr(0, 8));
    if (lower.rfind("https://", 0) == 0) {
        rest = s.substr(8);
    } else if (lower.rfind("http://", 0) == 0) {
        rest = s.substr(7);
    } else {
        return false;
    }
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
    }
    const auto end = rest.find_first_of("/?#");
    return end != 0 && !rest.empty();
}

}  // namespace

std::string_view to_string(CellType t) {
    switch (t) {
        case CellType::boolean: return "boolean";
        case CellType::integer: return "integer";
        case CellType::decimal: return "decimal";
        case CellType::date: return "date";
        case CellType::url: return "url";
        case CellType::empty: return "empty";
        case CellType::string: return "string";
    }
    return "string";
}

std::optional<CellType> cell_type_from_string(std::string_view s) {
    for (auto t : kAllCellTypes) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

CellType infer_cell_type(std::string_view raw) {
    const auto s = text::trim(raw);
    if (s.empty()) return CellType::empty;
    if (lex_boolean(s)) return CellType::boolean;
    if (lex_integer(s)) return CellType::integer;
    if (lex_decimal(s)) return CellType::decimal;
    if (lex_date(s)) return CellType::date;
    if (lex_url(s)) return CellType::url;
    return CellType::string;
}

bool lexeme_valid(CellType type, std::string_view raw) {
    const auto s = text::trim(raw);
    switch (type) {
        case CellType::empty: return s.empty();
        case CellType::string: return !s.empty();
        case CellType::boolean: return lex_boolean(s);
        case CellType::integer: return lex_integer(s);
        case CellType::decimal: return lex_integer(s) || lex_decimal(s);
        case CellType::date: return lex_date(s);
        case CellType::url: return lex_url(s);
    }
    return false;
}

int generality(CellType t) {
    switch (t) {
        case CellType::string: return 6;
        case CellType::decimal: return 5;
        case CellType::date: return 4;
        case CellType::url: return 3;
        case CellType::integer: return 2;
        case CellType::boolean: return 1;
        case CellType::empty: return 0;
    }
    return 0;
}

}  // namespace tabsem
