#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tabsem/cell_type.hpp"
#include "tabsem/error.hpp"
#include "tabsem/table.hpp"
#include "tabsem/text.hpp"

using namespace tabsem;

namespace {

std::vector<std::string> raw_row(const Row& row) {
    std::vector<std::string> out;
    for (const auto& c : row) out.push_back(c.raw_text);
    return out;
}

std::vector<std::string> labels(const Table& t) {
    std::vector<std::string> out;
    for (const auto& h : t.header) out.push_back(h.raw_label);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// text

TEST(Text, NormalizeLabel) {
    EXPECT_EQ(text::normalize_label("  Study   Type "), "study type");
    EXPECT_EQ(text::normalize_label("Abc "), "abc");
    EXPECT_EQ(text::normalize_label("(F1 score)."), "f1 score");
    EXPECT_EQ(text::normalize_label("a\t\nb"), "a b");
    EXPECT_EQ(text::normalize_label("--"), "");
    EXPECT_EQ(text::normalize_label("Größe"), "größe");
}

TEST(Text, NormalizeMatchesOracleOnAscii) {
    std::mt19937 rng(7);
    const std::string alphabet = "aAbB zZ-_.,;()\t!?09";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const int n = static_cast<int>(rng() % 12);
        for (int k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
        ASSERT_EQ(text::normalize_label(s), oracle::normalize(s)) << "input '" << s << "'";
    }
}

TEST(Text, Utf8) {
    EXPECT_TRUE(text::is_valid_utf8("plain"));
    EXPECT_TRUE(text::is_valid_utf8("\xC3\xA9t\xC3\xA9"));
    EXPECT_FALSE(text::is_valid_utf8("\xC3"));
    EXPECT_FALSE(text::is_valid_utf8("\xC0\xAF"));  // overlong
    EXPECT_FALSE(text::is_valid_utf8("\xED\xA0\x80"));  // surrogate
    EXPECT_EQ(text::decode_utf8("\xC3\xA9").size(), 1u);
    EXPECT_EQ(text::encode_utf8(text::decode_utf8("h\xC3\xA9llo \xE2\x82\xAC")), "h\xC3\xA9llo \xE2\x82\xAC");
}

TEST(Text, Slug) {
    EXPECT_EQ(text::slug("Study Type"), "study_type");
    EXPECT_EQ(text::slug("F1"), "f1");
    EXPECT_EQ(text::slug("2nd run"), "p_2nd_run");
    EXPECT_EQ(text::slug("!!!"), "property");
}

// ---------------------------------------------------------------------------
// cell types

TEST(CellTypes, LexerExamples) {
    EXPECT_EQ(infer_cell_type("42"), CellType::integer);
    EXPECT_EQ(infer_cell_type("3.14"), CellType::decimal);
    EXPECT_EQ(infer_cell_type("true"), CellType::boolean);
    EXPECT_EQ(infer_cell_type("2021-05-03"), CellType::date);
    EXPECT_EQ(infer_cell_type("N/A"), CellType::string);
    EXPECT_EQ(infer_cell_type("   "), CellType::empty);
    EXPECT_EQ(infer_cell_type("YES"), CellType::boolean);
    EXPECT_EQ(infer_cell_type("-7"), CellType::integer);
    EXPECT_EQ(infer_cell_type("1e5"), CellType::decimal);
    EXPECT_EQ(infer_cell_type("https://orkg.org/r/1"), CellType::url);
    EXPECT_EQ(infer_cell_type("http://"), CellType::string);
    EXPECT_EQ(infer_cell_type("2021-02-30"), CellType::string);
}

// Integer precedes date in the lexer order, so a bare year is an integer.
TEST(CellTypes, YearFormIsInteger) {
    EXPECT_EQ(infer_cell_type("2021"), CellType::integer);
    EXPECT_TRUE(lexeme_valid(CellType::date, "2021"));
}

TEST(CellTypes, LexemeValid) {
    EXPECT_TRUE(lexeme_valid(CellType::decimal, "3"));
    EXPECT_FALSE(lexeme_valid(CellType::integer, "2.5"));
    EXPECT_TRUE(lexeme_valid(CellType::string, "2.5"));
    EXPECT_FALSE(lexeme_valid(CellType::string, ""));
    EXPECT_TRUE(lexeme_valid(CellType::empty, " "));
}

TEST(CellTypes, LexersAreTotalAndMatchOracle) {
    std::mt19937 rng(11);
    const std::vector<std::string> pieces = {"1", "0", "-", "+", ".", "e", "E", "2021", "-05", "-30", "yes",
                                             "No", "http://", "https://", "x.org", "/p", " ", "abc", "9",
                                             "TRUE", "#", "?"};
    for (int i = 0; i < 20000; ++i) {
        std::string s;
        const int n = static_cast<int>(rng() % 4);
        for (int k = 0; k < n; ++k) s += pieces[rng() % pieces.size()];
        ASSERT_EQ(infer_cell_type(s), oracle::lex(s)) << "input '" << s << "'";
    }
}

TEST(CellTypes, StringRoundTrip) {
    for (auto t : kAllCellTypes) EXPECT_EQ(cell_type_from_string(to_string(t)), t);
    EXPECT_FALSE(cell_type_from_string("float"));
}

// ---------------------------------------------------------------------------
// parse_csv

TEST(Csv, MinimalTable) {
    const auto t = parse_csv("a,b\n1,2\n");
    EXPECT_EQ(labels(t), (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(raw_row(t.rows[0]), (std::vector<std::string>{"1", "2"}));
    EXPECT_FALSE(t.synthetic_header);
}

TEST(Csv, QuotedDelimiter) {
    const auto t = parse_csv("a,b\n\"x,y\",2\n", {.header_mode = HeaderMode::present});
    EXPECT_EQ(t.rows.at(0).at(0).raw_text, "x,y");
}

TEST(Csv, ShortRowPaddedWithWarning) {
    const std::string input = "a,b,c\nx,y\n";
    std::vector<ParseWarning> warnings;
    const auto t = parse_csv(input, {.header_mode = HeaderMode::present}, &warnings);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_EQ(warnings[0].line, 2u);

    // The reference reader sees the raw 2-field record; padding fills the rest.
    const auto ref = oracle::read_csv(input);
    ASSERT_EQ(ref.size(), 2u);
    auto expected = ref[1];
    expected.resize(ref[0].size());
    EXPECT_EQ(raw_row(t.rows.at(0)), expected);
}

TEST(Csv, Errors) {
    try {
        parse_csv("a,b\n\"open,2\n3,4\n", {.header_mode = HeaderMode::present});
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_csv("a\xff,b\n1,2\n"), EncodingError);
    EXPECT_THROW(parse_csv(""), EmptyInputError);
    EXPECT_THROW(parse_csv("a,b\n1,2,3\n", {.header_mode = HeaderMode::present}), ParseError);
}

TEST(Csv, BomAndCrlf) {
    const auto t = parse_csv("\xEF\xBB\xBFname,age\r\nAda,36\r\n", {.header_mode = HeaderMode::present});
    EXPECT_EQ(labels(t), (std::vector<std::string>{"name", "age"}));
    EXPECT_EQ(raw_row(t.rows.at(0)), (std::vector<std::string>{"Ada", "36"}));
}

TEST(Csv, HeaderModes) {
    const auto absent = parse_csv("x,y\n1,2\n", {.header_mode = HeaderMode::absent});
    EXPECT_TRUE(absent.synthetic_header);
    EXPECT_EQ(labels(absent), (std::vector<std::string>{"column_1", "column_2"}));
    EXPECT_EQ(absent.rows.size(), 2u);

    const auto detected = parse_csv("Name,Age\nAda,36\n");
    EXPECT_FALSE(detected.synthetic_header);
    EXPECT_EQ(detected.rows.size(), 1u);

    EXPECT_THROW(parse_csv("Name,Age\n"), InsufficientRowsError);
    EXPECT_NO_THROW(parse_csv("Name,Age\n", {.header_mode = HeaderMode::present}));
}

TEST(Csv, Semicolons) {
    const auto t = parse_csv("a;b\n1;2\n", {.delimiter = ';', .header_mode = HeaderMode::present});
    EXPECT_EQ(labels(t), (std::vector<std::string>{"a", "b"}));
}

// ---------------------------------------------------------------------------
// detect_header

TEST(DetectHeader, Examples) {
    const auto v = detect_header({{"Name", "Age"}, {"Ada", "36"}});
    EXPECT_TRUE(v.present);
    EXPECT_DOUBLE_EQ(v.confidence, 1.0);
    EXPECT_FALSE(detect_header({{"1", "2"}, {"3", "4"}}).present);
    EXPECT_THROW(detect_header({{"Name", "Age"}}), InsufficientRowsError);
}

TEST(DetectHeader, TextOnlyBodyIsAbsent) {
    // Body cells are all strings: typed support 0% < 50%.
    const auto v = detect_header({{"Study", "Method"}, {"Zhang", "prompting"}, {"Li", "tuning"}});
    EXPECT_FALSE(v.present);
    EXPECT_DOUBLE_EQ(v.confidence, 1.0);
}

TEST(DetectHeader, ThresholdIsConfigurable) {
    const std::vector<std::vector<std::string>> rows = {{"Study", "Year"}, {"Zhang", "2021"}, {"Li", "2022"}};
    EXPECT_TRUE(detect_header(rows, 0.5).present);
    EXPECT_FALSE(detect_header(rows, 0.75).present);
}

// ---------------------------------------------------------------------------
// split_cell

TEST(SplitCell, Examples) {
    const auto a = split_cell(Cell::from_raw("a; b; c"));
    EXPECT_EQ(a.values, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(a.delimiter, ";");
    EXPECT_EQ(a.raw_text, "a; b; c");

    const auto x = split_cell(Cell::from_raw("x"));
    EXPECT_EQ(x, Cell::from_raw("x"));

    // ';' outranks ','.
    const auto p = split_cell(Cell::from_raw("p, q; r"));
    EXPECT_EQ(p.values, (std::vector<std::string>{"p, q", "r"}));
    EXPECT_EQ(p.delimiter, ";");
}

TEST(SplitCell, DropsEmptyPartsAndRespectsQuotes) {
    EXPECT_EQ(split_cell(Cell::from_raw("a;;b; ")).values, (std::vector<std::string>{"a", "b"}));
    const auto q = split_cell(Cell::from_raw("\"x;y\", z"));
    EXPECT_EQ(q.delimiter, ",");
    EXPECT_EQ(q.values.size(), 2u);
}

TEST(SplitCell, Idempotent) {
    for (const std::string raw : {"a; b; c", "p, q; r", "x", "", "fine-tuning | prompting", "a,b|c"}) {
        const auto once = split_cell(Cell::from_raw(raw));
        EXPECT_EQ(split_cell(once), once) << raw;
    }
}

// ---------------------------------------------------------------------------
// table_to_csv

TEST(TableToCsv, Examples) {
    Table t;
    t.header = {{0, "a", "a"}};
    t.rows = {{Cell::from_raw("x")}};
    EXPECT_EQ(table_to_csv(t), "a\nx\n");
    t.rows = {{Cell::from_raw("x,y")}};
    EXPECT_EQ(table_to_csv(t), "a\n\"x,y\"\n");
}

TEST(TableToCsv, RoundTripRandomTables) {
    std::mt19937 rng(3);
    const std::vector<std::string> fields = {"a", "b c", "x,y", "say \"hi\"", "line\nbreak", "", " pad ", "1",
                                             "2.5", "é", ";", "\r\n"};
    for (int trial = 0; trial < 500; ++trial) {
        Table t;
        const std::size_t width = 1 + rng() % 5;
        for (std::size_t c = 0; c < width; ++c) {
            const std::string label = "h" + std::to_string(c) + (rng() % 2 ? ",q" : "");
            t.header.push_back({c, label, text::normalize_label(label)});
        }
        const std::size_t height = rng() % 6;
        for (std::size_t r = 0; r < height; ++r) {
            Row row;
            for (std::size_t c = 0; c < width; ++c) row.push_back(Cell::from_raw(fields[rng() % fields.size()]));
            t.rows.push_back(std::move(row));
        }
        const CsvConfig cfg{.header_mode = HeaderMode::present};
        const auto back = parse_csv(table_to_csv(t, cfg), cfg);
        ASSERT_EQ(labels(back), labels(t));
        ASSERT_EQ(back.rows.size(), t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) ASSERT_EQ(raw_row(back.rows[r]), raw_row(t.rows[r]));
    }
}

TEST(TableToCsv, FixtureRoundTrip) {
    const std::string input =
        "Study,Approach,F1\nZhang,\"prompting; in-context learning\",0.71\nLi,\"fine-tuning, prompting\",n/a\n";
    const CsvConfig cfg{.header_mode = HeaderMode::present};
    const auto t = parse_csv(input, cfg);
    const auto back = parse_csv(table_to_csv(t, cfg), cfg);
    EXPECT_EQ(back, t);
}

TEST(Table, Validate) {
    Table t;
    t.header = {{0, "a", "a"}, {1, "b", "b"}};
    t.rows = {{Cell::from_raw("1")}};
    EXPECT_THROW(validate_table(t), ValidationError);
    t.rows[0].push_back(Cell::from_raw("2"));
    EXPECT_NO_THROW(validate_table(t));
}
