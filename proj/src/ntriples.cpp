#include "tabsem/ntriples.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <tuple>

#include "tabsem/error.hpp"
#include "tabsem/text.hpp"

namespace tabsem::nt {

namespace {

void append_uchar(std::string& out, char32_t cp) {
    char buf[12];
    if (cp <= 0xffff)
        std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(cp));
    else
        std::snprintf(buf, sizeof buf, "\\U%08X", static_cast<unsigned>(cp));
    out += buf;
}

std::string escape_iri(std::string_view iri) {
    std::string out;
    for (char32_t cp : text::decode_utf8(iri)) {
        if (cp <= 0x20 || cp == '<' || cp == '>' || cp == '"' || cp == '{' || cp == '}' ||
            cp == '|' || cp == '^' || cp == '`' || cp == '\\')
            append_uchar(out, cp);
        else
            out += text::encode_utf8(std::u32string(1, cp));
    }
    return out;
}

std::string escape_literal(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

    void skip_ws() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
    }
    bool at_end() const { return i_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[i_]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(line_, what + " at column " + std::to_string(i_ + 1));
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }

    Term subject() {
        if (peek() == '<') return Term::iri(iri());
        if (peek() == '_') return blank();
        fail("expected IRI or blank node subject");
    }

    Term predicate() {
        if (peek() != '<') fail("expected IRI predicate");
        return Term::iri(iri());
    }

    Term object() {
        if (peek() == '<') return Term::iri(iri());
        if (peek() == '_') return blank();
        if (peek() == '"') return literal();
        fail("expected object");
    }

private:
    char32_t hex(std::size_t n) {
        if (i_ + n > s_.size()) fail("truncated escape");
        char32_t v = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const char c = s_[i_ + k];
            v <<= 4;
            if (c >= '0' && c <= '9') v |= static_cast<char32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') v |= static_cast<char32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') v |= static_cast<char32_t>(c - 'A' + 10);
            else fail("bad hex digit in escape");
        }
        i_ += n;
        if (v > 0x10ffff || (v >= 0xd800 && v <= 0xdfff)) fail("escape is not a code point");
        return v;
    }

    std::string iri() {
        expect('<');
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated IRI");
            const char c = s_[i_++];
            if (c == '>') break;
            if (c == '\\') {
                const char k = peek();
                ++i_;
                if (k == 'u') out += text::encode_utf8(std::u32string(1, hex(4)));
                else if (k == 'U') out += text::encode_utf8(std::u32string(1, hex(8)));
                else fail("bad escape in IRI");
                continue;
            }
            if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' ||
                c == '}' || c == '|' || c == '^' || c == '`')
                fail("character not allowed in IRI");
            out.push_back(c);
        }
        if (out.find(':') == std::string::npos) fail("relative IRI");
        return out;
    }

    Term blank() {
        expect('_');
        expect(':');
        const auto start = i_;
        while (!at_end() && s_[i_] != ' ' && s_[i_] != '\t' && s_[i_] != '.') ++i_;
        // a label may contain '.' but not end with it
        while (!at_end() && s_[i_] == '.' && i_ + 1 < s_.size() && s_[i_ + 1] != ' ' &&
               s_[i_ + 1] != '\t') {
            ++i_;
            while (!at_end() && s_[i_] != ' ' && s_[i_] != '\t' && s_[i_] != '.') ++i_;
        }
        if (i_ == start) fail("empty blank node label");
        return Term{Term::Kind::blank, std::string(s_.substr(start, i_ - start)), {}, {}};
    }

    Term literal() {
        expect('"');
        std::string lex;
        while (true) {
            if (at_end()) fail("unterminated literal");
            const char c = s_[i_++];
            if (c == '"') break;
            if (c == '\n' || c == '\r') fail("raw line break in literal");
            if (c != '\\') {
                lex.push_back(c);
                continue;
            }
            if (at_end()) fail("truncated escape");
            const char k = s_[i_++];
            switch (k) {
                case 't': lex.push_back('\t'); break;
                case 'b': lex.push_back('\b'); break;
                case 'n': lex.push_back('\n'); break;
                case 'r': lex.push_back('\r'); break;
                case 'f': lex.push_back('\f'); break;
                case '"': lex.push_back('"'); break;
                case '\'': lex.push_back('\''); break;
                case '\\': lex.push_back('\\'); break;
                case 'u': lex += text::encode_utf8(std::u32string(1, hex(4))); break;
                case 'U': lex += text::encode_utf8(std::u32string(1, hex(8))); break;
                default: fail("bad escape in literal");
            }
        }
        Term t = Term::literal(std::move(lex), std::string(kXsdString));
        if (peek() == '^') {
            ++i_;
            expect('^');
            if (peek() != '<') fail("expected datatype IRI");
            t.datatype = iri();
        } else if (peek() == '@') {
            ++i_;
            const auto start = i_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '-'))
                ++i_;
            if (i_ == start) fail("empty language tag");
            t.language = std::string(s_.substr(start, i_ - start));
            t.datatype = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
        }
        return t;
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t i_ = 0;
};

}  // namespace

std::string write_term(const Term& t) {
    switch (t.kind) {
        case Term::Kind::iri: return "<" + escape_iri(t.value) + ">";
        case Term::Kind::blank: return "_:" + t.value;
        case Term::Kind::literal: {
            std::string out = "\"" + escape_literal(t.value) + "\"";
            if (!t.language.empty()) out += "@" + t.language;
            else if (!t.datatype.empty() && t.datatype != kXsdString)
                out += "^^<" + escape_iri(t.datatype) + ">";
            return out;
        }
    }
    return {};
}

std::string write_triple(const Triple& t) {
    return write_term(t.subject) + " " + write_term(t.predicate) + " " + write_term(t.object) + " .";
}

std::string write_ntriples(std::vector<Triple> triples) {
    using Row = std::tuple<std::string, std::string, std::string>;
    std::vector<Row> rows;
    rows.reserve(triples.size());
    for (const auto& t : triples)
        rows.emplace_back(write_term(t.subject), write_term(t.predicate), write_term(t.object));
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::string out;
    for (const auto& [s, p, o] : rows) out += s + " " + p + " " + o + " .\n";
    return out;
}

std::vector<Triple> parse_ntriples(std::string_view text) {
    if (!text::is_valid_utf8(text)) throw EncodingError("N-Triples input is not valid UTF-8");
    std::vector<Triple> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;

        LineParser p(line, line_no);
        p.skip_ws();
        if (p.at_end() || p.peek() == '#') continue;
        Triple t;
        t.subject = p.subject();
        p.skip_ws();
        t.predicate = p.predicate();
        p.skip_ws();
        t.object = p.object();
        p.skip_ws();
        p.expect('.');
        p.skip_ws();
        if (!p.at_end() && p.peek() != '#') p.fail("trailing content");
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace tabsem::nt
