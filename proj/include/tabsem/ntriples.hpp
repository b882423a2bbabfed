#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace tabsem::nt {

inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kRdfValue = "http://www.w3.org/1999/02/22-rdf-syntax-ns#value";
inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";

struct Term {
    enum class Kind { iri, literal, blank };
    Kind kind = Kind::iri;
    // IRI, blank node label or literal lexical form (unescaped).
    std::string value;
    // Literals only; xsd:string when the literal was written without a tag.
    std::string datatype;
    std::string language;

    static Term iri(std::string v) { return {Kind::iri, std::move(v), {}, {}}; }
    static Term literal(std::string lexical, std::string datatype) {
        return {Kind::literal, std::move(lexical), std::move(datatype), {}};
    }

    auto operator<=>(const Term&) const = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;

    auto operator<=>(const Triple&) const = default;
};

std::string write_term(const Term& t);
std::string write_triple(const Triple& t);

// Canonical document: one line per distinct triple, sorted by the rendered
// (subject, predicate, object), every line ending in "\n". xsd:string
// literals are written without a datatype tag.
std::string write_ntriples(std::vector<Triple> triples);

// Accepts the N-Triples line grammar (comments, blank lines, IRIs, blank
// nodes, literals with escapes, datatype or language tags). Raises ParseError
// with the 1-based line number.
std::vector<Triple> parse_ntriples(std::string_view text);

}  // namespace tabsem::nt
