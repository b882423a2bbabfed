#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace tabsem {

// Store identifier rendered as a one-letter kind prefix plus a decimal
// sequence number (`E12`). Ordering is numeric.
template <char Prefix>
struct TaggedId {
    std::uint64_t value = 0;

    static constexpr char prefix = Prefix;

    std::string str() const { return std::string(1, Prefix) + std::to_string(value); }

    static std::optional<TaggedId> parse(std::string_view s) {
        if (s.size() < 2 || s.front() != Prefix) return std::nullopt;
        std::uint64_t v = 0;
        for (char c : s.substr(1)) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
        }
        return TaggedId{v};
    }

    auto operator<=>(const TaggedId&) const = default;
};

using EntityId = TaggedId<'E'>;
using PredicateId = TaggedId<'P'>;
using StatementId = TaggedId<'S'>;

}  // namespace tabsem

template <char P>
struct std::hash<tabsem::TaggedId<P>> {
    std::size_t operator()(const tabsem::TaggedId<P>& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
