#pragma once

#include <set>
#include <string>
#include <string_view>

namespace tabsem {

// Character trigrams (over code points) of an already-normalized label.
// Strings shorter than three code points have none.
std::set<std::u32string> trigrams(std::string_view normalized);

// 1.0 iff both labels normalize to the same string. Otherwise the Jaccard
// overlap of their trigram sets, capped strictly below 1.0 for the rare
// distinct labels whose trigram sets coincide (`aaa` / `aaaa`).
double similarity(std::string_view a, std::string_view b);

// Jaccard score from set sizes, with the same below-1.0 cap. Shared by the
// indexed lookup path so both routes produce identical doubles.
double jaccard_score(std::size_t shared, std::size_t size_a, std::size_t size_b);

}  // namespace tabsem
