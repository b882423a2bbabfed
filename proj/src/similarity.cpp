#include "tabsem/similarity.hpp"

#include <cmath>

#include "tabsem/text.hpp"

namespace tabsem {

std::set<std::u32string> trigrams(std::string_view normalized) {
    const auto points = text::decode_utf8(normalized);
    std::set<std::u32string> out;
    for (std::size_t i = 0; i + 3 <= points.size(); ++i) out.insert(points.substr(i, 3));
    return out;
}

double jaccard_score(std::size_t shared, std::size_t size_a, std::size_t size_b) {
    const std::size_t uni = size_a + size_b - shared;
    if (uni == 0 || shared == 0) return 0.0;
    const double j = static_cast<double>(shared) / static_cast<double>(uni);
    return j >= 1.0 ? std::nextafter(1.0, 0.0) : j;
}

double similarity(std::string_view a, std::string_view b) {
    const auto na = text::normalize_label(a);
    const auto nb = text::normalize_label(b);
    if (na == nb) return 1.0;
    const auto ta = trigrams(na);
    const auto tb = trigrams(nb);
    std::size_t shared = 0;
    for (const auto& g : ta) shared += tb.count(g);
    return jaccard_score(shared, ta.size(), tb.size());
}

}  // namespace tabsem
