#pragma once

#include <string>
#include <string_view>

namespace tabsem::text {

bool is_valid_utf8(std::string_view bytes);

// Decodes valid UTF-8 into code points. Invalid sequences map to U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view points);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

// Label normalization shared by the KG store, the matcher and column headers:
// trim, ASCII casefold, collapse internal whitespace runs to one space, and
// strip leading/trailing punctuation.
std::string normalize_label(std::string_view s);

// Lowercase ASCII identifier built from a label (`Study Type` -> `study_type`).
std::string slug(std::string_view s);

}  // namespace tabsem::text
