#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abcd {

std::string trim(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);

/// ASCII lowercase; other bytes pass through.
std::string ascii_lower(std::string_view s);

/// Replaces each run of ASCII whitespace with one space and trims.
std::string collapse_whitespace(std::string_view s);

bool is_word_char(char c);

/// Whole-word occurrence test: `word` bounded by non-word characters or the
/// ends of `text`.
bool contains_word(std::string_view text, std::string_view word);

/// Whitespace-delimited token count.
std::size_t word_count(std::string_view s);

}  // namespace abcd
