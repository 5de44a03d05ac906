#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace modaudit {

// ASCII-only case folding; non-ASCII bytes pass through untouched.
char ascii_lower(char c);
std::string ascii_lower_copy(std::string_view s);

// Word characters are ASCII letters, digits and underscore. Everything else
// (space, punctuation, non-ASCII bytes) acts as a boundary.
bool is_word_char(char c);

// Byte ranges [begin, end) of every case-insensitive occurrence of `needle`
// in `text` whose ends sit on word boundaries. The needle itself may contain
// spaces (multi-word phrases match literally). Occurrences never overlap;
// the scan is left to right.
std::vector<std::pair<std::size_t, std::size_t>> find_word_matches(
    std::string_view text, std::string_view needle);

struct WordReplacement {
  std::string text;  // result after replacing every match
  int count = 0;     // number of occurrences replaced
};

// Replaces every word-boundary, case-insensitive occurrence of `from` with
// `to`. The replacement is inserted in canonical lowercase, except when the
// source occurrence opens a sentence (offset 0 or after ./!/? plus
// whitespace) with an uppercase letter, in which case the replacement's
// first letter is capitalized to match. All other bytes are preserved.
WordReplacement replace_word_all(std::string_view text, std::string_view from,
                                 std::string_view to);

}  // namespace modaudit
