#include "modaudit/text.hpp"

namespace modaudit {

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string ascii_lower_copy(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

namespace {

bool equals_fold(std::string_view text, std::size_t at, std::string_view needle) {
  if (at + needle.size() > text.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (ascii_lower(text[at + i]) != ascii_lower(needle[i])) return false;
  }
  return true;
}

bool boundary_before(std::string_view text, std::size_t at) {
  return at == 0 || !is_word_char(text[at - 1]);
}

bool boundary_after(std::string_view text, std::size_t end) {
  return end >= text.size() || !is_word_char(text[end]);
}

// A match at `at` opens a sentence if it is at the start of the text or the
// closest non-whitespace byte before it is sentence-ending punctuation.
bool sentence_initial(std::string_view text, std::size_t at) {
  std::size_t i = at;
  while (i > 0) {
    char c = text[i - 1];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      --i;
      continue;
    }
    return c == '.' || c == '!' || c == '?';
  }
  return true;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> find_word_matches(
    std::string_view text, std::string_view needle) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (needle.empty()) return out;
  std::size_t i = 0;
  while (i + needle.size() <= text.size()) {
    if (equals_fold(text, i, needle) && boundary_before(text, i) &&
        boundary_after(text, i + needle.size())) {
      out.emplace_back(i, i + needle.size());
      i += needle.size();
    } else {
      ++i;
    }
  }
  return out;
}

WordReplacement replace_word_all(std::string_view text, std::string_view from,
                                 std::string_view to) {
  WordReplacement result;
  auto matches = find_word_matches(text, from);
  result.count = static_cast<int>(matches.size());
  if (matches.empty()) {
    result.text = std::string(text);
    return result;
  }
  std::string lowered = ascii_lower_copy(to);
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (auto [begin, end] : matches) {
    out.append(text.substr(cursor, begin - cursor));
    std::string piece = lowered;
    bool source_capitalized = text[begin] >= 'A' && text[begin] <= 'Z';
    if (source_capitalized && sentence_initial(text, begin) && !piece.empty() &&
        piece[0] >= 'a' && piece[0] <= 'z') {
      piece[0] = static_cast<char>(piece[0] - 'a' + 'A');
    }
    out.append(piece);
    cursor = end;
  }
  out.append(text.substr(cursor));
  result.text = std::move(out);
  return result;
}

}  // namespace modaudit
