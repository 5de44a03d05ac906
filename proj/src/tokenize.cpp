#include "modaudit/tokenize.hpp"

#include <fstream>
#include <functional>

#include "modaudit/text.hpp"

namespace modaudit {

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read vocabulary file " + path.string());
  WordPieceVocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vocab.pieces_.insert(ascii_lower_copy(line));
  }
  if (vocab.pieces_.empty()) {
    throw Error("vocabulary file " + path.string() + " is empty");
  }
  return vocab;
}

WordPieceVocab WordPieceVocab::from_pieces(const std::vector<std::string>& pieces) {
  WordPieceVocab vocab;
  for (const std::string& p : pieces) vocab.pieces_.insert(ascii_lower_copy(p));
  return vocab;
}

bool WordPieceVocab::contains(std::string_view piece) const {
  return pieces_.count(std::string(piece)) > 0;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// Greedy longest-match split of one lowercased word. Returns false when some
// remainder has no matching piece, in which case the word maps to [UNK].
bool wordpiece_split(const WordPieceVocab& vocab, const std::string& word,
                     std::vector<std::string>& pieces,
                     std::vector<std::pair<std::size_t, std::size_t>>& spans) {
  std::size_t start = 0;
  bool first = true;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::string match;
    while (end > start) {
      std::string candidate = word.substr(start, end - start);
      if (!first) candidate = "##" + candidate;
      if (vocab.contains(candidate)) {
        match = std::move(candidate);
        break;
      }
      --end;
    }
    if (match.empty()) return false;
    pieces.push_back(std::move(match));
    spans.emplace_back(start, end);
    start = end;
    first = false;
  }
  return true;
}

}  // namespace

TokenSequence tokenize(const WordPieceVocab& vocab, std::string_view text,
                       std::string_view source_id) {
  TokenSequence seq;
  seq.source_id = std::string(source_id);
  seq.source_text = std::string(text);

  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (is_ascii_punct(text[i])) {
      // Punctuation always stands alone, one byte per token.
      ++i;
    } else {
      while (i < text.size() && !is_space(text[i]) && !is_ascii_punct(text[i])) {
        ++i;
      }
    }
    std::string word = ascii_lower_copy(text.substr(begin, i - begin));
    std::vector<std::string> pieces;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    if (wordpiece_split(vocab, word, pieces, spans)) {
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        seq.tokens.push_back(std::move(pieces[k]));
        seq.offsets.emplace_back(begin + spans[k].first, begin + spans[k].second);
      }
    } else {
      seq.tokens.emplace_back(kUnknownToken);
      seq.offsets.emplace_back(begin, i);
    }
  }
  return seq;
}

namespace {

std::string render_with(const TokenSequence& seq,
                        const std::function<bool(std::size_t)>& kept,
                        std::string_view mask_token) {
  const std::string& text = seq.source_text;
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    auto [begin, end] = seq.offsets[i];
    out.append(text.substr(cursor, begin - cursor));
    if (kept(i)) {
      out.append(text.substr(begin, end - begin));
    } else {
      out.append(mask_token);
    }
    cursor = end;
  }
  out.append(text.substr(cursor));
  return out;
}

}  // namespace

std::string render_masked(const TokenSequence& seq, std::uint64_t keep_mask,
                          std::string_view mask_token) {
  return render_with(
      seq, [&](std::size_t i) { return (keep_mask & (1ULL << i)) != 0; },
      mask_token);
}

std::string render_masked(const TokenSequence& seq,
                          const std::vector<char>& keep,
                          std::string_view mask_token) {
  return render_with(seq, [&](std::size_t i) { return keep[i] != 0; },
                     mask_token);
}

}  // namespace modaudit
