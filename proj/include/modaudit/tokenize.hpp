#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "modaudit/errors.hpp"

namespace modaudit {

inline constexpr std::string_view kUnknownToken = "[UNK]";
inline constexpr std::string_view kDefaultMaskToken = "[MASK]";

// Subword vocabulary, one piece per line; continuation pieces carry the
// "##" prefix. Lookup is on lowercased pieces.
class WordPieceVocab {
 public:
  static WordPieceVocab load(const std::filesystem::path& path);
  static WordPieceVocab from_pieces(const std::vector<std::string>& pieces);

  bool contains(std::string_view piece) const;
  std::size_t size() const { return pieces_.size(); }

 private:
  std::unordered_set<std::string> pieces_;
};

// Subword segmentation of one example. Offsets are byte ranges into the
// original (uncased) text, so splicing a mask over any subset of tokens and
// copying the bytes between them reconstructs the text exactly.
struct TokenSequence {
  std::string source_id;
  std::string source_text;
  std::vector<std::string> tokens;                        // lowercased pieces
  std::vector<std::pair<std::size_t, std::size_t>> offsets;
};

// Greedy longest-match WordPiece over whitespace- and punctuation-split
// words, lowercased (ASCII). Words with an unmatchable remainder become a
// single unknown token spanning the whole word.
TokenSequence tokenize(const WordPieceVocab& vocab, std::string_view text,
                       std::string_view source_id = "");

// Text with every token whose bit in keep_mask is 0 replaced by mask_token
// (bit i = token i). Bytes outside token ranges are preserved.
std::string render_masked(const TokenSequence& seq, std::uint64_t keep_mask,
                          std::string_view mask_token = kDefaultMaskToken);

// Same, with one keep flag per token; supports sequences past 64 tokens.
std::string render_masked(const TokenSequence& seq,
                          const std::vector<char>& keep,
                          std::string_view mask_token = kDefaultMaskToken);

}  // namespace modaudit
