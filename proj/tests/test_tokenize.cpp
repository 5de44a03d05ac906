#include <doctest.h>

#include <string>
#include <vector>

#include "modaudit/text.hpp"
#include "modaudit/tokenize.hpp"
#include "test_util.hpp"

using namespace modaudit;

namespace {

WordPieceVocab tiny_vocab() {
  return WordPieceVocab::from_pieces({"being", "gay", "is", "fun", "un", "##fa",
                                      "##vor", "##able", "a", "b", "c", ".",
                                      ",", "?", "!"});
}

std::vector<std::string> tokens_of(const WordPieceVocab& v,
                                   const std::string& text) {
  return tokenize(v, text).tokens;
}

}  // namespace

TEST_SUITE("tokenize") {
  TEST_CASE("the shipped vocabulary covers the corpus") {
    WordPieceVocab vocab =
        WordPieceVocab::load(testutil::data_dir() / "wordpiece_vocab.txt");
    CHECK(vocab.size() > 100);
    CHECK(vocab.contains("gay"));
    CHECK(vocab.contains("##able"));
    CHECK_FALSE(vocab.contains("zzznotaword"));
    CHECK_THROWS_AS(
        WordPieceVocab::load(testutil::data_dir() / "no_such_vocab.txt"), Error);

    TokenSequence seq = tokenize(vocab, "The unfavorable forecast held.");
    CHECK(seq.tokens == std::vector<std::string>{"the", "un", "##fa", "##vor",
                                                 "##able", "forecast", "held",
                                                 "."});
  }

  TEST_CASE("whole words, subwords and offsets") {
    TokenSequence seq = tokenize(tiny_vocab(), "Being unfavorable is fun.", "x1");
    CHECK(seq.source_id == "x1");
    CHECK(seq.tokens == std::vector<std::string>{"being", "un", "##fa", "##vor",
                                                 "##able", "is", "fun", "."});
    REQUIRE(seq.offsets.size() == seq.tokens.size());
    // Every offset pair slices the original text to the piece it named.
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      auto [b, e] = seq.offsets[i];
      std::string surface =
          ascii_lower_copy(seq.source_text.substr(b, e - b));
      std::string piece = seq.tokens[i];
      if (piece.rfind("##", 0) == 0) piece = piece.substr(2);
      CHECK(surface == piece);
    }
    // Offsets never overlap and never run backwards.
    for (std::size_t i = 1; i < seq.offsets.size(); ++i) {
      CHECK(seq.offsets[i - 1].second <= seq.offsets[i].first);
    }
  }

  TEST_CASE("unmatchable words collapse to a single unknown token") {
    TokenSequence seq = tokenize(tiny_vocab(), "Being xqzt is fun");
    CHECK(seq.tokens == std::vector<std::string>{"being", std::string(kUnknownToken),
                                                 "is", "fun"});
    auto [b, e] = seq.offsets[1];
    CHECK(seq.source_text.substr(b, e - b) == "xqzt");
  }

  TEST_CASE("punctuation stands alone") {
    TokenSequence seq = tokenize(tiny_vocab(), "fun,fun?gay!");
    CHECK(seq.tokens ==
          std::vector<std::string>{"fun", ",", "fun", "?", "gay", "!"});
  }

  TEST_CASE("empty and whitespace-only inputs produce no tokens") {
    CHECK(tokenize(tiny_vocab(), "").tokens.empty());
    CHECK(tokenize(tiny_vocab(), "  \t\n ").tokens.empty());
  }

  TEST_CASE("masking splices over exact byte ranges") {
    TokenSequence seq = tokenize(tiny_vocab(), "Being gay is fun.");
    REQUIRE(seq.tokens ==
            std::vector<std::string>{"being", "gay", "is", "fun", "."});

    // All kept: the original bytes, casing included.
    std::uint64_t all = (1ull << seq.tokens.size()) - 1;
    CHECK(render_masked(seq, all) == "Being gay is fun.");

    // Drop only "gay" (token index 1).
    std::uint64_t no_gay = all & ~(1ull << 1);
    CHECK(render_masked(seq, no_gay) == "Being [MASK] is fun.");

    // Drop everything.
    CHECK(render_masked(seq, 0) == "[MASK] [MASK] [MASK] [MASK][MASK]");

    // Custom mask token.
    CHECK(render_masked(seq, no_gay, "_") == "Being _ is fun.");
  }

  TEST_CASE("masking a continuation piece keeps its neighbors' bytes") {
    TokenSequence seq = tokenize(tiny_vocab(), "unfavorable");
    REQUIRE(seq.tokens ==
            std::vector<std::string>{"un", "##fa", "##vor", "##able"});
    CHECK(render_masked(seq, 0b0111) == "unfavor[MASK]");
    CHECK(render_masked(seq, 0b1110) == "[MASK]favorable");
    CHECK(render_masked(seq, 0b1001) == "un[MASK][MASK]able");
  }

  TEST_CASE("the two mask overloads agree, and the long form scales past 64") {
    TokenSequence seq = tokenize(tiny_vocab(), "Being gay is fun.");
    std::uint64_t mask = 0b01101;
    std::vector<char> keep;
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      keep.push_back((mask >> i) & 1 ? 1 : 0);
    }
    CHECK(render_masked(seq, mask) == render_masked(seq, keep));

    // 70 single-letter words overflow a 64-bit mask; the vector form works.
    std::string long_text;
    for (int i = 0; i < 70; ++i) {
      if (i) long_text += ' ';
      long_text += (i % 2 ? 'a' : 'b');
    }
    TokenSequence long_seq = tokenize(tiny_vocab(), long_text);
    REQUIRE(long_seq.tokens.size() == 70);
    std::vector<char> keep_all(70, 1);
    CHECK(render_masked(long_seq, keep_all) == long_text);
    std::vector<char> drop_first(70, 1);
    drop_first[0] = 0;
    std::string masked = render_masked(long_seq, drop_first);
    CHECK(masked.substr(0, 6) == "[MASK]");
    CHECK(masked.size() == long_text.size() + 5);
  }

  TEST_CASE("mask insertion keeps word boundaries for neighbors") {
    // A masked middle word must not fuse the surrounding words together:
    // the mask token's brackets are non-word bytes.
    TokenSequence seq = tokenize(tiny_vocab(), "Being gay is fun.");
    std::string masked = render_masked(seq, ~0ull & ~(1ull << 2));  // mask "is"
    CHECK(masked == "Being gay [MASK] fun.");
    CHECK(find_word_matches(masked, "gay").size() == 1);
    CHECK(find_word_matches(masked, "fun").size() == 1);
  }
}
