// Acceptance gate: ten end-to-end checks, one line of output each.
// Every check runs offline against the deterministic mock provider; the
// binary exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "modaudit/coding.hpp"
#include "modaudit/corpus.hpp"
#include "modaudit/csv.hpp"
#include "modaudit/errors.hpp"
#include "modaudit/metrics.hpp"
#include "modaudit/providers.hpp"
#include "modaudit/psa.hpp"
#include "modaudit/rng.hpp"
#include "modaudit/scheduler.hpp"
#include "modaudit/shapley.hpp"
#include "modaudit/text.hpp"
#include "modaudit/tokenize.hpp"

#include "../test_util.hpp"

namespace {

using namespace modaudit;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// ---------------------------------------------------------------------------
// Criterion 1: fast ROC AUC against the quadratic all-pairs oracle.

double brute_force_auc(const std::vector<ScoredExample>& v) {
  double wins = 0.0;
  std::size_t pos = 0, neg = 0;
  for (const ScoredExample& p : v) {
    if (p.gold_label != 1) continue;
    ++pos;
    for (const ScoredExample& q : v) {
      if (q.gold_label != 0) continue;
      if (p.score > q.score) {
        wins += 1.0;
      } else if (p.score == q.score) {
        wins += 0.5;
      }
    }
  }
  for (const ScoredExample& q : v) {
    if (q.gold_label == 0) ++neg;
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

Outcome criterion_auc_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0xA11C0DE1ULL);
  double max_dev = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.bounded(199);  // 2..200
    const std::uint64_t denom = 1 + rng.bounded(12);  // coarse grids force ties
    std::vector<ScoredExample> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i].id = "e" + std::to_string(i);
      v[i].gold_label = i == 0 ? 1 : (i == 1 ? 0 : static_cast<int>(rng.bounded(2)));
      v[i].score = static_cast<double>(rng.bounded(denom + 1)) /
                   static_cast<double>(denom);
    }
    const double fast = roc_auc(v);
    const double slow = brute_force_auc(v);
    max_dev = std::max(max_dev, std::abs(fast - slow));
    if (std::abs(fast - slow) > 1e-12) {
      return {false, "trial " + std::to_string(trial) + " deviates by " +
                         fmt(std::abs(fast - slow))};
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    return {false, "took " + fmt(elapsed) + " s (budget 5 s)"};
  }
  return {true, "500 instances, max deviation " + fmt(max_dev) + ", " +
                    fmt(elapsed) + " s"};
}

// ---------------------------------------------------------------------------
// Criterion 2: subgroup-pinned AUC. When the group covers the whole dataset
// the estimate must equal the aggregate AUC bit-for-bit with zero spread;
// when the group's score/label distribution matches the background exactly
// (two identical copies, one tagged), the estimate must sit within three
// standard errors of the aggregate in at least 95 of 100 seeded trials.

Outcome criterion_pinned_auc() {
  Rng rng(0xB0BACAFEULL);

  // Degenerate case: every example carries the group tag.
  std::vector<ScoredExample> whole(60);
  for (std::size_t i = 0; i < whole.size(); ++i) {
    whole[i].id = "w" + std::to_string(i);
    whole[i].gold_label = i % 2 == 0 ? 1 : 0;
    whole[i].score = static_cast<double>(rng.bounded(7)) / 6.0;
    whole[i].groups = {"g"};
  }
  const double whole_auc = roc_auc(whole);
  PinnedAucEstimate noop = pinned_auc(whole, "g", 20, 0x5EED0001ULL);
  if (noop.mean_auc != whole_auc) {
    return {false, "whole-dataset group: pinned " + fmt(noop.mean_auc) +
                       " != aggregate " + fmt(whole_auc)};
  }
  if (!noop.std_error || *noop.std_error != 0.0) {
    return {false, "whole-dataset group: expected zero standard error"};
  }

  // Identical-distribution case: copy A (tagged) + copy B (untagged) of one
  // multiset, so the aggregate AUC equals the group slice's AUC exactly.
  std::vector<ScoredExample> dup;
  for (std::size_t i = 0; i < 50; ++i) {
    ScoredExample ex;
    ex.gold_label =
        i == 0 ? 1 : (i == 1 ? 0 : static_cast<int>(rng.bounded(2)));
    ex.score =
        static_cast<double>(rng.bounded(13)) / 12.0;
    ex.id = "a" + std::to_string(i);
    ex.groups = {"g"};
    dup.push_back(ex);
    ex.id = "b" + std::to_string(i);
    ex.groups = {};
    dup.push_back(ex);
  }
  const double aggregate = roc_auc(dup);

  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    PinnedAucEstimate est = pinned_auc(dup, "g", 20, seed);
    const double se = est.std_error.value_or(0.0);
    if (std::abs(est.mean_auc - aggregate) <= 3.0 * se) ++hits;
  }
  if (hits < 95) {
    return {false, "only " + std::to_string(hits) +
                       "/100 trials within 3 standard errors"};
  }
  return {true, "degenerate case exact, " + std::to_string(hits) +
                    "/100 matched-distribution trials within 3 SE"};
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4: Shapley attribution. Score functions are arbitrary
// tables over the kept-token subset, decoded from the masked text by
// word-boundary matching, so the attribution engine is treated as a black
// box end to end (tokenize -> mask -> score).

const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> pool = {
      "alpha", "bravo", "charlie", "delta", "echo",
      "foxtrot", "golf", "hotel", "india", "juliet"};
  return pool;
}

const WordPieceVocab& pool_vocab() {
  static const WordPieceVocab vocab = WordPieceVocab::from_pieces(word_pool());
  return vocab;
}

TokenSequence pool_sequence(std::size_t n) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    if (!text.empty()) text += ' ';
    text += word_pool()[i];
  }
  return tokenize(pool_vocab(), text, "probe");
}

ScoreFn table_fn(std::size_t n, std::vector<double> table) {
  return [n, table = std::move(table)](const std::string& text) {
    std::size_t mask = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!find_word_matches(text, word_pool()[i]).empty()) {
        mask |= std::size_t{1} << i;
      }
    }
    return table[mask];
  };
}

Outcome criterion_shapley_axioms() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0xC0FFEE03ULL);
  double worst_eff = 0.0, worst_dummy = 0.0, worst_sym = 0.0;

  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.bounded(9);  // 2..10
    const TokenSequence seq = pool_sequence(n);
    std::vector<double> table(std::size_t{1} << n);
    for (double& v : table) v = rng.unit();

    // Efficiency: values sum to full minus baseline.
    TokenAttribution eff = shap_exact(table_fn(n, table), seq);
    double sum = 0.0;
    for (double s : eff.shapley) sum += s;
    const double eff_dev = std::abs(sum - (eff.full_value - eff.base_value));
    worst_eff = std::max(worst_eff, eff_dev);
    if (eff_dev > 1e-9) {
      return {false, "efficiency violated by " + fmt(eff_dev)};
    }

    // Dummy: a token the function ignores gets exactly zero credit.
    const std::size_t d = rng.bounded(n);
    std::vector<double> dummy_table(table.size());
    for (std::size_t s = 0; s < table.size(); ++s) {
      dummy_table[s] = table[s & ~(std::size_t{1} << d)];
    }
    TokenAttribution dm = shap_exact(table_fn(n, dummy_table), seq);
    worst_dummy = std::max(worst_dummy, std::abs(dm.shapley[d]));
    if (std::abs(dm.shapley[d]) > 1e-12) {
      return {false, "dummy token credited " + fmt(dm.shapley[d])};
    }

    // Symmetry: interchangeable tokens receive equal credit.
    const std::size_t i = rng.bounded(n);
    std::size_t j = rng.bounded(n - 1);
    if (j >= i) ++j;
    const std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
    const double c1 = rng.unit(), c2 = rng.unit();
    std::vector<double> sym_table(table.size());
    for (std::size_t s = 0; s < table.size(); ++s) {
      const std::size_t rest = s & ~(bi | bj);
      const int both = static_cast<int>(std::popcount(s & (bi | bj)));
      sym_table[s] = table[rest] + (both >= 1 ? c1 : 0.0) + (both == 2 ? c2 : 0.0);
    }
    TokenAttribution sym = shap_exact(table_fn(n, sym_table), seq);
    const double sym_dev = std::abs(sym.shapley[i] - sym.shapley[j]);
    worst_sym = std::max(worst_sym, sym_dev);
    if (sym_dev > 1e-12) {
      return {false, "symmetry violated by " + fmt(sym_dev)};
    }
  }

  // Additive lexicon: each occurrence's credit is exactly its weight.
  MockLexicon lex{0.1, {{"alpha", 0.2}, {"charlie", 0.05}, {"echo", 0.15}}};
  const std::string text = "alpha bravo charlie alpha echo";
  const TokenSequence seq = tokenize(pool_vocab(), text, "additive");
  TokenAttribution attr = shap_exact(
      [&](const std::string& t) { return mock_score_value(lex, t); }, seq);
  const std::vector<double> expected = {0.2, 0.0, 0.05, 0.2, 0.15};
  if (attr.shapley.size() != expected.size()) {
    return {false, "additive case produced " +
                       std::to_string(attr.shapley.size()) + " values"};
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (std::abs(attr.shapley[k] - expected[k]) > 1e-12) {
      return {false, "additive weight " + std::to_string(k) + " off by " +
                         fmt(std::abs(attr.shapley[k] - expected[k]))};
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 30.0) {
    return {false, "took " + fmt(elapsed) + " s (budget 30 s)"};
  }
  return {true, "200 fuzzed functions; worst efficiency " + fmt(worst_eff) +
                    ", dummy " + fmt(worst_dummy) + ", symmetry " +
                    fmt(worst_sym) + "; additive weights recovered; " +
                    fmt(elapsed) + " s"};
}

Outcome criterion_sampled_convergence() {
  Rng rng(0xD1CE0004ULL);
  const std::size_t n = 8;
  const TokenSequence seq = pool_sequence(n);
  int within = 0, total = 0;
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<double> table(std::size_t{1} << n);
    for (double& v : table) v = rng.unit();
    const ScoreFn fn = table_fn(n, table);
    TokenAttribution exact = shap_exact(fn, seq);
    TokenAttribution est = shap_sampled(
        fn, seq, 1000, derive_seed(0xFEEDBEEFULL, "c4:" + std::to_string(inst)));
    for (std::size_t i = 0; i < n; ++i) {
      ++total;
      const double dev = std::abs(est.shapley[i] - exact.shapley[i]);
      if (dev <= 3.0 * est.std_errors[i]) ++within;
    }
  }
  const double frac = static_cast<double>(within) / static_cast<double>(total);
  if (frac < 0.99) {
    return {false, std::to_string(within) + "/" + std::to_string(total) +
                       " token estimates within 3 reported SE"};
  }
  return {true, std::to_string(within) + "/" + std::to_string(total) +
                    " token estimates within 3 reported SE"};
}

// ---------------------------------------------------------------------------
// Criterion 5: counterfactual token gap. A worked fixture (0.21 vs 0.33
// must yield exactly +0.12), score antisymmetry under swapping the two
// sides, and replacement involution (swap forward then backward restores
// the sentence byte for byte).

ScoredPair make_scored_pair(const std::string& id, const std::string& group,
                            int gold, double marginalized, double dominant) {
  ScoredPair sp;
  sp.pair.pair_id = id;
  sp.pair.source_id = id;
  sp.pair.group = group;
  sp.pair.token_pair = {group, "x", "y"};
  sp.pair.marginalized_text = "m";
  sp.pair.dominant_text = "d";
  sp.pair.gold_label = gold;
  sp.pair.occurrences = 1;
  sp.marginalized_score = marginalized;
  sp.dominant_score = dominant;
  return sp;
}

Outcome criterion_counterfactual_gap() {
  // Worked fixture through the real generation pipeline.
  GroupRegistry registry = GroupRegistry::from_ids({"asian"});
  Corpus corpus({{"t1", "Being Asian is fun", 0, {}, {"asian"}, "probe"}},
                registry);
  const std::vector<TokenPair> table = {{"asian", "asian", "white"}};
  CounterfactualSet set = generate_counterfactuals(corpus, table);
  if (set.pairs.size() != 1) {
    return {false, "fixture produced " + std::to_string(set.pairs.size()) +
                       " pairs, expected 1"};
  }
  ScoredPair fixture{set.pairs[0], 0.21, 0.33};
  CtfResult worked = ctf_scores(std::span<const ScoredPair>(&fixture, 1),
                                "asian", LabelSlice::non_toxic, "fixture");
  if (worked.n != 1 || worked.mean_ctf != 0.33 - 0.21 ||
      std::abs(worked.mean_ctf - 0.12) > 1e-12) {
    return {false, "fixture gap " + fmt(worked.mean_ctf) + " != +0.12"};
  }

  // Antisymmetry on 1000 fuzzed pairs (100 slices of 10).
  Rng rng(0xFACE0005ULL);
  for (int s = 0; s < 100; ++s) {
    std::vector<ScoredPair> fwd, rev;
    for (int k = 0; k < 10; ++k) {
      const double m = rng.unit(), d = rng.unit();
      const std::string id = "p" + std::to_string(s) + "_" + std::to_string(k);
      fwd.push_back(make_scored_pair(id, "g", 0, m, d));
      rev.push_back(make_scored_pair(id, "g", 0, d, m));
    }
    CtfResult a = ctf_scores(fwd, "g", LabelSlice::non_toxic, "p");
    CtfResult b = ctf_scores(rev, "g", LabelSlice::non_toxic, "p");
    if (std::abs(a.mean_ctf + b.mean_ctf) > 1e-12) {
      return {false, "antisymmetry violated in slice " + std::to_string(s)};
    }
    if (a.ci_low && (std::abs(*a.ci_low + *b.ci_high) > 1e-9 ||
                     std::abs(*a.ci_high + *b.ci_low) > 1e-9)) {
      return {false, "interval antisymmetry violated in slice " +
                         std::to_string(s)};
    }
  }

  // Involution on 1000 fuzzed sentences.
  const std::vector<std::pair<std::string, std::string>> swaps = {
      {"gay", "straight"},   {"woman", "man"},    {"jewish", "christian"},
      {"asian", "white"},    {"muslim", "atheist"}, {"immigrant", "citizen"}};
  const std::vector<std::string> fillers = {
      "the",    "festival", "music",  "played", "bright", "tonight",
      "crowd",  "cheered",  "river",  "walked", "home",   "quiet",
      "lights", "glowed",   "gently", "nearby"};
  GroupRegistry greg = GroupRegistry::from_ids({"g"});
  for (int t = 0; t < 1000; ++t) {
    const auto& swap = swaps[rng.bounded(swaps.size())];
    const std::size_t words = 3 + rng.bounded(8);
    std::vector<std::string> parts;
    for (std::size_t k = 0; k < words; ++k) {
      parts.push_back(fillers[rng.bounded(fillers.size())]);
    }
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(
                                     rng.bounded(parts.size() + 1)),
                 swap.first);
    parts[0][0] = static_cast<char>(std::toupper(
        static_cast<unsigned char>(parts[0][0])));
    std::string sentence;
    for (const std::string& w : parts) {
      if (!sentence.empty()) sentence += ' ';
      sentence += w;
    }
    sentence += '.';

    const int gold = static_cast<int>(rng.bounded(2));
    Corpus fwd_corpus({{"f1", sentence, gold, {}, {"g"}, "probe"}}, greg);
    CounterfactualSet fwd = generate_counterfactuals(
        fwd_corpus, {{"g", swap.first, swap.second}});
    if (fwd.pairs.size() != 1 || fwd.pairs[0].occurrences != 1) {
      return {false, "forward swap failed on: " + sentence};
    }
    Corpus bwd_corpus(
        {{"b1", fwd.pairs[0].dominant_text, gold, {}, {"g"}, "probe"}}, greg);
    CounterfactualSet bwd = generate_counterfactuals(
        bwd_corpus, {{"g", swap.second, swap.first}});
    if (bwd.pairs.size() != 1 || bwd.pairs[0].dominant_text != sentence ||
        bwd.pairs[0].occurrences != 1) {
      return {false, "involution failed on: " + sentence};
    }
  }
  return {true, "fixture gap +0.12 exact; antisymmetry on 1000 pairs; "
                "involution on 1000 sentences"};
}

// ---------------------------------------------------------------------------
// Criterion 6: full audit of the bundled corpus through the CLI. The mock
// weights inject a +0.3 bias on one identity token; the report must surface
// it in the group FPR gap, the counterfactual gap, and the top attribution
// cluster, and two runs must be byte-identical.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable load_table(const std::filesystem::path& path) {
  auto records = csv::parse_file(path.string());
  if (records.empty()) throw Error("empty table: " + path.string());
  CsvTable t;
  t.header = records.front();
  t.rows.assign(records.begin() + 1, records.end());
  return t;
}

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw Error("missing column " + name);
}

int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome criterion_end_to_end_audit() {
  const std::filesystem::path cli = testutil::env_dir("MODAUDIT_CLI");
  const std::filesystem::path manifest =
      testutil::data_dir() / "manifests" / "mock_audit.toml";

  testutil::TempDir scratch("acceptance_e2e");
  const auto run = [&](const std::string& tag) {
    const std::filesystem::path out = scratch.path() / (tag + "_out");
    const std::string cmd = "\"" + cli.string() + "\" report --manifest \"" +
                            manifest.string() + "\" --out \"" + out.string() +
                            "\" --cache-dir \"" +
                            (scratch.path() / (tag + "_cache")).string() +
                            "\" > \"" +
                            (scratch.path() / (tag + ".log")).string() +
                            "\" 2>&1";
    return std::make_pair(run_command(cmd), out);
  };

  const auto start = std::chrono::steady_clock::now();
  auto [status1, out1] = run("first");
  const double elapsed = seconds_since(start);
  if (status1 != 0) {
    return {false, "audit command exited " + std::to_string(status1) +
                       " (log: " +
                       testutil::read_file(scratch.path() / "first.log")
                           .substr(0, 400) +
                       ")"};
  }
  if (elapsed >= 60.0) {
    return {false, "audit took " + fmt(elapsed) + " s (budget 60 s)"};
  }

  // (a) the tagged group's false-positive rate exceeds the aggregate's.
  CsvTable metrics = load_table(out1 / "metrics.csv");
  const std::size_t slice_col = column(metrics, "slice");
  const std::size_t fpr_col = column(metrics, "fpr");
  std::optional<double> agg_fpr, group_fpr;
  for (const auto& row : metrics.rows) {
    if (row[slice_col] == "aggregate") agg_fpr = std::strtod(row[fpr_col].c_str(), nullptr);
    if (row[slice_col] == "lgbtqia") group_fpr = std::strtod(row[fpr_col].c_str(), nullptr);
  }
  if (!agg_fpr || !group_fpr || !(*group_fpr - *agg_fpr > 0.0)) {
    return {false, "group FPR gap not positive (group " +
                       fmt(group_fpr.value_or(-1)) + ", aggregate " +
                       fmt(agg_fpr.value_or(-1)) + ")"};
  }

  CsvTable gaps = load_table(out1 / "eo_gaps.csv");
  const std::size_t gap_group_col = column(gaps, "group");
  const std::size_t fpr_gap_col = column(gaps, "fpr_gap");
  bool gap_positive = false;
  for (const auto& row : gaps.rows) {
    if (row[gap_group_col] == "lgbtqia" && !row[fpr_gap_col].empty() &&
        std::strtod(row[fpr_gap_col].c_str(), nullptr) > 0.0) {
      gap_positive = true;
    }
  }
  if (!gap_positive) {
    return {false, "equality-of-odds table shows no positive FPR gap"};
  }

  // (b) counterfactual gap for the tagged group is the injected -0.3.
  CsvTable ctf = load_table(out1 / "ctf_report.csv");
  const std::size_t ctf_group_col = column(ctf, "group");
  const std::size_t mean_col = column(ctf, "mean_ctf");
  std::size_t group_rows = 0;
  for (const auto& row : ctf.rows) {
    if (row[ctf_group_col] != "lgbtqia") continue;
    ++group_rows;
    const double mean = std::strtod(row[mean_col].c_str(), nullptr);
    if (std::abs(mean - (-0.3)) > 1e-12) {
      return {false, "counterfactual gap " + fmt(mean) + " != -0.3"};
    }
  }
  if (group_rows == 0) {
    return {false, "no counterfactual rows for the tagged group"};
  }

  // (c) the top false-positive attribution cluster names the biased token.
  CsvTable shap = load_table(out1 / "global_shap.csv");
  const std::size_t kind_col = column(shap, "kind");
  const std::size_t rank_col = column(shap, "rank");
  const std::size_t members_col = column(shap, "members");
  bool top_cluster_has_token = false;
  for (const auto& row : shap.rows) {
    if (row[kind_col] == "fp" && row[rank_col] == "1" &&
        !find_word_matches(row[members_col], "gay").empty()) {
      top_cluster_has_token = true;
    }
  }
  if (!top_cluster_has_token) {
    return {false, "top false-positive cluster does not contain the biased token"};
  }

  // Determinism: an independent second run produces identical bytes.
  auto [status2, out2] = run("second");
  if (status2 != 0) {
    return {false, "second audit run exited " + std::to_string(status2)};
  }
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(out1)) {
    if (!entry.is_regular_file()) continue;
    const std::filesystem::path twin = out2 / entry.path().filename();
    if (!std::filesystem::exists(twin) ||
        testutil::read_file(entry.path()) != testutil::read_file(twin)) {
      return {false, "runs differ in " + entry.path().filename().string()};
    }
    ++compared;
  }
  std::size_t second_count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(out2)) {
    if (entry.is_regular_file()) ++second_count;
  }
  if (compared == 0 || compared != second_count) {
    return {false, "artifact sets differ between runs"};
  }
  return {true, "bias surfaced in FPR gap, counterfactual gap, and top "
                "cluster; " +
                    std::to_string(compared) + " artifacts byte-identical; " +
                    fmt(elapsed) + " s"};
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: scheduling. A transport that stamps each send with the
// virtual clock proves the issue-rate bound; a sink that aborts mid-job
// proves resume accounting.

struct TimedTransport final : Transport {
  Clock* clock;
  std::vector<double>* times;
  WireReply send(const WireRequest&) override {
    times->push_back(clock->now());
    return {200, "{\"toxicity\":0.5}", {}};
  }
};

ProviderSpec mock_spec() {
  ProviderSpec spec;
  spec.id = "mock";
  spec.display_name = "Offline mock";
  spec.rate_limit = 500.0;
  spec.category_names = {"toxicity"};
  return spec;
}

std::vector<std::pair<std::string, std::string>> numbered_items(int count) {
  std::vector<std::pair<std::string, std::string>> items;
  for (int k = 0; k < count; ++k) {
    std::string text = "probe sentence w" + std::to_string(k);
    if (k % 3 == 0) text += " bad";
    items.emplace_back("i" + std::to_string(k), text);
  }
  return items;
}

std::size_t max_grants_per_window(const std::vector<double>& times) {
  std::size_t worst = 0;
  for (double anchor : times) {
    std::size_t count = 0;
    for (double t : times) {
      if (t >= anchor && t < anchor + 1.0) ++count;
    }
    worst = std::max(worst, count);
  }
  return worst;
}

Outcome criterion_rate_limiter() {
  const auto run_at = [](double rate) {
    testutil::TempDir scratch("acceptance_rate");
    SimulatedClock clock;
    std::vector<double> times;
    TimedTransport transport;
    transport.clock = &clock;
    transport.times = &times;

    QueryJob job;
    job.provider_id = "mock";
    job.items = numbered_items(100);
    job.rate_override = rate;
    job.cache_dir = scratch.path();
    RunStats stats = run_job(job, mock_spec(), clock, transport, RunOptions{},
                             [](const ItemOutcome&) {});
    return std::make_tuple(times, clock.now(), stats.network_calls);
  };

  auto [slow_times, slow_end, slow_calls] = run_at(1.0);
  if (slow_calls != 100 || slow_times.size() != 100) {
    return {false, "1 q/s job made " + std::to_string(slow_calls) + " calls"};
  }
  const std::size_t slow_window = max_grants_per_window(slow_times);
  if (slow_window > 1) {
    return {false, "1 q/s job issued " + std::to_string(slow_window) +
                       " calls inside one second"};
  }
  if (slow_end < 99.0) {
    return {false, "1 q/s job finished in " + fmt(slow_end) +
                       " simulated seconds (< 99)"};
  }

  auto [fast_times, fast_end, fast_calls] = run_at(25.0);
  (void)fast_end;
  if (fast_calls != 100) {
    return {false, "25 q/s job made " + std::to_string(fast_calls) + " calls"};
  }
  const std::size_t fast_window = max_grants_per_window(fast_times);
  if (fast_window > 25) {
    return {false, "25 q/s job issued " + std::to_string(fast_window) +
                       " calls inside one second"};
  }
  return {true, "1 q/s: max " + std::to_string(slow_window) +
                    "/window over " + fmt(slow_end) + " simulated s; 25 q/s: max " +
                    std::to_string(fast_window) + "/window"};
}

struct SinkAbort {};

Outcome criterion_resume() {
  const MockLexicon lexicon{0.2, {{"bad", 0.5}}};
  const auto items = numbered_items(100);
  const ProviderSpec spec = mock_spec();

  using Output = std::vector<std::pair<std::string, double>>;
  const auto score_of = [](const ItemOutcome& o) {
    return o.response->category_scores.at("toxicity");
  };

  // Uninterrupted reference run.
  testutil::TempDir ref_dir("acceptance_ref");
  SimulatedClock ref_clock;
  MockTransport ref_transport(lexicon);
  Output reference;
  QueryJob ref_job{"mock", items, std::nullopt, ref_dir.path()};
  run_job(ref_job, spec, ref_clock, ref_transport, RunOptions{},
          [&](const ItemOutcome& o) {
            reference.emplace_back(o.id, score_of(o));
          });
  if (ref_transport.calls() != 100) {
    return {false, "reference run made " +
                       std::to_string(ref_transport.calls()) + " calls"};
  }

  const auto interrupted_then_resumed =
      [&](int scripted_failures) -> std::pair<std::string, bool> {
    testutil::TempDir dir("acceptance_resume");
    QueryJob job{"mock", items, std::nullopt, dir.path()};

    // First attempt dies after the 40th item completes.
    SimulatedClock clock1;
    MockTransport transport1(lexicon);
    int delivered = 0;
    bool aborted = false;
    try {
      run_job(job, spec, clock1, transport1, RunOptions{},
              [&](const ItemOutcome&) {
                if (++delivered == 40) throw SinkAbort{};
              });
    } catch (const SinkAbort&) {
      aborted = true;
    }
    if (!aborted || transport1.calls() != 40) {
      return {"interrupted run made " + std::to_string(transport1.calls()) +
                  " calls before dying",
              false};
    }

    // Second attempt picks up from the response cache.
    SimulatedClock clock2;
    MockTransport transport2(lexicon);
    if (scripted_failures > 0) transport2.script_failures(scripted_failures, 503);
    Output resumed;
    RunStats stats =
        run_job(job, spec, clock2, transport2, RunOptions{},
                [&](const ItemOutcome& o) {
                  resumed.emplace_back(o.id, score_of(o));
                });
    const std::size_t expected_calls =
        60 + static_cast<std::size_t>(scripted_failures);
    if (transport2.calls() != expected_calls) {
      return {"resume made " + std::to_string(transport2.calls()) +
                  " transport calls, expected " +
                  std::to_string(expected_calls),
              false};
    }
    if (stats.from_cache != 40) {
      return {"resume served " + std::to_string(stats.from_cache) +
                  " items from cache, expected 40",
              false};
    }
    if (resumed != reference) {
      return {"resumed outputs differ from the uninterrupted run", false};
    }
    return {"", true};
  };

  auto [plain_err, plain_ok] = interrupted_then_resumed(0);
  if (!plain_ok) return {false, plain_err};
  auto [retry_err, retry_ok] = interrupted_then_resumed(3);
  if (!retry_ok) return {false, retry_err + " (with scripted retries)"};
  return {true, "40-item interruption resumed with exactly 60 fresh calls "
                "(63 with three scripted retries); outputs identical"};
}

// ---------------------------------------------------------------------------
// Criterion 9: chance-corrected agreement.

Outcome criterion_kappa() {
  std::vector<std::string> a, b;
  const auto add = [&](int count, const char* ra, const char* rb) {
    for (int i = 0; i < count; ++i) {
      a.push_back(ra);
      b.push_back(rb);
    }
  };
  add(20, "A", "A");
  add(5, "A", "B");
  add(10, "B", "A");
  add(15, "B", "B");
  std::optional<double> k = cohens_kappa(a, b, {});
  if (!k || std::abs(*k - 0.40) > 1e-12) {
    return {false, "hand table gave kappa " + (k ? fmt(*k) : "undefined")};
  }

  std::vector<std::string> same = {"CS", "RE", "CS", "NE", "RE", "CS"};
  std::optional<double> perfect = cohens_kappa(same, same);
  if (!perfect || *perfect != 1.0) {
    return {false, "perfect agreement scored " +
                       (perfect ? fmt(*perfect) : "undefined")};
  }

  // Exclusion: any pair with UNSURE on either side drops out, so the result
  // must equal the clean subset's kappa computed directly.
  std::vector<std::string> xa = {"CS", "CS", "CS", "CS", "CS", "RE", "RE",
                                 "UNSURE", "RE", "UNSURE"};
  std::vector<std::string> xb = {"CS", "CS", "CS", "CS", "RE", "CS", "RE",
                                 "CS", "UNSURE", "UNSURE"};
  std::vector<std::string> clean_a(xa.begin(), xa.begin() + 7);
  std::vector<std::string> clean_b(xb.begin(), xb.begin() + 7);
  std::optional<double> with_unsure = cohens_kappa(xa, xb);
  std::optional<double> clean = cohens_kappa(clean_a, clean_b, {});
  if (!with_unsure || !clean || *with_unsure != *clean ||
      std::abs(*with_unsure - 0.3) > 1e-12) {
    return {false, "exclusion rule: got " +
                       (with_unsure ? fmt(*with_unsure) : "undefined") +
                       ", clean subset " + (clean ? fmt(*clean) : "undefined")};
  }
  bool empty_raised = false;
  try {
    cohens_kappa({"UNSURE", "UNSURE"}, {"CS", "UNSURE"});
  } catch (const EmptyAfterExclusion&) {
    empty_raised = true;
  }
  if (!empty_raised) {
    return {false, "all-excluded input did not raise the empty error"};
  }
  return {true, "hand table 0.40, perfect 1.0, exclusion drops 3 of 10 pairs"};
}

// ---------------------------------------------------------------------------
// Criterion 10: threshold metric identities and undefined markers.

Outcome criterion_metric_identities() {
  Rng rng(0x1DE27770ULL);
  int no_positives = 0, no_negatives = 0, f1_undefined = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ConfusionCounts c;
    c.tp = rng.bounded(6);
    c.fp = rng.bounded(6);
    c.tn = rng.bounded(6);
    c.fn = rng.bounded(6);
    const ThresholdMetrics m = threshold_metrics(c);
    const double total = static_cast<double>(c.total());
    const double pos = static_cast<double>(c.tp + c.fn);
    const double neg = static_cast<double>(c.fp + c.tn);

    // Defined exactly when the denominator is nonzero -- never a number
    // standing in for an undefined ratio.
    if (m.tpr.has_value() != (pos > 0) || m.fnr.has_value() != (pos > 0)) {
      return {false, "recall markers wrong at trial " + std::to_string(trial)};
    }
    if (m.fpr.has_value() != (neg > 0)) {
      return {false, "fall-out marker wrong at trial " + std::to_string(trial)};
    }
    if (m.acc.has_value() != (total > 0)) {
      return {false, "accuracy marker wrong at trial " + std::to_string(trial)};
    }
    if (m.f1.has_value() != (2 * c.tp + c.fp + c.fn > 0)) {
      return {false, "f1 marker wrong at trial " + std::to_string(trial)};
    }
    if (pos == 0) ++no_positives;
    if (neg == 0) ++no_negatives;
    if (2 * c.tp + c.fp + c.fn == 0) ++f1_undefined;

    if (m.tpr && std::abs(*m.tpr + *m.fnr - 1.0) > 1e-12) {
      return {false, "tpr + fnr != 1 at trial " + std::to_string(trial)};
    }
    if (m.acc) {
      const double direct =
          (static_cast<double>(c.tp) + static_cast<double>(c.tn)) / total;
      if (std::abs(*m.acc - direct) > 1e-12) {
        return {false, "accuracy mismatch at trial " + std::to_string(trial)};
      }
      if (m.tpr && m.fpr) {
        const double decomposed =
            (*m.tpr * pos + (1.0 - *m.fpr) * neg) / total;
        if (std::abs(*m.acc - decomposed) > 1e-12) {
          return {false,
                  "accuracy decomposition fails at trial " + std::to_string(trial)};
        }
      }
    }
    if (m.f1) {
      const double direct = 2.0 * static_cast<double>(c.tp) /
                            static_cast<double>(2 * c.tp + c.fp + c.fn);
      if (std::abs(*m.f1 - direct) > 1e-12) {
        return {false, "f1 mismatch at trial " + std::to_string(trial)};
      }
    }
  }
  if (no_positives == 0 || no_negatives == 0 || f1_undefined == 0) {
    return {false, "fuzzer never produced a zero-denominator case"};
  }
  return {true, "1000 fuzzed tables; undefined cases hit " +
                    std::to_string(no_positives) + "/" +
                    std::to_string(no_negatives) + "/" +
                    std::to_string(f1_undefined) +
                    " times (no positives / no negatives / empty f1)"};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "ranking AUC equals the all-pairs oracle", criterion_auc_oracle},
      {2, "subgroup-pinned AUC is exact and unbiased", criterion_pinned_auc},
      {3, "Shapley efficiency, dummy, and symmetry axioms",
       criterion_shapley_axioms},
      {4, "sampled Shapley converges within its reported error",
       criterion_sampled_convergence},
      {5, "counterfactual gap arithmetic, antisymmetry, and involution",
       criterion_counterfactual_gap},
      {6, "end-to-end audit recovers the injected bias deterministically",
       criterion_end_to_end_audit},
      {7, "rate limiter honors the sliding one-second window",
       criterion_rate_limiter},
      {8, "interrupted jobs resume without repeating finished work",
       criterion_resume},
      {9, "inter-rater agreement arithmetic and exclusion rule",
       criterion_kappa},
      {10, "threshold metric identities and undefined markers",
       criterion_metric_identities},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("unhandled exception: ") + e.what()};
    }
    if (!outcome.ok) ++failures;
    std::printf("[%s] criterion %d: %s — %s\n", outcome.ok ? "PASS" : "FAIL",
                c.number, c.label, outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures != 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  }
  return failures == 0 ? 0 : 1;
}
