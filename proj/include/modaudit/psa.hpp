#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modaudit/corpus.hpp"
#include "modaudit/errors.hpp"

namespace modaudit {

class PsaError : public Error {
 public:
  using Error::Error;
};

class DuplicatePair : public PsaError {
 public:
  DuplicatePair(const std::string& group, const std::string& marginalized)
      : PsaError("duplicate token pair (" + group + ", " + marginalized + ")") {}
};

class EmptyToken : public PsaError {
 public:
  explicit EmptyToken(std::size_t row)
      : PsaError("empty token in table row " + std::to_string(row)) {}
};

class EmptySlice : public PsaError {
 public:
  EmptySlice(const std::string& group, const std::string& label_slice)
      : PsaError("no counterfactual pairs for group '" + group +
                 "' in slice '" + label_slice + "'") {}
};

// One identity substitution: a marginalized-group token and the dominant
// counterpart it is exchanged with. Stored lowercase.
struct TokenPair {
  std::string group;
  std::string marginalized;
  std::string dominant;  // may be multi-word
};

// CSV columns group,marginalized,dominant; header row required.
std::vector<TokenPair> load_token_table(const std::filesystem::path& path);

// A sentence and its identity-swapped twin. The dominant text differs from
// the source only at word-boundary occurrences of the marginalized token.
struct CounterfactualPair {
  std::string pair_id;  // source id + '#' + marginalized token
  std::string source_id;
  std::string group;
  TokenPair token_pair;
  std::string marginalized_text;  // source text, unmodified
  std::string dominant_text;
  int gold_label = 0;
  int occurrences = 0;  // matches replaced
};

// Sentence skipped because its identity tokens span several groups; kept so
// filtering stays inspectable.
struct ExclusionRecord {
  std::string source_id;
  std::vector<std::string> groups;  // the conflicting groups, sorted
};

struct CounterfactualSet {
  std::vector<CounterfactualPair> pairs;
  std::vector<ExclusionRecord> excluded;
};

// One pair per (example, matched token pair). Matching is case-insensitive
// on word boundaries; every occurrence is replaced. Examples matching token
// pairs from more than one group are excluded and logged.
CounterfactualSet generate_counterfactuals(const Corpus& corpus,
                                           const std::vector<TokenPair>& table);

enum class LabelSlice { toxic, non_toxic };
std::string_view label_slice_name(LabelSlice slice);

struct ScoredPair {
  CounterfactualPair pair;
  double marginalized_score = 0.0;
  double dominant_score = 0.0;
};

// Per-pair ctf = dominant score - marginalized score, so a negative mean
// means the marginalized wording drew the higher toxicity.
struct CtfResult {
  std::string provider_id;
  std::string group;
  LabelSlice label_slice = LabelSlice::non_toxic;
  std::size_t n = 0;
  double mean_ctf = 0.0;
  std::optional<double> ci_low, ci_high;  // 95%, t distribution; unset at n=1
  std::vector<double> per_pair;
};

// Mean and 95% t-interval of ctf over the pairs of one (group, gold-label
// slice). Toxic and non-toxic slices are never pooled.
CtfResult ctf_scores(std::span<const ScoredPair> pairs, const std::string& group,
                     LabelSlice label_slice, const std::string& provider_id);

// Student-t quantile, accurate to 1e-6 over the tested range.
double t_quantile(double p, int df);

}  // namespace modaudit
