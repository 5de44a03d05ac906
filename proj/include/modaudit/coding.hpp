#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "modaudit/cluster.hpp"
#include "modaudit/errors.hpp"

namespace modaudit {

class CodingError : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public CodingError {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : CodingError("rating lists differ in length: " + std::to_string(a) +
                    " vs " + std::to_string(b)) {}
};

class EmptyAfterExclusion : public CodingError {
 public:
  EmptyAfterExclusion()
      : CodingError("no rating pairs left after exclusion") {}
};

class UnknownCode : public CodingError {
 public:
  explicit UnknownCode(const std::string& code)
      : CodingError("unknown code: " + code) {}
};

// Closed codebooks for the two review sheets. Raters label each sampled
// error with one code; UNSURE is always allowed and excluded from
// agreement statistics.
const std::vector<std::string>& fp_codebook();
const std::vector<std::string>& fn_codebook();
bool code_is_valid(MisclassKind kind, const std::string& code);

// One misclassified example as produced by the scoring run.
struct Misclassification {
  std::string id;
  std::string dataset;
  std::string provider;
  std::string text;
  double score = 0.0;
  int gold_label = 0;
  std::vector<std::string> top_tokens;  // highest-|attribution| tokens
  MisclassKind kind = MisclassKind::fp;
};

// Row of the human review sheet; code columns start blank.
struct CodingRow {
  std::string id;
  std::string dataset;
  std::string provider;
  std::string text;
  double score = 0.0;
  int gold_label = 0;
  std::string top_tokens;  // space-joined
  std::string code_a;
  std::string code_b;
};

// Stratified sample for manual review: within each (provider, dataset,
// kind) stratum, ceil(rate * stratum size) rows are drawn without
// replacement. Deterministic in the seed; rows come back sorted by
// provider, dataset, kind (false positives first), id.
std::vector<CodingRow> sample_misclassifications(
    std::span<const Misclassification> records, double rate, std::uint64_t seed);

// Cohen's kappa between two raters. Pairs where either side's code is in
// `exclude` are dropped first. Returns nullopt when chance agreement is 1
// but observed agreement is not (kappa undefined); returns 1 when both are.
std::optional<double> cohens_kappa(
    const std::vector<std::string>& rater_a,
    const std::vector<std::string>& rater_b,
    const std::set<std::string>& exclude = {"UNSURE"});

}  // namespace modaudit
