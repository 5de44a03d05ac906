#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modaudit/errors.hpp"

namespace modaudit {

class MetricError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public MetricError {
 public:
  EmptyInput() : MetricError("metric input is empty") {}
};

// Ranking metrics need both classes present.
class OneClassOnly : public MetricError {
 public:
  explicit OneClassOnly(const std::string& where)
      : MetricError("only one label class present in " + where), scope(where) {}
  std::string scope;
};

class InsufficientBackground : public MetricError {
 public:
  InsufficientBackground(std::size_t pool, std::size_t needed)
      : MetricError("background pool of " + std::to_string(pool) +
                    " cannot supply " + std::to_string(needed) + " samples"),
        pool_size(pool), needed_size(needed) {}
  std::size_t pool_size, needed_size;
};

class MissingAggregate : public MetricError {
 public:
  MissingAggregate() : MetricError("no aggregate row among the reports") {}
};

struct ScoredExample {
  std::string id;
  int gold_label = 0;
  double score = 0.0;
  std::vector<std::string> groups;  // sorted
  std::string dataset;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// Ratios whose denominator is zero stay unset and serialize as empty cells;
// a fabricated 0 would claim a measurement that never happened.
struct ThresholdMetrics {
  std::optional<double> acc, f1, tpr, fpr, fnr;
};

inline constexpr const char* kAggregateSlice = "aggregate";

struct MetricsReport {
  std::string provider_id;
  std::string dataset;
  std::string slice;  // kAggregateSlice or a group id
  std::size_t n = 0;
  std::optional<double> acc, f1, tpr, fpr, fnr, roc_auc;
};

struct PinnedAucEstimate {
  std::string group;
  double mean_auc = 0.0;
  std::optional<double> std_error;  // unset when repeats == 1
  int repeats = 0;
  std::uint64_t seed = 0;
  std::size_t slice_size = 0;
  std::vector<double> repeat_values;  // per-repeat AUCs, audit trail
};

// Counts flagged (score >= threshold) against gold labels.
ConfusionCounts confusion(std::span<const ScoredExample> scored,
                          double threshold);

ThresholdMetrics threshold_metrics(const ConfusionCounts& c);

// Probability that a random positive outranks a random negative, ties 1/2.
// Rank-sum with average ranks, O(n log n); matches the all-pairs definition
// to 1e-12 (the brute-force form lives in the tests as the oracle).
double roc_auc(std::span<const ScoredExample> scored);

// AUC of (full group slice + equal-size uniform background sample drawn from
// the whole dataset, group members included) averaged over `repeats` draws.
// std_error = stddev(repeat AUCs, ddof 1)/sqrt(repeats).
PinnedAucEstimate pinned_auc(std::span<const ScoredExample> all,
                             const std::string& group, int repeats,
                             std::uint64_t seed);

struct OddsGaps {
  std::optional<double> fpr_gap, fnr_gap;  // group minus aggregate
};

// Per-group FPR/FNR gaps against the aggregate row (slice == "aggregate")
// found in the same list. Undefined inputs propagate as unset gaps.
std::map<std::string, OddsGaps> equality_of_odds_gaps(
    const std::vector<MetricsReport>& reports);

}  // namespace modaudit
