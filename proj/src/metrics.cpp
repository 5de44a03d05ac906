#include "modaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modaudit/rng.hpp"

namespace modaudit {

ConfusionCounts confusion(std::span<const ScoredExample> scored,
                          double threshold) {
  if (scored.empty()) throw EmptyInput();
  ConfusionCounts c;
  for (const ScoredExample& ex : scored) {
    bool flagged = ex.score >= threshold;
    if (ex.gold_label == 1) {
      (flagged ? c.tp : c.fn) += 1;
    } else {
      (flagged ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

ThresholdMetrics threshold_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyInput();
  ThresholdMetrics m;
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  m.acc = ratio(tp + tn, tp + tn + fp + fn);
  m.tpr = ratio(tp, tp + fn);
  m.fnr = ratio(fn, tp + fn);
  m.fpr = ratio(fp, fp + tn);
  m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  return m;
}

double roc_auc(std::span<const ScoredExample> scored) {
  std::size_t positives = 0;
  for (const ScoredExample& ex : scored) positives += ex.gold_label == 1;
  std::size_t negatives = scored.size() - positives;
  if (positives == 0 || negatives == 0) throw OneClassOnly("roc_auc input");

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].score < scored[b].score;
  });

  // Average ranks over tie groups; ranks are 1-based. Rank sums stay exact:
  // they are integers or half-integers well below 2^53.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           scored[order[j]].score == scored[order[i]].score) {
      ++j;
    }
    double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (scored[order[k]].gold_label == 1) positive_rank_sum += mean_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

PinnedAucEstimate pinned_auc(std::span<const ScoredExample> all,
                             const std::string& group, int repeats,
                             std::uint64_t seed) {
  if (repeats < 1) throw MetricError("pinned_auc needs repeats >= 1");
  std::vector<const ScoredExample*> slice;
  for (const ScoredExample& ex : all) {
    if (std::binary_search(ex.groups.begin(), ex.groups.end(), group)) {
      slice.push_back(&ex);
    }
  }
  if (slice.empty()) throw OneClassOnly("group " + group + " (empty slice)");
  bool has_pos = false, has_neg = false;
  for (const ScoredExample* ex : slice) {
    (ex->gold_label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw OneClassOnly("group " + group);
  if (all.size() < slice.size()) {
    throw InsufficientBackground(all.size(), slice.size());
  }

  Rng rng(derive_seed(seed, "pinned:" + group));
  std::vector<double> repeat_aucs;
  repeat_aucs.reserve(static_cast<std::size_t>(repeats));
  std::vector<ScoredExample> pinned;
  for (int r = 0; r < repeats; ++r) {
    pinned.clear();
    pinned.reserve(slice.size() * 2);
    for (const ScoredExample* ex : slice) pinned.push_back(*ex);
    for (std::size_t idx : rng.sample_indices(all.size(), slice.size())) {
      pinned.push_back(all[idx]);
    }
    repeat_aucs.push_back(roc_auc(pinned));
  }

  PinnedAucEstimate est;
  est.group = group;
  est.repeats = repeats;
  est.seed = seed;
  est.slice_size = slice.size();
  est.repeat_values = repeat_aucs;
  bool all_equal = std::all_of(
      repeat_aucs.begin(), repeat_aucs.end(),
      [&](double a) { return a == repeat_aucs.front(); });
  if (all_equal) {
    // Degenerate draws (e.g. group == whole dataset) must report the exact
    // common value with zero spread, not a rounded mean of identical terms.
    est.mean_auc = repeat_aucs.front();
    if (repeats >= 2) est.std_error = 0.0;
    return est;
  }
  est.mean_auc =
      std::accumulate(repeat_aucs.begin(), repeat_aucs.end(), 0.0) /
      static_cast<double>(repeats);
  if (repeats >= 2) {
    double ss = 0.0;
    for (double a : repeat_aucs) {
      double d = a - est.mean_auc;
      ss += d * d;
    }
    double variance = ss / static_cast<double>(repeats - 1);
    est.std_error = std::sqrt(variance / static_cast<double>(repeats));
  }
  return est;
}

std::map<std::string, OddsGaps> equality_of_odds_gaps(
    const std::vector<MetricsReport>& reports) {
  const MetricsReport* aggregate = nullptr;
  for (const MetricsReport& r : reports) {
    if (r.slice == kAggregateSlice) {
      aggregate = &r;
      break;
    }
  }
  if (aggregate == nullptr) throw MissingAggregate();

  auto gap = [](const std::optional<double>& group_value,
                const std::optional<double>& aggregate_value)
      -> std::optional<double> {
    if (!group_value || !aggregate_value) return std::nullopt;
    return *group_value - *aggregate_value;
  };

  std::map<std::string, OddsGaps> gaps;
  for (const MetricsReport& r : reports) {
    if (r.slice == kAggregateSlice) continue;
    OddsGaps g;
    g.fpr_gap = gap(r.fpr, aggregate->fpr);
    g.fnr_gap = gap(r.fnr, aggregate->fnr);
    gaps[r.slice] = g;
  }
  return gaps;
}

}  // namespace modaudit
