#include "modaudit/shapley.hpp"

#include <cmath>
#include <unordered_map>

#include "modaudit/rng.hpp"

namespace modaudit {

namespace {

// n!/(|S|!(n-|S|-1)!) style weights precomputed as |S|!(n-|S|-1)!/n!.
// n <= 12 keeps every factorial exact in a double.
std::vector<double> coalition_weights(std::size_t n) {
  std::vector<double> factorial(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) {
    factorial[i] = factorial[i - 1] * static_cast<double>(i);
  }
  std::vector<double> w(n);  // indexed by |S|
  for (std::size_t s = 0; s < n; ++s) {
    w[s] = factorial[s] * factorial[n - s - 1] / factorial[n];
  }
  return w;
}

}  // namespace

TokenAttribution shap_exact(const ScoreFn& score_fn, const TokenSequence& seq,
                            const ShapOptions& options) {
  const std::size_t n = seq.tokens.size();
  if (n > options.exact_cap) throw TooManyTokens(n, options.exact_cap);

  TokenAttribution attr;
  attr.source_id = seq.source_id;
  attr.tokens = seq.tokens;
  attr.mode = AttributionMode::exact;
  attr.mask_token = options.mask_token;

  if (n == 0) {
    double v = score_fn(seq.source_text);
    attr.base_value = v;
    attr.full_value = v;
    return attr;
  }

  // Every coalition scored exactly once, indexed by keep mask.
  const std::uint64_t coalitions = 1ULL << n;
  std::vector<double> value(coalitions);
  for (std::uint64_t mask = 0; mask < coalitions; ++mask) {
    value[mask] = score_fn(render_masked(seq, mask, options.mask_token));
  }
  attr.base_value = value[0];
  attr.full_value = value[coalitions - 1];

  const std::vector<double> weight = coalition_weights(n);
  attr.shapley.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bit = 1ULL << i;
    for (std::uint64_t mask = 0; mask < coalitions; ++mask) {
      if (mask & bit) continue;
      double marginal = value[mask | bit] - value[mask];
      attr.shapley[i] +=
          weight[static_cast<std::size_t>(__builtin_popcountll(mask))] * marginal;
    }
  }
  return attr;
}

TokenAttribution shap_sampled(const ScoreFn& score_fn, const TokenSequence& seq,
                              int n_samples, std::uint64_t seed,
                              const ShapOptions& options) {
  if (n_samples < 1) throw ExplainError("shap_sampled needs n_samples >= 1");
  const std::size_t n = seq.tokens.size();

  TokenAttribution attr;
  attr.source_id = seq.source_id;
  attr.tokens = seq.tokens;
  attr.mode = AttributionMode::sampled;
  attr.n_samples = n_samples;
  attr.seed = seed;
  attr.mask_token = options.mask_token;

  std::vector<char> keep(n, 0);
  std::unordered_map<std::string, double> memo;
  auto coalition_value = [&]() {
    std::string key(keep.begin(), keep.end());
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    double v = score_fn(render_masked(seq, keep, options.mask_token));
    memo.emplace(std::move(key), v);
    return v;
  };

  attr.base_value = coalition_value();
  std::fill(keep.begin(), keep.end(), 1);
  attr.full_value = coalition_value();
  std::fill(keep.begin(), keep.end(), 0);

  if (n == 0) return attr;

  // Accumulation is by token index, so estimates do not depend on the order
  // in which coalition values happen to be computed.
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::vector<std::size_t> permutation(n);
  Rng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) permutation[i] = i;
    rng.shuffle(permutation);
    std::fill(keep.begin(), keep.end(), 0);
    double previous = attr.base_value;
    for (std::size_t pos = 0; pos < n; ++pos) {
      std::size_t token = permutation[pos];
      keep[token] = 1;
      double current = pos + 1 == n ? attr.full_value : coalition_value();
      double marginal = current - previous;
      sum[token] += marginal;
      sum_sq[token] += marginal * marginal;
      previous = current;
    }
  }

  attr.shapley.assign(n, 0.0);
  attr.std_errors.assign(n, 0.0);
  const double m = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < n; ++i) {
    attr.shapley[i] = sum[i] / m;
    if (n_samples >= 2) {
      double variance = (sum_sq[i] - sum[i] * sum[i] / m) / (m - 1.0);
      if (variance < 0.0) variance = 0.0;  // cancellation guard
      attr.std_errors[i] = std::sqrt(variance / m);
    }
  }
  return attr;
}

}  // namespace modaudit
