#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modaudit/errors.hpp"
#include "modaudit/tokenize.hpp"

namespace modaudit {

class ExplainError : public Error {
 public:
  using Error::Error;
};

class TooManyTokens : public ExplainError {
 public:
  TooManyTokens(std::size_t n, std::size_t cap)
      : ExplainError("sequence of " + std::to_string(n) +
                     " tokens exceeds exact-mode cap " + std::to_string(cap)),
        token_count(n), exact_cap(cap) {}
  std::size_t token_count, exact_cap;
};

enum class AttributionMode { exact, sampled };

// Per-token contributions for one sentence. base_value is the score with
// every token masked, full_value the untouched text's score; efficiency
// (sum == full - base) is exact in exact mode and holds per permutation in
// sampled mode.
struct TokenAttribution {
  std::string source_id;
  std::string provider_id;
  std::vector<std::string> tokens;
  std::vector<double> shapley;
  std::vector<double> std_errors;  // sampled mode only, else empty
  double base_value = 0.0;
  double full_value = 0.0;
  AttributionMode mode = AttributionMode::exact;
  int n_samples = 0;       // permutations drawn (sampled mode)
  std::uint64_t seed = 0;  // sampled mode
  std::string mask_token;
};

using ScoreFn = std::function<double(const std::string&)>;

struct ShapOptions {
  std::size_t exact_cap = 12;
  std::string mask_token = std::string(kDefaultMaskToken);
};

// Exact Shapley values by full coalition enumeration (2^n scored texts,
// each evaluated once and cached by mask).
TokenAttribution shap_exact(const ScoreFn& score_fn, const TokenSequence& seq,
                            const ShapOptions& options = {});

// Permutation-sampling estimate: each draw walks a random token order and
// credits every token its marginal contribution. Reports per-token
// Monte-Carlo standard errors. Deterministic per seed.
TokenAttribution shap_sampled(const ScoreFn& score_fn, const TokenSequence& seq,
                              int n_samples, std::uint64_t seed,
                              const ShapOptions& options = {});

}  // namespace modaudit
