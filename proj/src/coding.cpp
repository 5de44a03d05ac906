#include "modaudit/coding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "modaudit/rng.hpp"

namespace modaudit {

const std::vector<std::string>& fp_codebook() {
  static const std::vector<std::string> codes = {
      "CS", "RE", "OS", "LS", "DA", "SOS", "NE", "NP", "DE", "HATE", "UNSURE"};
  return codes;
}

const std::vector<std::string>& fn_codebook() {
  static const std::vector<std::string> codes = {
      "IMP", "POS", "NE_FN", "PAR", "DE_FN", "CS_FN", "SPELL", "NO_HATE",
      "UNSURE"};
  return codes;
}

bool code_is_valid(MisclassKind kind, const std::string& code) {
  const std::vector<std::string>& book =
      kind == MisclassKind::fp ? fp_codebook() : fn_codebook();
  return std::find(book.begin(), book.end(), code) != book.end();
}

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& token : tokens) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

}  // namespace

std::vector<CodingRow> sample_misclassifications(
    std::span<const Misclassification> records, double rate,
    std::uint64_t seed) {
  if (!(rate >= 0.0) || rate > 1.0) {
    throw CodingError("sampling rate must be in [0, 1], got " +
                      std::to_string(rate));
  }
  using StratumKey = std::tuple<std::string, std::string, int>;
  std::map<StratumKey, std::vector<const Misclassification*>> strata;
  for (const Misclassification& record : records) {
    strata[{record.provider, record.dataset,
            record.kind == MisclassKind::fp ? 0 : 1}]
        .push_back(&record);
  }

  std::vector<CodingRow> rows;
  for (auto& [key, members] : strata) {
    const auto& [provider, dataset, kind_index] = key;
    // Stable pre-sampling order so the draw depends only on the seed.
    std::sort(members.begin(), members.end(),
              [](const Misclassification* a, const Misclassification* b) {
                return a->id < b->id;
              });
    const std::size_t n = members.size();
    const std::size_t k = std::min(
        n, static_cast<std::size_t>(
               std::ceil(rate * static_cast<double>(n))));
    const std::string kind_name = kind_index == 0 ? "fp" : "fn";
    Rng rng(derive_seed(seed, "coding:" + provider + "\x1f" + dataset +
                                  "\x1f" + kind_name));
    std::vector<std::size_t> picks = rng.sample_indices(n, k);
    std::sort(picks.begin(), picks.end());
    for (std::size_t index : picks) {
      const Misclassification& m = *members[index];
      CodingRow row;
      row.id = m.id;
      row.dataset = m.dataset;
      row.provider = m.provider;
      row.text = m.text;
      row.score = m.score;
      row.gold_label = m.gold_label;
      row.top_tokens = join_tokens(m.top_tokens);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::optional<double> cohens_kappa(const std::vector<std::string>& rater_a,
                                   const std::vector<std::string>& rater_b,
                                   const std::set<std::string>& exclude) {
  if (rater_a.size() != rater_b.size()) {
    throw LengthMismatch(rater_a.size(), rater_b.size());
  }
  std::map<std::string, std::size_t> count_a, count_b;
  std::size_t n = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    if (exclude.count(rater_a[i]) != 0 || exclude.count(rater_b[i]) != 0) {
      continue;
    }
    ++n;
    ++count_a[rater_a[i]];
    ++count_b[rater_b[i]];
    if (rater_a[i] == rater_b[i]) ++agree;
  }
  if (n == 0) throw EmptyAfterExclusion();

  const double po = static_cast<double>(agree) / static_cast<double>(n);
  double pe = 0.0;
  for (const auto& [code, ca] : count_a) {
    auto it = count_b.find(code);
    if (it == count_b.end()) continue;
    pe += (static_cast<double>(ca) / static_cast<double>(n)) *
          (static_cast<double>(it->second) / static_cast<double>(n));
  }
  if (pe >= 1.0) {
    // Both raters used a single shared category: agreement is either
    // trivially perfect or the statistic carries no information.
    if (po >= 1.0) return 1.0;
    return std::nullopt;
  }
  return (po - pe) / (1.0 - pe);
}

}  // namespace modaudit
