#include "modaudit/psa.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "modaudit/csv.hpp"
#include "modaudit/text.hpp"

namespace modaudit {

std::vector<TokenPair> load_token_table(const std::filesystem::path& path) {
  auto rows = csv::parse_file(path.string());
  if (rows.empty()) throw PsaError("token table " + path.string() + " is empty");
  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "group" || header[1] != "marginalized" ||
      header[2] != "dominant") {
    throw PsaError("token table must have columns group,marginalized,dominant");
  }
  std::vector<TokenPair> table;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 3) throw PsaError("token table row " + std::to_string(r + 1) +
                                       " has fewer than 3 columns");
    TokenPair pair;
    pair.group = ascii_lower_copy(row[0]);
    pair.marginalized = ascii_lower_copy(row[1]);
    pair.dominant = ascii_lower_copy(row[2]);
    if (pair.group.empty() || pair.marginalized.empty() || pair.dominant.empty()) {
      throw EmptyToken(r + 1);
    }
    if (!seen.emplace(pair.group, pair.marginalized).second) {
      throw DuplicatePair(pair.group, pair.marginalized);
    }
    table.push_back(std::move(pair));
  }
  return table;
}

CounterfactualSet generate_counterfactuals(const Corpus& corpus,
                                           const std::vector<TokenPair>& table) {
  // Longer marginalized tokens are tried first so a phrase never gets
  // partially rewritten by one of its own substrings.
  std::vector<const TokenPair*> ordered;
  ordered.reserve(table.size());
  for (const TokenPair& p : table) ordered.push_back(&p);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TokenPair* a, const TokenPair* b) {
                     return a->marginalized.size() > b->marginalized.size();
                   });

  CounterfactualSet out;
  for (const LabeledExample& ex : corpus.examples()) {
    std::set<std::string> matched_groups;
    std::vector<const TokenPair*> matched_pairs;
    for (const TokenPair* pair : ordered) {
      if (!find_word_matches(ex.text, pair->marginalized).empty()) {
        matched_groups.insert(pair->group);
        matched_pairs.push_back(pair);
      }
    }
    if (matched_pairs.empty()) continue;
    if (matched_groups.size() > 1) {
      out.excluded.push_back({ex.id, std::vector<std::string>(
                                         matched_groups.begin(),
                                         matched_groups.end())});
      continue;
    }
    for (const TokenPair* pair : matched_pairs) {
      WordReplacement replaced =
          replace_word_all(ex.text, pair->marginalized, pair->dominant);
      CounterfactualPair cf;
      cf.pair_id = ex.id + "#" + pair->marginalized;
      cf.source_id = ex.id;
      cf.group = pair->group;
      cf.token_pair = *pair;
      cf.marginalized_text = ex.text;
      cf.dominant_text = std::move(replaced.text);
      cf.gold_label = ex.gold_label;
      cf.occurrences = replaced.count;
      out.pairs.push_back(std::move(cf));
    }
  }
  return out;
}

std::string_view label_slice_name(LabelSlice slice) {
  return slice == LabelSlice::toxic ? "toxic" : "non_toxic";
}

CtfResult ctf_scores(std::span<const ScoredPair> pairs, const std::string& group,
                     LabelSlice label_slice, const std::string& provider_id) {
  const int want_label = label_slice == LabelSlice::toxic ? 1 : 0;
  CtfResult result;
  result.provider_id = provider_id;
  result.group = group;
  result.label_slice = label_slice;
  for (const ScoredPair& sp : pairs) {
    if (sp.pair.group != group || sp.pair.gold_label != want_label) continue;
    result.per_pair.push_back(sp.dominant_score - sp.marginalized_score);
  }
  if (result.per_pair.empty()) {
    throw EmptySlice(group, std::string(label_slice_name(label_slice)));
  }
  result.n = result.per_pair.size();

  // A constant sample must report its exact value with a width-zero
  // interval; averaging identical doubles can round.
  bool all_equal = std::all_of(
      result.per_pair.begin(), result.per_pair.end(),
      [&](double v) { return v == result.per_pair.front(); });
  if (all_equal) {
    result.mean_ctf = result.per_pair.front();
    if (result.n >= 2) {
      result.ci_low = result.mean_ctf;
      result.ci_high = result.mean_ctf;
    }
    return result;
  }

  double sum = 0.0;
  for (double v : result.per_pair) sum += v;
  result.mean_ctf = sum / static_cast<double>(result.n);
  if (result.n >= 2) {
    double ss = 0.0;
    for (double v : result.per_pair) {
      double d = v - result.mean_ctf;
      ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(result.n - 1));
    double half = t_quantile(0.975, static_cast<int>(result.n) - 1) * sd /
                  std::sqrt(static_cast<double>(result.n));
    result.ci_low = result.mean_ctf - half;
    result.ci_high = result.mean_ctf + half;
  }
  return result;
}

double t_quantile(double p, int df) {
  if (!(p > 0.0 && p < 1.0)) throw PsaError("t_quantile needs 0 < p < 1");
  if (df < 1) throw PsaError("t_quantile needs df >= 1");
  boost::math::students_t_distribution<double> dist(static_cast<double>(df));
  return boost::math::quantile(dist, p);
}

}  // namespace modaudit
