#include "modaudit/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "modaudit/errors.hpp"

namespace modaudit {

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open embedding table: " + path.string());
  }
  // token -> (componentwise sum, row count); repeated tokens are averaged.
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> values;
    double v = 0.0;
    while (row >> v) values.push_back(v);
    if (token.empty() || values.empty() || !row.eof()) {
      throw Error("embedding table " + path.string() + " line " +
                  std::to_string(line_no) + ": expected 'token v1 ... vd'");
    }
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw Error("embedding table " + path.string() + " line " +
                  std::to_string(line_no) + ": dimension " +
                  std::to_string(values.size()) + " != " +
                  std::to_string(dim));
    }
    auto it = acc.find(token);
    if (it == acc.end()) {
      acc.emplace(std::move(token),
                  std::make_pair(std::move(values), std::size_t{1}));
    } else {
      for (std::size_t i = 0; i < dim; ++i) it->second.first[i] += values[i];
      ++it->second.second;
    }
  }
  EmbeddingTable table;
  table.dimension_ = dim;
  for (auto& [token, pair] : acc) {
    auto& [sum, count] = pair;
    if (count > 1) {
      for (double& x : sum) x /= static_cast<double>(count);
    }
    table.vectors_.emplace(token, std::move(sum));
  }
  return table;
}

EmbeddingTable EmbeddingTable::from_entries(
    const std::map<std::string, std::vector<double>>& entries) {
  EmbeddingTable table;
  for (const auto& [token, values] : entries) {
    if (values.empty()) {
      throw Error("embedding for '" + token + "' is empty");
    }
    if (table.dimension_ == 0) {
      table.dimension_ = values.size();
    } else if (values.size() != table.dimension_) {
      throw Error("embedding for '" + token + "' has dimension " +
                  std::to_string(values.size()) + " != " +
                  std::to_string(table.dimension_));
    }
    table.vectors_.emplace(token, values);
  }
  return table;
}

const std::vector<double>* EmbeddingTable::get(const std::string& token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error("cosine similarity: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

struct TokenStat {
  double sum_abs = 0.0;
  double sum_signed = 0.0;
  std::size_t count = 0;
  double mean_abs() const { return sum_abs / static_cast<double>(count); }
  double mean_signed() const { return sum_signed / static_cast<double>(count); }
};

}  // namespace

std::vector<TokenCluster> cluster_tokens(
    std::span<const TokenAttribution> attributions,
    const EmbeddingTable& embeddings, double sim_threshold) {
  // Pool attribution values per distinct token string.
  std::map<std::string, TokenStat> stats;
  for (const TokenAttribution& attr : attributions) {
    for (std::size_t i = 0; i < attr.tokens.size(); ++i) {
      TokenStat& s = stats[attr.tokens[i]];
      s.sum_abs += std::abs(attr.shapley[i]);
      s.sum_signed += attr.shapley[i];
      ++s.count;
    }
  }

  std::vector<std::string> tokens;
  tokens.reserve(stats.size());
  for (const auto& [token, _] : stats) tokens.push_back(token);

  // Connected components of the "similarity >= threshold" graph; a token
  // without an embedding connects to nothing and stays a singleton.
  const std::size_t n = tokens.size();
  std::vector<int> component(n, -1);
  int next_component = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (component[start] != -1) continue;
    const int id = next_component++;
    std::deque<std::size_t> frontier{start};
    component[start] = id;
    while (!frontier.empty()) {
      const std::size_t cur = frontier.front();
      frontier.pop_front();
      const std::vector<double>* vc = embeddings.get(tokens[cur]);
      if (vc == nullptr) continue;
      for (std::size_t other = 0; other < n; ++other) {
        if (component[other] != -1) continue;
        const std::vector<double>* vo = embeddings.get(tokens[other]);
        if (vo == nullptr) continue;
        if (cosine_similarity(*vc, *vo) >= sim_threshold) {
          component[other] = id;
          frontier.push_back(other);
        }
      }
    }
  }

  std::vector<std::vector<std::string>> groups(
      static_cast<std::size_t>(next_component));
  for (std::size_t i = 0; i < n; ++i) {
    groups[static_cast<std::size_t>(component[i])].push_back(tokens[i]);
  }

  std::vector<TokenCluster> clusters;
  clusters.reserve(groups.size());
  for (auto& members : groups) {
    std::sort(members.begin(), members.end());
    TokenCluster cluster;
    double abs_total = 0.0, signed_total = 0.0;
    double best_abs = -1.0;
    for (const std::string& member : members) {
      const TokenStat& s = stats.at(member);
      abs_total += s.mean_abs();
      signed_total += s.mean_signed();
      // Representative: largest per-token |mean|; members are sorted, so
      // strict > keeps the lexicographically smaller string on ties.
      if (s.mean_abs() > best_abs) {
        best_abs = s.mean_abs();
        cluster.representative = member;
      }
    }
    cluster.mean_abs_shap = abs_total / static_cast<double>(members.size());
    cluster.mean_signed_shap =
        signed_total / static_cast<double>(members.size());
    cluster.direction = cluster.mean_signed_shap > 0.0
                            ? ClusterDirection::toward_hate
                            : ClusterDirection::toward_non_hate;
    cluster.members = std::move(members);
    clusters.push_back(std::move(cluster));
  }

  std::sort(clusters.begin(), clusters.end(),
            [](const TokenCluster& a, const TokenCluster& b) {
              if (a.mean_abs_shap != b.mean_abs_shap) {
                return a.mean_abs_shap > b.mean_abs_shap;
              }
              return a.representative < b.representative;
            });
  return clusters;
}

std::vector<TokenCluster> global_attributions(
    const std::vector<TokenCluster>& clusters, MisclassKind kind,
    std::size_t top_k) {
  // False positives are explained by what pushed the score up; false
  // negatives by what pushed it down.
  const ClusterDirection wanted = kind == MisclassKind::fp
                                      ? ClusterDirection::toward_hate
                                      : ClusterDirection::toward_non_hate;
  std::vector<TokenCluster> out;
  for (const TokenCluster& cluster : clusters) {
    if (cluster.direction != wanted) continue;
    out.push_back(cluster);
    if (out.size() == top_k) break;
  }
  return out;
}

}  // namespace modaudit
