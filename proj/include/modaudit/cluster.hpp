#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modaudit/shapley.hpp"

namespace modaudit {

// Static word embeddings, textual format: one "token v1 ... vd" line each.
// Tokens missing from the table simply cluster alone.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable from_entries(
      const std::map<std::string, std::vector<double>>& entries);

  const std::vector<double>* get(const std::string& token) const;
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::size_t dimension_ = 0;
};

enum class ClusterDirection { toward_hate, toward_non_hate };

// Group of similar tokens with pooled attribution statistics. mean values
// average the per-token means of every member.
struct TokenCluster {
  std::string representative;        // member with the largest |mean|
  std::vector<std::string> members;  // sorted
  double mean_abs_shap = 0.0;
  double mean_signed_shap = 0.0;
  ClusterDirection direction = ClusterDirection::toward_non_hate;
};

// Density clustering (min_samples 1, i.e. connected components of the
// "cosine similarity >= sim_threshold" graph) over the distinct tokens in
// the attributions. Duplicate token strings are merged first, averaging
// their values. Output sorted by mean_abs_shap descending, ties broken by
// representative.
std::vector<TokenCluster> cluster_tokens(
    std::span<const TokenAttribution> attributions,
    const EmbeddingTable& embeddings, double sim_threshold);

enum class MisclassKind { fp, fn };

// Top clusters pushing toward the erroneous side: flagged-but-benign
// analysis keeps toward_hate clusters, missed-hate analysis keeps
// toward_non_hate. Input must already be sorted (as cluster_tokens emits).
std::vector<TokenCluster> global_attributions(
    const std::vector<TokenCluster>& clusters, MisclassKind kind,
    std::size_t top_k);

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b);

}  // namespace modaudit
