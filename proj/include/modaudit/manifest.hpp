#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modaudit/errors.hpp"

namespace modaudit {

// Offline scorer configuration: an additive lexicon served through the
// regular wire path so every scheduler feature is exercised without a
// network.
struct MockConfig {
  bool enabled = false;
  double base_score = 0.0;
  std::map<std::string, double> token_weights;
};

// One audit run, fully described by a single TOML file. Relative paths are
// resolved against the manifest's directory so a manifest plus its data
// directory is a portable, diffable unit.
struct AuditManifest {
  std::filesystem::path manifest_path;  // absolute
  std::string digest;                   // content digest of the manifest file

  std::vector<std::string> providers;
  std::vector<std::filesystem::path> datasets;
  double threshold = 0.5;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir;
  bool resume = true;
  std::optional<double> rate_override;
  int max_attempts = 5;

  std::filesystem::path groups_file;
  std::filesystem::path providers_file;
  std::filesystem::path token_table_file;
  std::filesystem::path vocab_file;
  std::filesystem::path embeddings_file;

  bool run_metrics = true;
  bool run_psa = true;
  bool run_shap = true;

  std::size_t pinned_repeats = 20;
  std::size_t shap_exact_cap = 12;
  std::size_t shap_permutations = 200;
  std::size_t top_k = 5;
  double coding_rate = 0.05;
  std::string mask_token = "[MASK]";
  double cluster_sim_threshold = 0.9;

  MockConfig mock;

  static AuditManifest load(const std::filesystem::path& path);

  // Short name a dataset is reported under: the file stem.
  static std::string dataset_name(const std::filesystem::path& dataset);

  // Throws ConfigError when a referenced input file is missing or a value
  // is out of range. Analysis inputs are only required when the
  // corresponding experiment is enabled.
  void validate() const;
};

}  // namespace modaudit
