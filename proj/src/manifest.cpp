#include "modaudit/manifest.hpp"

#include "modaudit/digest.hpp"
#include "modaudit/toml_lite.hpp"

namespace modaudit {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_absolute()) return p.lexically_normal();
  return (base / p).lexically_normal();
}

}  // namespace

std::string AuditManifest::dataset_name(const std::filesystem::path& dataset) {
  return dataset.stem().string();
}

AuditManifest AuditManifest::load(const std::filesystem::path& path) {
  AuditManifest m;
  m.manifest_path = std::filesystem::absolute(path).lexically_normal();
  if (!std::filesystem::exists(m.manifest_path)) {
    throw ConfigError("manifest not found: " + m.manifest_path.string());
  }
  m.digest = sha256_file(m.manifest_path);
  const std::filesystem::path base = m.manifest_path.parent_path();

  toml::Table t = toml::Table::parse_file(m.manifest_path);

  if (t.has("audit.providers")) {
    m.providers = t.get_string_array("audit.providers");
  }
  if (t.has("audit.datasets")) {
    for (const std::string& d : t.get_string_array("audit.datasets")) {
      m.datasets.push_back(resolve(base, d));
    }
  }
  m.threshold = t.get_double_or("audit.threshold", 0.5);
  m.seed = static_cast<std::uint64_t>(t.get_int_or("audit.seed", 1));
  m.out_dir = resolve(base, t.get_string_or("audit.out_dir", "out"));
  m.cache_dir = resolve(base, t.get_string_or("audit.cache_dir", "cache"));
  m.resume = t.get_bool_or("audit.resume", true);
  if (t.has("audit.rate")) m.rate_override = t.get_double("audit.rate");
  m.max_attempts =
      static_cast<int>(t.get_int_or("audit.max_attempts", 5));

  m.groups_file = resolve(base, t.get_string_or("paths.groups", "groups.toml"));
  m.providers_file =
      resolve(base, t.get_string_or("paths.providers", "providers.toml"));
  m.token_table_file =
      resolve(base, t.get_string_or("paths.token_table", "token_table.csv"));
  m.vocab_file =
      resolve(base, t.get_string_or("paths.vocab", "wordpiece_vocab.txt"));
  m.embeddings_file =
      resolve(base, t.get_string_or("paths.embeddings", "embeddings.txt"));

  m.run_metrics = t.get_bool_or("experiments.metrics", true);
  m.run_psa = t.get_bool_or("experiments.psa", true);
  m.run_shap = t.get_bool_or("experiments.shap", true);

  m.pinned_repeats = static_cast<std::size_t>(
      t.get_int_or("analysis.pinned_repeats", 20));
  m.shap_exact_cap =
      static_cast<std::size_t>(t.get_int_or("analysis.exact_cap", 12));
  m.shap_permutations =
      static_cast<std::size_t>(t.get_int_or("analysis.permutations", 200));
  m.top_k = static_cast<std::size_t>(t.get_int_or("analysis.top_k", 5));
  m.coding_rate = t.get_double_or("analysis.coding_rate", 0.05);
  m.mask_token = t.get_string_or("analysis.mask_token", "[MASK]");
  m.cluster_sim_threshold =
      t.get_double_or("analysis.cluster_sim_threshold", 0.9);

  m.mock.enabled = t.get_bool_or("mock.enabled", false);
  m.mock.base_score = t.get_double_or("mock.base", 0.0);
  for (const std::string& token : t.children("mock.weights")) {
    m.mock.token_weights[token] = t.get_double("mock.weights." + token);
  }
  return m;
}

void AuditManifest::validate() const {
  auto require_file = [](const std::filesystem::path& p,
                         const std::string& what) {
    if (!std::filesystem::exists(p)) {
      throw ConfigError(what + " not found: " + p.string());
    }
  };
  if (providers.empty()) throw ConfigError("manifest lists no providers");
  if (datasets.empty()) throw ConfigError("manifest lists no datasets");
  for (const auto& dataset : datasets) require_file(dataset, "dataset");
  require_file(groups_file, "group registry");
  require_file(providers_file, "provider registry");
  if (run_psa) require_file(token_table_file, "token table");
  if (run_shap) {
    require_file(vocab_file, "tokenizer vocabulary");
    require_file(embeddings_file, "embedding table");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("threshold must be in [0, 1]");
  }
  if (!(coding_rate >= 0.0 && coding_rate <= 1.0)) {
    throw ConfigError("coding_rate must be in [0, 1]");
  }
  if (!(cluster_sim_threshold > -1.0 && cluster_sim_threshold <= 1.0)) {
    throw ConfigError("cluster_sim_threshold must be in (-1, 1]");
  }
  if (pinned_repeats < 1) throw ConfigError("pinned_repeats must be >= 1");
  if (shap_permutations < 1) throw ConfigError("permutations must be >= 1");
  if (shap_exact_cap < 1 || shap_exact_cap > 20) {
    throw ConfigError("exact_cap must be in [1, 20]");
  }
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (rate_override && !(*rate_override > 0.0)) {
    throw ConfigError("rate override must be positive");
  }
}

}  // namespace modaudit
