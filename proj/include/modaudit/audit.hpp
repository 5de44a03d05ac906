#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "modaudit/errors.hpp"
#include "modaudit/manifest.hpp"

namespace modaudit {

// A step that needs scored files found none for this (provider, dataset).
class MissingScores : public ConfigError {
 public:
  MissingScores(const std::string& provider, const std::string& dataset)
      : ConfigError("no scored file for provider '" + provider +
                    "', dataset '" + dataset + "'; run the query step first"),
        provider_id(provider), dataset_name(dataset) {}
  std::string provider_id, dataset_name;
};

// Command-line flags that override manifest fields for one invocation.
struct CliOverrides {
  std::optional<std::string> provider;  // restrict run to this provider
  std::optional<std::string> dataset;   // restrict run to this dataset
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<double> rate;
  std::optional<std::string> cache_dir;
  std::optional<std::string> out_dir;
  std::optional<bool> resume;
  std::optional<bool> mock;
  std::optional<int> max_attempts;
};

// Applies flag overrides on top of the loaded manifest. Unknown --provider
// values pass through (the provider registry rejects them later); an unknown
// --dataset is a ConfigError because it cannot name a file to audit.
AuditManifest apply_overrides(AuditManifest manifest, const CliOverrides& o);

// Each command returns the process exit status: 0 = clean, 1 = completed
// with per-item failures. Configuration problems throw ConfigError, which
// the CLI maps to exit status 2.
int cmd_query(const AuditManifest& manifest, std::ostream& log);
int cmd_metrics(const AuditManifest& manifest, std::ostream& log);
int cmd_psa(const AuditManifest& manifest, std::ostream& log);
int cmd_shap(const AuditManifest& manifest, std::ostream& log);
int cmd_report(const AuditManifest& manifest, std::ostream& log);

}  // namespace modaudit
