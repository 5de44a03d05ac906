#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modaudit/audit.hpp"
#include "modaudit/errors.hpp"
#include "modaudit/manifest.hpp"
#include "modaudit/providers.hpp"
#include "modaudit/version.hpp"

namespace {

struct Flags {
  std::string manifest_path;
  std::optional<std::string> provider;
  std::optional<std::string> dataset;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<double> rate;
  std::optional<std::string> cache_dir;
  std::optional<std::string> out_dir;
  std::optional<bool> resume;
  std::optional<bool> mock;
  std::optional<int> max_retries;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--manifest", flags.manifest_path,
                  "Audit manifest (TOML)")
      ->required();
  cmd->add_option("--provider", [&flags](const CLI::results_t& r) {
       flags.provider = r.at(0);
       return true;
     },
     "Run only this provider id");
  cmd->add_option("--dataset", [&flags](const CLI::results_t& r) {
       flags.dataset = r.at(0);
       return true;
     },
     "Run only this dataset (name or path as listed in the manifest)");
  cmd->add_option("--threshold", [&flags](const CLI::results_t& r) {
       flags.threshold = std::stod(r.at(0));
       return true;
     },
     "Flagging threshold override");
  cmd->add_option("--seed", [&flags](const CLI::results_t& r) {
       flags.seed = std::stoull(r.at(0));
       return true;
     },
     "Seed override");
  cmd->add_option("--rate", [&flags](const CLI::results_t& r) {
       flags.rate = std::stod(r.at(0));
       return true;
     },
     "Rate-limit override (queries per second)");
  cmd->add_option("--max-retries", [&flags](const CLI::results_t& r) {
       flags.max_retries = std::stoi(r.at(0));
       return true;
     },
     "Maximum attempts per item");
  cmd->add_option("--cache-dir", [&flags](const CLI::results_t& r) {
       flags.cache_dir = r.at(0);
       return true;
     },
     "Response cache directory override");
  cmd->add_option("--out", [&flags](const CLI::results_t& r) {
       flags.out_dir = r.at(0);
       return true;
     },
     "Output directory override");
  cmd->add_flag("--resume,!--no-resume", [&flags](std::int64_t count) {
       flags.resume = count > 0;
     },
     "Resume from the journal (default on; --no-resume restarts)");
  cmd->add_flag("--mock,!--no-mock", [&flags](std::int64_t count) {
       flags.mock = count > 0;
     },
     "Score with the offline mock instead of live providers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modaudit " + std::string(modaudit::kToolVersion) +
               " - black-box bias audit harness for moderation APIs"};
  app.require_subcommand(1);

  Flags flags;
  CLI::App* query = app.add_subcommand(
      "query", "Score every corpus sentence through the providers");
  CLI::App* metrics = app.add_subcommand(
      "metrics", "Classification and ranking metrics per slice");
  CLI::App* psa = app.add_subcommand(
      "psa", "Counterfactual identity-swap sensitivity analysis");
  CLI::App* shap = app.add_subcommand(
      "shap", "Token attributions, clusters, and coding sheets");
  CLI::App* report = app.add_subcommand(
      "report", "Full pipeline: query + all enabled analyses + index");
  for (CLI::App* cmd : {query, metrics, psa, shap, report}) {
    add_common_flags(cmd, flags);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    modaudit::CliOverrides overrides;
    overrides.provider = flags.provider;
    overrides.dataset = flags.dataset;
    overrides.threshold = flags.threshold;
    overrides.seed = flags.seed;
    overrides.rate = flags.rate;
    overrides.cache_dir = flags.cache_dir;
    overrides.out_dir = flags.out_dir;
    overrides.resume = flags.resume;
    overrides.mock = flags.mock;
    overrides.max_attempts = flags.max_retries;

    modaudit::AuditManifest manifest = modaudit::apply_overrides(
        modaudit::AuditManifest::load(flags.manifest_path), overrides);

    if (query->parsed()) return modaudit::cmd_query(manifest, std::cout);
    if (metrics->parsed()) return modaudit::cmd_metrics(manifest, std::cout);
    if (psa->parsed()) return modaudit::cmd_psa(manifest, std::cout);
    if (shap->parsed()) return modaudit::cmd_shap(manifest, std::cout);
    if (report->parsed()) return modaudit::cmd_report(manifest, std::cout);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const modaudit::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const modaudit::UnknownProvider& e) {
    // Naming a provider that has no adapter is a configuration mistake.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
