#include "modaudit/audit.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "modaudit/cluster.hpp"
#include "modaudit/coding.hpp"
#include "modaudit/corpus.hpp"
#include "modaudit/csv.hpp"
#include "modaudit/metrics.hpp"
#include "modaudit/providers.hpp"
#include "modaudit/psa.hpp"
#include "modaudit/rng.hpp"
#include "modaudit/scheduler.hpp"
#include "modaudit/shapley.hpp"
#include "modaudit/svg.hpp"
#include "modaudit/tokenize.hpp"
#include "modaudit/version.hpp"

namespace modaudit {

using nlohmann::json;

namespace {

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v, int decimals) {
  return v ? fmt_fixed(*v, decimals) : std::string();
}

CorpusFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

std::string scored_filename(const std::string& provider,
                            const std::string& dataset) {
  return "scored_" + provider + "_" + dataset + ".jsonl";
}

// First line of every CSV artifact; the parser treats '#' records as
// comments, so the header row stays machine-readable.
std::string csv_meta_line(const AuditManifest& m) {
  return "# " + std::string(kToolName) + " " + std::string(kToolVersion) +
         " manifest=" + m.digest + " seed=" + std::to_string(m.seed);
}

json meta_json(const AuditManifest& m) {
  return json{{"type", "meta"},
              {"tool", kToolName},
              {"version", kToolVersion},
              {"manifest_digest", m.digest},
              {"seed", m.seed}};
}

SvgMeta svg_meta(const AuditManifest& m) {
  return SvgMeta{std::string(kToolVersion), m.digest, m.seed};
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

void write_csv_file(const std::filesystem::path& path,
                    const AuditManifest& m,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::string content = csv_meta_line(m) + "\n" + csv::format_row(header) + "\n";
  for (const auto& row : rows) content += csv::format_row(row) + "\n";
  write_text_file(path, content);
}

struct Runtime {
  GroupRegistry groups;
  ProviderRegistry registry;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<Transport> transport;
  RunOptions options;
};

Runtime make_runtime(const AuditManifest& m) {
  Runtime rt{GroupRegistry::load(m.groups_file),
             ProviderRegistry::load(m.providers_file),
             std::make_shared<SystemClock>(), nullptr, RunOptions{}};
  rt.options.max_attempts = m.max_attempts;
  rt.options.resume = m.resume;
  if (m.mock.enabled) {
    MockLexicon lexicon{m.mock.base_score, m.mock.token_weights};
    rt.transport = std::make_shared<MockTransport>(lexicon);
  } else {
    rt.transport = std::make_shared<HttpTransport>();
  }
  return rt;
}

// Fails fast with the variable name instead of producing a run where every
// item dies with the same terminal error.
void require_credential(const AuditManifest& m, const ProviderSpec& spec) {
  if (m.mock.enabled || spec.auth_env_var.empty()) return;
  if (std::getenv(spec.auth_env_var.c_str()) == nullptr) {
    throw ConfigError("provider '" + spec.id +
                      "' needs a credential: set " + spec.auth_env_var);
  }
}

// One line of a scored file, as consumed by the analysis steps.
struct ScoredRow {
  std::string id;
  int gold = 0;
  std::vector<std::string> groups;
  double score = 0.0;
  bool flagged = false;
};

std::vector<ScoredRow> read_scored(const AuditManifest& m,
                                   const std::string& provider,
                                   const std::string& dataset) {
  const std::filesystem::path path =
      m.out_dir / scored_filename(provider, dataset);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingScores(provider, dataset);
  std::vector<ScoredRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type")) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": unreadable scored line");
    }
    const std::string type = j.at("type").get<std::string>();
    if (type != "row") continue;  // meta and error lines
    ScoredRow row;
    row.id = j.at("id").get<std::string>();
    row.gold = j.at("gold").get<int>();
    row.score = j.at("score").get<double>();
    row.flagged = j.at("flagged").get<bool>();
    for (const auto& g : j.at("groups")) {
      row.groups.push_back(g.get<std::string>());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScoredExample> to_scored_examples(const std::vector<ScoredRow>& rows,
                                              const std::string& dataset) {
  std::vector<ScoredExample> out;
  out.reserve(rows.size());
  for (const ScoredRow& row : rows) {
    out.push_back({row.id, row.gold, row.score, row.groups, dataset});
  }
  return out;
}

MetricsReport build_report(const std::string& provider,
                           const std::string& dataset, const std::string& slice,
                           std::span<const ScoredExample> scored,
                           double threshold,
                           std::vector<std::vector<std::string>>& skips) {
  MetricsReport report;
  report.provider_id = provider;
  report.dataset = dataset;
  report.slice = slice;
  report.n = scored.size();
  ThresholdMetrics tm = threshold_metrics(confusion(scored, threshold));
  report.acc = tm.acc;
  report.f1 = tm.f1;
  report.tpr = tm.tpr;
  report.fpr = tm.fpr;
  report.fnr = tm.fnr;
  try {
    report.roc_auc = roc_auc(scored);
  } catch (const OneClassOnly&) {
    skips.push_back({provider, dataset, slice, "one label class; AUC omitted"});
  }
  return report;
}

}  // namespace

AuditManifest apply_overrides(AuditManifest manifest, const CliOverrides& o) {
  if (o.provider) manifest.providers = {*o.provider};
  if (o.dataset) {
    std::vector<std::filesystem::path> keep;
    for (const auto& d : manifest.datasets) {
      if (AuditManifest::dataset_name(d) == *o.dataset ||
          d == std::filesystem::path(*o.dataset)) {
        keep.push_back(d);
      }
    }
    if (keep.empty()) {
      throw ConfigError("dataset '" + *o.dataset +
                        "' does not appear in the manifest");
    }
    manifest.datasets = keep;
  }
  if (o.threshold) manifest.threshold = *o.threshold;
  if (o.seed) manifest.seed = *o.seed;
  if (o.rate) manifest.rate_override = *o.rate;
  if (o.cache_dir) {
    manifest.cache_dir =
        std::filesystem::absolute(*o.cache_dir).lexically_normal();
  }
  if (o.out_dir) {
    manifest.out_dir =
        std::filesystem::absolute(*o.out_dir).lexically_normal();
  }
  if (o.resume) manifest.resume = *o.resume;
  if (o.mock) manifest.mock.enabled = *o.mock;
  if (o.max_attempts) manifest.max_attempts = *o.max_attempts;
  return manifest;
}

int cmd_query(const AuditManifest& manifest, std::ostream& log) {
  manifest.validate();
  Runtime rt = make_runtime(manifest);
  std::filesystem::create_directories(manifest.out_dir);

  std::size_t terminal_failures = 0;
  for (const std::string& provider : manifest.providers) {
    const ProviderSpec& spec = rt.registry.spec(provider);
    require_credential(manifest, spec);
    for (const auto& dataset : manifest.datasets) {
      const std::string dsname = AuditManifest::dataset_name(dataset);
      Corpus corpus = load_corpus(dataset, format_for(dataset), rt.groups);
      const CategoryMapping mapping = rt.registry.mapping(provider, dsname);

      QueryJob job;
      job.provider_id = provider;
      job.rate_override = manifest.rate_override;
      job.cache_dir = manifest.cache_dir;
      for (const LabeledExample& ex : corpus.examples()) {
        job.items.emplace_back(ex.id, ex.text);
      }

      std::ofstream out(manifest.out_dir / scored_filename(provider, dsname),
                        std::ios::binary | std::ios::trunc);
      if (!out) {
        throw Error("cannot write scored file for " + provider + "/" + dsname);
      }
      json meta = meta_json(manifest);
      meta["provider"] = provider;
      meta["dataset"] = dsname;
      meta["threshold"] = manifest.threshold;
      out << meta.dump() << '\n';

      std::size_t verdict_failures = 0;
      auto sink = [&](const ItemOutcome& outcome) {
        if (outcome.response) {
          try {
            Verdict v =
                to_verdict(*outcome.response, mapping, manifest.threshold);
            const LabeledExample& ex = corpus.by_id(outcome.id);
            json row{{"type", "row"},
                     {"id", outcome.id},
                     {"gold", ex.gold_label},
                     {"groups", ex.groups},
                     {"score", v.score},
                     {"flagged", v.is_flagged},
                     {"categories", outcome.response->category_scores}};
            out << row.dump() << '\n';
            return;
          } catch (const MissingCategory& e) {
            ++verdict_failures;
            json row{{"type", "error"},
                     {"id", outcome.id},
                     {"kind", "missing_category"},
                     {"detail", e.what()}};
            out << row.dump() << '\n';
            return;
          }
        }
        json row{{"type", "error"},
                 {"id", outcome.id},
                 {"kind", std::string(item_error_kind_name(*outcome.error))},
                 {"detail", outcome.error_detail}};
        out << row.dump() << '\n';
      };

      RunStats stats =
          run_job(job, spec, *rt.clock, *rt.transport, rt.options, sink);
      out.flush();
      if (!out) {
        throw Error("write to scored file for " + provider + "/" + dsname +
                    " failed");
      }
      log << "[query] " << provider << "/" << dsname << ": " << stats.total
          << " items, " << stats.succeeded << " ok (" << stats.from_cache
          << " cached), " << stats.network_calls << " network calls, "
          << stats.failures << " failures\n";
      terminal_failures += stats.failures + verdict_failures;
    }
  }
  return terminal_failures == 0 ? 0 : 1;
}

int cmd_metrics(const AuditManifest& manifest, std::ostream& log) {
  manifest.validate();
  GroupRegistry groups = GroupRegistry::load(manifest.groups_file);
  std::filesystem::create_directories(manifest.out_dir);

  std::vector<std::vector<std::string>> metric_rows, pinned_rows, gap_rows,
      skip_rows;
  for (const std::string& provider : manifest.providers) {
    for (const auto& dataset : manifest.datasets) {
      const std::string dsname = AuditManifest::dataset_name(dataset);
      std::vector<ScoredExample> scored =
          to_scored_examples(read_scored(manifest, provider, dsname), dsname);
      if (scored.empty()) {
        skip_rows.push_back({provider, dsname, kAggregateSlice,
                             "no successfully scored examples"});
        continue;
      }

      std::vector<MetricsReport> reports;
      reports.push_back(build_report(provider, dsname, kAggregateSlice, scored,
                                     manifest.threshold, skip_rows));
      for (const std::string& group : groups.ids()) {
        std::vector<ScoredExample> slice;
        for (const ScoredExample& ex : scored) {
          if (std::binary_search(ex.groups.begin(), ex.groups.end(), group)) {
            slice.push_back(ex);
          }
        }
        if (slice.empty()) {
          skip_rows.push_back(
              {provider, dsname, group, "group absent from corpus"});
          continue;
        }
        reports.push_back(build_report(provider, dsname, group, slice,
                                       manifest.threshold, skip_rows));
      }

      for (const MetricsReport& r : reports) {
        metric_rows.push_back({r.provider_id, r.dataset, r.slice,
                               std::to_string(r.n), fmt_opt(r.acc, 4),
                               fmt_opt(r.roc_auc, 4), fmt_opt(r.f1, 4),
                               fmt_opt(r.fpr, 4), fmt_opt(r.fnr, 4)});
      }

      for (const MetricsReport& r : reports) {
        if (r.slice == kAggregateSlice) continue;
        try {
          PinnedAucEstimate est =
              pinned_auc(scored, r.slice,
                         static_cast<int>(manifest.pinned_repeats),
                         manifest.seed);
          pinned_rows.push_back(
              {provider, dsname, est.group, std::to_string(est.slice_size),
               fmt_fixed(est.mean_auc, 6), fmt_opt(est.std_error, 6),
               std::to_string(est.repeats), std::to_string(manifest.seed)});
        } catch (const MetricError& e) {
          skip_rows.push_back({provider, dsname, r.slice,
                               std::string("pinned AUC: ") + e.what()});
        }
      }

      for (const auto& [group, gaps] : equality_of_odds_gaps(reports)) {
        gap_rows.push_back({provider, dsname, group, fmt_opt(gaps.fpr_gap, 4),
                            fmt_opt(gaps.fnr_gap, 4)});
      }
    }
  }

  write_csv_file(manifest.out_dir / "metrics.csv", manifest,
                 {"provider", "dataset", "slice", "n", "acc", "auc", "f1",
                  "fpr", "fnr"},
                 metric_rows);
  write_csv_file(manifest.out_dir / "pinned_auc.csv", manifest,
                 {"provider", "dataset", "slice", "n", "mean_auc", "std_error",
                  "repeats", "seed"},
                 pinned_rows);
  write_csv_file(manifest.out_dir / "eo_gaps.csv", manifest,
                 {"provider", "dataset", "group", "fpr_gap", "fnr_gap"},
                 gap_rows);
  write_csv_file(manifest.out_dir / "metrics_skips.csv", manifest,
                 {"provider", "dataset", "slice", "reason"}, skip_rows);
  log << "[metrics] " << metric_rows.size() << " metric rows, "
      << pinned_rows.size() << " pinned rows, " << skip_rows.size()
      << " skips\n";
  return 0;
}

int cmd_psa(const AuditManifest& manifest, std::ostream& log) {
  manifest.validate();
  Runtime rt = make_runtime(manifest);
  std::filesystem::create_directories(manifest.out_dir);
  std::vector<TokenPair> table = load_token_table(manifest.token_table_file);

  struct DatasetPair {
    CounterfactualPair pair;
    std::string dataset;
  };
  std::vector<DatasetPair> all_pairs;
  std::vector<std::vector<std::string>> exclusion_rows;
  for (const auto& dataset : manifest.datasets) {
    const std::string dsname = AuditManifest::dataset_name(dataset);
    Corpus corpus = load_corpus(dataset, format_for(dataset), rt.groups);
    CounterfactualSet set = generate_counterfactuals(corpus, table);
    for (CounterfactualPair& pair : set.pairs) {
      all_pairs.push_back({std::move(pair), dsname});
    }
    for (const ExclusionRecord& ex : set.excluded) {
      std::string joined;
      for (const std::string& g : ex.groups) {
        if (!joined.empty()) joined += ';';
        joined += g;
      }
      exclusion_rows.push_back({dsname, ex.source_id, joined});
    }
  }
  write_csv_file(manifest.out_dir / "psa_exclusions.csv", manifest,
                 {"dataset", "source_id", "groups"}, exclusion_rows);

  const std::vector<std::string> report_header = {
      "provider", "group",  "label_slice", "n",
      "mean_ctf", "ci_low", "ci_high",     "seed"};
  if (all_pairs.empty()) {
    log << "[psa] warning: no identity tokens matched any corpus sentence; "
           "emitting empty report\n";
    write_csv_file(manifest.out_dir / "ctf_report.csv", manifest,
                   report_header, {});
    return 0;
  }

  std::vector<std::vector<std::string>> report_rows;
  std::size_t failures = 0;
  for (const std::string& provider : manifest.providers) {
    const ProviderSpec& spec = rt.registry.spec(provider);
    require_credential(manifest, spec);
    ScoreService svc(spec, rt.transport, rt.clock, manifest.cache_dir,
                     manifest.rate_override, rt.options);

    std::ofstream audit_out(
        manifest.out_dir / ("ctf_pairs_" + provider + ".jsonl"),
        std::ios::binary | std::ios::trunc);
    if (!audit_out) throw Error("cannot write pair audit file");
    json meta = meta_json(manifest);
    meta["provider"] = provider;
    audit_out << meta.dump() << '\n';

    std::vector<ScoredPair> scored;
    for (const DatasetPair& dp : all_pairs) {
      const CategoryMapping mapping = rt.registry.mapping(provider, dp.dataset);
      double marg = 0.0, dom = 0.0;
      try {
        marg = to_verdict(svc.fetch(dp.pair.marginalized_text), mapping,
                          manifest.threshold)
                   .score;
        dom = to_verdict(svc.fetch(dp.pair.dominant_text), mapping,
                         manifest.threshold)
                  .score;
      } catch (const Error& e) {
        ++failures;
        json err{{"type", "error"},
                 {"pair_id", dp.pair.pair_id},
                 {"dataset", dp.dataset},
                 {"detail", e.what()}};
        audit_out << err.dump() << '\n';
        continue;
      }
      scored.push_back({dp.pair, marg, dom});
      json row{{"type", "pair"},
               {"pair_id", dp.pair.pair_id},
               {"dataset", dp.dataset},
               {"source_id", dp.pair.source_id},
               {"group", dp.pair.group},
               {"gold", dp.pair.gold_label},
               {"occurrences", dp.pair.occurrences},
               {"marginalized_text", dp.pair.marginalized_text},
               {"dominant_text", dp.pair.dominant_text},
               {"marginalized_score", marg},
               {"dominant_score", dom},
               {"ctf", dom - marg}};
      audit_out << row.dump() << '\n';
    }
    audit_out.flush();

    std::set<std::string> seen_groups;
    for (const ScoredPair& sp : scored) seen_groups.insert(sp.pair.group);

    std::vector<CtfPlotRow> plot_rows;
    for (const std::string& group : seen_groups) {
      for (LabelSlice slice : {LabelSlice::non_toxic, LabelSlice::toxic}) {
        CtfResult result;
        try {
          result = ctf_scores(scored, group, slice, provider);
        } catch (const EmptySlice&) {
          continue;
        }
        report_rows.push_back(
            {provider, group, std::string(label_slice_name(slice)),
             std::to_string(result.n), fmt_fixed(result.mean_ctf, 12),
             fmt_opt(result.ci_low, 12), fmt_opt(result.ci_high, 12),
             std::to_string(manifest.seed)});
        plot_rows.push_back({group, std::string(label_slice_name(slice)),
                             result.n, result.mean_ctf, result.ci_low,
                             result.ci_high});
      }
    }
    write_text_file(manifest.out_dir / ("ctf_plot_" + provider + ".svg"),
                    render_ctf_plot(plot_rows, provider, svg_meta(manifest)));
    log << "[psa] " << provider << ": " << scored.size() << " pairs scored, "
        << failures << " failures\n";
  }

  write_csv_file(manifest.out_dir / "ctf_report.csv", manifest, report_header,
                 report_rows);
  return failures == 0 ? 0 : 1;
}

int cmd_shap(const AuditManifest& manifest, std::ostream& log) {
  manifest.validate();
  Runtime rt = make_runtime(manifest);
  std::filesystem::create_directories(manifest.out_dir);
  WordPieceVocab vocab = WordPieceVocab::load(manifest.vocab_file);
  EmbeddingTable embeddings = EmbeddingTable::load(manifest.embeddings_file);

  ShapOptions shap_options;
  shap_options.exact_cap = manifest.shap_exact_cap;
  shap_options.mask_token = manifest.mask_token;

  std::vector<Misclassification> fp_records, fn_records;
  std::vector<std::vector<std::string>> global_rows;
  std::size_t failures = 0;

  for (const std::string& provider : manifest.providers) {
    const ProviderSpec& spec = rt.registry.spec(provider);
    require_credential(manifest, spec);
    ScoreService svc(spec, rt.transport, rt.clock, manifest.cache_dir,
                     manifest.rate_override, rt.options);

    std::vector<TokenAttribution> fp_attrs, fn_attrs;
    for (const auto& dataset : manifest.datasets) {
      const std::string dsname = AuditManifest::dataset_name(dataset);
      std::vector<ScoredRow> rows = read_scored(manifest, provider, dsname);
      Corpus corpus = load_corpus(dataset, format_for(dataset), rt.groups);
      const CategoryMapping mapping = rt.registry.mapping(provider, dsname);

      std::ofstream dump(
          manifest.out_dir / ("shap_" + provider + "_" + dsname + ".jsonl"),
          std::ios::binary | std::ios::trunc);
      if (!dump) throw Error("cannot write attribution dump");
      json meta = meta_json(manifest);
      meta["provider"] = provider;
      meta["dataset"] = dsname;
      dump << meta.dump() << '\n';

      std::vector<HeatStrip> strips;
      for (const ScoredRow& row : rows) {
        const bool flagged = row.score >= manifest.threshold;
        const bool is_fp = flagged && row.gold == 0;
        const bool is_fn = !flagged && row.gold == 1;
        if (!is_fp && !is_fn) continue;
        const std::string& text = corpus.by_id(row.id).text;
        TokenSequence seq = tokenize(vocab, text, row.id);
        if (seq.tokens.empty()) continue;

        auto score_fn = [&](const std::string& t) {
          return to_verdict(svc.fetch(t), mapping, manifest.threshold).score;
        };
        TokenAttribution attr;
        try {
          if (seq.tokens.size() <= manifest.shap_exact_cap) {
            attr = shap_exact(score_fn, seq, shap_options);
          } else {
            attr = shap_sampled(
                score_fn, seq, static_cast<int>(manifest.shap_permutations),
                derive_seed(manifest.seed,
                            "shap:" + provider + ":" + dsname + ":" + row.id),
                shap_options);
          }
        } catch (const Error& e) {
          ++failures;
          json err{{"type", "error"}, {"id", row.id}, {"detail", e.what()}};
          dump << err.dump() << '\n';
          continue;
        }
        attr.provider_id = provider;

        json line{{"type", "attribution"},
                  {"id", attr.source_id},
                  {"tokens", attr.tokens},
                  {"shapley", attr.shapley},
                  {"base", attr.base_value},
                  {"full", attr.full_value},
                  {"mode", attr.mode == AttributionMode::exact ? "exact"
                                                               : "sampled"}};
        if (attr.mode == AttributionMode::sampled) {
          line["std_errors"] = attr.std_errors;
          line["n_samples"] = attr.n_samples;
          line["sample_seed"] = attr.seed;
        }
        dump << line.dump() << '\n';

        // Highest-|value| tokens, for the review sheet.
        std::vector<std::size_t> order(attr.tokens.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                           return std::abs(attr.shapley[a]) >
                                  std::abs(attr.shapley[b]);
                         });
        Misclassification record;
        record.id = row.id;
        record.dataset = dsname;
        record.provider = provider;
        record.text = text;
        record.score = row.score;
        record.gold_label = row.gold;
        for (std::size_t i = 0; i < std::min<std::size_t>(3, order.size());
             ++i) {
          record.top_tokens.push_back(attr.tokens[order[i]]);
        }
        record.kind = is_fp ? MisclassKind::fp : MisclassKind::fn;
        (is_fp ? fp_records : fn_records).push_back(std::move(record));

        if (strips.size() < 12) {
          strips.push_back(
              {row.id, merge_subwords(attr.tokens, attr.shapley)});
        }
        (is_fp ? fp_attrs : fn_attrs).push_back(std::move(attr));
      }
      dump.flush();
      if (!strips.empty()) {
        write_text_file(
            manifest.out_dir / ("heat_" + provider + "_" + dsname + ".svg"),
            render_heat_strips(strips, provider, svg_meta(manifest)));
      }
    }

    for (MisclassKind kind : {MisclassKind::fp, MisclassKind::fn}) {
      const auto& attrs = kind == MisclassKind::fp ? fp_attrs : fn_attrs;
      std::vector<TokenCluster> clusters = cluster_tokens(
          attrs, embeddings, manifest.cluster_sim_threshold);
      std::vector<TokenCluster> top =
          global_attributions(clusters, kind, manifest.top_k);
      for (std::size_t rank = 0; rank < top.size(); ++rank) {
        const TokenCluster& c = top[rank];
        std::string members;
        for (const std::string& member : c.members) {
          if (!members.empty()) members += ' ';
          members += member;
        }
        global_rows.push_back(
            {provider, kind == MisclassKind::fp ? "fp" : "fn",
             std::to_string(rank + 1), c.representative, members,
             fmt_fixed(c.mean_abs_shap, 6), fmt_fixed(c.mean_signed_shap, 6)});
      }
    }
    log << "[shap] " << provider << ": " << fp_attrs.size() << " FP and "
        << fn_attrs.size() << " FN attributions\n";
  }

  write_csv_file(manifest.out_dir / "global_shap.csv", manifest,
                 {"provider", "kind", "rank", "representative", "members",
                  "mean_abs_shap", "mean_signed_shap"},
                 global_rows);

  const std::vector<std::string> sheet_header = {
      "id",   "dataset", "provider",   "text",   "score",
      "gold", "top_tokens", "code_a", "code_b"};
  auto sheet_rows = [](const std::vector<CodingRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const CodingRow& r : rows) {
      out.push_back({r.id, r.dataset, r.provider, r.text,
                     fmt_fixed(r.score, 6), std::to_string(r.gold_label),
                     r.top_tokens, r.code_a, r.code_b});
    }
    return out;
  };
  write_csv_file(manifest.out_dir / "coding_fp.csv", manifest, sheet_header,
                 sheet_rows(sample_misclassifications(
                     fp_records, manifest.coding_rate, manifest.seed)));
  write_csv_file(manifest.out_dir / "coding_fn.csv", manifest, sheet_header,
                 sheet_rows(sample_misclassifications(
                     fn_records, manifest.coding_rate, manifest.seed)));
  return failures == 0 ? 0 : 1;
}

int cmd_report(const AuditManifest& manifest, std::ostream& log) {
  int status = cmd_query(manifest, log);
  if (manifest.run_metrics) status = std::max(status, cmd_metrics(manifest, log));
  if (manifest.run_psa) status = std::max(status, cmd_psa(manifest, log));
  if (manifest.run_shap) status = std::max(status, cmd_shap(manifest, log));

  std::vector<std::string> files;
  for (const auto& entry :
       std::filesystem::directory_iterator(manifest.out_dir)) {
    if (entry.is_regular_file() &&
        entry.path().filename() != "report_index.json") {
      files.push_back(entry.path().filename().string());
    }
  }
  std::sort(files.begin(), files.end());
  json index{{"tool", kToolName},
             {"version", kToolVersion},
             {"manifest_digest", manifest.digest},
             {"seed", manifest.seed},
             {"files", files}};
  write_text_file(manifest.out_dir / "report_index.json",
                  index.dump(2) + "\n");
  log << "[report] " << files.size() << " artifacts in "
      << manifest.out_dir.string() << "\n";
  return status;
}

}  // namespace modaudit
