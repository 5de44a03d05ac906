#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "modaudit/metrics.hpp"
#include "modaudit/rng.hpp"
#include "test_util.hpp"

using namespace modaudit;

namespace {

ScoredExample scored(std::string id, int gold, double score,
                     std::vector<std::string> groups = {}) {
  ScoredExample ex;
  ex.id = std::move(id);
  ex.gold_label = gold;
  ex.score = score;
  ex.groups = std::move(groups);
  ex.dataset = "unit";
  return ex;
}

// All-pairs definition: a random positive outranks a random negative, ties
// credited one half. Quadratic, so it lives here as the oracle only.
double brute_force_auc(const std::vector<ScoredExample>& v) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (const ScoredExample& pos : v) {
    if (pos.gold_label != 1) continue;
    for (const ScoredExample& neg : v) {
      if (neg.gold_label != 0) continue;
      ++pairs;
      if (pos.score > neg.score) {
        wins += 1.0;
      } else if (pos.score == neg.score) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

// Random instance with heavy ties and both classes guaranteed.
std::vector<ScoredExample> random_instance(Rng& rng, std::size_t max_n) {
  std::size_t n = 2 + rng.bounded(max_n - 1);
  std::vector<ScoredExample> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    int gold = i == 0 ? 1 : (i == 1 ? 0 : static_cast<int>(rng.bounded(2)));
    double score = static_cast<double>(rng.bounded(11)) / 10.0;
    v.push_back(scored("e" + std::to_string(i), gold, score));
  }
  return v;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("confusion counts flag at score >= threshold") {
    std::vector<ScoredExample> v = {
        scored("a", 1, 0.9),   // tp
        scored("b", 1, 0.5),   // tp (boundary flags)
        scored("c", 1, 0.49),  // fn
        scored("d", 0, 0.5),   // fp (boundary flags)
        scored("e", 0, 0.1),   // tn
        scored("f", 0, 0.2),   // tn
    };
    ConfusionCounts c = confusion(v, 0.5);
    CHECK(c.tp == 2);
    CHECK(c.fn == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 2);
    CHECK(c.total() == 6);
    CHECK_THROWS_AS(confusion(std::vector<ScoredExample>{}, 0.5), EmptyInput);
  }

  TEST_CASE("threshold metrics on a hand-checked table") {
    ConfusionCounts c{/*tp=*/6, /*fp=*/2, /*tn=*/8, /*fn=*/4};
    ThresholdMetrics m = threshold_metrics(c);
    CHECK(*m.acc == doctest::Approx(14.0 / 20.0));
    CHECK(*m.tpr == doctest::Approx(0.6));
    CHECK(*m.fnr == doctest::Approx(0.4));
    CHECK(*m.fpr == doctest::Approx(0.2));
    CHECK(*m.f1 == doctest::Approx(12.0 / 18.0));
  }

  TEST_CASE("zero denominators leave metrics unset instead of faking zeros") {
    ThresholdMetrics no_pos = threshold_metrics(ConfusionCounts{0, 0, 5, 0});
    CHECK_FALSE(no_pos.tpr.has_value());
    CHECK_FALSE(no_pos.fnr.has_value());
    CHECK_FALSE(no_pos.f1.has_value());  // 2tp+fp+fn == 0
    REQUIRE(no_pos.fpr.has_value());
    CHECK(*no_pos.fpr == doctest::Approx(0.0));
    CHECK(*no_pos.acc == doctest::Approx(1.0));

    ThresholdMetrics no_neg = threshold_metrics(ConfusionCounts{3, 0, 0, 1});
    CHECK_FALSE(no_neg.fpr.has_value());
    CHECK(no_neg.tpr.has_value());

    CHECK_THROWS_AS(threshold_metrics(ConfusionCounts{}), EmptyInput);
  }

  TEST_CASE("metric identities hold on fuzzed confusion tables") {
    Rng rng(101);
    for (int trial = 0; trial < 500; ++trial) {
      ConfusionCounts c{rng.bounded(50), rng.bounded(50), rng.bounded(50),
                        rng.bounded(50)};
      if (c.total() == 0) continue;
      ThresholdMetrics m = threshold_metrics(c);
      if (c.tp + c.fn > 0) {
        REQUIRE(m.tpr.has_value());
        REQUIRE(m.fnr.has_value());
        CHECK(*m.tpr + *m.fnr == doctest::Approx(1.0).epsilon(1e-12));
      }
      REQUIRE(m.acc.has_value());
      CHECK(*m.acc == doctest::Approx(static_cast<double>(c.tp + c.tn) /
                                      static_cast<double>(c.total())));
      if (2 * c.tp + c.fp + c.fn > 0) {
        CHECK(*m.f1 == doctest::Approx(2.0 * static_cast<double>(c.tp) /
                                       static_cast<double>(2 * c.tp + c.fp +
                                                           c.fn)));
      }
    }
  }

  TEST_CASE("rank-sum AUC matches the all-pairs oracle under heavy ties") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
      auto v = random_instance(rng, 150);
      double fast = roc_auc(v);
      double slow = brute_force_auc(v);
      CHECK(std::abs(fast - slow) <= 1e-12);
    }
  }

  TEST_CASE("AUC depends only on the score ordering") {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
      auto v = random_instance(rng, 80);
      double base = roc_auc(v);

      auto affine = v;
      for (auto& ex : affine) ex.score = 0.2 + ex.score / 3.0;
      CHECK(roc_auc(affine) == base);  // identical ranks, identical bits

      auto cubed = v;
      for (auto& ex : cubed) ex.score = ex.score * ex.score * ex.score;
      CHECK(roc_auc(cubed) == base);
    }
  }

  TEST_CASE("negating the labels complements the AUC") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      auto v = random_instance(rng, 80);
      double base = roc_auc(v);
      auto flipped = v;
      for (auto& ex : flipped) ex.gold_label = 1 - ex.gold_label;
      CHECK(std::abs(roc_auc(flipped) - (1.0 - base)) <= 1e-12);
    }
  }

  TEST_CASE("perfect, inverted and uninformative rankings") {
    std::vector<ScoredExample> perfect = {scored("a", 0, 0.1), scored("b", 0, 0.2),
                                          scored("c", 1, 0.8), scored("d", 1, 0.9)};
    CHECK(roc_auc(perfect) == doctest::Approx(1.0));
    std::vector<ScoredExample> inverted = {scored("a", 1, 0.1), scored("b", 0, 0.9)};
    CHECK(roc_auc(inverted) == doctest::Approx(0.0));
    std::vector<ScoredExample> constant = {scored("a", 1, 0.5), scored("b", 0, 0.5),
                                           scored("c", 1, 0.5)};
    CHECK(roc_auc(constant) == doctest::Approx(0.5));
    std::vector<ScoredExample> one_class = {scored("a", 1, 0.5), scored("b", 1, 0.6)};
    CHECK_THROWS_AS(roc_auc(one_class), OneClassOnly);
    CHECK_THROWS_AS(roc_auc(std::vector<ScoredExample>{}), OneClassOnly);
  }

  TEST_CASE("pinning a group that is the whole dataset reproduces the aggregate") {
    Rng rng(9001);
    std::vector<ScoredExample> all;
    for (int i = 0; i < 60; ++i) {
      int gold = i < 2 ? i : static_cast<int>(rng.bounded(2));
      all.push_back(scored("e" + std::to_string(i), gold,
                           static_cast<double>(rng.bounded(11)) / 10.0, {"g"}));
    }
    double aggregate = roc_auc(all);
    PinnedAucEstimate est = pinned_auc(all, "g", 20, 12345);
    // Every background draw is the full dataset, so each repeat scores the
    // duplicated multiset — rank arithmetic makes that bit-identical to the
    // plain AUC, and the spread collapses to exactly zero.
    CHECK(est.mean_auc == aggregate);
    REQUIRE(est.std_error.has_value());
    CHECK(*est.std_error == 0.0);
    CHECK(est.repeats == 20);
    CHECK(est.slice_size == all.size());
  }

  TEST_CASE("pinned AUC is deterministic in the seed") {
    Rng rng(31);
    std::vector<ScoredExample> all;
    for (int i = 0; i < 80; ++i) {
      std::vector<std::string> groups;
      if (i % 3 == 0) groups.push_back("g");
      int gold = (i % 3 == 0) ? (i % 2) : static_cast<int>(rng.bounded(2));
      all.push_back(scored("e" + std::to_string(i), gold,
                           static_cast<double>(rng.bounded(11)) / 10.0,
                           std::move(groups)));
    }

    PinnedAucEstimate a = pinned_auc(all, "g", 10, 99);
    PinnedAucEstimate b = pinned_auc(all, "g", 10, 99);
    CHECK(a.mean_auc == b.mean_auc);
    CHECK(a.repeat_values == b.repeat_values);
    REQUIRE(a.std_error.has_value());
    CHECK(*a.std_error == *b.std_error);

    bool seed_matters = false;
    for (std::uint64_t seed = 1; seed <= 8 && !seed_matters; ++seed) {
      seed_matters = pinned_auc(all, "g", 10, seed).repeat_values != a.repeat_values;
    }
    CHECK(seed_matters);

    PinnedAucEstimate single = pinned_auc(all, "g", 1, 99);
    CHECK_FALSE(single.std_error.has_value());
    CHECK(single.repeat_values.size() == 1);
  }

  TEST_CASE("pinned AUC failure modes") {
    std::vector<ScoredExample> all = {scored("a", 1, 0.9, {"g"}),
                                      scored("b", 1, 0.8, {"g"}),
                                      scored("c", 0, 0.1)};
    CHECK_THROWS_AS(pinned_auc(all, "g", 5, 1), OneClassOnly);   // one-class slice
    CHECK_THROWS_AS(pinned_auc(all, "h", 5, 1), OneClassOnly);   // empty slice
    CHECK_THROWS_AS(pinned_auc(all, "g", 0, 1), MetricError);    // bad repeats
  }

  TEST_CASE("equality-of-odds gaps subtract the aggregate row") {
    MetricsReport agg;
    agg.provider_id = "mock";
    agg.dataset = "unit";
    agg.slice = kAggregateSlice;
    agg.fpr = 0.2;
    agg.fnr = 0.1;

    MetricsReport a;
    a.slice = "alpha";
    a.fpr = 0.5;
    a.fnr = std::nullopt;  // undefined upstream stays undefined here

    MetricsReport b;
    b.slice = "beta";
    b.fpr = 0.15;
    b.fnr = 0.4;

    auto gaps = equality_of_odds_gaps({agg, a, b});
    REQUIRE(gaps.count("alpha") == 1);
    REQUIRE(gaps.count("beta") == 1);
    CHECK(*gaps.at("alpha").fpr_gap == doctest::Approx(0.3));
    CHECK_FALSE(gaps.at("alpha").fnr_gap.has_value());
    CHECK(*gaps.at("beta").fpr_gap == doctest::Approx(-0.05));
    CHECK(*gaps.at("beta").fnr_gap == doctest::Approx(0.3));

    CHECK_THROWS_AS(equality_of_odds_gaps({a, b}), MissingAggregate);
  }
}
