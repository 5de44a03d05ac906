#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "modaudit/cluster.hpp"
#include "test_util.hpp"

using namespace modaudit;

namespace {

TokenAttribution attribution(std::vector<std::string> tokens,
                             std::vector<double> shapley) {
  TokenAttribution a;
  a.tokens = std::move(tokens);
  a.shapley = std::move(shapley);
  return a;
}

EmbeddingTable gendered_embeddings() {
  return EmbeddingTable::from_entries({
      {"woman", {1.0, 0.0}},
      {"women", {0.98, 0.199}},   // cos with "woman" ~ 0.98
      {"bridge", {0.0, 1.0}},     // orthogonal to both
  });
}

}  // namespace

TEST_SUITE("cluster") {
  TEST_CASE("cosine similarity basics") {
    CHECK(cosine_similarity({1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine_similarity({1, 0}, {-1, 0}) == doctest::Approx(-1.0));
    CHECK(cosine_similarity({2, 0}, {5, 0}) == doctest::Approx(1.0));
    // Zero vectors have no direction: similarity is defined to zero.
    CHECK(cosine_similarity({0, 0}, {1, 0}) == doctest::Approx(0.0));
  }

  TEST_CASE("embedding table lookup and dimensions") {
    EmbeddingTable table = gendered_embeddings();
    CHECK(table.size() == 3);
    CHECK(table.dimension() == 2);
    REQUIRE(table.get("woman") != nullptr);
    CHECK((*table.get("woman"))[0] == doctest::Approx(1.0));
    CHECK(table.get("absent") == nullptr);
  }

  TEST_CASE("loading a table averages duplicate rows and checks dimensions") {
    testutil::TempDir tmp("embed");
    auto path = testutil::write_file(tmp.path() / "vec.txt",
                                     "tok 1.0 0.0\n"
                                     "other 0.0 2.0\n"
                                     "tok 0.0 1.0\n");
    EmbeddingTable table = EmbeddingTable::load(path);
    CHECK(table.size() == 2);
    REQUIRE(table.get("tok") != nullptr);
    CHECK((*table.get("tok"))[0] == doctest::Approx(0.5));
    CHECK((*table.get("tok"))[1] == doctest::Approx(0.5));

    auto bad_dim = testutil::write_file(tmp.path() / "bad_dim.txt",
                                        "a 1.0 2.0\nb 1.0\n");
    CHECK_THROWS_AS(EmbeddingTable::load(bad_dim), Error);

    auto bad_num = testutil::write_file(tmp.path() / "bad_num.txt",
                                        "a 1.0 zebra\n");
    CHECK_THROWS_AS(EmbeddingTable::load(bad_num), Error);

    CHECK_THROWS_AS(EmbeddingTable::load(tmp.path() / "missing.txt"), Error);
  }

  TEST_CASE("similar tokens merge; tokens without vectors stand alone") {
    std::vector<TokenAttribution> attrs = {
        attribution({"woman", "kind"}, {0.4, 0.1}),
        attribution({"women", "kind"}, {0.2, -0.3}),
        attribution({"bridge"}, {-0.05}),
    };
    auto clusters = cluster_tokens(attrs, gendered_embeddings(), 0.9);
    REQUIRE(clusters.size() == 3);

    // Sorted by pooled |attribution| descending.
    CHECK(clusters[0].representative == "woman");
    CHECK(clusters[0].members == std::vector<std::string>{"woman", "women"});
    CHECK(clusters[0].mean_abs_shap == doctest::Approx(0.3));  // (0.4 + 0.2)/2
    CHECK(clusters[0].mean_signed_shap == doctest::Approx(0.3));
    CHECK(clusters[0].direction == ClusterDirection::toward_hate);

    // "kind" has no embedding: a singleton pooling its two occurrences.
    CHECK(clusters[1].representative == "kind");
    CHECK(clusters[1].mean_abs_shap == doctest::Approx(0.2));   // (0.1+0.3)/2
    CHECK(clusters[1].mean_signed_shap == doctest::Approx(-0.1));
    CHECK(clusters[1].direction == ClusterDirection::toward_non_hate);

    CHECK(clusters[2].representative == "bridge");
    CHECK(clusters[2].direction == ClusterDirection::toward_non_hate);
  }

  TEST_CASE("components chain through intermediate neighbors") {
    // a~b and b~c clear the threshold, a~c does not; one component anyway.
    const double rad20 = 20.0 * 3.14159265358979323846 / 180.0;
    const double rad40 = 2.0 * rad20;
    EmbeddingTable table = EmbeddingTable::from_entries({
        {"a", {1.0, 0.0}},
        {"b", {std::cos(rad20), std::sin(rad20)}},
        {"c", {std::cos(rad40), std::sin(rad40)}},
    });
    std::vector<TokenAttribution> attrs = {
        attribution({"a", "b", "c"}, {0.1, 0.2, 0.3})};
    auto clusters = cluster_tokens(attrs, table, 0.9);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].members == std::vector<std::string>{"a", "b", "c"});
    CHECK(clusters[0].representative == "c");  // largest per-token |mean|
    CHECK(clusters[0].mean_abs_shap == doctest::Approx(0.2));
  }

  TEST_CASE("ties in pooled weight break lexicographically") {
    EmbeddingTable empty = EmbeddingTable::from_entries({});
    std::vector<TokenAttribution> attrs = {
        attribution({"zeta", "apple"}, {0.25, 0.25})};
    auto clusters = cluster_tokens(attrs, empty, 0.9);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].representative == "apple");
    CHECK(clusters[1].representative == "zeta");
  }

  TEST_CASE("global rankings keep only the erroneous direction") {
    EmbeddingTable empty = EmbeddingTable::from_entries({});
    std::vector<TokenAttribution> attrs = {
        attribution({"push", "pull", "drift", "sink"},
                    {0.5, -0.4, 0.3, -0.2})};
    auto clusters = cluster_tokens(attrs, empty, 0.9);
    REQUIRE(clusters.size() == 4);

    auto fp_view = global_attributions(clusters, MisclassKind::fp, 5);
    REQUIRE(fp_view.size() == 2);  // only toward_hate survives
    CHECK(fp_view[0].representative == "push");
    CHECK(fp_view[1].representative == "drift");

    auto fn_view = global_attributions(clusters, MisclassKind::fn, 5);
    REQUIRE(fn_view.size() == 2);
    CHECK(fn_view[0].representative == "pull");
    CHECK(fn_view[1].representative == "sink");

    auto top1 = global_attributions(clusters, MisclassKind::fp, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].representative == "push");
  }

  TEST_CASE("no attributions, no clusters") {
    EmbeddingTable table = gendered_embeddings();
    CHECK(cluster_tokens(std::vector<TokenAttribution>{}, table, 0.9).empty());
  }
}
