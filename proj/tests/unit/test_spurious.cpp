#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "dyad/spurious.hpp"
#include "dyad/synthgen.hpp"
#include "support/helpers.hpp"

using namespace dyad;
using testing::seg;

namespace {

// Two orthogonal speakers plus one off-axis noise segment.
struct Fixture {
  EmbeddingTable e;
  std::vector<SpeechSegment> segs;
};

Fixture three_cluster_fixture(double noise_duration) {
  Fixture f;
  f.segs = {seg(0, 100, "a", "a1"), seg(100, 100, "a", "a2"), seg(200, 100, "b", "b1"),
            seg(300, 100, "b", "b2"), seg(400, noise_duration, "a", "n1")};
  f.e.insert("a1", {1, 0, 0});
  f.e.insert("a2", {1, 0.01, 0});
  f.e.insert("b1", {0, 1, 0});
  f.e.insert("b2", {0.01, 1, 0});
  f.e.insert("n1", {0.2, 0, 1});
  return f;
}

}  // namespace

TEST_CASE("single_cluster_holds_all_speech", "[spurious]") {
  EmbeddingTable e;
  e.insert("x", {1, 0});
  e.insert("y", {1, 0});
  const std::vector<SpeechSegment> segs{seg(0, 3, "a", "x"), seg(4, 1, "a", "y")};
  const auto c = cluster_segments(e, 0.5);
  const auto f = compute_cluster_features(c, e, segs);
  REQUIRE(f.size() == 1);
  CHECK(f[0].speech_share == 1.0);
  CHECK(f[0].n_segments == 2);
  CHECK(f[0].mean_intra_distance == 0.0);
  CHECK(f[0].min_centroid_distance == kSingleClusterCentroidDistance);
  CHECK(f[0].mean_segment_duration == 2.0);
}

TEST_CASE("speech_shares_follow_cluster_time", "[spurious]") {
  EmbeddingTable e;
  e.insert("x", {1, 0});
  e.insert("y", {0, 1});
  const std::vector<SpeechSegment> segs{seg(0, 540, "a", "x"), seg(540, 60, "b", "y")};
  const auto f = compute_cluster_features(cluster_segments(e, 0.5), e, segs);
  REQUIRE(f.size() == 2);
  CHECK(f[0].speech_share == Catch::Approx(0.9));
  CHECK(f[1].speech_share == Catch::Approx(0.1));
  CHECK(f[0].min_centroid_distance == Catch::Approx(1.0));
}

TEST_CASE("features_reject_mismatched_inputs", "[spurious]") {
  auto f = three_cluster_fixture(5);
  const auto c = cluster_segments(f.e, 0.3);
  f.segs.pop_back();
  REQUIRE_ERRC(compute_cluster_features(c, f.e, f.segs), Errc::InconsistentInputs);
}

TEST_CASE("filter_without_flags_is_identity", "[spurious]") {
  const auto f = three_cluster_fixture(50);
  const auto c = cluster_segments(f.e, 0.3);
  const auto feats = compute_cluster_features(c, f.e, f.segs);
  CHECK(filter_spurious(c, feats, SpuriousMode::off(), f.e) == c);
  CHECK(filter_spurious(c, feats, SpuriousMode::heuristic(), f.e) == c);
}

TEST_CASE("low_share_noise_cluster_is_removed_and_reassigned", "[spurious]") {
  const auto f = three_cluster_fixture(8);  // 8 / 408 < 0.05
  const auto c = cluster_segments(f.e, 0.3);
  REQUIRE(c.n_clusters == 3);
  const auto feats = compute_cluster_features(c, f.e, f.segs);
  const auto out = filter_spurious(c, feats, SpuriousMode::heuristic(), f.e);
  CHECK(out.n_clusters == 2);
  CHECK(out.assignment.size() == c.assignment.size());
  CHECK(out.assignment.at("n1") == out.assignment.at("a1"));
}

TEST_CASE("all_flagged_keeps_largest_cluster", "[spurious]") {
  const auto f = three_cluster_fixture(8);
  const auto c = cluster_segments(f.e, 0.3);
  const auto feats = compute_cluster_features(c, f.e, f.segs);
  const auto out = filter_spurious(c, feats, SpuriousMode::heuristic(0.99), f.e);
  CHECK(out.n_clusters == 1);
}

TEST_CASE("spurious_mode_parsing", "[spurious]") {
  CHECK(SpuriousMode::parse("off").kind == SpuriousMode::Kind::Off);
  CHECK(SpuriousMode::parse("heuristic").kind == SpuriousMode::Kind::Heuristic);
  REQUIRE_ERRC(SpuriousMode::parse("sometimes"), Errc::InvalidArgument);
  REQUIRE_ERRC(SpuriousMode::parse("model="), Errc::InvalidArgument);
  REQUIRE_ERRC(SpuriousMode::parse("model=/nonexistent/model.json"), Errc::Io);
}

TEST_CASE("labels_mark_duplicate_and_unannotated_clusters", "[spurious]") {
  const auto f = three_cluster_fixture(8);
  const auto c = cluster_segments(f.e, 0.3);
  const auto labels = label_spurious_clusters(c, f.segs);
  // Clusters in smallest-member order: {a1,a2}, {b1,b2}, {n1}.
  CHECK(labels == std::vector<int>{0, 0, 1});
}

TEST_CASE("clean_corpus_yields_single_class", "[spurious]") {
  ConversationSpec conv;
  conv.duration = 300;
  conv.seed = 1;
  const auto t = gen_conversation(conv);
  EmbeddingSpec es;
  es.seed = 2;
  const auto e = gen_embeddings(t, es);
  const auto c = cluster_segments(e, 0.4);
  const std::vector<SpuriousTrainingItem> items{{&c, &e, t.segments()}};
  REQUIRE_ERRC(train_spurious_model(items, ForestConfig{}), Errc::SingleClass);
}

TEST_CASE("spurious_model_learns_noise_clusters", "[spurious]") {
  std::vector<Timeline> timelines;
  std::vector<EmbeddingTable> tables;
  std::vector<ClusterAssignment> clusters;
  for (std::uint64_t s = 0; s < 30; ++s) {
    ConversationSpec conv;
    conv.n_speakers = 1 + static_cast<int>(s % 3);
    conv.duration = 600;
    conv.turn_model = TurnModel::Markov;
    conv.seed = s;
    timelines.push_back(gen_conversation(conv));
    EmbeddingSpec es;
    es.spurious_rate = 0.1;
    es.seed = 100 + s;
    tables.push_back(gen_embeddings(timelines.back(), es));
  }
  for (std::size_t i = 0; i < tables.size(); ++i) clusters.push_back(cluster_segments(tables[i], 0.4));

  std::vector<std::vector<double>> X;
  std::vector<int> y;
  std::vector<SpuriousTrainingItem> items;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    items.push_back({&clusters[i], &tables[i], timelines[i].segments()});
    const auto feats = compute_cluster_features(clusters[i], tables[i], timelines[i].segments());
    const auto labels = label_spurious_clusters(clusters[i], timelines[i].segments());
    for (std::size_t k = 0; k < feats.size(); ++k) {
      X.push_back(feats[k].as_row());
      y.push_back(labels[k]);
    }
  }
  ForestConfig cfg;
  cfg.seed = 4;
  CHECK(cross_validate(X, y, cfg, 5) >= 0.9);

  const auto model = std::make_shared<const Forest>(train_spurious_model(items, cfg));
  const auto mode = SpuriousMode::with_model(model);
  int correct = 0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto feats = compute_cluster_features(clusters[i], tables[i], timelines[i].segments());
    const int n = filter_spurious(clusters[i], feats, mode, tables[i]).n_clusters;
    correct += n == 1 + static_cast<int>(i % 3);
  }
  CHECK(correct >= 27);
}
