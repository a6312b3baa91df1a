#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dyad/clustering.hpp"
#include "dyad/synthgen.hpp"
#include "support/helpers.hpp"

using namespace dyad;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// True speaker partition and clustered partition, as sets of id sets.
bool recovers_partition(const Timeline& t, const ClusterAssignment& c) {
  std::map<std::string, std::set<std::string>> truth;
  std::map<int, std::set<std::string>> found;
  for (const auto& s : t.segments()) {
    truth[*s.speaker].insert(s.id);
    found[c.assignment.at(s.id)].insert(s.id);
  }
  std::set<std::set<std::string>> a, b;
  for (auto& [k, v] : truth) a.insert(v);
  for (auto& [k, v] : found) b.insert(v);
  return a == b;
}

}  // namespace

TEST_CASE("single_speaker_conversation_labels", "[synthgen]") {
  ConversationSpec spec;
  spec.n_speakers = 1;
  spec.speaker_names = {"only"};
  spec.seed = 3;
  const auto t = gen_conversation(spec);
  REQUIRE(t.size() > 10);
  for (const auto& s : t.segments()) CHECK(s.speaker == "only");
}

TEST_CASE("conversation_is_deterministic", "[synthgen]") {
  ConversationSpec spec;
  spec.n_speakers = 3;
  spec.turn_model = TurnModel::Markov;
  spec.overlap_prob = 0.1;
  spec.seed = 11;
  CHECK(gen_conversation(spec).segments() == gen_conversation(spec).segments());
  auto other = spec;
  other.seed = 12;
  CHECK(gen_conversation(spec).segments() != gen_conversation(other).segments());
}

TEST_CASE("conversation_stays_inside_its_span", "[synthgen]") {
  ConversationSpec spec;
  spec.offset = 120.0;
  spec.duration = 300.0;
  spec.overlap_prob = 0.2;
  spec.seed = 5;
  const auto t = gen_conversation(spec);
  CHECK(t.total_duration() == 420.0);
  for (const auto& s : t.segments()) {
    CHECK(s.onset >= 120.0);
    CHECK(s.end() <= 420.0);
  }
}

TEST_CASE("invalid_conversation_specs", "[synthgen]") {
  ConversationSpec spec;
  spec.n_speakers = 0;
  REQUIRE_ERRC(gen_conversation_segments(spec), Errc::InvalidArgument);
  spec = {};
  spec.mean_utterance = 0.0;
  REQUIRE_ERRC(gen_conversation_segments(spec), Errc::InvalidArgument);
  spec = {};
  spec.overlap_prob = 1.5;
  REQUIRE_ERRC(gen_conversation_segments(spec), Errc::InvalidArgument);
  spec = {};
  spec.speaker_names = {"a"};
  REQUIRE_ERRC(gen_conversation_segments(spec), Errc::InvalidArgument);
}

TEST_CASE("response_gap_matches_configured_mean", "[synthgen][slow]") {
  double sum = 0.0;
  long n = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ConversationSpec spec;
    spec.mean_response_gap = 1.2;
    spec.seed = seed;
    const auto t = gen_conversation(spec);
    const auto& segs = t.segments();
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (segs[i].speaker == segs[i - 1].speaker) continue;
      sum += segs[i].onset - segs[i - 1].end();
      ++n;
    }
  }
  REQUIRE(n > 1000);
  CHECK(std::abs(sum / n - 1.2) <= 0.2);
}

TEST_CASE("utterance_length_within_three_standard_errors", "[synthgen]") {
  ConversationSpec spec;
  spec.mean_utterance = 2.5;
  spec.duration = 6000.0;
  spec.seed = 9;
  const auto t = gen_conversation(spec);
  REQUIRE(t.size() > 1001);
  double sum = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) sum += t.segments()[i].duration;
  const double se = spec.mean_utterance / std::sqrt(1000.0);
  CHECK(std::abs(sum / 1000.0 - spec.mean_utterance) <= 3.0 * se);
}

TEST_CASE("noise_free_embeddings_repeat_the_centroid", "[synthgen]") {
  ConversationSpec conv;
  conv.seed = 1;
  const auto t = gen_conversation(conv);
  EmbeddingSpec es;
  es.intra_noise = 0.0;
  es.centroid_min_distance = 1.0;
  es.seed = 2;
  const auto e = gen_embeddings(t, es);
  std::map<std::string, std::vector<double>> first;
  for (const auto& s : t.segments()) {
    const auto& v = *e.find(s.id);
    auto [it, fresh] = first.emplace(*s.speaker, v);
    if (!fresh) REQUIRE(it->second == v);
  }
  REQUIRE(first.size() == 2);
  CHECK(cosine_distance(first.begin()->second, std::next(first.begin())->second) >= 1.0);
}

TEST_CASE("centroids_respect_min_distance", "[synthgen]") {
  Pcg32 rng(4);
  const auto c = place_centroids(6, 16, 0.8, rng);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double norm = 0.0;
    for (double x : c[i]) norm += x * x;
    CHECK(norm == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t j = i + 1; j < c.size(); ++j) CHECK(cosine_distance(c[i], c[j]) >= 0.8);
  }
  Pcg32 rng2(4);
  REQUIRE_ERRC(place_centroids(5, 2, 1.9, rng2, {}, 200), Errc::CentroidPlacementFailure);
}

TEST_CASE("clustering_recovers_generated_speakers", "[synthgen][slow]") {
  int recovered = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    ConversationSpec conv;
    conv.n_speakers = 1 + static_cast<int>(trial % 4);
    conv.duration = 300.0;
    conv.turn_model = TurnModel::Markov;
    conv.seed = 1000 + trial;
    const auto t = gen_conversation(conv);
    EmbeddingSpec es;
    es.seed = 2000 + trial;
    const auto e = gen_embeddings(t, es);
    recovered += recovers_partition(t, cluster_segments(e, 0.4));
  }
  CHECK(recovered >= 99);
}

TEST_CASE("spurious_segments_leave_their_speaker", "[synthgen]") {
  ConversationSpec conv;
  conv.seed = 3;
  const auto t = gen_conversation(conv);
  EmbeddingSpec es;
  es.spurious_rate = 0.5;
  es.seed = 4;
  const auto e = gen_embeddings(t, es);
  const auto c = cluster_segments(e, 0.4);
  CHECK(c.n_clusters > 2);
  es.spurious_magnitude = 0.01;
  REQUIRE_ERRC(gen_embeddings(t, es), Errc::InvalidArgument);
}

TEST_CASE("detection_corpus_layout", "[synthgen]") {
  DetectionCorpusSpec spec;
  spec.n_recordings = 6;
  spec.duration = 400.0;
  const auto corpus = gen_detection_corpus(spec);
  REQUIRE(corpus.manifest.recordings.size() == 6);
  CHECK(corpus.manifest.recordings[0].id == "rec000");
  CHECK(corpus.manifest.recordings[0].split == Split::Dev);
  CHECK(corpus.manifest.recordings[1].split == Split::Eval);
  const auto again = gen_detection_corpus(spec, 3);
  for (const auto& [id, rec] : corpus.recordings) {
    CHECK(rec.timeline.segments() == again.recordings.at(id).timeline.segments());
  }
}

TEST_CASE("cohort_written_twice_is_identical", "[synthgen]") {
  CohortSpec spec;
  spec.n_participants = 4;
  spec.recordings_per_participant = 1;
  spec.windows_per_recording = 2;
  const auto a = gen_cohort(spec);
  const auto b = gen_cohort(spec, 2);
  const fs::path dir = fs::temp_directory_path() / "dyad_test_cohort";
  fs::remove_all(dir);
  write_corpus(a, dir / "a");
  write_corpus(b, dir / "b");
  REQUIRE(a.manifest.participants.size() == 4);
  for (const auto& p : a.manifest.participants) {
    REQUIRE(p.severity);
    REQUIRE(p.items);
    int sum = 0;
    for (int v : *p.items) sum += v;
    CHECK(sum == *p.severity);
  }
  int files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(entry.path(), dir / "a");
    CHECK(slurp(entry.path()) == slurp(dir / "b" / rel));
  }
  CHECK(files == 1 + 2 * 4);
  fs::remove_all(dir);
}

TEST_CASE("simulate_config_parsing", "[synthgen]") {
  const auto d = parse_simulate_config(R"({"kind": "detection", "n_recordings": 10, "seed": 7,
                                           "embedding": {"dim": 8}})");
  REQUIRE(std::holds_alternative<DetectionCorpusSpec>(d));
  CHECK(std::get<DetectionCorpusSpec>(d).n_recordings == 10);
  CHECK(std::get<DetectionCorpusSpec>(d).embedding.dim == 8);
  const auto c = parse_simulate_config(R"({"kind": "cohort", "null_model": true})");
  REQUIRE(std::holds_alternative<CohortSpec>(c));
  CHECK(std::get<CohortSpec>(c).ratio_model == RatioModel::Null);
  CHECK(std::get<CohortSpec>(c).response_slope == 0.0);

  REQUIRE_ERRC(parse_simulate_config(R"({"kind": "party"})"), Errc::MalformedManifest);
  REQUIRE_ERRC(parse_simulate_config(R"({"kind": "detection", "colour": 1})"),
               Errc::MalformedManifest);
  REQUIRE_ERRC(parse_simulate_config("{not json"), Errc::MalformedManifest);
}
