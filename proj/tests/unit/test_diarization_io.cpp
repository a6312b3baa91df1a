#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "dyad/diarization_io.hpp"
#include "dyad/synthgen.hpp"
#include "support/helpers.hpp"

using namespace dyad;

TEST_CASE("rttm_speaker_line_maps_fields", "[io]") {
  const auto m = parse_rttm("SPEAKER rec1 1 5.00 2.50 <NA> <NA> spk1 <NA> <NA>\n");
  REQUIRE(m.size() == 1);
  const auto& t = m.at("rec1");
  REQUIRE(t.size() == 1);
  CHECK(t.segments()[0].onset == 5.0);
  CHECK(t.segments()[0].duration == 2.5);
  CHECK(t.segments()[0].speaker == "spk1");
  CHECK(t.segments()[0].id == "rec1_00000");
}

TEST_CASE("rttm_empty_input_gives_empty_map", "[io]") {
  CHECK(parse_rttm("").empty());
  CHECK(write_rttm({}).empty());
}

TEST_CASE("rttm_ignores_other_record_types", "[io]") {
  const auto m = parse_rttm(
      "SPKR-INFO rec1 1 <NA> <NA> <NA> unknown spk1 <NA> <NA>\n"
      "\n"
      "SPEAKER rec1 1 0.5 1.0 <NA> <NA> spk1 <NA> <NA>\n");
  REQUIRE(m.at("rec1").size() == 1);
}

TEST_CASE("rttm_malformed_line_reports_line_number", "[io]") {
  try {
    parse_rttm("SPEAKER rec1 1 0 1 <NA> <NA> a <NA> <NA>\nSPEAKER rec1 1 abc 2.5 <NA> <NA> a <NA> <NA>\n");
    FAIL("expected MalformedLine");
  } catch (const LineError& e) {
    CHECK(e.code() == Errc::MalformedLine);
    CHECK(e.line() == 2);
  }
  REQUIRE_ERRC(parse_rttm("SPEAKER rec1 1 0 1 <NA> <NA> a\n"), Errc::MalformedLine);
}

TEST_CASE("rttm_invalid_segment_values_are_rejected", "[io]") {
  REQUIRE_ERRC(parse_rttm("SPEAKER r 1 0 0 <NA> <NA> a <NA> <NA>\n"), Errc::NonPositiveDuration);
  REQUIRE_ERRC(parse_rttm("SPEAKER r 1 -1 2 <NA> <NA> a <NA> <NA>\n"), Errc::NegativeOnset);
}

TEST_CASE("rttm_write_requires_speaker_labels", "[io]") {
  const auto t = validate_timeline("r", {testing::seg(0, 1, std::nullopt, "x")}, 5.0);
  REQUIRE_ERRC(write_rttm({{"r", t}}), Errc::MissingSpeakerLabel);
}

TEST_CASE("rttm_write_uses_three_decimals_in_canonical_order", "[io]") {
  const auto t = validate_timeline(
      "r", {testing::seg(2.5, 1.25, "b", "y"), testing::seg(0.1, 2, "a", "x")}, 10.0);
  CHECK(write_rttm({{"r", t}}) ==
        "SPEAKER r 1 0.100 2.000 <NA> <NA> a <NA> <NA>\n"
        "SPEAKER r 1 2.500 1.250 <NA> <NA> b <NA> <NA>\n");
}

TEST_CASE("rttm_round_trip_is_byte_identical", "[io][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ConversationSpec spec;
    spec.recording_id = "rec" + std::to_string(seed);
    spec.n_speakers = 1 + static_cast<int>(seed % 4);
    spec.duration = 300.0;
    spec.overlap_prob = 0.2;
    spec.turn_model = TurnModel::Markov;
    spec.seed = seed;
    const std::map<std::string, Timeline> m{{spec.recording_id, gen_conversation(spec)}};
    const auto text = write_rttm(m);
    const auto parsed = parse_rttm(text);
    REQUIRE(write_rttm(parsed) == text);
    // Canonical ids survive the trip as well.
    REQUIRE(parsed.at(spec.recording_id).segments() == m.at(spec.recording_id).segments());
  }
}

TEST_CASE("embeddings_load_examples", "[io]") {
  const auto t = load_embeddings("s1,1.0,0.0\ns2,0.0,1.0");
  CHECK(t.dim() == 2);
  CHECK(t.size() == 2);
  REQUIRE(t.find("s2") != nullptr);
  CHECK((*t.find("s2"))[1] == 1.0);
  CHECK(t.find("s3") == nullptr);
}

TEST_CASE("embeddings_malformed_fixtures", "[io]") {
  REQUIRE_ERRC(load_embeddings("s1,1,0\ns2,1,0,0\n"), Errc::DimensionMismatch);
  REQUIRE_ERRC(load_embeddings("s1,0,0\n"), Errc::ZeroVector);
  REQUIRE_ERRC(load_embeddings("s1,1,0\ns1,0,1\n"), Errc::DuplicateSegmentId);
  REQUIRE_ERRC(load_embeddings("s1,1,x\n"), Errc::MalformedLine);
  REQUIRE_ERRC(load_embeddings("s1\n"), Errc::MalformedLine);
  REQUIRE_ERRC(load_embeddings(",1,2\n"), Errc::MalformedLine);
}

TEST_CASE("embeddings_write_then_load_preserves_entries", "[io]") {
  EmbeddingTable t;
  t.insert("a", {0.25, -1.5, 3.0});
  t.insert("b", {1e-3, 2.0, 0.0});
  const auto back = load_embeddings(write_embeddings(t));
  CHECK(back.entries() == t.entries());
}

TEST_CASE("embedding_subset_keeps_only_listed_segments", "[io]") {
  EmbeddingTable t;
  t.insert("a", {1, 0});
  t.insert("b", {0, 1});
  const std::vector<SpeechSegment> segs{testing::seg(0, 1, "x", "b"), testing::seg(1, 1, "x", "b"),
                                        testing::seg(2, 1, "x", "zz")};
  const auto sub = t.subset(segs);
  CHECK(sub.size() == 1);
  CHECK(sub.contains("b"));
}

namespace {

const char* kGoodManifest = R"({
  "recordings": [
    {"id": "r1", "rttm": "r1.rttm", "embeddings": "r1.emb", "split": "dev", "annotated": true},
    {"id": "r2", "rttm": "r2.rttm", "embeddings": "r2.emb", "duration": 1200}
  ],
  "participants": [
    {"id": "p1", "recordings": ["r2"], "severity": 10, "items": [1,1,1,1,1,1,1,1,2],
     "group": "depression"}
  ]
})";

}  // namespace

TEST_CASE("manifest_accepts_consistent_participant", "[io]") {
  const auto m = load_manifest(kGoodManifest);
  REQUIRE(m.recordings.size() == 2);
  CHECK(m.recordings[0].split == Split::Dev);
  CHECK(m.recordings[0].annotated);
  CHECK(m.recordings[1].split == Split::None);
  CHECK(m.recordings[1].duration == 1200.0);
  REQUIRE(m.participants.size() == 1);
  CHECK(m.participants[0].severity == 10);
  CHECK(m.participants[0].group == Group::Depression);
}

TEST_CASE("manifest_write_then_load_round_trips", "[io]") {
  const auto m = load_manifest(kGoodManifest);
  const auto text = write_manifest(m);
  CHECK(write_manifest(load_manifest(text)) == text);
}

TEST_CASE("manifest_malformed_fixtures", "[io]") {
  REQUIRE_ERRC(load_manifest(R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"}],
      "participants": [{"id": "p", "recordings": ["r1"], "severity": 10,
                        "items": [3,3,3,3,0,0,0,0,0]}]})"),
               Errc::ItemSumMismatch);
  REQUIRE_ERRC(load_manifest(R"({"recordings": [],
      "participants": [{"id": "p", "recordings": ["nope"]}]})"),
               Errc::UnknownRecordingRef);
  REQUIRE_ERRC(load_manifest("{not json"), Errc::MalformedManifest);
  REQUIRE_ERRC(load_manifest("{}"), Errc::MalformedManifest);
  REQUIRE_ERRC(load_manifest(R"({"recordings": [{"id": "r1"}]})"), Errc::MalformedManifest);
  REQUIRE_ERRC(load_manifest(R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b",
      "split": "train"}]})"),
               Errc::MalformedManifest);
  REQUIRE_ERRC(load_manifest(R"({"recordings": [
      {"id": "r1", "rttm": "a", "embeddings": "b"}, {"id": "r1", "rttm": "a", "embeddings": "b"}]})"),
               Errc::MalformedManifest);
  REQUIRE_ERRC(load_manifest(R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"}],
      "participants": [{"id": "p", "recordings": ["r1"], "items": [1,1,1]}]})"),
               Errc::MalformedManifest);
  REQUIRE_ERRC(load_manifest(R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"}],
      "participants": [{"id": "p", "recordings": ["r1"], "severity": 28}]})"),
               Errc::MalformedManifest);
}

TEST_CASE("missing_file_error_names_the_path", "[io]") {
  try {
    read_text_file("/nonexistent/dir/file.emb");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Io);
    CHECK(std::string(e.what()).find("/nonexistent/dir/file.emb") != std::string::npos);
  }
}

TEST_CASE("atomic_write_replaces_file_contents", "[io]") {
  const auto dir = std::filesystem::temp_directory_path() / "dyad_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.csv";
  write_text_file_atomic(path, "first\n");
  write_text_file_atomic(path, "second\n");
  CHECK(read_text_file(path) == "second\n");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++n;
  CHECK(n == 1);
  std::filesystem::remove_all(dir);
}
