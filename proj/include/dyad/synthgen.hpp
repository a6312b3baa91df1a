#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dyad/diarization_io.hpp"
#include "dyad/rng.hpp"
#include "dyad/timeline.hpp"

namespace dyad {

// ---------------------------------------------------------------------------
// Conversations
// ---------------------------------------------------------------------------

enum class TurnModel { RoundRobin, Markov };

struct ConversationSpec {
  std::string recording_id = "rec";
  int n_speakers = 2;
  std::vector<std::string> speaker_names;  // defaults to spk0, spk1, ...
  double duration = 600.0;                 // seconds of conversation
  double offset = 0.0;                     // conversation occupies [offset, offset + duration)
  double mean_utterance = 2.0;
  double mean_pause = 0.6;         // same-speaker gap
  double mean_response_gap = 1.0; // speaker-change gap
  std::vector<double> response_gap_by_speaker;  // optional per-responder override
  double overlap_prob = 0.0;
  TurnModel turn_model = TurnModel::RoundRobin;
  double self_transition = 0.3;  // Markov only
  std::uint64_t seed = 0;
};

/// Raw labeled segments, times rounded to milliseconds, ids unset.
/// Throws InvalidArgument for an invalid spec.
std::vector<SpeechSegment> gen_conversation_segments(const ConversationSpec& spec);

/// Validated timeline over [0, offset + duration) with canonical segment ids.
Timeline gen_conversation(const ConversationSpec& spec);

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

struct EmbeddingSpec {
  int dim = 16;
  double centroid_min_distance = 0.8;
  double intra_noise = 0.05;       // per-component std of the perturbation
  double spurious_rate = 0.0;      // share of segments displaced off-manifold
  double spurious_magnitude = 3.0; // length of the displacement; >= 2 * intra_noise
  int max_placement_tries = 10000;
  std::uint64_t seed = 0;
};

/// Unit vectors with pairwise cosine distance >= min_distance, also against
/// `existing`. Throws CentroidPlacementFailure.
std::vector<std::vector<double>> place_centroids(int n, int dim, double min_distance, Pcg32& rng,
                                                 std::span<const std::vector<double>> existing = {},
                                                 int max_tries = 10000);

std::vector<double> random_unit_vector(int dim, Pcg32& rng);

/// Embeds each labeled segment around its speaker's centroid.
EmbeddingTable gen_embeddings_with_centroids(
    std::span<const SpeechSegment> segments,
    const std::map<std::string, std::vector<double>>& centroids, const EmbeddingSpec& spec,
    Pcg32& rng);

/// Places one centroid per speaker label (sorted), then embeds the segments.
EmbeddingTable gen_embeddings(const Timeline& t, const EmbeddingSpec& spec);

// ---------------------------------------------------------------------------
// Corpora
// ---------------------------------------------------------------------------

struct SyntheticCorpus {
  CorpusManifest manifest;
  std::map<std::string, RecordingData> recordings;
};

/// Recordings with 1..max_speakers speakers and per-recording timing drawn
/// at random, half dev and half eval.
struct DetectionCorpusSpec {
  int n_recordings = 200;
  int min_speakers = 1;
  int max_speakers = 4;
  double duration = 600.0;
  double overlap_prob = 0.05;
  EmbeddingSpec embedding{16, 0.8, 0.05, 0.05, 3.0, 10000, 0};
  std::uint64_t seed = 1;
};

SyntheticCorpus gen_detection_corpus(const DetectionCorpusSpec& spec, unsigned jobs = 1);

enum class RatioModel { Piecewise, Null };

/// Free-living cohort: each participant wears the recorder for several
/// days; each window holds a dyadic conversation, a solo stretch, a group
/// conversation or silence.
struct CohortSpec {
  int n_participants = 32;
  int recordings_per_participant = 3;
  int windows_per_recording = 10;
  double window_secs = 600.0;

  RatioModel ratio_model = RatioModel::Piecewise;
  double ratio_at_zero = 0.10;
  double ratio_peak = 0.40;         // at severity == cut
  double ratio_at_max = 0.15;       // at severity == 27
  double ratio_noise = 0.03;
  int severity_cut = 10;

  double response_base = 0.8;      // seconds at severity 0
  double response_slope = 0.02;    // seconds per severity point
  double response_noise = 0.05;
  double partner_response = 0.9;

  double mean_utterance = 2.0;
  double mean_pause = 0.6;
  double overlap_prob = 0.05;
  double self_transition = 0.3;

  EmbeddingSpec embedding{16, 0.8, 0.05, 0.02, 3.0, 10000, 0};
  std::uint64_t seed = 1;
};

/// Null model: the dyadic ratio and response time no longer depend on
/// severity.
CohortSpec null_cohort(CohortSpec spec);

SyntheticCorpus gen_cohort(const CohortSpec& spec, unsigned jobs = 1);

/// Writes manifest.json plus rttm/<id>.rttm and emb/<id>.emb under dir.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

using SimulateConfig = std::variant<DetectionCorpusSpec, CohortSpec>;

/// {"kind": "detection" | "cohort", ...fields}. Unknown fields are rejected.
SimulateConfig parse_simulate_config(std::string_view json_text);

}  // namespace dyad
