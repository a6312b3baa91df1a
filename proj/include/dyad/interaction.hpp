#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyad/detect.hpp"
#include "dyad/diarization_io.hpp"
#include "dyad/timeline.hpp"

namespace dyad {

inline constexpr std::size_t kDefaultTopWindows = 10;

struct SpeakerSummary {
  std::string label;               // "S<cluster index>"
  std::vector<double> embedding;   // unit-length mean embedding
  double speech_time = 0.0;        // seconds
};

/// One analysis window after detection. `window.segments` carry the detected
/// speaker labels (segments without an embedding are dropped).
struct WindowVerdict {
  std::string recording_id;
  Window window;
  DyadicVerdict verdict;
  double speech_pct = 0.0;
  std::vector<SpeakerSummary> speakers;
};

std::string detected_speaker_label(int cluster);

WindowVerdict evaluate_window(std::string recording_id, const Window& window,
                              const EmbeddingTable& e, double threshold,
                              const SpuriousMode& spurious);

/// Fraction of dyadic windows. Throws EmptyWindowList.
double dyadic_ratio(std::span<const WindowVerdict> verdicts);

/// Dyadic windows by speech percentage, highest first; equal percentages
/// go to the lower window index, then input order. At most k are returned.
std::vector<WindowVerdict> select_top_windows(std::span<const WindowVerdict> verdicts,
                                              std::size_t k = kDefaultTopWindows);

struct TargetSelection {
  std::vector<std::string> target;  // per input window: speaker label
  double mean_intra_distance = 0.0; // mean pairwise distance between chosen targets
};

/// Picks, in every window, the speaker whose embedding is closest to the
/// other windows' speakers (sum over other windows of the distance to the
/// nearer of their speakers). Equal costs go to the speaker with more speech
/// time, then to the lower label. Throws TooFewWindows (< 2) or
/// InvalidArgument when a window does not hold exactly two speakers.
TargetSelection identify_target_speaker(std::span<const WindowVerdict> windows);

struct TimingFeatures {
  std::optional<double> pause_time;     // mean target-to-target gap
  std::optional<double> response_time;  // mean other-to-target gap
  int n_pause_events = 0;
  int n_response_events = 0;
  int n_overlaps = 0;  // target starts before the preceding other segment ends
};

/// Scans segments in canonical order; only the immediately preceding segment
/// matters. Throws TargetAbsent.
TimingFeatures timing_features(std::span<const SpeechSegment> segments, const std::string& target);
inline TimingFeatures timing_features(const Window& w, const std::string& target) {
  return timing_features(w.segments, target);
}

struct ParticipantProfile {
  std::string participant_id;
  std::size_t n_windows = 0;
  std::size_t n_dyadic = 0;
  double dyadic_ratio = 0.0;
  bool timing_available = false;  // false with fewer than two dyadic windows
  TimingFeatures timing;          // unweighted means over the selected windows
  std::size_t n_timing_windows = 0;
  double target_confidence = 0.0;  // mean intra-target distance
  std::optional<int> severity;
  std::optional<std::array<int, kItemCount>> items;
  Group group = Group::Unknown;
};

/// Throws EmptyWindowList.
ParticipantProfile participant_profile(const ParticipantEntry& entry,
                                       std::span<const WindowVerdict> verdicts,
                                       std::size_t k = kDefaultTopWindows);

/// participant_id,n_windows,n_dyadic,dyadic_ratio,pause_time,response_time,
/// severity_score,group. Missing values are written as "NA".
std::string profiles_to_csv(std::span<const ParticipantProfile> profiles);

}  // namespace dyad
