#pragma once

#include <span>
#include <string>
#include <vector>

#include "dyad/clustering.hpp"
#include "dyad/labels.hpp"
#include "dyad/spurious.hpp"
#include "dyad/timeline.hpp"

namespace dyad {

inline constexpr double kMinLabeledDuration = 300.0;  // seconds
inline constexpr double kDyadicShareThreshold = 0.9;

enum class DetectorSource { Embedding, Baseline };

struct DyadicVerdict {
  bool is_dyadic = false;
  int n_speakers_detected = 0;
  DetectorSource source = DetectorSource::Embedding;

  DyadicLabel label() const noexcept {
    return is_dyadic ? DyadicLabel::Dyadic : DyadicLabel::NonDyadic;
  }
};

struct SpeakerDetection {
  DyadicVerdict verdict;
  ClusterAssignment clusters;  // after spurious filtering; empty when nothing was embedded
};

/// cluster -> filter -> count. Segments without an embedding are ignored; no
/// embedded segment at all means zero speakers.
SpeakerDetection detect_speakers(const EmbeddingTable& e, std::span<const SpeechSegment> segments,
                                 double threshold, const SpuriousMode& spurious);

/// Same as detect_speakers, starting from a prebuilt dendrogram of
/// e.subset(segments).
SpeakerDetection detect_speakers(const Dendrogram& dendrogram, const EmbeddingTable& e,
                                 std::span<const SpeechSegment> segments, double threshold,
                                 const SpuriousMode& spurious);

inline DyadicVerdict detect_dyadic(const EmbeddingTable& e, const Timeline& t, double threshold,
                                   const SpuriousMode& spurious) {
  return detect_speakers(e, t.segments(), threshold, spurious).verdict;
}

enum class TruthLabel { NonDyadic, Dyadic, Excluded };

/// Excluded when the recording is not longer than min_duration; otherwise
/// dyadic iff at least two speakers exist and the two largest per-speaker
/// speech totals exceed share_threshold of all speech. Throws
/// UnlabeledSegments.
TruthLabel ground_truth_label(const Timeline& t, double min_duration = kMinLabeledDuration,
                              double share_threshold = kDyadicShareThreshold);

struct Confusion {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
};

struct DetectionMetrics {
  double accuracy = 0.0;
  double specificity = 0.0;
  double sensitivity = 0.0;
  Confusion confusion;
};

DetectionMetrics metrics_from_confusion(const Confusion& c);

/// Positive class is dyadic. Throws LengthMismatch, or
/// DegenerateClassForMetric when either true class is absent.
DetectionMetrics evaluate(std::span<const DyadicLabel> predicted, std::span<const DyadicLabel> truth);
DetectionMetrics evaluate(std::span<const DyadicVerdict> verdicts, std::span<const DyadicLabel> truth);

// --------------------------------------------------------------------------
// Threshold tuning

struct DevRecording {
  const EmbeddingTable* embeddings = nullptr;
  std::span<const SpeechSegment> segments;
  DyadicLabel label = DyadicLabel::NonDyadic;
};

struct ThresholdTuneReport {
  std::vector<double> grid;
  std::vector<double> accuracy_per_threshold;
  double best_threshold = 0.0;
};

/// 0.10, 0.15, ..., 1.50.
std::vector<double> default_threshold_grid();

/// Detection accuracy per grid threshold; the best threshold is the smallest
/// one reaching the maximum. Throws EmptyGrid, SingleClassDev.
ThresholdTuneReport tune_threshold(std::span<const DevRecording> dev, std::span<const double> grid,
                                   const SpuriousMode& spurious, unsigned jobs = 1);

}  // namespace dyad
