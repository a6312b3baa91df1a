#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dyad/labels.hpp"
#include "dyad/learn.hpp"
#include "dyad/timeline.hpp"

namespace dyad {

inline constexpr int kBaselineTrees = 51;

/// Segment-timing summary used by the VAD-only detector. Standard deviations
/// are population (n denominator) values.
struct VadFeatureVector {
  double mean_seg_len = 0.0;
  double std_seg_len = 0.0;
  double mean_gap = 0.0;
  double std_gap = 0.0;

  std::vector<double> as_row() const { return {mean_seg_len, std_seg_len, mean_gap, std_gap}; }
};

/// Gaps are max(0, next.onset - prev.end) over consecutive segments in onset
/// order. Throws TooFewSegments for fewer than two segments.
VadFeatureVector compute_vad_features(std::span<const SpeechSegment> segments);
inline VadFeatureVector compute_vad_features(const Timeline& t) {
  return compute_vad_features(t.segments());
}

struct BaselineModel {
  Forest forest;
};

struct BaselinePrediction {
  DyadicLabel label = DyadicLabel::NonDyadic;
  double vote_fraction = 0.0;  // share of trees voting dyadic
};

/// Trains a 51-tree forest. Throws SingleClassTrainingSet.
BaselineModel train_baseline(const std::vector<VadFeatureVector>& features,
                             const std::vector<DyadicLabel>& labels, std::uint64_t seed,
                             unsigned jobs = 1);

BaselinePrediction predict_baseline(const BaselineModel& model, const VadFeatureVector& f);

}  // namespace dyad
