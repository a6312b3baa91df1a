#include "dyad/vad_baseline.hpp"

#include <algorithm>
#include <cmath>

#include "dyad/error.hpp"

namespace dyad {

namespace {

// Population mean and standard deviation (two-pass).
std::pair<double, double> mean_std(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

VadFeatureVector compute_vad_features(std::span<const SpeechSegment> segments) {
  if (segments.size() < 2) {
    throw Error(Errc::TooFewSegments, std::to_string(segments.size()) + " segment(s)");
  }
  std::vector<SpeechSegment> sorted(segments.begin(), segments.end());
  std::sort(sorted.begin(), sorted.end(), segment_order);

  std::vector<double> lengths;
  std::vector<double> gaps;
  lengths.reserve(sorted.size());
  gaps.reserve(sorted.size() - 1);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    lengths.push_back(sorted[i].duration);
    if (i > 0) gaps.push_back(std::max(0.0, sorted[i].onset - sorted[i - 1].end()));
  }
  VadFeatureVector f;
  std::tie(f.mean_seg_len, f.std_seg_len) = mean_std(lengths);
  std::tie(f.mean_gap, f.std_gap) = mean_std(gaps);
  return f;
}

BaselineModel train_baseline(const std::vector<VadFeatureVector>& features,
                             const std::vector<DyadicLabel>& labels, std::uint64_t seed,
                             unsigned jobs) {
  if (features.size() != labels.size()) {
    throw Error(Errc::LengthMismatch, "features and labels differ in length");
  }
  const bool has_pos = std::count(labels.begin(), labels.end(), DyadicLabel::Dyadic) > 0;
  const bool has_neg = std::count(labels.begin(), labels.end(), DyadicLabel::NonDyadic) > 0;
  if (!has_pos || !has_neg) {
    throw Error(Errc::SingleClassTrainingSet, "baseline needs both dyadic and non-dyadic examples");
  }
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  X.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    X.push_back(features[i].as_row());
    y.push_back(to_class(labels[i]));
  }
  ForestConfig cfg;
  cfg.n_trees = kBaselineTrees;
  cfg.seed = seed;
  return BaselineModel{train_forest(X, y, cfg, jobs)};
}

BaselinePrediction predict_baseline(const BaselineModel& model, const VadFeatureVector& f) {
  const auto p = model.forest.predict(f.as_row());
  // Votes above one half are dyadic; an exact half goes to non-dyadic.
  BaselinePrediction out;
  out.vote_fraction = p.positive_fraction;
  out.label = p.positive_fraction > 0.5 ? DyadicLabel::Dyadic : DyadicLabel::NonDyadic;
  return out;
}

}  // namespace dyad
