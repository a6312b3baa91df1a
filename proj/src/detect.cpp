#include "dyad/detect.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "dyad/error.hpp"
#include "dyad/parallel.hpp"

namespace dyad {

SpeakerDetection detect_speakers(const Dendrogram& dendrogram, const EmbeddingTable& e,
                                 std::span<const SpeechSegment> segments, double threshold,
                                 const SpuriousMode& spurious) {
  SpeakerDetection out;
  if (dendrogram.ids.empty()) return out;
  ClusterAssignment clusters = cut_dendrogram(dendrogram, threshold);
  if (spurious.kind != SpuriousMode::Kind::Off) {
    const auto feats = compute_cluster_features(clusters, e, segments);
    clusters = filter_spurious(clusters, feats, spurious, e);
  }
  out.verdict.n_speakers_detected = clusters.n_clusters;
  out.verdict.is_dyadic = clusters.n_clusters == 2;
  out.verdict.source = DetectorSource::Embedding;
  out.clusters = std::move(clusters);
  return out;
}

SpeakerDetection detect_speakers(const EmbeddingTable& e, std::span<const SpeechSegment> segments,
                                 double threshold, const SpuriousMode& spurious) {
  if (!(threshold > 0.0)) throw Error(Errc::InvalidArgument, "threshold must be > 0");
  const EmbeddingTable sub = e.subset(segments);
  if (sub.empty()) return {};
  return detect_speakers(build_dendrogram(sub), sub, segments, threshold, spurious);
}

TruthLabel ground_truth_label(const Timeline& t, double min_duration, double share_threshold) {
  std::map<std::string, double> per_speaker;
  for (const auto& seg : t.segments()) {
    if (!seg.speaker) throw Error(Errc::UnlabeledSegments, "segment '" + seg.id + "'");
    per_speaker[*seg.speaker] += seg.duration;
  }
  if (!(t.total_duration() > min_duration)) return TruthLabel::Excluded;
  if (per_speaker.size() < 2) return TruthLabel::NonDyadic;

  std::vector<double> totals;
  double all = 0.0;
  for (const auto& [spk, secs] : per_speaker) {
    totals.push_back(secs);
    all += secs;
  }
  std::partial_sort(totals.begin(), totals.begin() + 2, totals.end(), std::greater<>());
  return (totals[0] + totals[1]) / all > share_threshold ? TruthLabel::Dyadic
                                                         : TruthLabel::NonDyadic;
}

DetectionMetrics metrics_from_confusion(const Confusion& c) {
  DetectionMetrics m;
  m.confusion = c;
  const int total = c.tp + c.fp + c.tn + c.fn;
  m.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 0.0;
  m.sensitivity = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  m.specificity = c.tn + c.fp > 0 ? static_cast<double>(c.tn) / (c.tn + c.fp) : 0.0;
  return m;
}

DetectionMetrics evaluate(std::span<const DyadicLabel> predicted, std::span<const DyadicLabel> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                          std::to_string(truth.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pred = predicted[i] == DyadicLabel::Dyadic;
    const bool real = truth[i] == DyadicLabel::Dyadic;
    if (pred && real) ++c.tp;
    if (pred && !real) ++c.fp;
    if (!pred && !real) ++c.tn;
    if (!pred && real) ++c.fn;
  }
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
    throw Error(Errc::DegenerateClassForMetric,
                "need at least one dyadic and one non-dyadic label");
  }
  return metrics_from_confusion(c);
}

DetectionMetrics evaluate(std::span<const DyadicVerdict> verdicts, std::span<const DyadicLabel> truth) {
  std::vector<DyadicLabel> predicted;
  predicted.reserve(verdicts.size());
  for (const auto& v : verdicts) predicted.push_back(v.label());
  return evaluate(predicted, truth);
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int step = 2; step <= 30; ++step) grid.push_back(step * 5 / 100.0);
  return grid;
}

ThresholdTuneReport tune_threshold(std::span<const DevRecording> dev, std::span<const double> grid,
                                   const SpuriousMode& spurious, unsigned jobs) {
  if (grid.empty()) throw Error(Errc::EmptyGrid, "threshold grid is empty");
  for (double t : grid) {
    if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "grid thresholds must be > 0");
  }
  const auto n_pos = std::count_if(dev.begin(), dev.end(),
                                   [](const DevRecording& r) { return r.label == DyadicLabel::Dyadic; });
  if (n_pos == 0 || n_pos == static_cast<std::ptrdiff_t>(dev.size())) {
    throw Error(Errc::SingleClassDev, "dev set needs dyadic and non-dyadic recordings");
  }

  // correct[r][g]: recording r classified correctly at grid point g.
  std::vector<std::vector<char>> correct(dev.size(), std::vector<char>(grid.size(), 0));
  parallel_for(dev.size(), jobs, [&](std::size_t r) {
    const auto& rec = dev[r];
    const EmbeddingTable sub = rec.embeddings->subset(rec.segments);
    const Dendrogram dendrogram = sub.empty() ? Dendrogram{} : build_dendrogram(sub);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto det = detect_speakers(dendrogram, sub, rec.segments, grid[g], spurious);
      correct[r][g] = det.verdict.label() == rec.label ? 1 : 0;
    }
  });

  ThresholdTuneReport report;
  report.grid.assign(grid.begin(), grid.end());
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    int hits = 0;
    for (const auto& row : correct) hits += row[g];
    report.accuracy_per_threshold.push_back(static_cast<double>(hits) / static_cast<double>(dev.size()));
    const double acc = report.accuracy_per_threshold.back();
    const double best_acc = report.accuracy_per_threshold[best];
    if (acc > best_acc || (acc == best_acc && grid[g] < grid[best])) best = g;
  }
  report.best_threshold = grid[best];
  return report;
}

}  // namespace dyad
