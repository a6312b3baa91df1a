#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/clustering.hpp"
#include "dyad/learn.hpp"
#include "dyad/timeline.hpp"

namespace dyad {

inline constexpr double kDefaultMinSpeechShare = 0.05;
inline constexpr double kSingleClusterCentroidDistance = 2.0;

/// Per-cluster description fed to the spurious-speaker classifier.
struct ClusterFeatures {
  double speech_share = 0.0;           // of the clustered speech time
  int n_segments = 0;
  double mean_intra_distance = 0.0;    // mean member-to-centroid cosine distance
  double min_centroid_distance = 0.0;  // to the nearest other centroid
  double mean_segment_duration = 0.0;  // seconds

  std::vector<double> as_row() const;
};

/// `segments` are the segments that were clustered (extra segments without
/// an embedding are ignored). Throws InconsistentInputs when the assignment
/// and the embedded segments do not match one to one.
std::vector<ClusterFeatures> compute_cluster_features(const ClusterAssignment& c,
                                                      const EmbeddingTable& e,
                                                      std::span<const SpeechSegment> segments);

struct SpuriousMode {
  enum class Kind { Off, Heuristic, Model };
  Kind kind = Kind::Heuristic;
  double min_share = kDefaultMinSpeechShare;  // heuristic cut-off
  std::shared_ptr<const Forest> model;        // class 1 = spurious

  static SpuriousMode off() { return {Kind::Off, kDefaultMinSpeechShare, nullptr}; }
  static SpuriousMode heuristic(double min_share = kDefaultMinSpeechShare) {
    return {Kind::Heuristic, min_share, nullptr};
  }
  static SpuriousMode with_model(std::shared_ptr<const Forest> m) {
    return {Kind::Model, kDefaultMinSpeechShare, std::move(m)};
  }
  /// "off", "heuristic" or "model=<path>" (the model is read from disk).
  static SpuriousMode parse(std::string_view text);
  std::string describe() const;
};

/// true for each cluster the mode classifies as spurious.
std::vector<bool> flag_spurious(const std::vector<ClusterFeatures>& feats, const SpuriousMode& mode);

/// Deletes flagged clusters and moves their segments to the nearest surviving
/// centroid. The largest-share cluster survives if everything is flagged.
ClusterAssignment filter_spurious(const ClusterAssignment& c,
                                  const std::vector<ClusterFeatures>& feats,
                                  const SpuriousMode& mode, const EmbeddingTable& e);

/// Training labels from an annotated segment list: a cluster is spurious
/// (1) when its majority speaker already owns a cluster with more of that
/// speaker's time, or when most of its time is unannotated.
std::vector<int> label_spurious_clusters(const ClusterAssignment& c,
                                         std::span<const SpeechSegment> annotated);

struct SpuriousTrainingItem {
  const ClusterAssignment* clusters = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  std::span<const SpeechSegment> segments;  // annotated
};

/// Throws SingleClass when every cluster gets the same label.
Forest train_spurious_model(std::span<const SpuriousTrainingItem> items, const ForestConfig& cfg,
                            unsigned jobs = 1);

}  // namespace dyad
