#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dyad/diarization_io.hpp"

namespace dyad {

/// 1 - u.v / (|u||v|), clamped to [0, 2]. Throws ZeroVector, DimensionMismatch.
double cosine_distance(std::span<const double> u, std::span<const double> v);

std::vector<double> l2_normalized(std::span<const double> v);

struct ClusterAssignment {
  std::map<std::string, int> assignment;  // segment id -> cluster index
  int n_clusters = 0;
  std::vector<std::vector<double>> centroids;  // unit length, one per cluster

  /// Segment ids per cluster, in id order.
  std::vector<std::vector<std::string>> members() const;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Full average-linkage merge history for one table. Leaves are the table
/// entries in id order; a merge of slots (a, b), a < b, keeps the merged
/// cluster in slot a. Merge heights are non-decreasing.
struct Dendrogram {
  struct Merge {
    int a = 0;
    int b = 0;
    double height = 0.0;
  };
  std::vector<std::string> ids;
  std::vector<std::vector<double>> unit;  // normalized embeddings
  std::vector<Merge> merges;
};

/// Among equal-distance pairs the lexicographically smallest (slot, slot)
/// pair is merged first. Throws EmptyTable.
Dendrogram build_dendrogram(const EmbeddingTable& table);

/// Applies merges while their height is <= threshold. Cluster indices follow
/// the smallest member position.
ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, double threshold);

/// Average-linkage clustering under cosine distance; merging stops once the
/// closest pair of clusters is farther apart than threshold.
ClusterAssignment cluster_segments(const EmbeddingTable& table, double threshold);

/// Rebuilds centroids (normalized mean of normalized members) for the given
/// assignment; n_clusters must already be set.
void recompute_centroids(ClusterAssignment& c, const EmbeddingTable& table);

}  // namespace dyad
