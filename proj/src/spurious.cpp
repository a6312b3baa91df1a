#include "dyad/spurious.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "dyad/error.hpp"

namespace dyad {

std::vector<double> ClusterFeatures::as_row() const {
  return {speech_share, static_cast<double>(n_segments), mean_intra_distance,
          min_centroid_distance, mean_segment_duration};
}

std::vector<ClusterFeatures> compute_cluster_features(const ClusterAssignment& c,
                                                      const EmbeddingTable& e,
                                                      std::span<const SpeechSegment> segments) {
  std::vector<ClusterFeatures> feats(c.n_clusters);
  std::vector<double> speech(c.n_clusters, 0.0);
  std::set<std::string> seen;
  for (const auto& seg : segments) {
    if (!e.contains(seg.id)) continue;
    const auto it = c.assignment.find(seg.id);
    if (it == c.assignment.end()) {
      throw Error(Errc::InconsistentInputs, "segment '" + seg.id + "' is not clustered");
    }
    if (!seen.insert(seg.id).second) {
      throw Error(Errc::InconsistentInputs, "segment '" + seg.id + "' listed twice");
    }
    auto& f = feats[it->second];
    speech[it->second] += seg.duration;
    ++f.n_segments;
    f.mean_intra_distance += cosine_distance(*e.find(seg.id), c.centroids[it->second]);
  }
  if (seen.size() != c.assignment.size()) {
    throw Error(Errc::InconsistentInputs, "assignment covers segments missing from the timeline");
  }

  double total = 0.0;
  for (double s : speech) total += s;
  for (int k = 0; k < c.n_clusters; ++k) {
    auto& f = feats[k];
    if (f.n_segments == 0) throw Error(Errc::InconsistentInputs, "empty cluster");
    f.speech_share = total > 0.0 ? speech[k] / total : 0.0;
    f.mean_segment_duration = speech[k] / f.n_segments;
    f.mean_intra_distance = f.n_segments == 1 ? 0.0 : f.mean_intra_distance / f.n_segments;
    f.min_centroid_distance = kSingleClusterCentroidDistance;
    for (int j = 0; j < c.n_clusters; ++j) {
      if (j != k) {
        f.min_centroid_distance =
            std::min(f.min_centroid_distance, cosine_distance(c.centroids[k], c.centroids[j]));
      }
    }
  }
  return feats;
}

SpuriousMode SpuriousMode::parse(std::string_view text) {
  if (text == "off") return off();
  if (text == "heuristic") return heuristic();
  constexpr std::string_view kPrefix = "model=";
  if (text.starts_with(kPrefix) && text.size() > kPrefix.size()) {
    const std::string path(text.substr(kPrefix.size()));
    auto forest = std::make_shared<const Forest>(forest_from_json(read_text_file(path)));
    return with_model(std::move(forest));
  }
  throw Error(Errc::InvalidArgument,
              "spurious mode must be off, heuristic or model=<path>, got '" + std::string(text) + "'");
}

std::string SpuriousMode::describe() const {
  switch (kind) {
    case Kind::Off: return "off";
    case Kind::Heuristic: return "heuristic";
    case Kind::Model: return "model";
  }
  return "off";
}

std::vector<bool> flag_spurious(const std::vector<ClusterFeatures>& feats, const SpuriousMode& mode) {
  std::vector<bool> flags(feats.size(), false);
  for (std::size_t k = 0; k < feats.size(); ++k) {
    switch (mode.kind) {
      case SpuriousMode::Kind::Off:
        break;
      case SpuriousMode::Kind::Heuristic:
        flags[k] = feats[k].speech_share < mode.min_share;
        break;
      case SpuriousMode::Kind::Model:
        if (!mode.model) throw Error(Errc::InvalidArgument, "model mode without a model");
        flags[k] = mode.model->predict(feats[k].as_row()).label == 1;
        break;
    }
  }
  return flags;
}

ClusterAssignment filter_spurious(const ClusterAssignment& c,
                                  const std::vector<ClusterFeatures>& feats,
                                  const SpuriousMode& mode, const EmbeddingTable& e) {
  if (static_cast<int>(feats.size()) != c.n_clusters) {
    throw Error(Errc::InconsistentInputs, "features do not align with clusters");
  }
  auto flags = flag_spurious(feats, mode);
  if (std::none_of(flags.begin(), flags.end(), [](bool f) { return f; })) return c;
  if (std::all_of(flags.begin(), flags.end(), [](bool f) { return f; })) {
    std::size_t keep = 0;
    for (std::size_t k = 1; k < feats.size(); ++k) {
      if (feats[k].speech_share > feats[keep].speech_share) keep = k;
    }
    flags[keep] = false;
  }

  std::vector<int> renumber(c.n_clusters, -1);
  std::vector<int> survivors;
  for (int k = 0; k < c.n_clusters; ++k) {
    if (!flags[k]) {
      renumber[k] = static_cast<int>(survivors.size());
      survivors.push_back(k);
    }
  }

  ClusterAssignment out;
  out.n_clusters = static_cast<int>(survivors.size());
  for (const auto& [id, k] : c.assignment) {
    int target = renumber[k];
    if (target < 0) {
      const auto* v = e.find(id);
      if (!v) throw Error(Errc::InconsistentInputs, "no embedding for segment '" + id + "'");
      double best = 0.0;
      for (std::size_t s = 0; s < survivors.size(); ++s) {
        const double d = cosine_distance(*v, c.centroids[survivors[s]]);
        if (target < 0 || d < best) {
          best = d;
          target = static_cast<int>(s);
        }
      }
    }
    out.assignment.emplace(id, target);
  }
  recompute_centroids(out, e);
  return out;
}

std::vector<int> label_spurious_clusters(const ClusterAssignment& c,
                                         std::span<const SpeechSegment> annotated) {
  std::vector<std::map<std::string, double>> overlap(c.n_clusters);
  std::vector<double> unlabeled(c.n_clusters, 0.0);
  for (const auto& seg : annotated) {
    const auto it = c.assignment.find(seg.id);
    if (it == c.assignment.end()) continue;
    if (seg.speaker) {
      overlap[it->second][*seg.speaker] += seg.duration;
    } else {
      unlabeled[it->second] += seg.duration;
    }
  }

  struct Owner {
    std::string speaker;
    double time = 0.0;
  };
  std::vector<std::optional<Owner>> majority(c.n_clusters);
  for (int k = 0; k < c.n_clusters; ++k) {
    for (const auto& [spk, t] : overlap[k]) {  // map order: ties keep the smaller name
      if (!majority[k] || t > majority[k]->time) majority[k] = Owner{spk, t};
    }
    if (majority[k] && unlabeled[k] >= majority[k]->time) majority[k].reset();
  }

  std::vector<int> labels(c.n_clusters, 0);
  for (int k = 0; k < c.n_clusters; ++k) {
    if (!majority[k]) {
      labels[k] = 1;
      continue;
    }
    for (int j = 0; j < c.n_clusters; ++j) {
      if (j == k || !majority[j] || majority[j]->speaker != majority[k]->speaker) continue;
      const double mine = majority[k]->time;
      const double theirs = majority[j]->time;
      if (theirs > mine || (theirs == mine && j < k)) {
        labels[k] = 1;
        break;
      }
    }
  }
  return labels;
}

Forest train_spurious_model(std::span<const SpuriousTrainingItem> items, const ForestConfig& cfg,
                            unsigned jobs) {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  for (const auto& item : items) {
    const auto feats = compute_cluster_features(*item.clusters, *item.embeddings, item.segments);
    const auto labels = label_spurious_clusters(*item.clusters, item.segments);
    for (std::size_t k = 0; k < feats.size(); ++k) {
      X.push_back(feats[k].as_row());
      y.push_back(labels[k]);
    }
  }
  if (X.empty()) throw Error(Errc::EmptyTrainingSet, "no clusters to learn from");
  return train_forest(X, y, cfg, jobs);
}

}  // namespace dyad
