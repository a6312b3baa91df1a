#include "dyad/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dyad/error.hpp"

namespace dyad {

std::string detected_speaker_label(int cluster) { return "S" + std::to_string(cluster); }

WindowVerdict evaluate_window(std::string recording_id, const Window& window,
                              const EmbeddingTable& e, double threshold,
                              const SpuriousMode& spurious) {
  WindowVerdict out;
  out.recording_id = std::move(recording_id);
  out.speech_pct = speech_percentage(window);
  out.window.index = window.index;
  out.window.start = window.start;
  out.window.length = window.length;

  const auto det = detect_speakers(e, window.segments, threshold, spurious);
  out.verdict = det.verdict;
  const auto& clusters = det.clusters;
  out.speakers.resize(clusters.n_clusters);
  for (int k = 0; k < clusters.n_clusters; ++k) {
    out.speakers[k].label = detected_speaker_label(k);
    out.speakers[k].embedding = clusters.centroids[k];
  }
  for (const auto& seg : window.segments) {
    const auto it = clusters.assignment.find(seg.id);
    if (it == clusters.assignment.end()) continue;
    SpeechSegment labeled = seg;
    labeled.speaker = detected_speaker_label(it->second);
    out.speakers[it->second].speech_time += seg.duration;
    out.window.segments.push_back(std::move(labeled));
  }
  std::sort(out.window.segments.begin(), out.window.segments.end(), segment_order);
  return out;
}

double dyadic_ratio(std::span<const WindowVerdict> verdicts) {
  if (verdicts.empty()) throw Error(Errc::EmptyWindowList, "no windows");
  const auto dyadic = std::count_if(verdicts.begin(), verdicts.end(),
                                    [](const WindowVerdict& v) { return v.verdict.is_dyadic; });
  return static_cast<double>(dyadic) / static_cast<double>(verdicts.size());
}

std::vector<WindowVerdict> select_top_windows(std::span<const WindowVerdict> verdicts,
                                              std::size_t k) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (verdicts[i].verdict.is_dyadic) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (verdicts[a].speech_pct != verdicts[b].speech_pct) {
      return verdicts[a].speech_pct > verdicts[b].speech_pct;
    }
    return verdicts[a].window.index < verdicts[b].window.index;
  });
  order.resize(std::min(order.size(), k));
  std::vector<WindowVerdict> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(verdicts[i]);
  return out;
}

TargetSelection identify_target_speaker(std::span<const WindowVerdict> windows) {
  if (windows.size() < 2) {
    throw Error(Errc::TooFewWindows, std::to_string(windows.size()) + " window(s)");
  }
  for (const auto& w : windows) {
    if (w.speakers.size() != 2) {
      throw Error(Errc::InvalidArgument, "target identification needs two speakers per window");
    }
  }
  const std::size_t n = windows.size();
  // Distance between speaker s of window w and speaker t of window v.
  auto distance = [&](std::size_t w, int s, std::size_t v, int t) {
    return cosine_distance(windows[w].speakers[s].embedding, windows[v].speakers[t].embedding);
  };

  TargetSelection out;
  out.target.resize(n);
  std::vector<int> chosen(n, 0);
  for (std::size_t w = 0; w < n; ++w) {
    double cost[2] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s) {
      for (std::size_t v = 0; v < n; ++v) {
        if (v == w) continue;
        cost[s] += std::min(distance(w, s, v, 0), distance(w, s, v, 1));
      }
    }
    constexpr double kTie = 1e-12;
    int pick = 0;
    if (cost[1] < cost[0] - kTie) {
      pick = 1;
    } else if (std::abs(cost[1] - cost[0]) <= kTie &&
               windows[w].speakers[1].speech_time > windows[w].speakers[0].speech_time) {
      pick = 1;
    }
    chosen[w] = pick;
    out.target[w] = windows[w].speakers[pick].label;
  }

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t v = w + 1; v < n; ++v) {
      sum += distance(w, chosen[w], v, chosen[v]);
      ++pairs;
    }
  }
  out.mean_intra_distance = sum / static_cast<double>(pairs);
  return out;
}

TimingFeatures timing_features(std::span<const SpeechSegment> segments, const std::string& target) {
  std::vector<SpeechSegment> sorted(segments.begin(), segments.end());
  std::sort(sorted.begin(), sorted.end(), segment_order);
  const auto is_target = [&](const SpeechSegment& s) { return s.speaker && *s.speaker == target; };
  if (std::none_of(sorted.begin(), sorted.end(), is_target)) {
    throw Error(Errc::TargetAbsent, "no segment from speaker '" + target + "'");
  }

  TimingFeatures tf;
  double pause_sum = 0.0;
  double response_sum = 0.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto& cur = sorted[i];
    const auto& prev = sorted[i - 1];
    if (!is_target(cur)) continue;
    const double gap = cur.onset - prev.end();
    if (is_target(prev)) {
      pause_sum += std::max(0.0, gap);
      ++tf.n_pause_events;
    } else if (gap >= 0.0) {
      response_sum += gap;
      ++tf.n_response_events;
    } else {
      ++tf.n_overlaps;
    }
  }
  if (tf.n_pause_events > 0) tf.pause_time = pause_sum / tf.n_pause_events;
  if (tf.n_response_events > 0) tf.response_time = response_sum / tf.n_response_events;
  return tf;
}

ParticipantProfile participant_profile(const ParticipantEntry& entry,
                                       std::span<const WindowVerdict> verdicts, std::size_t k) {
  ParticipantProfile p;
  p.participant_id = entry.id;
  p.severity = entry.severity;
  p.items = entry.items;
  p.group = entry.group;
  p.n_windows = verdicts.size();
  p.dyadic_ratio = dyadic_ratio(verdicts);
  p.n_dyadic = static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(),
                    [](const WindowVerdict& v) { return v.verdict.is_dyadic; }));

  const auto top = select_top_windows(verdicts, k);
  if (top.size() < 2) return p;

  const auto targets = identify_target_speaker(top);
  p.target_confidence = targets.mean_intra_distance;
  p.timing_available = true;
  p.n_timing_windows = top.size();

  double pause_sum = 0.0;
  double response_sum = 0.0;
  int pause_windows = 0;
  int response_windows = 0;
  for (std::size_t w = 0; w < top.size(); ++w) {
    const auto tf = timing_features(top[w].window, targets.target[w]);
    p.timing.n_pause_events += tf.n_pause_events;
    p.timing.n_response_events += tf.n_response_events;
    p.timing.n_overlaps += tf.n_overlaps;
    if (tf.pause_time) {
      pause_sum += *tf.pause_time;
      ++pause_windows;
    }
    if (tf.response_time) {
      response_sum += *tf.response_time;
      ++response_windows;
    }
  }
  if (pause_windows > 0) p.timing.pause_time = pause_sum / pause_windows;
  if (response_windows > 0) p.timing.response_time = response_sum / response_windows;
  return p;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

std::string profiles_to_csv(std::span<const ParticipantProfile> profiles) {
  std::string out =
      "participant_id,n_windows,n_dyadic,dyadic_ratio,pause_time,response_time,severity_score,group\n";
  for (const auto& p : profiles) {
    out += p.participant_id;
    out += ',' + std::to_string(p.n_windows);
    out += ',' + std::to_string(p.n_dyadic);
    out += ',' + fmt_opt(p.dyadic_ratio);
    out += ',' + fmt_opt(p.timing_available ? p.timing.pause_time : std::nullopt);
    out += ',' + fmt_opt(p.timing_available ? p.timing.response_time : std::nullopt);
    out += ',' + (p.severity ? std::to_string(*p.severity) : std::string("NA"));
    out += ',';
    out += group_name(p.group);
    out += '\n';
  }
  return out;
}

}  // namespace dyad
