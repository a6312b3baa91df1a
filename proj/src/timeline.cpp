#include "dyad/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

#include "dyad/error.hpp"

namespace dyad {

bool segment_order(const SpeechSegment& a, const SpeechSegment& b) noexcept {
  return std::tie(a.onset, a.duration, a.speaker, a.id) <
         std::tie(b.onset, b.duration, b.speaker, b.id);
}

Timeline validate_timeline(std::string recording_id, std::vector<SpeechSegment> raw,
                           double total_duration) {
  if (!(total_duration >= 0.0) || !std::isfinite(total_duration)) {
    throw Error(Errc::InvalidArgument, "total duration must be finite and >= 0");
  }
  for (const auto& seg : raw) {
    if (!(seg.duration > 0.0) || !std::isfinite(seg.duration)) {
      throw Error(Errc::NonPositiveDuration, "segment '" + seg.id + "' in " + recording_id);
    }
    if (!(seg.onset >= 0.0) || !std::isfinite(seg.onset)) {
      throw Error(Errc::NegativeOnset, "segment '" + seg.id + "' in " + recording_id);
    }
    if (seg.end() > total_duration) {
      throw Error(Errc::SegmentExceedsRecording,
                  "segment '" + seg.id + "' ends at " + std::to_string(seg.end()) +
                      " > " + std::to_string(total_duration));
    }
  }
  std::sort(raw.begin(), raw.end(), segment_order);

  Timeline t;
  t.recording_id_ = std::move(recording_id);
  t.segments_ = std::move(raw);
  t.total_duration_ = total_duration;
  return t;
}

std::vector<Window> segment_windows(const Timeline& timeline, double window_len) {
  if (!(window_len > 0.0)) {
    throw Error(Errc::InvalidArgument, "window length must be > 0");
  }
  const auto n_windows =
      static_cast<std::size_t>(std::floor(timeline.total_duration() / window_len));
  std::vector<Window> windows(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    windows[w].index = w;
    windows[w].start = static_cast<double>(w) * window_len;
    windows[w].length = window_len;
  }
  for (const auto& seg : timeline.segments()) {
    auto first = static_cast<std::size_t>(std::floor(seg.onset / window_len));
    if (first > 0) --first;  // guards against the quotient rounding up
    for (std::size_t w = first; w < n_windows; ++w) {
      const double lo = std::max(seg.onset, windows[w].start);
      const double hi = std::min(seg.end(), windows[w].end());
      if (hi <= lo) {
        if (seg.end() <= windows[w].start) break;
        continue;
      }
      SpeechSegment piece = seg;
      piece.onset = lo;
      piece.duration = hi - lo;
      windows[w].segments.push_back(std::move(piece));
    }
  }
  for (auto& w : windows) std::sort(w.segments.begin(), w.segments.end(), segment_order);
  return windows;
}

double union_length(std::span<const SpeechSegment> segments) {
  std::vector<std::pair<double, double>> spans;
  spans.reserve(segments.size());
  for (const auto& s : segments) spans.emplace_back(s.onset, s.end());
  std::sort(spans.begin(), spans.end());

  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = 0.0;
  bool open = false;
  for (const auto& [lo, hi] : spans) {
    if (!open || lo > cur_hi) {
      if (open) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
      open = true;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

double speech_percentage(const Window& window) {
  if (!(window.length > 0.0)) {
    throw Error(Errc::InvalidArgument, "window length must be > 0");
  }
  return std::clamp(union_length(window.segments) / window.length, 0.0, 1.0);
}

}  // namespace dyad
