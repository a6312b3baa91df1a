#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dyad {

inline constexpr double kDefaultWindowSecs = 600.0;

struct SpeechSegment {
  std::string id;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds
  std::optional<std::string> speaker;

  double end() const noexcept { return onset + duration; }

  friend bool operator==(const SpeechSegment&, const SpeechSegment&) = default;
};

/// Canonical ordering: onset, then duration, then speaker label (unlabeled
/// first), then id.
bool segment_order(const SpeechSegment& a, const SpeechSegment& b) noexcept;

/// One recording's diarization. Only constructible through validate_timeline,
/// so a Timeline always holds sorted, in-range, positive-duration segments.
class Timeline {
 public:
  Timeline() = default;

  const std::string& recording_id() const noexcept { return recording_id_; }
  const std::vector<SpeechSegment>& segments() const noexcept { return segments_; }
  double total_duration() const noexcept { return total_duration_; }
  bool empty() const noexcept { return segments_.empty(); }
  std::size_t size() const noexcept { return segments_.size(); }

  friend bool operator==(const Timeline&, const Timeline&) = default;

 private:
  friend Timeline validate_timeline(std::string, std::vector<SpeechSegment>, double);

  std::string recording_id_;
  std::vector<SpeechSegment> segments_;
  double total_duration_ = 0.0;
};

/// Sorts and validates raw segments. Throws NegativeOnset,
/// NonPositiveDuration or SegmentExceedsRecording.
Timeline validate_timeline(std::string recording_id, std::vector<SpeechSegment> raw,
                           double total_duration);

struct Window {
  std::size_t index = 0;
  double start = 0.0;
  double length = kDefaultWindowSecs;
  std::vector<SpeechSegment> segments;  // clipped to [start, start + length)

  double end() const noexcept { return start + length; }
};

/// Non-overlapping fixed-length windows. The trailing partial window is
/// dropped; segments crossing a boundary are clipped into every window they
/// touch and keep their segment id.
std::vector<Window> segment_windows(const Timeline& timeline,
                                    double window_len = kDefaultWindowSecs);

/// Length of the union of the segment intervals (overlaps counted once).
double union_length(std::span<const SpeechSegment> segments);

/// Fraction of the window covered by speech, in [0, 1].
double speech_percentage(const Window& window);

}  // namespace dyad
