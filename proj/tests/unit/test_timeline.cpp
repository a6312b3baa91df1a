#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "dyad/rng.hpp"
#include "dyad/timeline.hpp"
#include "support/helpers.hpp"

using namespace dyad;
using testing::named;
using testing::seg;

TEST_CASE("empty_timeline_is_valid", "[timeline]") {
  const auto t = validate_timeline("r", {}, 600.0);
  CHECK(t.empty());
  CHECK(t.total_duration() == 600.0);
}

TEST_CASE("validate_sorts_unordered_input", "[timeline]") {
  const auto t = validate_timeline("r", named({seg(3, 2, "a"), seg(0, 2, "b")}), 10.0);
  REQUIRE(t.size() == 2);
  CHECK(t.segments()[0].onset == 0.0);
  CHECK(t.segments()[1].onset == 3.0);
}

TEST_CASE("validate_rejects_bad_segments", "[timeline]") {
  REQUIRE_ERRC(validate_timeline("r", {seg(0, -1)}, 10.0), Errc::NonPositiveDuration);
  REQUIRE_ERRC(validate_timeline("r", {seg(0, 0)}, 10.0), Errc::NonPositiveDuration);
  REQUIRE_ERRC(validate_timeline("r", {seg(-0.5, 1)}, 10.0), Errc::NegativeOnset);
  REQUIRE_ERRC(validate_timeline("r", {seg(9.5, 1)}, 10.0), Errc::SegmentExceedsRecording);
}

TEST_CASE("segment_ending_exactly_at_total_is_accepted", "[timeline]") {
  CHECK_NOTHROW(validate_timeline("r", {seg(9, 1)}, 10.0));
}

TEST_CASE("window_count_uses_floor", "[timeline]") {
  CHECK(segment_windows(validate_timeline("r", {}, 3600.0), 600.0).size() == 6);
  const auto w = segment_windows(validate_timeline("r", {}, 605.0), 600.0);
  REQUIRE(w.size() == 1);
  CHECK(w[0].start == 0.0);
  CHECK(w[0].length == 600.0);
  CHECK(segment_windows(validate_timeline("r", {}, 599.0), 600.0).empty());
}

TEST_CASE("straddling_segment_is_clipped_into_both_windows", "[timeline]") {
  const auto t = validate_timeline("r", {seg(595, 10, "a", "x")}, 1200.0);
  const auto w = segment_windows(t, 600.0);
  REQUIRE(w.size() == 2);
  REQUIRE(w[0].segments.size() == 1);
  REQUIRE(w[1].segments.size() == 1);
  CHECK(w[0].segments[0].onset == 595.0);
  CHECK(w[0].segments[0].duration == 5.0);
  CHECK(w[1].segments[0].onset == 600.0);
  CHECK(w[1].segments[0].duration == 5.0);
  CHECK(w[0].segments[0].id == "x");
  CHECK(w[1].segments[0].id == "x");
}

TEST_CASE("segment_in_dropped_remainder_is_discarded", "[timeline]") {
  const auto t = validate_timeline("r", {seg(601, 2, "a")}, 605.0);
  const auto w = segment_windows(t, 600.0);
  REQUIRE(w.size() == 1);
  CHECK(w[0].segments.empty());
}

TEST_CASE("non_positive_window_length_is_rejected", "[timeline]") {
  REQUIRE_ERRC(segment_windows(validate_timeline("r", {}, 10.0), 0.0), Errc::InvalidArgument);
}

TEST_CASE("speech_percentage_examples", "[timeline]") {
  Window w;
  w.length = 600.0;
  CHECK(speech_percentage(w) == 0.0);
  w.segments = {seg(0, 600)};
  CHECK(speech_percentage(w) == 1.0);
  w.segments = {seg(0, 100), seg(50, 100)};
  CHECK(speech_percentage(w) == 0.25);
}

TEST_CASE("union_length_merges_touching_and_nested_intervals", "[timeline]") {
  const std::vector<SpeechSegment> s{seg(0, 2), seg(2, 1), seg(0.5, 0.5), seg(10, 1)};
  CHECK(union_length(s) == 4.0);
}

namespace {

std::vector<SpeechSegment> random_segments(Pcg32& rng, double total, int n) {
  std::vector<SpeechSegment> out;
  for (int i = 0; i < n; ++i) {
    const double onset = std::floor(rng.uniform(0.0, total - 1.0) * 1000.0) / 1000.0;
    const double dur =
        std::min(total - onset, std::max(0.001, std::floor(rng.uniform(0.0, 900.0)) / 10.0));
    out.push_back(seg(onset, dur, "s" + std::to_string(rng.below(3)), "id" + std::to_string(i)));
  }
  return out;
}

// Union of intervals clipped to [0, limit), by sweeping sorted endpoints.
double clipped_union(std::vector<SpeechSegment> s, double limit) {
  std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.onset < b.onset; });
  double total = 0.0, cur_lo = 0.0, cur_hi = -1.0;
  for (const auto& x : s) {
    const double lo = std::min(x.onset, limit);
    const double hi = std::min(x.end(), limit);
    if (hi <= lo) continue;
    if (lo > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return total;
}

}  // namespace

TEST_CASE("windowing_partitions_speech_over_covered_span", "[timeline][property]") {
  Pcg32 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double total = 600.0 * (1 + rng.below(5)) + rng.below(599);
    const double len = trial % 2 == 0 ? 600.0 : 137.5;
    const auto t = validate_timeline("r", random_segments(rng, total, 1 + rng.below(60)), total);
    const auto windows = segment_windows(t, len);
    double sum = 0.0;
    for (const auto& w : windows) {
      for (const auto& s : w.segments) {
        REQUIRE(s.onset >= w.start);
        REQUIRE(s.end() <= w.end() + 1e-9);
      }
      sum += union_length(w.segments);
    }
    const double covered = static_cast<double>(windows.size()) * len;
    REQUIRE(sum == Catch::Approx(clipped_union(t.segments(), covered)).margin(1e-6));
  }
}

TEST_CASE("validation_is_invariant_to_input_order", "[timeline][property]") {
  Pcg32 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto segs = random_segments(rng, 1000.0, 40);
    const auto a = validate_timeline("r", segs, 1000.0);
    std::reverse(segs.begin(), segs.end());
    for (std::size_t i = segs.size(); i > 1; --i) std::swap(segs[i - 1], segs[rng.below(i)]);
    const auto b = validate_timeline("r", segs, 1000.0);
    REQUIRE(a == b);
  }
}
