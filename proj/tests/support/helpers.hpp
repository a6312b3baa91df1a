#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyad/error.hpp"
#include "dyad/timeline.hpp"

// Asserts that `expr` throws dyad::Error with the given class.
#define REQUIRE_ERRC(expr, errc)                                   \
  do {                                                             \
    bool threw_ = false;                                           \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const dyad::Error& e_) {                              \
      threw_ = true;                                               \
      INFO(e_.what());                                             \
      REQUIRE(e_.code() == (errc));                                \
    }                                                              \
    REQUIRE(threw_);                                               \
  } while (0)

namespace testing {

inline dyad::SpeechSegment seg(double onset, double duration,
                               std::optional<std::string> speaker = std::nullopt,
                               std::string id = {}) {
  dyad::SpeechSegment s;
  s.id = std::move(id);
  s.onset = onset;
  s.duration = duration;
  s.speaker = std::move(speaker);
  return s;
}

// Gives unnamed segments ids s0, s1, ... in input order.
inline std::vector<dyad::SpeechSegment> named(std::vector<dyad::SpeechSegment> segs) {
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].id.empty()) segs[i].id = "s" + std::to_string(i);
  }
  return segs;
}

}  // namespace testing
