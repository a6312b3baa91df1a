#pragma once

// Malformed inputs for the loaders, with the error class each must raise.

#include <string>
#include <vector>

#include "dyad/error.hpp"

namespace fixtures {

struct Malformed {
  std::string text;
  dyad::Errc expected;
};

inline const std::vector<Malformed>& malformed_rttm() {
  static const std::vector<Malformed> v{
      {"SPEAKER rec1 1 0 1 <NA> <NA> a\n", dyad::Errc::MalformedLine},
      {"SPEAKER rec1 1 abc 2.5 <NA> <NA> a <NA> <NA>\n", dyad::Errc::MalformedLine},
      {"SPEAKER r 1 0 0 <NA> <NA> a <NA> <NA>\n", dyad::Errc::NonPositiveDuration},
      {"SPEAKER r 1 -1 2 <NA> <NA> a <NA> <NA>\n", dyad::Errc::NegativeOnset},
  };
  return v;
}

inline const std::vector<Malformed>& malformed_embeddings() {
  static const std::vector<Malformed> v{
      {"s1,1,0\ns2,1,0,0\n", dyad::Errc::DimensionMismatch},
      {"s1,0,0\n", dyad::Errc::ZeroVector},
      {"s1,1,0\ns1,0,1\n", dyad::Errc::DuplicateSegmentId},
      {"s1,1,x\n", dyad::Errc::MalformedLine},
      {"s1\n", dyad::Errc::MalformedLine},
      {",1,2\n", dyad::Errc::MalformedLine},
  };
  return v;
}

inline const std::vector<Malformed>& malformed_manifests() {
  static const std::vector<Malformed> v{
      {R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"}],
           "participants": [{"id": "p", "recordings": ["r1"], "severity": 10,
                             "items": [3,3,3,3,0,0,0,0,0]}]})",
       dyad::Errc::ItemSumMismatch},
      {R"({"recordings": [], "participants": [{"id": "p", "recordings": ["nope"]}]})",
       dyad::Errc::UnknownRecordingRef},
      {"{not json", dyad::Errc::MalformedManifest},
      {"{}", dyad::Errc::MalformedManifest},
      {R"({"recordings": [{"id": "r1"}]})", dyad::Errc::MalformedManifest},
      {R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b", "split": "train"}]})",
       dyad::Errc::MalformedManifest},
      {R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"},
                          {"id": "r1", "rttm": "a", "embeddings": "b"}]})",
       dyad::Errc::MalformedManifest},
      {R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"}],
           "participants": [{"id": "p", "recordings": ["r1"], "items": [1,1,1]}]})",
       dyad::Errc::MalformedManifest},
      {R"({"recordings": [{"id": "r1", "rttm": "a", "embeddings": "b"}],
           "participants": [{"id": "p", "recordings": ["r1"], "severity": 28}]})",
       dyad::Errc::MalformedManifest},
  };
  return v;
}

}  // namespace fixtures
