#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dyad {

enum class Errc {
  // timeline
  NonPositiveDuration,
  NegativeOnset,
  SegmentExceedsRecording,
  InvalidArgument,
  // diarization-io
  MalformedLine,
  MissingSpeakerLabel,
  DimensionMismatch,
  DuplicateSegmentId,
  ZeroVector,
  UnknownRecordingRef,
  ItemSumMismatch,
  MalformedManifest,
  Io,
  // vad-baseline / learn
  TooFewSegments,
  SingleClassTrainingSet,
  EmptyTrainingSet,
  SingleClass,
  RaggedFeatures,
  TooFewSamples,
  MalformedModel,
  // clustering / spurious / detect
  EmptyTable,
  EmptyGrid,
  SingleClassDev,
  InconsistentInputs,
  UnlabeledSegments,
  LengthMismatch,
  DegenerateClassForMetric,
  // interaction-metrics
  EmptyWindowList,
  TooFewWindows,
  TargetAbsent,
  // stats
  ConstantInput,
  TooFewPoints,
  BothConstantEqual,
  // synthgen
  CentroidPlacementFailure,
};

std::string_view errc_name(Errc code) noexcept;

/// Exception carrying one of the error classes above. what() is
/// "<ErrcName>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Error raised while parsing line-oriented input; line numbers are 1-based.
class LineError : public Error {
 public:
  LineError(Errc code, std::size_t line, const std::string& detail);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dyad
