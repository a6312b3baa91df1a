#include "dyad/error.hpp"

namespace dyad {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonPositiveDuration: return "NonPositiveDuration";
    case Errc::NegativeOnset: return "NegativeOnset";
    case Errc::SegmentExceedsRecording: return "SegmentExceedsRecording";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::MissingSpeakerLabel: return "MissingSpeakerLabel";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DuplicateSegmentId: return "DuplicateSegmentId";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::UnknownRecordingRef: return "UnknownRecordingRef";
    case Errc::ItemSumMismatch: return "ItemSumMismatch";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::Io: return "Io";
    case Errc::TooFewSegments: return "TooFewSegments";
    case Errc::SingleClassTrainingSet: return "SingleClassTrainingSet";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::SingleClass: return "SingleClass";
    case Errc::RaggedFeatures: return "RaggedFeatures";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::MalformedModel: return "MalformedModel";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::SingleClassDev: return "SingleClassDev";
    case Errc::InconsistentInputs: return "InconsistentInputs";
    case Errc::UnlabeledSegments: return "UnlabeledSegments";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateClassForMetric: return "DegenerateClassForMetric";
    case Errc::EmptyWindowList: return "EmptyWindowList";
    case Errc::TooFewWindows: return "TooFewWindows";
    case Errc::TargetAbsent: return "TargetAbsent";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::BothConstantEqual: return "BothConstantEqual";
    case Errc::CentroidPlacementFailure: return "CentroidPlacementFailure";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& detail) {
  std::string out(errc_name(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(detail) {}

LineError::LineError(Errc code, std::size_t line, const std::string& detail)
    : Error(code, "line " + std::to_string(line) + ": " + detail), line_(line) {}

}  // namespace dyad
