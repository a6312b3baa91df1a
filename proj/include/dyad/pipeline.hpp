#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyad/detect.hpp"
#include "dyad/diarization_io.hpp"
#include "dyad/interaction.hpp"
#include "dyad/stats.hpp"
#include "dyad/synthgen.hpp"
#include "dyad/vad_baseline.hpp"

namespace dyad {

/// Where recording data comes from: files next to a manifest, or memory.
using RecordingSource = std::function<RecordingData(const RecordingEntry&)>;

RecordingSource directory_source(std::filesystem::path base_dir);
/// The corpus must outlive the source.
RecordingSource corpus_source(const SyntheticCorpus& corpus);

// ---------------------------------------------------------------------------
// Detection on annotated recordings
// ---------------------------------------------------------------------------

struct LabeledRecording {
  std::string id;
  RecordingData data;
  DyadicLabel label = DyadicLabel::NonDyadic;
};

/// Annotated recordings of one split, in manifest order, with their ground
/// truth. Recordings too short to label are left out.
std::vector<LabeledRecording> load_labeled(const CorpusManifest& manifest, Split split,
                                           const RecordingSource& source, unsigned jobs = 1);

std::vector<DyadicLabel> truth_labels(std::span<const LabeledRecording> recs);

ThresholdTuneReport tune_on(std::span<const LabeledRecording> dev, std::span<const double> grid,
                            const SpuriousMode& spurious, unsigned jobs = 1);

std::vector<DyadicVerdict> detect_all(std::span<const LabeledRecording> recs, double threshold,
                                      const SpuriousMode& spurious, unsigned jobs = 1);

/// Recordings with fewer than two segments carry no timing information and
/// are skipped. Throws SingleClassTrainingSet.
BaselineModel train_baseline_on(std::span<const LabeledRecording> recs, std::uint64_t seed,
                                unsigned jobs = 1);

/// Recordings with fewer than two segments are predicted non-dyadic.
BaselinePrediction predict_recording(const BaselineModel& model, const Timeline& t);

/// Clusters every recording at each threshold and pools the resulting
/// clusters, labeled against the annotation, into one training set.
Forest train_spurious_on(std::span<const LabeledRecording> recs,
                         std::span<const double> thresholds, const ForestConfig& cfg,
                         unsigned jobs = 1);

/// "<lo>:<hi>:<step>" or a comma-separated list. Throws InvalidArgument.
std::vector<double> parse_grid(std::string_view text);

struct DetectionRow {
  std::string section;  // report block heading
  std::string system;   // spurious mode or "baseline"
  std::string dataset;  // dev | eval
  std::optional<double> threshold;
  int n = 0;
  DetectionMetrics metrics;
};

struct DetectionEvalOptions {
  std::vector<SpuriousMode> modes{SpuriousMode::heuristic(), SpuriousMode::off()};
  std::optional<double> threshold;  // tuned on dev per mode when absent
  std::vector<double> grid = default_threshold_grid();
  bool baseline = true;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

/// Embedding-detector rows for dev and eval per mode, then the VAD baseline
/// (trained on dev) on eval.
std::vector<DetectionRow> evaluate_detection(const CorpusManifest& manifest,
                                             const RecordingSource& source,
                                             const DetectionEvalOptions& opts);

std::string detection_rows_to_csv(std::span<const DetectionRow> rows);

// ---------------------------------------------------------------------------
// Cohort analysis
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  double threshold = 0.5;
  SpuriousMode spurious = SpuriousMode::heuristic();
  double window_secs = kDefaultWindowSecs;
  std::size_t top_k = kDefaultTopWindows;
  unsigned jobs = 1;
};

struct CohortAnalysis {
  std::vector<WindowVerdict> windows;  // participant order, then recording, then window
  std::vector<ParticipantProfile> profiles;
  std::vector<StatRow> stats;
};

/// Participants without any complete window get no profile.
CohortAnalysis analyze_cohort(const CorpusManifest& manifest, const RecordingSource& source,
                              const AnalyzeOptions& opts);

/// recording_id,window,start,speech_pct,n_speakers,dyadic
std::string window_verdicts_to_csv(std::span<const WindowVerdict> windows);

}  // namespace dyad
