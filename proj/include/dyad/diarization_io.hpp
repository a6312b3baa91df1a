#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/timeline.hpp"

namespace dyad {

// ---------------------------------------------------------------------------
// RTTM
//
// Only SPEAKER lines are read:
//   SPEAKER <file> <chnl> <onset> <dur> <NA> <NA> <speaker> <NA> <NA>
// RTTM carries no segment identity, so segments are named by their position
// in canonical order: "<recording>_<00000>". Embedding files use the same
// keys.
// ---------------------------------------------------------------------------

std::string canonical_segment_id(std::string_view recording_id, std::size_t index);

/// Sorts segments canonically and overwrites their ids with
/// canonical_segment_id(recording_id, position).
void assign_canonical_ids(std::string_view recording_id, std::vector<SpeechSegment>& segments);

/// Timelines keyed by recording id. total_duration is the end of the last
/// segment; re-validate with the known recording length when available.
std::map<std::string, Timeline> parse_rttm(std::string_view text);

/// Onsets and durations are printed with exactly 3 decimals. Throws
/// MissingSpeakerLabel if any segment lacks a speaker.
std::string write_rttm(const std::map<std::string, Timeline>& timelines);

// ---------------------------------------------------------------------------
// Embeddings: "segment_id,v1,...,vD" per line.
// ---------------------------------------------------------------------------

class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  /// Dimension is fixed by the first insert. Throws DimensionMismatch,
  /// DuplicateSegmentId or ZeroVector.
  void insert(std::string segment_id, std::vector<double> vec);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(const std::string& segment_id) const { return entries_.contains(segment_id); }
  /// nullptr when absent.
  const std::vector<double>* find(const std::string& segment_id) const;
  const std::map<std::string, std::vector<double>>& entries() const noexcept { return entries_; }

  /// Entries for the segments that have an embedding; duplicate ids are
  /// taken once.
  EmbeddingTable subset(std::span<const SpeechSegment> segments) const;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> entries_;
};

EmbeddingTable load_embeddings(std::string_view text);
std::string write_embeddings(const EmbeddingTable& table);

// ---------------------------------------------------------------------------
// Corpus manifest (JSON)
// ---------------------------------------------------------------------------

enum class Split { Dev, Eval, None };
enum class Group { Healthy, Depression, Psychosis, Unknown };

std::string_view split_name(Split s) noexcept;
std::string_view group_name(Group g) noexcept;

inline constexpr int kItemCount = 9;
inline constexpr int kMaxItemScore = 3;
inline constexpr int kMaxSeverity = kItemCount * kMaxItemScore;

struct RecordingEntry {
  std::string id;
  std::string rttm;        // path, relative to the manifest directory
  std::string embeddings;  // path, relative to the manifest directory
  Split split = Split::None;
  bool annotated = false;
  std::optional<double> duration;  // seconds; defaults to the last segment end
};

struct ParticipantEntry {
  std::string id;
  std::vector<std::string> recording_ids;
  std::optional<int> severity;
  std::optional<std::array<int, kItemCount>> items;
  Group group = Group::Unknown;
};

struct CorpusManifest {
  std::vector<RecordingEntry> recordings;
  std::vector<ParticipantEntry> participants;

  const RecordingEntry* find_recording(std::string_view id) const;
};

/// Throws MalformedManifest, UnknownRecordingRef or ItemSumMismatch.
CorpusManifest load_manifest(std::string_view json_text);
std::string write_manifest(const CorpusManifest& manifest);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Throws Io with the path in the message.
std::string read_text_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

struct RecordingData {
  Timeline timeline;
  EmbeddingTable embeddings;
};

/// Loads one manifest recording. Paths are resolved against base_dir.
RecordingData load_recording(const RecordingEntry& entry, const std::filesystem::path& base_dir);

}  // namespace dyad
