#include "dyad/diarization_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <json.hpp>

#include "dyad/error.hpp"

namespace dyad {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<double> parse_double(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

// Calls fn(line_number, line) for each line of text.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    ++line_no;
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

std::string format_fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

// --------------------------------------------------------------------------
// RTTM

std::string canonical_segment_id(std::string_view recording_id, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%05zu", index);
  return std::string(recording_id) + buf;
}

void assign_canonical_ids(std::string_view recording_id, std::vector<SpeechSegment>& segments) {
  for (auto& s : segments) s.id.clear();
  std::sort(segments.begin(), segments.end(), segment_order);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    segments[i].id = canonical_segment_id(recording_id, i);
  }
}

std::map<std::string, Timeline> parse_rttm(std::string_view text) {
  std::map<std::string, std::vector<SpeechSegment>> raw;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_whitespace(line);
    if (fields.empty() || fields[0] != "SPEAKER") return;
    if (fields.size() != 10) {
      throw LineError(Errc::MalformedLine, line_no,
                      "expected 10 fields, got " + std::to_string(fields.size()));
    }
    const auto onset = parse_double(fields[3]);
    const auto duration = parse_double(fields[4]);
    if (!onset || !duration) {
      throw LineError(Errc::MalformedLine, line_no, "unparseable onset or duration");
    }
    SpeechSegment seg;
    seg.onset = *onset;
    seg.duration = *duration;
    if (fields[7] != "<NA>") seg.speaker = std::string(fields[7]);
    raw[std::string(fields[1])].push_back(std::move(seg));
  });

  std::map<std::string, Timeline> out;
  for (auto& [rec, segs] : raw) {
    assign_canonical_ids(rec, segs);
    double last_end = 0.0;
    for (const auto& s : segs) last_end = std::max(last_end, s.end());
    out.emplace(rec, validate_timeline(rec, std::move(segs), last_end));
  }
  return out;
}

std::string write_rttm(const std::map<std::string, Timeline>& timelines) {
  std::string out;
  for (const auto& [rec, timeline] : timelines) {
    for (const auto& seg : timeline.segments()) {
      if (!seg.speaker) {
        throw Error(Errc::MissingSpeakerLabel, "segment '" + seg.id + "' in " + rec);
      }
      out += "SPEAKER ";
      out += rec;
      out += " 1 ";
      out += format_fixed3(seg.onset);
      out += ' ';
      out += format_fixed3(seg.duration);
      out += " <NA> <NA> ";
      out += *seg.speaker;
      out += " <NA> <NA>\n";
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Embeddings

void EmbeddingTable::insert(std::string segment_id, std::vector<double> vec) {
  if (vec.empty()) {
    throw Error(Errc::DimensionMismatch, "segment '" + segment_id + "' has no components");
  }
  if (dim_ == 0) {
    dim_ = vec.size();
  } else if (vec.size() != dim_) {
    throw Error(Errc::DimensionMismatch, "segment '" + segment_id + "' has dimension " +
                                             std::to_string(vec.size()) + ", expected " +
                                             std::to_string(dim_));
  }
  if (std::all_of(vec.begin(), vec.end(), [](double v) { return v == 0.0; })) {
    throw Error(Errc::ZeroVector, "segment '" + segment_id + "'");
  }
  if (entries_.contains(segment_id)) {
    throw Error(Errc::DuplicateSegmentId, "segment '" + segment_id + "'");
  }
  entries_.emplace(std::move(segment_id), std::move(vec));
}

const std::vector<double>* EmbeddingTable::find(const std::string& segment_id) const {
  const auto it = entries_.find(segment_id);
  return it == entries_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::subset(std::span<const SpeechSegment> segments) const {
  EmbeddingTable out;
  for (const auto& s : segments) {
    if (out.contains(s.id)) continue;
    if (const auto* v = find(s.id)) out.insert(s.id, *v);
  }
  return out;
}

EmbeddingTable load_embeddings(std::string_view text) {
  EmbeddingTable table;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    line = trim(line);
    if (line.empty()) return;
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = line.find(',', pos);
      tokens.push_back(trim(line.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (tokens.size() < 2 || tokens[0].empty()) {
      throw LineError(Errc::MalformedLine, line_no, "expected 'segment_id,v1,...'");
    }
    std::vector<double> vec;
    vec.reserve(tokens.size() - 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto v = parse_double(tokens[i]);
      if (!v) throw LineError(Errc::MalformedLine, line_no, "unparseable component");
      vec.push_back(*v);
    }
    try {
      table.insert(std::string(tokens[0]), std::move(vec));
    } catch (const Error& e) {
      throw LineError(e.code(), line_no, e.detail());
    }
  });
  return table;
}

std::string write_embeddings(const EmbeddingTable& table) {
  std::string out;
  char buf[32];
  for (const auto& [id, vec] : table.entries()) {
    out += id;
    for (double v : vec) {
      std::snprintf(buf, sizeof buf, ",%.10g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

// --------------------------------------------------------------------------
// Manifest

std::string_view split_name(Split s) noexcept {
  switch (s) {
    case Split::Dev: return "dev";
    case Split::Eval: return "eval";
    case Split::None: return "none";
  }
  return "none";
}

std::string_view group_name(Group g) noexcept {
  switch (g) {
    case Group::Healthy: return "healthy";
    case Group::Depression: return "depression";
    case Group::Psychosis: return "psychosis";
    case Group::Unknown: return "unknown";
  }
  return "unknown";
}

const RecordingEntry* CorpusManifest::find_recording(std::string_view id) const {
  for (const auto& r : recordings) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

namespace {

Split parse_split(const std::string& s) {
  if (s == "dev") return Split::Dev;
  if (s == "eval") return Split::Eval;
  if (s == "none") return Split::None;
  throw Error(Errc::MalformedManifest, "unknown split '" + s + "'");
}

Group parse_group(const std::string& s) {
  if (s == "healthy") return Group::Healthy;
  if (s == "depression") return Group::Depression;
  if (s == "psychosis") return Group::Psychosis;
  if (s == "unknown") return Group::Unknown;
  throw Error(Errc::MalformedManifest, "unknown group '" + s + "'");
}

}  // namespace

CorpusManifest load_manifest(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedManifest, e.what());
  }
  CorpusManifest m;
  try {
    if (!doc.is_object() || !doc.contains("recordings")) {
      throw Error(Errc::MalformedManifest, "missing 'recordings' array");
    }
    for (const auto& r : doc.at("recordings")) {
      RecordingEntry e;
      e.id = r.at("id").get<std::string>();
      e.rttm = r.at("rttm").get<std::string>();
      e.embeddings = r.at("embeddings").get<std::string>();
      e.split = parse_split(r.value("split", std::string("none")));
      e.annotated = r.value("annotated", false);
      if (r.contains("duration")) e.duration = r.at("duration").get<double>();
      if (m.find_recording(e.id)) {
        throw Error(Errc::MalformedManifest, "duplicate recording id '" + e.id + "'");
      }
      m.recordings.push_back(std::move(e));
    }
    if (doc.contains("participants")) {
      for (const auto& p : doc.at("participants")) {
        ParticipantEntry e;
        e.id = p.at("id").get<std::string>();
        e.recording_ids = p.at("recordings").get<std::vector<std::string>>();
        if (p.contains("severity")) e.severity = p.at("severity").get<int>();
        if (p.contains("items")) {
          const auto items = p.at("items").get<std::vector<int>>();
          if (items.size() != kItemCount) {
            throw Error(Errc::MalformedManifest,
                        "participant '" + e.id + "' needs exactly 9 item scores");
          }
          std::array<int, kItemCount> arr{};
          std::copy(items.begin(), items.end(), arr.begin());
          e.items = arr;
        }
        e.group = parse_group(p.value("group", std::string("unknown")));
        m.participants.push_back(std::move(e));
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedManifest, e.what());
  }

  for (const auto& p : m.participants) {
    if (p.severity && (*p.severity < 0 || *p.severity > kMaxSeverity)) {
      throw Error(Errc::MalformedManifest, "participant '" + p.id + "' severity out of range");
    }
    if (p.items) {
      for (int v : *p.items) {
        if (v < 0 || v > kMaxItemScore) {
          throw Error(Errc::MalformedManifest, "participant '" + p.id + "' item out of range");
        }
      }
    }
    if (p.severity && p.items) {
      const int sum = std::accumulate(p.items->begin(), p.items->end(), 0);
      if (sum != *p.severity) {
        throw Error(Errc::ItemSumMismatch, "participant '" + p.id + "': items sum to " +
                                               std::to_string(sum) + ", severity is " +
                                               std::to_string(*p.severity));
      }
    }
    for (const auto& rid : p.recording_ids) {
      if (!m.find_recording(rid)) {
        throw Error(Errc::UnknownRecordingRef,
                    "participant '" + p.id + "' references '" + rid + "'");
      }
    }
  }
  return m;
}

std::string write_manifest(const CorpusManifest& manifest) {
  json doc;
  doc["recordings"] = json::array();
  for (const auto& r : manifest.recordings) {
    json e;
    e["id"] = r.id;
    e["rttm"] = r.rttm;
    e["embeddings"] = r.embeddings;
    e["split"] = std::string(split_name(r.split));
    e["annotated"] = r.annotated;
    if (r.duration) e["duration"] = *r.duration;
    doc["recordings"].push_back(std::move(e));
  }
  doc["participants"] = json::array();
  for (const auto& p : manifest.participants) {
    json e;
    e["id"] = p.id;
    e["recordings"] = p.recording_ids;
    if (p.severity) e["severity"] = *p.severity;
    if (p.items) e["items"] = std::vector<int>(p.items->begin(), p.items->end());
    e["group"] = std::string(group_name(p.group));
    doc["participants"].push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

// --------------------------------------------------------------------------
// Files

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(Errc::Io, "write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::Io, "cannot rename into '" + path.string() + "'");
  }
}

RecordingData load_recording(const RecordingEntry& entry, const std::filesystem::path& base_dir) {
  const auto rttm_path = base_dir / entry.rttm;
  const auto emb_path = base_dir / entry.embeddings;
  auto timelines = parse_rttm(read_text_file(rttm_path));

  std::vector<SpeechSegment> segs;
  if (auto it = timelines.find(entry.id); it != timelines.end()) {
    segs = it->second.segments();
  }
  double total = 0.0;
  for (const auto& s : segs) total = std::max(total, s.end());
  if (entry.duration) total = *entry.duration;

  RecordingData data;
  data.timeline = validate_timeline(entry.id, std::move(segs), total);
  try {
    data.embeddings = load_embeddings(read_text_file(emb_path));
  } catch (const LineError& e) {
    throw Error(e.code(), emb_path.string() + ": " + e.detail());
  }
  return data;
}

}  // namespace dyad
