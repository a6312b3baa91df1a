#include "dyad/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "dyad/error.hpp"
#include "dyad/parallel.hpp"

namespace dyad {

namespace {

using Ms = std::int64_t;

Ms to_ms(double secs) { return static_cast<Ms>(std::llround(secs * 1000.0)); }
double from_ms(Ms ms) { return static_cast<double>(ms) / 1000.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

void check_spec(const ConversationSpec& s) {
  require(s.n_speakers >= 1, "n_speakers must be >= 1");
  require(s.speaker_names.empty() ||
              s.speaker_names.size() == static_cast<std::size_t>(s.n_speakers),
          "speaker_names must match n_speakers");
  require(s.duration > 0.0 && std::isfinite(s.duration), "duration must be > 0");
  require(s.offset >= 0.0 && std::isfinite(s.offset), "offset must be >= 0");
  require(s.mean_utterance > 0.0, "mean_utterance must be > 0");
  require(s.mean_pause > 0.0, "mean_pause must be > 0");
  require(s.mean_response_gap > 0.0, "mean_response_gap must be > 0");
  require(s.response_gap_by_speaker.empty() ||
              s.response_gap_by_speaker.size() == static_cast<std::size_t>(s.n_speakers),
          "response_gap_by_speaker must match n_speakers");
  for (double g : s.response_gap_by_speaker) require(g > 0.0, "response gaps must be > 0");
  require(s.overlap_prob >= 0.0 && s.overlap_prob <= 1.0, "overlap_prob must be in [0, 1]");
  require(s.self_transition >= 0.0 && s.self_transition <= 1.0,
          "self_transition must be in [0, 1]");
}

int next_speaker(const ConversationSpec& s, int cur, Pcg32& rng) {
  const int n = s.n_speakers;
  if (n == 1) return 0;
  if (s.turn_model == TurnModel::RoundRobin) return (cur + 1) % n;
  if (rng.bernoulli(s.self_transition)) return cur;
  const int k = static_cast<int>(rng.below(static_cast<std::uint32_t>(n - 1)));
  return k >= cur ? k + 1 : k;
}

}  // namespace

std::vector<SpeechSegment> gen_conversation_segments(const ConversationSpec& spec) {
  check_spec(spec);
  Pcg32 rng(spec.seed, 0x5e9);
  std::vector<std::string> names = spec.speaker_names;
  if (names.empty()) {
    for (int i = 0; i < spec.n_speakers; ++i) names.push_back("spk" + std::to_string(i));
  }
  const auto response_gap = [&](int who) {
    return spec.response_gap_by_speaker.empty() ? spec.mean_response_gap
                                                : spec.response_gap_by_speaker[who];
  };

  // Integer milliseconds throughout so that the output survives a 3-decimal
  // text round trip unchanged. Segments end strictly before the limit.
  const Ms start = to_ms(spec.offset);
  const Ms limit = start + to_ms(spec.duration);
  std::vector<SpeechSegment> out;
  int speaker = static_cast<int>(rng.below(static_cast<std::uint32_t>(spec.n_speakers)));
  Ms t = start + to_ms(rng.exponential(spec.mean_pause));
  while (true) {
    const Ms dur = std::max<Ms>(1, to_ms(rng.exponential(spec.mean_utterance)));
    if (t + dur >= limit) break;
    SpeechSegment seg;
    seg.onset = from_ms(t);
    seg.duration = from_ms(dur);
    seg.speaker = names[speaker];
    out.push_back(std::move(seg));

    const int next = next_speaker(spec, speaker, rng);
    Ms nt;
    if (next == speaker) {
      nt = t + dur + to_ms(rng.exponential(spec.mean_pause));
    } else if (rng.bernoulli(spec.overlap_prob)) {
      // The next speaker starts before this utterance ends.
      const Ms overlap = std::min<Ms>(dur - 1, to_ms(rng.uniform(0.1, 0.5) * from_ms(dur)));
      nt = t + dur - std::max<Ms>(overlap, 0);
    } else {
      nt = t + dur + to_ms(rng.exponential(response_gap(next)));
    }
    t = std::max(nt, t + 1);
    speaker = next;
  }
  return out;
}

Timeline gen_conversation(const ConversationSpec& spec) {
  auto segs = gen_conversation_segments(spec);
  assign_canonical_ids(spec.recording_id, segs);
  return validate_timeline(spec.recording_id, std::move(segs), from_ms(to_ms(spec.offset) +
                                                                       to_ms(spec.duration)));
}

std::vector<double> random_unit_vector(int dim, Pcg32& rng) {
  require(dim >= 1, "dim must be >= 1");
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> place_centroids(int n, int dim, double min_distance, Pcg32& rng,
                                                 std::span<const std::vector<double>> existing,
                                                 int max_tries) {
  require(n >= 0, "n must be >= 0");
  require(dim >= 1, "dim must be >= 1");
  require(min_distance >= 0.0 && min_distance <= 2.0, "min distance must be in [0, 2]");
  const auto far_enough = [&](const std::vector<double>& c,
                              const std::vector<double>& other) {
    double dot = 0.0;
    for (int k = 0; k < dim; ++k) dot += c[k] * other[k];
    return 1.0 - dot >= min_distance;
  };
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_tries && !placed; ++attempt) {
      auto c = random_unit_vector(dim, rng);
      const bool ok =
          std::all_of(existing.begin(), existing.end(),
                      [&](const auto& o) { return far_enough(c, o); }) &&
          std::all_of(out.begin(), out.end(), [&](const auto& o) { return far_enough(c, o); });
      if (ok) {
        out.push_back(std::move(c));
        placed = true;
      }
    }
    if (!placed) {
      throw Error(Errc::CentroidPlacementFailure,
                  "could not place centroid " + std::to_string(i) + " after " +
                      std::to_string(max_tries) + " tries");
    }
  }
  return out;
}

EmbeddingTable gen_embeddings_with_centroids(
    std::span<const SpeechSegment> segments,
    const std::map<std::string, std::vector<double>>& centroids, const EmbeddingSpec& spec,
    Pcg32& rng) {
  require(spec.intra_noise >= 0.0, "intra_noise must be >= 0");
  require(spec.spurious_rate >= 0.0 && spec.spurious_rate <= 1.0,
          "spurious_rate must be in [0, 1]");
  require(spec.spurious_rate == 0.0 || spec.spurious_magnitude >= 2.0 * spec.intra_noise,
          "spurious_magnitude must be >= 2 * intra_noise");
  EmbeddingTable table;
  for (const auto& seg : segments) {
    if (!seg.speaker) throw Error(Errc::MissingSpeakerLabel, "segment '" + seg.id + "'");
    const auto it = centroids.find(*seg.speaker);
    if (it == centroids.end()) {
      throw Error(Errc::InconsistentInputs, "no centroid for speaker '" + *seg.speaker + "'");
    }
    const auto& c = it->second;
    if (c.size() != static_cast<std::size_t>(spec.dim)) {
      throw Error(Errc::DimensionMismatch, "centroid dimension differs from spec");
    }
    std::vector<double> v(c);
    for (auto& x : v) x += rng.normal(0.0, spec.intra_noise);
    if (spec.spurious_rate > 0.0 && rng.bernoulli(spec.spurious_rate)) {
      const auto u = random_unit_vector(spec.dim, rng);
      for (int k = 0; k < spec.dim; ++k) v[k] += spec.spurious_magnitude * u[k];
    }
    table.insert(seg.id, std::move(v));
  }
  return table;
}

EmbeddingTable gen_embeddings(const Timeline& t, const EmbeddingSpec& spec) {
  std::set<std::string> speakers;
  for (const auto& s : t.segments()) {
    if (!s.speaker) throw Error(Errc::MissingSpeakerLabel, "segment '" + s.id + "'");
    speakers.insert(*s.speaker);
  }
  Pcg32 rng(spec.seed, 0xe3b);
  const auto cs = place_centroids(static_cast<int>(speakers.size()), spec.dim,
                                  spec.centroid_min_distance, rng, {}, spec.max_placement_tries);
  std::map<std::string, std::vector<double>> centroids;
  std::size_t i = 0;
  for (const auto& name : speakers) centroids[name] = cs[i++];
  return gen_embeddings_with_centroids(t.segments(), centroids, spec, rng);
}

// ---------------------------------------------------------------------------
// Corpora
// ---------------------------------------------------------------------------

namespace {

std::string numbered(const char* prefix, int i, int width = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

RecordingEntry entry_for(const std::string& id, Split split, bool annotated, double duration) {
  RecordingEntry e;
  e.id = id;
  e.rttm = "rttm/" + id + ".rttm";
  e.embeddings = "emb/" + id + ".emb";
  e.split = split;
  e.annotated = annotated;
  e.duration = duration;
  return e;
}

}  // namespace

SyntheticCorpus gen_detection_corpus(const DetectionCorpusSpec& spec, unsigned jobs) {
  require(spec.n_recordings >= 1, "n_recordings must be >= 1");
  require(spec.min_speakers >= 1 && spec.max_speakers >= spec.min_speakers,
          "speaker range must satisfy 1 <= min <= max");
  const int n = spec.n_recordings;
  std::vector<RecordingData> data(n);
  std::vector<RecordingEntry> entries(n);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    Pcg32 rng(mix_seed(spec.seed, i), 0xdc);
    const std::string id = numbered("rec", static_cast<int>(i));
    ConversationSpec conv;
    conv.recording_id = id;
    conv.n_speakers = spec.min_speakers +
                      static_cast<int>(rng.below(spec.max_speakers - spec.min_speakers + 1));
    conv.duration = spec.duration;
    conv.mean_utterance = rng.uniform(1.5, 3.5);
    conv.mean_pause = rng.uniform(0.4, 1.2);
    conv.mean_response_gap = rng.uniform(0.5, 1.5);
    conv.overlap_prob = spec.overlap_prob;
    conv.turn_model = TurnModel::Markov;
    conv.self_transition = rng.uniform(0.1, 0.4);
    conv.seed = rng.next_u64();
    auto timeline = gen_conversation(conv);

    EmbeddingSpec es = spec.embedding;
    es.seed = rng.next_u64();
    auto emb = gen_embeddings(timeline, es);
    data[i] = RecordingData{std::move(timeline), std::move(emb)};
    entries[i] = entry_for(id, i % 2 == 0 ? Split::Dev : Split::Eval, true,
                           data[i].timeline.total_duration());
  });

  SyntheticCorpus out;
  for (int i = 0; i < n; ++i) {
    out.manifest.recordings.push_back(entries[i]);
    out.recordings.emplace(entries[i].id, std::move(data[i]));
  }
  return out;
}

CohortSpec null_cohort(CohortSpec spec) {
  spec.ratio_model = RatioModel::Null;
  spec.response_slope = 0.0;
  return spec;
}

namespace {

struct GroupPrior {
  Group group;
  double latent_lo;
  double latent_hi;
};

// Per-item endorsement probability ranges by diagnostic group.
constexpr GroupPrior kPriors[] = {
    {Group::Healthy, 0.00, 0.30},
    {Group::Depression, 0.35, 0.85},
    {Group::Psychosis, 0.20, 0.70},
};

Group group_for(int i, int n) {
  // 13 : 11 : 8 of every 32 participants.
  const int healthy = static_cast<int>(std::lround(n * 13.0 / 32.0));
  const int depression = static_cast<int>(std::lround(n * 11.0 / 32.0));
  if (i < healthy) return Group::Healthy;
  if (i < healthy + depression) return Group::Depression;
  return Group::Psychosis;
}

double expected_ratio(const CohortSpec& s, int severity) {
  if (s.ratio_model == RatioModel::Null) return s.ratio_at_zero;
  const double cut = s.severity_cut;
  if (severity < s.severity_cut) {
    return s.ratio_at_zero + (s.ratio_peak - s.ratio_at_zero) * severity / cut;
  }
  return s.ratio_peak + (s.ratio_at_max - s.ratio_peak) * (severity - cut) / (kMaxSeverity - cut);
}

struct ParticipantDraw {
  ParticipantEntry entry;
  std::vector<RecordingEntry> recordings;
  std::vector<RecordingData> data;
};

// One window's worth of labeled segments, placed at [start, start + len).
std::vector<SpeechSegment> window_segments(const CohortSpec& s, const std::string& pid,
                                           double response_time, bool dyadic, double start,
                                           int window_tag, Pcg32& rng,
                                           std::map<std::string, std::vector<double>>& centroids,
                                           const std::vector<double>& participant_centroid) {
  ConversationSpec conv;
  conv.mean_utterance = s.mean_utterance;
  conv.mean_pause = s.mean_pause;
  conv.mean_response_gap = s.partner_response;
  conv.overlap_prob = s.overlap_prob;
  conv.self_transition = s.self_transition;
  conv.seed = rng.next_u64();

  const auto add_partners = [&](int count) {
    std::vector<std::vector<double>> taken{participant_centroid};
    const auto placed = place_centroids(count, s.embedding.dim, s.embedding.centroid_min_distance,
                                        rng, taken, s.embedding.max_placement_tries);
    for (int k = 0; k < count; ++k) {
      const std::string name = pid + "_w" + std::to_string(window_tag) + "_" + std::to_string(k);
      centroids[name] = placed[k];
      conv.speaker_names.push_back(name);
    }
  };

  double active = 0.0;
  if (dyadic) {
    conv.n_speakers = 2;
    conv.speaker_names = {pid};
    add_partners(1);
    conv.turn_model = TurnModel::Markov;
    conv.response_gap_by_speaker = {response_time, s.partner_response};
    active = rng.uniform(0.3, 1.0);
  } else {
    const double kind = rng.uniform();
    if (kind < 0.3) return {};  // silence
    if (kind < 0.65) {
      conv.n_speakers = 1;
      conv.speaker_names = {pid};
      active = rng.uniform(0.05, 0.3);
    } else {
      const int others = 2 + static_cast<int>(rng.below(2));
      conv.n_speakers = others + 1;
      conv.speaker_names = {pid};
      add_partners(others);
      conv.turn_model = TurnModel::RoundRobin;
      active = rng.uniform(0.3, 1.0);
    }
  }
  const double len = std::floor(active * s.window_secs);
  conv.duration = len;
  conv.offset = start + std::floor(rng.uniform(0.0, s.window_secs - len));
  return gen_conversation_segments(conv);
}

ParticipantDraw draw_participant(const CohortSpec& s, int index) {
  Pcg32 rng(mix_seed(s.seed, static_cast<std::uint64_t>(index)), 0xc0);
  ParticipantDraw out;
  auto& p = out.entry;
  p.id = numbered("p", index);
  p.group = group_for(index, s.n_participants);
  const auto& prior = kPriors[static_cast<int>(p.group)];
  const double latent = rng.uniform(prior.latent_lo, prior.latent_hi);
  std::array<int, kItemCount> items{};
  int severity = 0;
  for (auto& item : items) {
    for (int k = 0; k < kMaxItemScore; ++k) item += rng.bernoulli(latent) ? 1 : 0;
    severity += item;
  }
  p.items = items;
  p.severity = severity;

  const double ratio =
      std::clamp(expected_ratio(s, severity) + rng.normal(0.0, s.ratio_noise), 0.0, 1.0);
  const double response = std::max(
      0.05, s.response_base + s.response_slope * severity + rng.normal(0.0, s.response_noise));

  EmbeddingSpec es = s.embedding;
  const auto own = place_centroids(1, es.dim, 0.0, rng, {}, es.max_placement_tries)[0];

  int window_tag = 0;
  for (int r = 0; r < s.recordings_per_participant; ++r) {
    const std::string rid = p.id + "_d" + std::to_string(r + 1);
    std::map<std::string, std::vector<double>> centroids{{p.id, own}};
    std::vector<SpeechSegment> segs;
    for (int w = 0; w < s.windows_per_recording; ++w, ++window_tag) {
      const bool dyadic = rng.bernoulli(ratio);
      auto ws = window_segments(s, p.id, response, dyadic, w * s.window_secs, window_tag, rng,
                                centroids, own);
      segs.insert(segs.end(), std::make_move_iterator(ws.begin()),
                  std::make_move_iterator(ws.end()));
    }
    assign_canonical_ids(rid, segs);
    const double total = s.windows_per_recording * s.window_secs;
    auto timeline = validate_timeline(rid, std::move(segs), total);
    auto emb = gen_embeddings_with_centroids(timeline.segments(), centroids, es, rng);
    out.recordings.push_back(entry_for(rid, Split::None, false, total));
    out.data.push_back(RecordingData{std::move(timeline), std::move(emb)});
    p.recording_ids.push_back(rid);
  }
  return out;
}

}  // namespace

SyntheticCorpus gen_cohort(const CohortSpec& spec, unsigned jobs) {
  require(spec.n_participants >= 1, "n_participants must be >= 1");
  require(spec.recordings_per_participant >= 1, "recordings_per_participant must be >= 1");
  require(spec.windows_per_recording >= 1, "windows_per_recording must be >= 1");
  require(spec.window_secs > 0.0, "window_secs must be > 0");
  require(spec.severity_cut > 0 && spec.severity_cut < kMaxSeverity, "severity_cut out of range");
  require(spec.response_base > 0.0, "response_base must be > 0");
  require(spec.partner_response > 0.0, "partner_response must be > 0");

  std::vector<ParticipantDraw> draws(spec.n_participants);
  parallel_for(draws.size(), jobs,
               [&](std::size_t i) { draws[i] = draw_participant(spec, static_cast<int>(i)); });

  SyntheticCorpus out;
  for (auto& d : draws) {
    for (std::size_t r = 0; r < d.recordings.size(); ++r) {
      out.manifest.recordings.push_back(d.recordings[r]);
      out.recordings.emplace(d.recordings[r].id, std::move(d.data[r]));
    }
    out.manifest.participants.push_back(std::move(d.entry));
  }
  return out;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "rttm", ec);
  if (!ec) std::filesystem::create_directories(dir / "emb", ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& rec : corpus.manifest.recordings) {
    const auto it = corpus.recordings.find(rec.id);
    if (it == corpus.recordings.end()) {
      throw Error(Errc::UnknownRecordingRef, "no data for recording '" + rec.id + "'");
    }
    write_text_file_atomic(dir / rec.rttm, write_rttm({{rec.id, it->second.timeline}}));
    write_text_file_atomic(dir / rec.embeddings, write_embeddings(it->second.embeddings));
  }
  write_text_file_atomic(dir / "manifest.json", write_manifest(corpus.manifest));
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(const json& obj) : obj_(obj) {
    if (!obj.is_object()) throw Error(Errc::MalformedManifest, "config must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedManifest, std::string("config field '") + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) throw Error(Errc::MalformedManifest, "unknown config field '" + k + "'");
    }
  }

 private:
  const json& obj_;
  std::set<std::string> seen_;
};

void read_embedding(const json* node, EmbeddingSpec& e) {
  if (!node) return;
  Reader r(*node);
  r.get("dim", e.dim);
  r.get("centroid_min_distance", e.centroid_min_distance);
  r.get("intra_noise", e.intra_noise);
  r.get("spurious_rate", e.spurious_rate);
  r.get("spurious_magnitude", e.spurious_magnitude);
  r.get("max_placement_tries", e.max_placement_tries);
  r.finish();
}

}  // namespace

SimulateConfig parse_simulate_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedManifest, std::string("config: ") + e.what());
  }
  Reader r(doc);
  std::string kind;
  r.get("kind", kind);
  if (kind == "detection") {
    DetectionCorpusSpec s;
    r.get("seed", s.seed);
    r.get("n_recordings", s.n_recordings);
    r.get("min_speakers", s.min_speakers);
    r.get("max_speakers", s.max_speakers);
    r.get("duration", s.duration);
    r.get("overlap_prob", s.overlap_prob);
    read_embedding(r.child("embedding"), s.embedding);
    r.finish();
    return s;
  }
  if (kind == "cohort") {
    CohortSpec s;
    bool null_model = false;
    r.get("seed", s.seed);
    r.get("null_model", null_model);
    r.get("n_participants", s.n_participants);
    r.get("recordings_per_participant", s.recordings_per_participant);
    r.get("windows_per_recording", s.windows_per_recording);
    r.get("window_secs", s.window_secs);
    r.get("ratio_at_zero", s.ratio_at_zero);
    r.get("ratio_peak", s.ratio_peak);
    r.get("ratio_at_max", s.ratio_at_max);
    r.get("ratio_noise", s.ratio_noise);
    r.get("severity_cut", s.severity_cut);
    r.get("response_base", s.response_base);
    r.get("response_slope", s.response_slope);
    r.get("response_noise", s.response_noise);
    r.get("partner_response", s.partner_response);
    r.get("mean_utterance", s.mean_utterance);
    r.get("mean_pause", s.mean_pause);
    r.get("overlap_prob", s.overlap_prob);
    r.get("self_transition", s.self_transition);
    read_embedding(r.child("embedding"), s.embedding);
    r.finish();
    return null_model ? null_cohort(s) : s;
  }
  throw Error(Errc::MalformedManifest, "config 'kind' must be \"detection\" or \"cohort\"");
}

}  // namespace dyad
