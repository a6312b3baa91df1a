#include "dyad/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "dyad/error.hpp"
#include "dyad/parallel.hpp"

namespace dyad {

RecordingSource directory_source(std::filesystem::path base_dir) {
  return [base = std::move(base_dir)](const RecordingEntry& entry) {
    return load_recording(entry, base);
  };
}

RecordingSource corpus_source(const SyntheticCorpus& corpus) {
  return [&corpus](const RecordingEntry& entry) {
    const auto it = corpus.recordings.find(entry.id);
    if (it == corpus.recordings.end()) {
      throw Error(Errc::UnknownRecordingRef, "no data for recording '" + entry.id + "'");
    }
    return it->second;
  };
}

std::vector<LabeledRecording> load_labeled(const CorpusManifest& manifest, Split split,
                                           const RecordingSource& source, unsigned jobs) {
  std::vector<const RecordingEntry*> picked;
  for (const auto& r : manifest.recordings) {
    if (r.annotated && r.split == split) picked.push_back(&r);
  }
  std::vector<std::optional<LabeledRecording>> loaded(picked.size());
  parallel_for(picked.size(), jobs, [&](std::size_t i) {
    auto data = source(*picked[i]);
    const auto truth = ground_truth_label(data.timeline);
    if (truth == TruthLabel::Excluded) return;
    loaded[i] = LabeledRecording{picked[i]->id, std::move(data),
                                 truth == TruthLabel::Dyadic ? DyadicLabel::Dyadic
                                                             : DyadicLabel::NonDyadic};
  });
  std::vector<LabeledRecording> out;
  for (auto& l : loaded) {
    if (l) out.push_back(std::move(*l));
  }
  return out;
}

std::vector<DyadicLabel> truth_labels(std::span<const LabeledRecording> recs) {
  std::vector<DyadicLabel> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(r.label);
  return out;
}

ThresholdTuneReport tune_on(std::span<const LabeledRecording> dev, std::span<const double> grid,
                            const SpuriousMode& spurious, unsigned jobs) {
  std::vector<DevRecording> items;
  items.reserve(dev.size());
  for (const auto& r : dev) {
    items.push_back(DevRecording{&r.data.embeddings, r.data.timeline.segments(), r.label});
  }
  return tune_threshold(items, grid, spurious, jobs);
}

std::vector<DyadicVerdict> detect_all(std::span<const LabeledRecording> recs, double threshold,
                                      const SpuriousMode& spurious, unsigned jobs) {
  std::vector<DyadicVerdict> out(recs.size());
  parallel_for(recs.size(), jobs, [&](std::size_t i) {
    out[i] = detect_dyadic(recs[i].data.embeddings, recs[i].data.timeline, threshold, spurious);
  });
  return out;
}

BaselineModel train_baseline_on(std::span<const LabeledRecording> recs, std::uint64_t seed,
                                unsigned jobs) {
  std::vector<VadFeatureVector> features;
  std::vector<DyadicLabel> labels;
  for (const auto& r : recs) {
    if (r.data.timeline.size() < 2) continue;
    features.push_back(compute_vad_features(r.data.timeline));
    labels.push_back(r.label);
  }
  return train_baseline(features, labels, seed, jobs);
}

BaselinePrediction predict_recording(const BaselineModel& model, const Timeline& t) {
  if (t.size() < 2) return {};
  return predict_baseline(model, compute_vad_features(t));
}

Forest train_spurious_on(std::span<const LabeledRecording> recs,
                         std::span<const double> thresholds, const ForestConfig& cfg,
                         unsigned jobs) {
  if (thresholds.empty()) throw Error(Errc::EmptyGrid, "no clustering thresholds");
  // One slot per (recording, threshold) so the pooled order is fixed.
  const std::size_t nt = thresholds.size();
  std::vector<std::optional<ClusterAssignment>> clusterings(recs.size() * nt);
  parallel_for(recs.size(), jobs, [&](std::size_t i) {
    const auto& e = recs[i].data.embeddings;
    const auto sub = e.subset(recs[i].data.timeline.segments());
    if (sub.empty()) return;
    const auto dendrogram = build_dendrogram(sub);
    for (std::size_t k = 0; k < nt; ++k) {
      clusterings[i * nt + k] = cut_dendrogram(dendrogram, thresholds[k]);
    }
  });
  std::vector<SpuriousTrainingItem> items;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t k = 0; k < nt; ++k) {
      const auto& c = clusterings[i * nt + k];
      if (!c) continue;
      items.push_back(SpuriousTrainingItem{&*c, &recs[i].data.embeddings,
                                           recs[i].data.timeline.segments()});
    }
  }
  if (items.empty()) throw Error(Errc::EmptyTrainingSet, "no embedded segments to cluster");
  return train_spurious_model(items, cfg, jobs);
}

namespace {

double parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(Errc::InvalidArgument, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw Error(Errc::InvalidArgument, "grid range must be <lo>:<hi>:<step>");
    }
    const double lo = parse_number(text.substr(0, c1));
    const double hi = parse_number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_number(text.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) {
      throw Error(Errc::InvalidArgument, "grid range needs step > 0 and hi >= lo");
    }
    // Count steps in integers so the end point is not lost to rounding.
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto end = comma == std::string_view::npos ? text.size() : comma;
      out.push_back(parse_number(text.substr(start, end - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  for (double t : out) {
    if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "grid thresholds must be > 0");
  }
  return out;
}

namespace {

std::string section_for(const SpuriousMode& m) {
  return m.kind == SpuriousMode::Kind::Off ? "Without Spurious Speaker Detection"
                                           : "With Spurious Speaker Detection";
}

}  // namespace

std::vector<DetectionRow> evaluate_detection(const CorpusManifest& manifest,
                                             const RecordingSource& source,
                                             const DetectionEvalOptions& opts) {
  const auto dev = load_labeled(manifest, Split::Dev, source, opts.jobs);
  const auto eval = load_labeled(manifest, Split::Eval, source, opts.jobs);
  const auto dev_truth = truth_labels(dev);
  const auto eval_truth = truth_labels(eval);

  std::vector<DetectionRow> rows;
  for (const auto& mode : opts.modes) {
    const double threshold =
        opts.threshold ? *opts.threshold : tune_on(dev, opts.grid, mode, opts.jobs).best_threshold;
    const auto add = [&](const char* name, std::span<const LabeledRecording> recs,
                         const std::vector<DyadicLabel>& truth) {
      if (recs.empty()) return;
      const auto verdicts = detect_all(recs, threshold, mode, opts.jobs);
      rows.push_back(DetectionRow{section_for(mode), mode.describe(), name, threshold,
                                  static_cast<int>(recs.size()), evaluate(verdicts, truth)});
    };
    add("dev", dev, dev_truth);
    add("eval", eval, eval_truth);
  }

  if (opts.baseline && !eval.empty()) {
    const auto model = train_baseline_on(dev, opts.seed, opts.jobs);
    std::vector<DyadicLabel> predicted(eval.size());
    parallel_for(eval.size(), opts.jobs, [&](std::size_t i) {
      predicted[i] = predict_recording(model, eval[i].data.timeline).label;
    });
    rows.push_back(DetectionRow{"Baseline RF Model", "baseline", "eval", std::nullopt,
                                static_cast<int>(eval.size()), evaluate(predicted, eval_truth)});
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string detection_rows_to_csv(std::span<const DetectionRow> rows) {
  std::string out =
      "section,system,dataset,threshold,n,accuracy,specificity,sensitivity,tp,fp,tn,fn\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out += quoted(r.section) + ',' + quoted(r.system) + ',' + r.dataset + ',' +
           (r.threshold ? fixed(*r.threshold, 4) : std::string("NA")) + ',' +
           std::to_string(r.n) + ',' + fixed(m.accuracy) + ',' + fixed(m.specificity) + ',' +
           fixed(m.sensitivity) + ',' + std::to_string(m.confusion.tp) + ',' +
           std::to_string(m.confusion.fp) + ',' + std::to_string(m.confusion.tn) + ',' +
           std::to_string(m.confusion.fn) + '\n';
  }
  return out;
}

CohortAnalysis analyze_cohort(const CorpusManifest& manifest, const RecordingSource& source,
                              const AnalyzeOptions& opts) {
  if (!(opts.window_secs > 0.0)) throw Error(Errc::InvalidArgument, "window length must be > 0");
  if (opts.top_k < 2) throw Error(Errc::InvalidArgument, "top-k must be >= 2");

  // Load every referenced recording once.
  std::vector<std::string> ids;
  {
    std::set<std::string> seen;
    for (const auto& p : manifest.participants) {
      for (const auto& r : p.recording_ids) {
        if (seen.insert(r).second) ids.push_back(r);
      }
    }
  }
  std::vector<RecordingData> data(ids.size());
  parallel_for(ids.size(), opts.jobs, [&](std::size_t i) {
    const auto* entry = manifest.find_recording(ids[i]);
    if (!entry) throw Error(Errc::UnknownRecordingRef, "recording '" + ids[i] + "'");
    data[i] = source(*entry);
  });
  std::map<std::string, const RecordingData*> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = &data[i];

  // Flatten every participant window into one work list.
  struct Job {
    std::size_t participant;
    const RecordingData* rec;
    Window window;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < manifest.participants.size(); ++p) {
    for (const auto& rid : manifest.participants[p].recording_ids) {
      const auto* rec = by_id.at(rid);
      for (auto& w : segment_windows(rec->timeline, opts.window_secs)) {
        jobs.push_back(Job{p, rec, std::move(w)});
      }
    }
  }

  CohortAnalysis out;
  out.windows.resize(jobs.size());
  parallel_for(jobs.size(), opts.jobs, [&](std::size_t i) {
    const auto& j = jobs[i];
    out.windows[i] = evaluate_window(j.rec->timeline.recording_id(), j.window, j.rec->embeddings,
                                     opts.threshold, opts.spurious);
  });

  std::vector<std::vector<WindowVerdict>> per_participant(manifest.participants.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    per_participant[jobs[i].participant].push_back(out.windows[i]);
  }
  std::vector<std::optional<ParticipantProfile>> profiles(per_participant.size());
  parallel_for(per_participant.size(), opts.jobs, [&](std::size_t p) {
    if (per_participant[p].empty()) return;
    profiles[p] = participant_profile(manifest.participants[p], per_participant[p], opts.top_k);
  });
  for (auto& p : profiles) {
    if (p) out.profiles.push_back(std::move(*p));
  }
  out.stats = cohort_statistics(out.profiles);
  return out;
}

std::string window_verdicts_to_csv(std::span<const WindowVerdict> windows) {
  std::string out = "recording_id,window,start,speech_pct,n_speakers,dyadic\n";
  for (const auto& w : windows) {
    out += w.recording_id + ',' + std::to_string(w.window.index) + ',' +
           fixed(w.window.start, 3) + ',' + fixed(w.speech_pct) + ',' +
           std::to_string(w.verdict.n_speakers_detected) + ',' +
           (w.verdict.is_dyadic ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace dyad
