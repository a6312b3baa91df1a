// dyad: dyadic-interaction detection and cohort analysis from diarized
// recordings with per-segment speaker embeddings.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "dyad/error.hpp"
#include "dyad/learn.hpp"
#include "dyad/pipeline.hpp"
#include "dyad/synthgen.hpp"

namespace fs = std::filesystem;
using namespace dyad;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Common {
  std::string manifest;
  std::string out;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
};

void add_jobs(CLI::App* cmd, Common& c) {
  cmd->add_option("--jobs", c.jobs, "Worker threads; output does not depend on it")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

void add_seed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
}

void add_manifest(CLI::App* cmd, Common& c) {
  cmd->add_option("--manifest", c.manifest, "Corpus manifest (JSON)")->required();
}

struct Loaded {
  CorpusManifest manifest;
  RecordingSource source;
};

Loaded load(const std::string& manifest_path) {
  Loaded l;
  l.manifest = load_manifest(read_text_file(manifest_path));
  l.source = directory_source(fs::path(manifest_path).parent_path());
  return l;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

std::string render_table(const std::vector<DetectionRow>& rows) {
  std::string out;
  std::string current;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %10s %12s %12s %6s\n", "dataset", "accuracy",
                "specificity", "sensitivity", "n");
  out += line;
  for (const auto& r : rows) {
    std::string header = r.section;
    if (r.system != "baseline") header += " [" + r.system + "]";
    if (header != current) {
      current = header;
      out += "-- " + header;
      if (r.threshold) {
        std::snprintf(line, sizeof line, " (threshold %.4g)", *r.threshold);
        out += line;
      }
      out += '\n';
    }
    std::snprintf(line, sizeof line, "%-10s %10s %12s %12s %6d\n", r.dataset.c_str(),
                  percent(r.metrics.accuracy).c_str(), percent(r.metrics.specificity).c_str(),
                  percent(r.metrics.sensitivity).c_str(), r.n);
    out += line;
  }
  return out;
}

std::string format_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", t);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic interaction detection and conversational timing analysis"};
  app.require_subcommand(1);
  Common c;

  // simulate ---------------------------------------------------------------
  std::string config_path;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus from a JSON config");
  simulate->add_option("--config", config_path, "Simulation config (JSON)")->required();
  simulate->add_option("--out", c.out, "Output corpus directory")->required();
  simulate->add_option("--seed", sim_seed, "Overrides the config seed");
  add_jobs(simulate, c);

  // tune -------------------------------------------------------------------
  std::string grid_text;
  std::string spurious_text = "heuristic";
  auto* tune = app.add_subcommand("tune", "Pick the clustering threshold on the dev split");
  add_manifest(tune, c);
  tune->add_option("--grid", grid_text, "Thresholds: <lo>:<hi>:<step> or a comma list")
      ->default_str("0.1:1.5:0.05");
  tune->add_option("--spurious", spurious_text, "off | heuristic | model=<path>")
      ->capture_default_str();
  tune->add_option("--out", c.out, "Per-threshold accuracy CSV");
  add_jobs(tune, c);

  // eval -------------------------------------------------------------------
  std::optional<double> threshold;
  std::vector<std::string> spurious_list;
  bool no_baseline = false;
  auto* eval = app.add_subcommand("eval", "Detection accuracy, specificity and sensitivity");
  add_manifest(eval, c);
  eval->add_option("--threshold", threshold,
                   "Clustering threshold; tuned on dev per spurious mode when omitted");
  eval->add_option("--grid", grid_text, "Tuning grid when --threshold is omitted")
      ->default_str("0.1:1.5:0.05");
  eval->add_option("--spurious", spurious_list,
                   "Spurious modes to evaluate (repeatable); default: heuristic and off");
  eval->add_flag("--no-baseline", no_baseline, "Skip the VAD-feature baseline row");
  eval->add_option("--out", c.out, "Metrics CSV");
  add_seed(eval, c);
  add_jobs(eval, c);

  // analyze ----------------------------------------------------------------
  double analyze_threshold = 0.5;
  double window_secs = kDefaultWindowSecs;
  std::size_t top_k = kDefaultTopWindows;
  auto* analyze = app.add_subcommand("analyze", "Per-participant profiles and cohort statistics");
  add_manifest(analyze, c);
  analyze->add_option("--threshold", analyze_threshold, "Clustering threshold")->required();
  analyze->add_option("--window-secs", window_secs, "Window length in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze->add_option("--top-k", top_k, "Dyadic windows used for timing features")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  analyze->add_option("--spurious", spurious_text, "off | heuristic | model=<path>")
      ->capture_default_str();
  analyze->add_option("--out", c.out,
                      "Output directory (profiles.csv, stats.csv, windows.csv)")
      ->required();
  add_jobs(analyze, c);

  // baseline-train / baseline-predict -------------------------------------
  auto* btrain = app.add_subcommand("baseline-train", "Train the VAD-feature forest on dev");
  add_manifest(btrain, c);
  btrain->add_option("--out", c.out, "Model file (JSON)")->required();
  add_seed(btrain, c);
  add_jobs(btrain, c);

  std::string model_path;
  std::string split_text = "eval";
  auto* bpredict =
      app.add_subcommand("baseline-predict", "Label recordings with a trained VAD-feature forest");
  add_manifest(bpredict, c);
  bpredict->add_option("--model", model_path, "Model file from baseline-train")->required();
  bpredict->add_option("--split", split_text, "dev | eval | all")
      ->check(CLI::IsMember({"dev", "eval", "all"}))
      ->capture_default_str();
  bpredict->add_option("--out", c.out, "Predictions CSV")->required();

  // spurious-train ---------------------------------------------------------
  std::optional<double> spurious_threshold;
  auto* strain = app.add_subcommand("spurious-train",
                                    "Train the spurious-cluster forest on annotated dev data");
  add_manifest(strain, c);
  strain->add_option("--threshold", spurious_threshold,
                     "Cluster at this threshold only (default: every grid threshold)");
  strain->add_option("--grid", grid_text, "Clustering thresholds")->default_str("0.1:1.5:0.05");
  strain->add_option("--out", c.out, "Model file (JSON)")->required();
  add_seed(strain, c);
  add_jobs(strain, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const auto grid = [&] {
    return grid_text.empty() ? default_threshold_grid() : parse_grid(grid_text);
  };

  try {
    if (*simulate) {
      auto config = parse_simulate_config(read_text_file(config_path));
      std::visit(
          [&](auto& spec) {
            if (sim_seed) spec.seed = *sim_seed;
            SyntheticCorpus corpus;
            if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, CohortSpec>) {
              corpus = gen_cohort(spec, c.jobs);
            } else {
              corpus = gen_detection_corpus(spec, c.jobs);
            }
            write_corpus(corpus, c.out);
            std::cout << "wrote " << corpus.manifest.recordings.size() << " recordings to "
                      << c.out << "\n";
          },
          config);
    } else if (*tune) {
      const auto mode = SpuriousMode::parse(spurious_text);
      const auto g = grid();
      const auto l = load(c.manifest);
      const auto dev = load_labeled(l.manifest, Split::Dev, l.source, c.jobs);
      const auto report = tune_on(dev, g, mode, c.jobs);
      if (!c.out.empty()) {
        std::string csv = "threshold,accuracy\n";
        for (std::size_t i = 0; i < report.grid.size(); ++i) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.4f,%.6f\n", report.grid[i],
                        report.accuracy_per_threshold[i]);
          csv += buf;
        }
        write_text_file_atomic(c.out, csv);
      }
      std::cout << format_threshold(report.best_threshold) << "\n";
    } else if (*eval) {
      DetectionEvalOptions opts;
      if (!spurious_list.empty()) {
        opts.modes.clear();
        for (const auto& s : spurious_list) opts.modes.push_back(SpuriousMode::parse(s));
      }
      opts.threshold = threshold;
      if (threshold && !(*threshold > 0.0)) {
        throw Error(Errc::InvalidArgument, "threshold must be > 0");
      }
      opts.grid = grid();
      opts.baseline = !no_baseline;
      opts.seed = c.seed;
      opts.jobs = c.jobs;
      const auto l = load(c.manifest);
      const auto rows = evaluate_detection(l.manifest, l.source, opts);
      if (!c.out.empty()) write_text_file_atomic(c.out, detection_rows_to_csv(rows));
      std::cout << render_table(rows);
    } else if (*analyze) {
      AnalyzeOptions opts;
      opts.threshold = analyze_threshold;
      opts.spurious = SpuriousMode::parse(spurious_text);
      opts.window_secs = window_secs;
      opts.top_k = top_k;
      opts.jobs = c.jobs;
      if (!(opts.threshold > 0.0)) throw Error(Errc::InvalidArgument, "threshold must be > 0");
      const auto l = load(c.manifest);
      const auto result = analyze_cohort(l.manifest, l.source, opts);
      const fs::path dir(c.out);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
      write_text_file_atomic(dir / "profiles.csv", profiles_to_csv(result.profiles));
      write_text_file_atomic(dir / "stats.csv", stat_rows_to_csv(result.stats));
      write_text_file_atomic(dir / "windows.csv", window_verdicts_to_csv(result.windows));
      std::cout << stat_rows_summary(result.stats);
    } else if (*btrain) {
      const auto l = load(c.manifest);
      const auto dev = load_labeled(l.manifest, Split::Dev, l.source, c.jobs);
      const auto model = train_baseline_on(dev, c.seed, c.jobs);
      write_text_file_atomic(c.out, forest_to_json(model.forest));
      std::cout << "trained on " << dev.size() << " dev recordings\n";
    } else if (*bpredict) {
      const BaselineModel model{forest_from_json(read_text_file(model_path))};
      const auto l = load(c.manifest);
      std::string csv = "recording_id,split,predicted,vote_fraction\n";
      for (const auto& r : l.manifest.recordings) {
        if (split_text != "all" && split_name(r.split) != split_text) continue;
        const auto data = l.source(r);
        const auto p = predict_recording(model, data.timeline);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", p.vote_fraction);
        csv += r.id + ',' + std::string(split_name(r.split)) + ',' +
               (p.label == DyadicLabel::Dyadic ? "dyadic" : "non-dyadic") + ',' + buf + '\n';
      }
      write_text_file_atomic(c.out, csv);
    } else if (*strain) {
      std::vector<double> thresholds;
      if (spurious_threshold) {
        if (!(*spurious_threshold > 0.0)) {
          throw Error(Errc::InvalidArgument, "threshold must be > 0");
        }
        thresholds = {*spurious_threshold};
      } else {
        thresholds = grid();
      }
      const auto l = load(c.manifest);
      const auto dev = load_labeled(l.manifest, Split::Dev, l.source, c.jobs);
      ForestConfig cfg;
      cfg.seed = c.seed;
      const auto forest = train_spurious_on(dev, thresholds, cfg, c.jobs);
      write_text_file_atomic(c.out, forest_to_json(forest));
      std::cout << "trained on " << dev.size() << " dev recordings\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::InvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
