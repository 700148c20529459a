// tools/cli.cc

#include "cli.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rfa/audio_io.h"
#include "rfa/envelopes.h"
#include "rfa/error.h"
#include "rfa/io_util.h"
#include "rfa/rhythm_spectra.h"
#include "rfa/synthgen.h"

namespace rfa::cli {
namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < std::min(jobs, n); ++t) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

void write_config_echo(const RunConfig& cfg) {
  write_file_atomic(cfg.out / "config.json", cfg.to_json().dump(2) + "\n");
}

void warn(std::ostream& log, Summary& s, const std::string& msg) {
  log << "warning: " << msg << "\n";
  ++s.warnings;
}

std::string families_slug(std::span<const FeatureFamily> families) {
  std::string out;
  for (auto f : families) {
    if (!out.empty()) out += "+";
    out += family_name(f);
  }
  return out;
}

}  // namespace

std::string feature_set_name(std::span<const FeatureFamily> families) {
  std::string out;
  for (auto f : families) {
    if (!out.empty()) out += " + ";
    switch (f) {
      case FeatureFamily::kVarianceAm: out += "Var-RF1-6-AM"; break;
      case FeatureFamily::kVarianceFm: out += "Var-RF1-6-FM"; break;
      case FeatureFamily::kDctAm: out += "2D-DCT-AM"; break;
      case FeatureFamily::kDctFm: out += "2D-DCT-FM"; break;
      case FeatureFamily::kMfcc: out += "MFCCs"; break;
    }
  }
  return out;
}

Summary cmd_analyze(const fs::path& wav, const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  Summary summary;
  const AudioClip clip = peak_normalize(load_wav(wav));
  const FeatureConfig fc = cfg.feature_config(cfg.windows.front());
  auto emit = [&](const std::string& name, const std::string& body) {
    write_file_atomic(cfg.out / name, body);
    ++summary.files_written;
  };

  const Envelope am = am_envelope(clip, fc.envelope);
  emit("am_envelope.tsv", envelope_to_tsv(am));
  for (double w : cfg.windows) {
    const auto spec = lf_spectrogram(am, w, cfg.frames, fc.spectrum);
    emit("am_spectrogram_" + window_label(w) + "s.tsv", spectrogram_to_tsv(spec));
    emit("am_rformants_" + window_label(w) + "s.csv",
         tracks_to_csv(rformant_tracks(spec, cfg.peaks)));
  }

  std::optional<Envelope> fm;
  try {
    fm = fm_envelope(track_f0(clip, fc.f0), fc.envelope, clip.utterance_id);
  } catch (const Error& e) {
    warn(log, summary, "FM outputs skipped for '" + clip.utterance_id + "': " + e.what());
  }
  if (fm) {
    emit("fm_envelope.tsv", envelope_to_tsv(*fm));
    for (double w : cfg.windows) {
      try {
        const auto spec = lf_spectrogram(*fm, w, cfg.frames, fc.spectrum);
        emit("fm_spectrogram_" + window_label(w) + "s.tsv", spectrogram_to_tsv(spec));
        emit("fm_rformants_" + window_label(w) + "s.csv",
             tracks_to_csv(rformant_tracks(spec, cfg.peaks)));
      } catch (const Error& e) {
        warn(log, summary, "FM " + window_label(w) + " s outputs skipped: " + e.what());
      }
    }
  }
  write_config_echo(cfg);
  log << "analyze: " << clip.utterance_id << ": " << summary.files_written
      << " files written to " << cfg.out.string() << ", " << summary.warnings
      << " warning(s)\n";
  return summary;
}

std::vector<FeatureTable> featurize_manifest(const DatasetManifest& manifest,
                                             const RunConfig& cfg,
                                             std::span<const FeatureFamily> families,
                                             std::ostream& log, Summary& summary) {
  cfg.validate();
  const std::size_t n = manifest.entries.size();
  struct Outcome {
    std::vector<FeatureResult> results;
    std::string error;
  };
  std::vector<Outcome> outcomes(n);
  const FeatureConfig fc = cfg.feature_config(cfg.windows.front());
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    try {
      const AudioClip clip = load_entry(manifest.entries[i]);
      outcomes[i].results = extract_features(clip, families, fc, cfg.windows);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  std::vector<FeatureTable> tables(cfg.windows.size());
  for (auto& t : tables) {
    for (auto f : families) {
      auto names = family_feature_names(f);
      t.names.insert(t.names.end(), names.begin(), names.end());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = manifest.entries[i].utterance_id;
    if (!outcomes[i].error.empty()) {
      warn(log, summary, "skipping '" + id + "': " + outcomes[i].error);
      ++summary.skipped;
      continue;
    }
    for (std::size_t w = 0; w < tables.size(); ++w) {
      for (const auto& msg : outcomes[i].results[w].warnings) warn(log, summary, msg);
      tables[w].rows.push_back(std::move(outcomes[i].results[w].vector));
    }
  }
  return tables;
}

std::string feature_stats_csv(const FeatureTable& table) {
  std::string out = "group,feature,count,mean,std,min,median,max\n";
  std::map<std::string, std::vector<const FeatureVector*>> by_group;
  for (const auto& r : table.rows) by_group[r.group].push_back(&r);
  for (const auto& [group, rows] : by_group) {
    for (std::size_t c = 0; c < table.names.size(); ++c) {
      std::vector<double> v;
      for (const auto* r : rows) {
        if (!std::isnan(r->values[c])) v.push_back(r->values[c]);
      }
      out += csv_escape(group) + "," + csv_escape(table.names[c]) + "," +
             std::to_string(v.size());
      if (v.empty()) {
        out += ",NA,NA,NA,NA,NA\n";
        continue;
      }
      std::sort(v.begin(), v.end());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const std::size_t m = v.size();
      const double median = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
      out += "," + format_double(mean) + "," + format_double(std::sqrt(var / m)) + "," +
             format_double(v.front()) + "," + format_double(median) + "," +
             format_double(v.back()) + "\n";
    }
  }
  return out;
}

Summary cmd_featurize(const fs::path& manifest_path, const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto families = parse_families(cfg.features);
  const DatasetManifest manifest = load_manifest(manifest_path);
  Summary summary;
  auto tables = featurize_manifest(manifest, cfg, families, log, summary);
  for (std::size_t w = 0; w < tables.size(); ++w) {
    const std::string suffix = "_" + window_label(cfg.windows[w]) + "s";
    write_file_atomic(cfg.out / ("features" + suffix + ".csv"), feature_table_to_csv(tables[w]));
    write_file_atomic(cfg.out / ("features" + suffix + ".json"),
                      feature_table_to_json(tables[w]));
    write_file_atomic(cfg.out / ("feature_stats" + suffix + ".csv"),
                      feature_stats_csv(tables[w]));
    summary.files_written += 3;
  }
  write_config_echo(cfg);
  log << "featurize: " << (tables.empty() ? 0 : tables.front().rows.size()) << " of "
      << manifest.entries.size() << " utterances, " << tables.front().names.size()
      << " features, " << summary.skipped << " skipped, " << summary.warnings
      << " warning(s)\n";
  return summary;
}

Summary cmd_evaluate(const EvaluateRequest& req, const RunConfig& cfg, std::ostream& log,
                     std::vector<CvReport>* reports) {
  cfg.validate();
  if (req.features_csv.empty() == req.manifest.empty()) {
    throw Error(Errc::kInvalidArgument, "evaluate: give exactly one of --input or --manifest");
  }
  const auto families = parse_families(cfg.features);
  std::vector<std::string> columns = req.columns;
  std::string set_name = feature_set_name(families);
  std::string slug = families_slug(families);
  if (!columns.empty()) {
    set_name.clear();
    slug.clear();
    for (const auto& c : columns) {
      set_name += (set_name.empty() ? "" : " + ") + c;
      slug += (slug.empty() ? "" : "+") + c;
    }
  } else {
    for (auto f : families) {
      auto names = family_feature_names(f);
      columns.insert(columns.end(), names.begin(), names.end());
    }
  }

  Summary summary;
  std::vector<FeatureTable> tables;
  std::vector<std::string> suffixes;
  if (!req.manifest.empty()) {
    std::vector<FeatureFamily> needed = families;
    if (!req.columns.empty()) needed = parse_families("all");
    tables = featurize_manifest(load_manifest(req.manifest), cfg, needed, log, summary);
    for (double w : cfg.windows) suffixes.push_back("_" + window_label(w) + "s");
  } else {
    tables.push_back(load_feature_csv(req.features_csv));
    suffixes.emplace_back();
  }

  std::vector<std::string> pair = req.pair;
  if (pair.empty()) {
    std::set<std::string> groups;
    for (const auto& r : tables.front().rows) groups.insert(r.group);
    pair.assign(groups.begin(), groups.end());
  }
  if (pair.size() != 2 || pair[0] == pair[1]) {
    throw Error(Errc::kInvalidArgument, "evaluate: exactly two distinct groups are required");
  }
  for (const auto& g : pair) {
    const auto& rows = tables.front().rows;
    if (std::none_of(rows.begin(), rows.end(), [&](const auto& r) { return r.group == g; })) {
      throw Error(Errc::kInvalidArgument, "evaluate: group '" + g + "' absent from data");
    }
  }

  EvalOptions opts;
  opts.k = cfg.k;
  opts.seed = cfg.seed;
  opts.grid = cfg.grid;
  const std::string stem = "report_" + pair[0] + "-" + pair[1] + "_" + slug;
  std::string sweep = "window_s\tmean_accuracy\tstd_accuracy\n";
  for (std::size_t t = 0; t < tables.size(); ++t) {
    std::size_t dropped = 0;
    const LabeledData data = select_features(tables[t], columns, pair[0], pair[1], &dropped);
    if (dropped > 0) {
      warn(log, summary, std::to_string(dropped) + " utterance(s) dropped for missing values");
    }
    CvReport report = evaluate(data, pair[0], pair[1], opts, set_name);
    write_file_atomic(cfg.out / (stem + suffixes[t] + ".json"), report_to_json(report));
    write_file_atomic(cfg.out / (stem + suffixes[t] + ".txt"), report_to_text(report));
    summary.files_written += 2;
    log << "evaluate: " << set_name << suffixes[t] << ": accuracy "
        << format_double(std::round(report.mean_accuracy * 1e4) / 1e2) << "% ± "
        << format_double(std::round(report.std_accuracy * 1e4) / 1e2) << "\n";
    if (!req.manifest.empty()) {
      sweep += format_double(cfg.windows[t]) + "\t" + format_double(report.mean_accuracy) +
               "\t" + format_double(report.std_accuracy) + "\n";
    }
    if (reports != nullptr) reports->push_back(std::move(report));
  }
  if (!req.manifest.empty() && tables.size() > 1) {
    write_file_atomic(cfg.out / ("window_sweep_" + pair[0] + "-" + pair[1] + "_" + slug + ".txt"),
                      sweep);
    ++summary.files_written;
  }
  write_config_echo(cfg);
  return summary;
}

Summary cmd_synth(const fs::path& spec_path, const RunConfig& cfg,
                  std::optional<std::uint64_t> seed_override, std::ostream& log) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(spec_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kInvalidArgument, "synth spec: " + std::string(e.what()));
  }
  CorpusSpec spec = corpus_spec_from_json(j);
  if (seed_override) spec.seed = *seed_override;
  const DatasetManifest manifest = synth_corpus(spec, cfg.out);
  Summary summary;
  summary.files_written = manifest.entries.size() + 1;
  log << "synth: " << manifest.entries.size() << " clips, " << manifest.groups.size()
      << " groups, " << manifest.speaker_count() << " speakers, seed " << spec.seed
      << " -> " << (cfg.out / "manifest.csv").string() << "\n";
  return summary;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rhythm formant analysis: LF rhythm spectrograms, features and classification"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, window, features, out;
    std::size_t frames = 0, jobs = 0, k = 0;
    std::uint64_t seed = 0;
  } flags;
  std::map<std::string, CLI::Option*> given;

  auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file");
    given[sub->get_name() + "window"] =
        sub->add_option("--window", flags.window, "LF window length(s) in seconds, e.g. 3,4,5");
    given[sub->get_name() + "frames"] =
        sub->add_option("--frames", flags.frames, "spectrogram frames per utterance");
    given[sub->get_name() + "seed"] = sub->add_option("--seed", flags.seed, "random seed");
    given[sub->get_name() + "jobs"] = sub->add_option("--jobs", flags.jobs, "worker threads");
    given[sub->get_name() + "out"] = sub->add_option("--out", flags.out, "output directory");
    given[sub->get_name() + "features"] = sub->add_option(
        "--features", flags.features, "feature families: var-am,var-fm,dct-am,dct-fm,mfcc|all");
  };

  std::string wav, manifest, spec, input, pair, columns;
  auto* analyze = app.add_subcommand("analyze", "envelopes, LF spectrograms, R-formant tracks");
  analyze->add_option("wav", wav, "PCM16 WAV file")->required();
  add_shared(analyze);
  auto* featurize = app.add_subcommand("featurize", "feature table for a manifest");
  featurize->add_option("manifest", manifest, "manifest CSV")->required();
  add_shared(featurize);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "speaker-independent SVM cross-validation");
  evaluate_cmd->add_option("--input", input, "feature CSV from featurize");
  evaluate_cmd->add_option("--manifest", manifest, "manifest CSV (featurized on the fly)");
  evaluate_cmd->add_option("--pair", pair, "two groups, e.g. A,P");
  evaluate_cmd->add_option("--columns", columns, "explicit feature names, e.g. Var-RF1-AM");
  given["evaluatek"] = evaluate_cmd->add_option("--k", flags.k, "outer folds");
  add_shared(evaluate_cmd);
  auto* synth = app.add_subcommand("synth", "synthetic corpus from a JSON spec");
  synth->add_option("spec", spec, "corpus spec JSON")->required();
  add_shared(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help/--version exit 0; anything else is a usage error.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    auto has = [&](const std::string& key) {
      auto it = given.find(name + key);
      return it != given.end() && it->second->count() > 0;
    };

    RunConfig cfg;
    if (!flags.config.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(flags.config));
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::kInvalidArgument, "config: " + std::string(e.what()));
      }
      apply_config_json(j, cfg);
    }
    if (has("window")) cfg.windows = parse_number_list(flags.window, "window");
    if (has("frames")) cfg.frames = flags.frames;
    if (has("seed")) cfg.seed = flags.seed;
    if (has("jobs")) cfg.jobs = flags.jobs;
    if (has("out")) cfg.out = flags.out;
    if (has("features")) cfg.features = flags.features;
    if (has("k")) cfg.k = flags.k;
    cfg.validate();

    Summary summary;
    if (name == "analyze") {
      summary = cmd_analyze(wav, cfg, err);
    } else if (name == "featurize") {
      summary = cmd_featurize(manifest, cfg, err);
    } else if (name == "evaluate") {
      EvaluateRequest req;
      req.features_csv = input;
      req.manifest = manifest;
      if (!pair.empty()) {
        for (const auto& p : split_csv_line(pair)) req.pair.push_back(trim(p));
      }
      if (!columns.empty()) {
        for (const auto& c : split_csv_line(columns)) req.columns.push_back(trim(c));
      }
      if (!has("features") && cfg.features == "all" && req.columns.empty()) {
        cfg.features = "dct-am";
      }
      summary = cmd_evaluate(req, cfg, err);
    } else {
      std::optional<std::uint64_t> seed;
      if (has("seed")) seed = cfg.seed;
      summary = cmd_synth(spec, cfg, seed, err);
    }
    out << name << ": done (" << summary.files_written << " files, " << summary.warnings
        << " warnings, " << summary.skipped << " skipped)\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rfa::cli
