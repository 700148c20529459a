// tools/cli.h
//
// Subcommands of the `rfa` tool. Each takes an effective RunConfig and a
// log stream; they throw rfa::Error on hard failures and report soft
// (per-utterance) failures in the returned summary.

#ifndef RFA_TOOLS_CLI_H_
#define RFA_TOOLS_CLI_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rfa/classifier.h"
#include "rfa/features.h"
#include "run_config.h"

namespace rfa::cli {

struct Summary {
  std::size_t files_written = 0;
  std::size_t warnings = 0;
  std::size_t skipped = 0;
};

// Envelope TSVs, per-window LF spectrogram TSVs and R-formant track CSVs
// for one utterance. FM outputs are skipped with a warning when the clip
// lacks voicing.
Summary cmd_analyze(const std::filesystem::path& wav, const RunConfig& cfg, std::ostream& log);

// One table per configured window; rows in manifest order, failed
// utterances skipped.
std::vector<FeatureTable> featurize_manifest(const DatasetManifest& manifest,
                                             const RunConfig& cfg,
                                             std::span<const FeatureFamily> families,
                                             std::ostream& log, Summary& summary);

// features_<w>s.csv / .json and feature_stats_<w>s.csv per window.
Summary cmd_featurize(const std::filesystem::path& manifest, const RunConfig& cfg,
                      std::ostream& log);

struct EvaluateRequest {
  std::filesystem::path features_csv;  // either this ...
  std::filesystem::path manifest;      // ... or this
  std::vector<std::string> pair;       // empty: the data must hold exactly two groups
  std::vector<std::string> columns;    // explicit feature names; overrides families
};

// Writes report_<pair>_<set>[_<w>s].json/.txt and, for a manifest window
// sweep, window_sweep_<pair>_<set>.txt.
Summary cmd_evaluate(const EvaluateRequest& req, const RunConfig& cfg, std::ostream& log,
                     std::vector<CvReport>* reports = nullptr);

// Corpus from a JSON spec; `seed_override` replaces the spec's seed.
Summary cmd_synth(const std::filesystem::path& spec, const RunConfig& cfg,
                  std::optional<std::uint64_t> seed_override, std::ostream& log);

// Human-readable name of a fused family selection, e.g.
// "2D-DCT-AM + 2D-DCT-FM".
std::string feature_set_name(std::span<const FeatureFamily> families);

// Per-group count/mean/std/min/median/max of every feature.
std::string feature_stats_csv(const FeatureTable& table);

// Full command line entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rfa::cli

#endif  // RFA_TOOLS_CLI_H_
