// tools/run_config.h

#ifndef RFA_TOOLS_RUN_CONFIG_H_
#define RFA_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfa/classifier.h"
#include "rfa/features.h"

namespace rfa::cli {

struct RunConfig {
  double envelope_rate_hz = 100.0;
  double smoothing_s = 0.050;
  double voicing_threshold = 0.3;
  std::vector<double> windows = {3.0};
  std::size_t frames = 50;
  std::size_t peaks = kRFormantCount;
  double eps = 1e-6;
  double vad_threshold = 0.1;
  SvmGrid grid;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string features = "all";
  std::filesystem::path out = "rfa_out";

  // Throws rfa::Error(kInvalidArgument) naming the field.
  void validate() const;

  FeatureConfig feature_config(double window_s) const;

  // Everything that influences output content (not `out` or `jobs`).
  nlohmann::ordered_json to_json() const;
};

// Overlays the keys present in a JSON config object onto `cfg`.
void apply_config_json(const nlohmann::json& j, RunConfig& cfg);

std::vector<double> parse_number_list(const std::string& text, const std::string& field);

// "3" for 3.0, "3.5" for 3.5; used in output file names.
std::string window_label(double window_s);

}  // namespace rfa::cli

#endif  // RFA_TOOLS_RUN_CONFIG_H_
