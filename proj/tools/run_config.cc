// tools/run_config.cc

#include "run_config.h"

#include "rfa/error.h"
#include "rfa/io_util.h"

namespace rfa::cli {
namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(Errc::kInvalidArgument, "config " + field + ": " + why);
}

template <typename T>
T number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (v.is_number_float() || v.get<double>() < 0) bad(key, "expected a non-negative integer");
  }
  return v.get<T>();
}

std::vector<double> number_array(const nlohmann::json& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) bad(field, "expected a number or an array of numbers");
  for (const auto& e : v) {
    if (!e.is_number()) bad(field, "expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (windows.empty()) bad("window_s", "at least one window is required");
  for (double w : windows) {
    if (!(w >= 1.0 && w <= 10.0)) bad("window_s", format_double(w) + " outside [1, 10] s");
  }
  if (frames < 2) bad("frames", "must be at least 2");
  if (peaks < 1 || peaks > kRFormantCount) bad("peaks", "must lie in [1, 6]");
  if (!(envelope_rate_hz >= 20.0)) bad("envelope_rate_hz", "must be at least 20 Hz");
  if (!(smoothing_s > 0.0)) bad("smoothing_s", "must be positive");
  if (!(eps > 0.0)) bad("eps", "must be positive");
  if (!(vad_threshold >= 0.0)) bad("vad_threshold", "must be non-negative");
  if (k < 2) bad("k", "must be at least 2");
  if (jobs < 1) bad("jobs", "must be at least 1");
  if (grid.C.empty() || grid.gamma.empty()) bad("grid", "C and gamma lists must be non-empty");
  for (double c : grid.C) {
    if (!(c > 0)) bad("grid.C", "values must be positive");
  }
  for (double g : grid.gamma) {
    if (!(g > 0)) bad("grid.gamma", "values must be positive");
  }
}

FeatureConfig RunConfig::feature_config(double window_s) const {
  FeatureConfig fc;
  fc.envelope.rate_hz = envelope_rate_hz;
  fc.envelope.smoothing_s = smoothing_s;
  fc.f0.voicing_threshold = voicing_threshold;
  fc.window_s = window_s;
  fc.frames = frames;
  fc.eps = eps;
  fc.vad.threshold = vad_threshold;
  return fc;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["envelope_rate_hz"] = envelope_rate_hz;
  j["smoothing_s"] = smoothing_s;
  j["voicing_threshold"] = voicing_threshold;
  j["window_s"] = windows;
  j["frames"] = frames;
  j["peaks"] = peaks;
  j["eps"] = eps;
  j["vad_threshold"] = vad_threshold;
  j["grid"] = {{"C", grid.C}, {"gamma", grid.gamma}};
  j["k"] = k;
  j["seed"] = seed;
  j["features"] = features;
  return j;
}

void apply_config_json(const nlohmann::json& j, RunConfig& cfg) {
  if (!j.is_object()) bad("file", "expected a JSON object");
  if (j.contains("envelope_rate_hz")) cfg.envelope_rate_hz = number<double>(j, "envelope_rate_hz");
  if (j.contains("smoothing_s")) cfg.smoothing_s = number<double>(j, "smoothing_s");
  if (j.contains("voicing_threshold")) cfg.voicing_threshold = number<double>(j, "voicing_threshold");
  if (j.contains("window_s")) cfg.windows = number_array(j.at("window_s"), "window_s");
  if (j.contains("frames")) cfg.frames = number<std::size_t>(j, "frames");
  if (j.contains("peaks")) cfg.peaks = number<std::size_t>(j, "peaks");
  if (j.contains("eps")) cfg.eps = number<double>(j, "eps");
  if (j.contains("vad_threshold")) cfg.vad_threshold = number<double>(j, "vad_threshold");
  if (j.contains("k")) cfg.k = number<std::size_t>(j, "k");
  if (j.contains("seed")) cfg.seed = number<std::uint64_t>(j, "seed");
  if (j.contains("jobs")) cfg.jobs = number<std::size_t>(j, "jobs");
  if (j.contains("features")) {
    if (!j.at("features").is_string()) bad("features", "expected a comma-separated string");
    cfg.features = j.at("features").get<std::string>();
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string()) bad("out", "expected a string");
    cfg.out = j.at("out").get<std::string>();
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_object()) bad("grid", "expected an object");
    if (g.contains("C")) cfg.grid.C = number_array(g.at("C"), "grid.C");
    if (g.contains("gamma")) cfg.grid.gamma = number_array(g.at("gamma"), "grid.gamma");
  }
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  for (const auto& part : split_csv_line(text)) {
    const std::string v = trim(part);
    if (v.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      bad(field, "'" + v + "' is not a number");
    }
  }
  if (out.empty()) bad(field, "empty list");
  return out;
}

std::string window_label(double window_s) { return format_double(window_s); }

}  // namespace rfa::cli
