#include "gpseg_cli/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gpseg/errors.hpp"

namespace gpseg::cli {
namespace {

using json = nlohmann::json;
using Setter = std::function<void(RunConfig&, const json&)>;

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t as_count(const std::string& key, const json& v) {
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"segments", [](RunConfig& c, const json& v) { c.pipeline.grid.num_segments = as_count("segments", v); }},
      {"r_min", [](RunConfig& c, const json& v) { c.pipeline.grid.r_min = as_number("r_min", v); }},
      {"r_max", [](RunConfig& c, const json& v) { c.pipeline.grid.r_max = as_number("r_max", v); }},
      {"bin_growth", [](RunConfig& c, const json& v) { c.pipeline.grid.bin_growth = as_number("bin_growth", v); }},
      {"first_bin_width",
       [](RunConfig& c, const json& v) { c.pipeline.grid.first_bin_width = as_number("first_bin_width", v); }},
      {"min_candidates",
       [](RunConfig& c, const json& v) { c.pipeline.grid.min_candidates_per_segment = as_count("min_candidates", v); }},
      {"fit_tolerance",
       [](RunConfig& c, const json& v) { c.pipeline.lines.fit_tolerance = as_number("fit_tolerance", v); }},
      {"slope_tolerance",
       [](RunConfig& c, const json& v) { c.pipeline.lines.slope_tolerance = as_number("slope_tolerance", v); }},
      {"gap_tolerance",
       [](RunConfig& c, const json& v) { c.pipeline.lines.gap_tolerance = as_number("gap_tolerance", v); }},
      {"angle_tolerance_deg",
       [](RunConfig& c, const json& v) {
         c.pipeline.lines.angle_tolerance = as_number("angle_tolerance_deg", v) * std::numbers::pi / 180.0;
       }},
      {"min_length_scale",
       [](RunConfig& c, const json& v) { c.pipeline.lines.min_length_scale = as_number("min_length_scale", v); }},
      {"max_length_scale",
       [](RunConfig& c, const json& v) { c.pipeline.lines.max_length_scale = as_number("max_length_scale", v); }},
      {"td", [](RunConfig& c, const json& v) { c.pipeline.thresholds.distance = as_number("td", v); }},
      {"tv", [](RunConfig& c, const json& v) { c.pipeline.thresholds.variance = as_number("tv", v); }},
      {"max_iterations",
       [](RunConfig& c, const json& v) { c.pipeline.scg.max_iterations = as_count("max_iterations", v); }},
      {"gradient_tolerance",
       [](RunConfig& c, const json& v) { c.pipeline.scg.gradient_tolerance = as_number("gradient_tolerance", v); }},
      {"relative_tolerance",
       [](RunConfig& c, const json& v) { c.pipeline.scg.relative_tolerance = as_number("relative_tolerance", v); }},
      {"jobs", [](RunConfig& c, const json& v) { c.pipeline.jobs = as_count("jobs", v); }},
      {"seed", [](RunConfig& c, const json& v) { c.seed = as_count("seed", v); }},
  };
  return table;
}

}  // namespace

void apply_config_json(RunConfig& config, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  // Check every key before touching `config` so a bad file leaves it unchanged.
  for (const auto& [key, value] : doc.items()) {
    if (!setters().contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
  RunConfig merged = config;
  for (const auto& [key, value] : doc.items()) setters().at(key)(merged, value);
  config = merged;
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_json(config, text.str());
}

}  // namespace gpseg::cli
