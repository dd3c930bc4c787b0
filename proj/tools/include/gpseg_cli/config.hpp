#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "gpseg/pipeline.hpp"

namespace gpseg::cli {

/// Merged run settings. Defaults come from the library; a config file and
/// then command-line flags override them in that order.
struct RunConfig {
  PipelineOptions pipeline;
  std::uint64_t seed = 1;

  void validate() const { pipeline.validate(); }
};

/// Applies a flat JSON object on top of `config`. Throws InvalidConfig on
/// unknown keys, wrong value types or malformed JSON.
void apply_config_json(RunConfig& config, std::string_view json_text);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace gpseg::cli
