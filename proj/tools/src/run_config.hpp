#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dynapool/representations.hpp"

namespace dynapool::cli {

/// Bad flags, bad config files, out-of-range values. Maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

/// Every numeric default the tool uses, in one place.
struct RunConfig {
  RepresentationConfig pipeline;
  int downsample = 16;  // centroid classifier input is downsample x downsample x 3

  int synth_frames = 24;
  int synth_size = 64;
  double synth_noise = 5.0;  // mm
  double synth_blob_radius = 0.1;

  void validate() const;  // throws UsageError
};

nlohmann::json to_json(const RunConfig& config);

/// Merges a partial document over `config`. Unknown keys or a foreign
/// schema_version raise UsageError.
void apply_overrides(RunConfig& config, const nlohmann::json& overrides);

/// FNV-1a 64 of the canonical pipeline section, as 16 hex digits. Two runs
/// with the same hash produce the same images.
std::string pipeline_hash(const RunConfig& config);

}  // namespace dynapool::cli
