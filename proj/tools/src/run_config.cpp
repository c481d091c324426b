#include "run_config.hpp"

#include <cstdio>

namespace dynapool::cli {

using nlohmann::json;

namespace {

json pipeline_json(const RepresentationConfig& p) {
  return {
      {"pooling",
       {{"lambda", p.pooling.lambda},
        {"max_iters", p.pooling.max_iters},
        {"step_size", p.pooling.step_size},
        {"step_decay", p.pooling.step_decay}}},
      {"histogram",
       {{"bin_count", p.histogram.bin_count},
        {"peak_min_mass", p.histogram.peak_min_mass},
        {"tolerance", p.histogram.tolerance}}},
      {"gmm",
       {{"mixtures", p.gmm.mixtures},
        {"learning_rate", p.gmm.learning_rate},
        {"background_threshold", p.gmm.background_threshold},
        {"match_distance", p.gmm.match_distance},
        {"initial_variance", p.gmm.initial_variance},
        {"min_variance", p.gmm.min_variance}}},
  };
}

template <typename T>
void take(const json& section, const char* key, T& field, const std::string& where) {
  if (!section.contains(key)) return;
  const json& v = section.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw UsageError("config: " + where + "." + key + " must be an integer");
  } else {
    if (!v.is_number()) throw UsageError("config: " + where + "." + key + " must be a number");
  }
  field = v.get<T>();
}

void reject_unknown(const json& section, const json& reference, const std::string& where) {
  if (!section.is_object()) throw UsageError("config: " + where + " must be an object");
  for (const auto& [key, value] : section.items()) {
    if (!reference.contains(key)) throw UsageError("config: unknown key " + where + "." + key);
  }
}

}  // namespace

void RunConfig::validate() const {
  try {
    pipeline.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (downsample < 1) throw UsageError("classifier.downsample must be >= 1");
  if (synth_frames < 2) throw UsageError("synth.frames must be >= 2");
  if (synth_size < 8) throw UsageError("synth.size must be >= 8");
  if (synth_noise < 0.0) throw UsageError("synth.noise must be >= 0");
  if (synth_blob_radius <= 0.0 || synth_blob_radius >= 0.5) throw UsageError("synth.blob_radius must lie in (0, 0.5)");
}

json to_json(const RunConfig& c) {
  json j = pipeline_json(c.pipeline);
  j["schema_version"] = kSchemaVersion;
  j["classifier"] = {{"downsample", c.downsample}};
  j["synth"] = {{"frames", c.synth_frames},
                {"size", c.synth_size},
                {"noise", c.synth_noise},
                {"blob_radius", c.synth_blob_radius}};
  return j;
}

void apply_overrides(RunConfig& c, const json& o) {
  const json reference = to_json(c);
  reject_unknown(o, reference, "<root>");
  if (o.contains("schema_version") && o.at("schema_version") != kSchemaVersion) {
    throw UsageError("config: unsupported schema_version " + o.at("schema_version").dump());
  }
  for (const char* section : {"pooling", "histogram", "gmm", "classifier", "synth"}) {
    if (o.contains(section)) reject_unknown(o.at(section), reference.at(section), section);
  }
  const json empty = json::object();
  auto sec = [&](const char* name) -> const json& { return o.contains(name) ? o.at(name) : empty; };

  auto& p = c.pipeline;
  take(sec("pooling"), "lambda", p.pooling.lambda, "pooling");
  take(sec("pooling"), "max_iters", p.pooling.max_iters, "pooling");
  take(sec("pooling"), "step_size", p.pooling.step_size, "pooling");
  take(sec("pooling"), "step_decay", p.pooling.step_decay, "pooling");
  take(sec("histogram"), "bin_count", p.histogram.bin_count, "histogram");
  take(sec("histogram"), "peak_min_mass", p.histogram.peak_min_mass, "histogram");
  take(sec("histogram"), "tolerance", p.histogram.tolerance, "histogram");
  take(sec("gmm"), "mixtures", p.gmm.mixtures, "gmm");
  take(sec("gmm"), "learning_rate", p.gmm.learning_rate, "gmm");
  take(sec("gmm"), "background_threshold", p.gmm.background_threshold, "gmm");
  take(sec("gmm"), "match_distance", p.gmm.match_distance, "gmm");
  take(sec("gmm"), "initial_variance", p.gmm.initial_variance, "gmm");
  take(sec("gmm"), "min_variance", p.gmm.min_variance, "gmm");
  take(sec("classifier"), "downsample", c.downsample, "classifier");
  take(sec("synth"), "frames", c.synth_frames, "synth");
  take(sec("synth"), "size", c.synth_size, "synth");
  take(sec("synth"), "noise", c.synth_noise, "synth");
  take(sec("synth"), "blob_radius", c.synth_blob_radius, "synth");
}

std::string pipeline_hash(const RunConfig& config) {
  // json objects keep keys sorted, so dump() is canonical.
  const std::string text = pipeline_json(config.pipeline).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dynapool::cli
