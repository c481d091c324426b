#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dynapool/errors.hpp"
#include "dynapool/fusion_eval.hpp"
#include "dynapool/parallel.hpp"
#include "dynapool/preprocessing.hpp"
#include "run_config.hpp"

namespace dynapool::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared option plumbing

struct PipelineFlags {
  std::optional<double> lambda;
  std::optional<int> iters;
  std::optional<double> tolerance;
  std::optional<int> gmm_k;
  std::optional<double> gmm_alpha;

  void attach(CLI::App& cmd) {
    cmd.add_option("--lambda", lambda, "rank pooling regularization weight (> 0)");
    cmd.add_option("--iters", iters, "subgradient iterations per pooling run");
    cmd.add_option("--tolerance", tolerance, "background cut below the farthest depth peak, normalized units");
    cmd.add_option("--gmm-k", gmm_k, "Gaussian modes per pixel");
    cmd.add_option("--gmm-alpha", gmm_alpha, "GMM learning rate in (0, 1]");
  }

  void apply(RunConfig& c) const {
    if (lambda) c.pipeline.pooling.lambda = *lambda;
    if (iters) c.pipeline.pooling.max_iters = *iters;
    if (tolerance) c.pipeline.histogram.tolerance = *tolerance;
    if (gmm_k) c.pipeline.gmm.mixtures = *gmm_k;
    if (gmm_alpha) c.pipeline.gmm.learning_rate = *gmm_alpha;
  }
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open", path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON (") + e.what() + ")", path.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write", path.string());
}

/// Writes to a sibling temp file first so readers never see half a file.
void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_text(tmp, text);
  fs::rename(tmp, path);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_sequence_id(const std::string& id) {
  if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
    throw DataError("sequence id is not usable as a file name: '" + id + "'");
  }
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  int classes = 5;
  int count = 20;
  std::optional<int> frames;
  std::optional<int> size;
  std::optional<double> noise;
  std::uint64_t seed = 0;
  fs::path out;
};

int cmd_synth(const SynthArgs& a, RunConfig cfg, std::ostream& out) {
  const auto archetypes = all_archetypes();
  if (a.classes < 1 || a.classes > static_cast<int>(archetypes.size())) {
    throw UsageError("--classes must lie in [1, " + std::to_string(archetypes.size()) + "]");
  }
  if (a.count < 1) throw UsageError("--count must be >= 1");
  if (a.frames) cfg.synth_frames = *a.frames;
  if (a.size) cfg.synth_size = *a.size;
  if (a.noise) cfg.synth_noise = *a.noise;
  cfg.validate();

  Manifest manifest;
  manifest.class_count = a.classes;
  for (int c = 0; c < a.classes; ++c) {
    for (int i = 0; i < a.count; ++i) {
      const std::string id = std::string(to_string(archetypes[static_cast<std::size_t>(c)])) + "_" +
                             (std::ostringstream() << std::setw(4) << std::setfill('0') << i).str();
      SynthSpec spec;
      spec.archetype = archetypes[static_cast<std::size_t>(c)];
      spec.frames = cfg.synth_frames;
      spec.width = spec.height = cfg.synth_size;
      spec.noise_level = cfg.synth_noise;
      spec.blob_radius = cfg.synth_blob_radius;
      spec.seed = splitmix64(a.seed ^ splitmix64(static_cast<std::uint64_t>(c) << 32 | static_cast<std::uint64_t>(i)));
      const fs::path rel = fs::path("sequences") / id;
      save_sequence(synth_sequence(spec, id), a.out / rel);
      manifest.entries.push_back({id, rel, c, spec.frames});
      spdlog::debug("synth: wrote {}", id);
    }
  }
  save_manifest(manifest, a.out / "manifest.json");
  out << json{{"manifest", (a.out / "manifest.json").string()}, {"sequences", manifest.entries.size()}}.dump()
      << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// convert (also the caching layer behind evaluate)

enum class EntryStatus { converted, skipped, failed };

struct EntryOutcome {
  EntryStatus status = EntryStatus::failed;
  std::optional<RepresentationSet> images;
  std::string error;
};

fs::path sidecar_path(const fs::path& dir, const std::string& id) { return dir / (id + ".json"); }

bool outputs_current(const fs::path& dir, const std::string& id, const std::string& hash) {
  const fs::path sidecar = sidecar_path(dir, id);
  if (!fs::exists(sidecar)) return false;
  try {
    if (read_json_file(sidecar).value("config_hash", "") != hash) return false;
  } catch (const DataError&) {
    return false;
  }
  for (ImageKind k : kAllKinds) {
    for (Direction d : kAllDirections) {
      if (!fs::exists(dir / image_filename(id, k, d))) return false;
    }
  }
  return true;
}

RepresentationSet load_outputs(const fs::path& dir, const std::string& id) {
  RepresentationSet set;
  set.sequence_id = id;
  set.ddi_fwd = load_image(dir / image_filename(id, ImageKind::ddi, Direction::forward));
  set.ddi_bwd = load_image(dir / image_filename(id, ImageKind::ddi, Direction::backward));
  set.ddni_fwd = load_image(dir / image_filename(id, ImageKind::ddni, Direction::forward));
  set.ddni_bwd = load_image(dir / image_filename(id, ImageKind::ddni, Direction::backward));
  set.ddmni_fwd = load_image(dir / image_filename(id, ImageKind::ddmni, Direction::forward));
  set.ddmni_bwd = load_image(dir / image_filename(id, ImageKind::ddmni, Direction::backward));
  return set;
}

void dump_intermediates(const DepthSequence& seq, const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const DepthRange range = default_range(seq);
  const auto removal = remove_background(seq, cfg.pipeline.histogram, range);
  const auto masks = gmm_foreground(seq, cfg.pipeline.gmm, range);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const std::string stem = frame_filename(static_cast<int>(t));
    save_normals_png(compute_normals(removal.sequence.frames()[t], range), dir / ("normals_" + stem));
    save_mask_png(masks[t], dir / ("foreground_" + stem));
  }
  json info = {{"range_mm", {range.min_mm, range.max_mm}}, {"removed_pixels", removal.removed_pixels}};
  info["background_threshold"] = removal.threshold ? json(*removal.threshold) : json(nullptr);
  write_text(dir / "background.json", info.dump(2) + "\n");
}

EntryOutcome process_entry(const ManifestEntry& entry, const RunConfig& cfg, const std::string& hash,
                           const std::optional<fs::path>& out_dir, bool dump, bool want_images) {
  EntryOutcome result;
  try {
    check_sequence_id(entry.sequence_id);
    if (out_dir && outputs_current(*out_dir, entry.sequence_id, hash)) {
      result.status = EntryStatus::skipped;
      if (want_images) result.images = load_outputs(*out_dir, entry.sequence_id);
      spdlog::debug("{}: up to date, skipped", entry.sequence_id);
      return result;
    }
    const DepthSequence seq = load_sequence(entry);
    RepresentationSet set = build_all(seq, cfg.pipeline);
    if (out_dir) {
      fs::create_directories(*out_dir);
      json images = json::array();
      for (ImageKind k : kAllKinds) {
        for (Direction d : kAllDirections) {
          const std::string name = image_filename(entry.sequence_id, k, d);
          save_image(set.get(k, d), *out_dir / name);
          images.push_back(name);
        }
      }
      if (dump) dump_intermediates(seq, cfg, *out_dir / "intermediate" / entry.sequence_id);
      json sidecar = {{"sequence_id", entry.sequence_id},
                      {"label", entry.label ? json(*entry.label) : json(nullptr)},
                      {"frames", seq.size()},
                      {"width", seq.width()},
                      {"height", seq.height()},
                      {"config_hash", hash},
                      {"config", to_json(cfg)},
                      {"images", images}};
      // Sidecar goes last: its presence marks the entry complete.
      write_text_atomic(sidecar_path(*out_dir, entry.sequence_id), sidecar.dump(2) + "\n");
    }
    result.status = EntryStatus::converted;
    if (want_images) result.images = std::move(set);
    spdlog::info("{}: converted ({} frames)", entry.sequence_id, seq.size());
  } catch (const std::exception& e) {
    result.status = EntryStatus::failed;
    result.error = e.what();
    spdlog::error("{}: {}", entry.sequence_id, e.what());
  }
  return result;
}

std::vector<EntryOutcome> process_manifest(const Manifest& manifest, const RunConfig& cfg,
                                           const std::optional<fs::path>& out_dir, bool dump, bool want_images,
                                           unsigned workers) {
  const std::string hash = pipeline_hash(cfg);
  std::vector<EntryOutcome> outcomes(manifest.entries.size());
  parallel_for(manifest.entries.size(), workers, [&](std::size_t i) {
    outcomes[i] = process_entry(manifest.entries[i], cfg, hash, out_dir, dump, want_images);
  });
  return outcomes;
}

struct ConvertArgs {
  fs::path manifest;
  fs::path out;
  unsigned workers = default_worker_count();
  bool dump = false;
};

int cmd_convert(const ConvertArgs& a, const RunConfig& cfg, std::ostream& out) {
  const Manifest manifest = load_manifest(a.manifest);
  const auto outcomes = process_manifest(manifest, cfg, a.out, a.dump, false, a.workers);
  std::size_t converted = 0, skipped = 0;
  json failed = json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    switch (outcomes[i].status) {
      case EntryStatus::converted: ++converted; break;
      case EntryStatus::skipped: ++skipped; break;
      case EntryStatus::failed:
        failed.push_back({{"sequence_id", manifest.entries[i].sequence_id}, {"error", outcomes[i].error}});
        break;
    }
  }
  out << json{{"converted", converted}, {"skipped", skipped}, {"failed", failed}, {"config_hash", pipeline_hash(cfg)}}
             .dump()
      << "\n";
  return failed.empty() ? kSuccess : kPartialFailure;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  fs::path train_manifest;
  fs::path test_manifest;
  std::optional<fs::path> cache;
  std::optional<fs::path> scores_dir;
  unsigned workers = default_worker_count();
};

std::vector<LabeledRepresentation> labelled_set(const Manifest& manifest, std::vector<EntryOutcome> outcomes,
                                                const char* role, int class_count) {
  std::vector<LabeledRepresentation> set;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& entry = manifest.entries[i];
    if (outcomes[i].status == EntryStatus::failed) {
      throw DataError(std::string(role) + " sequence '" + entry.sequence_id + "' failed: " + outcomes[i].error);
    }
    if (!entry.label) throw DataError(std::string("label missing in ") + role + " manifest for '" + entry.sequence_id + "'");
    if (*entry.label >= class_count) {
      throw DataError(std::string(role) + " label " + std::to_string(*entry.label) + " of '" + entry.sequence_id +
                      "' is outside the training classes");
    }
    set.push_back({std::move(*outcomes[i].images), *entry.label});
  }
  return set;
}

void write_score_csvs(const fs::path& dir, const std::vector<Classification>& results, int class_count) {
  fs::create_directories(dir);
  for (ImageKind k : kAllKinds) {
    for (Direction d : kAllDirections) {
      std::ostringstream csv;
      csv.precision(17);
      csv << "sequence_id,kind,direction";
      for (int c = 0; c < class_count; ++c) csv << ",score_" << c;
      csv << "\n";
      for (const auto& r : results) {
        csv << r.prediction.sequence_id << "," << to_string(k) << "," << to_string(d);
        for (double s : r.raw.at({k, d}).scores) csv << "," << s;
        csv << "\n";
      }
      write_text(dir / (std::string(to_string(k)) + "_" + std::string(to_string(d)) + ".csv"), csv.str());
    }
  }
}

json report_json(const EvalReport& r) {
  json per_class = json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"label", c.label}, {"n", c.n}, {"correct", c.correct}, {"accuracy", c.accuracy}});
  }
  return {{"n", r.n}, {"correct", r.correct}, {"recognition_rate", r.recognition_rate}, {"per_class", per_class}};
}

int cmd_evaluate(const EvaluateArgs& a, const RunConfig& cfg, std::ostream& out) {
  const Manifest train_m = load_manifest(a.train_manifest);
  const Manifest test_m = load_manifest(a.test_manifest);
  auto cache_for = [&](const char* sub) -> std::optional<fs::path> {
    if (!a.cache) return std::nullopt;
    return *a.cache / sub;
  };
  const auto train = labelled_set(train_m, process_manifest(train_m, cfg, cache_for("train"), false, true, a.workers),
                                  "train", train_m.class_count);
  std::error_code ec;
  const bool same = fs::equivalent(a.train_manifest, a.test_manifest, ec);
  const auto test = same ? train
                         : labelled_set(test_m, process_manifest(test_m, cfg, cache_for("test"), false, true, a.workers),
                                        "test", train_m.class_count);

  const CentroidModel model = train_centroids(train, train_m.class_count, cfg.downsample);
  std::vector<Classification> results;
  std::vector<Prediction> fused;
  std::map<ImageKind, std::vector<Prediction>> single;
  std::vector<int> truth;
  for (const auto& sample : test) {
    results.push_back(classify(model, sample.images));
    fused.push_back(results.back().prediction);
    for (ImageKind k : kAllKinds) {
      Prediction p;
      p.sequence_id = sample.images.sequence_id;
      p.label = argmax(results.back().pair_fused.at(k).scores);
      single[k].push_back(p);
    }
    truth.push_back(sample.label);
  }
  if (a.scores_dir) write_score_csvs(*a.scores_dir, results, train_m.class_count);

  json report = report_json(recognition_rate(fused, truth));
  for (ImageKind k : kAllKinds) {
    report["per_representation"][std::string(to_string(k))] = recognition_rate(single[k], truth).recognition_rate;
  }
  report["config_hash"] = pipeline_hash(cfg);
  out << report.dump(2) << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// fuse

struct ScoreRow {
  std::string sequence_id;
  ScoreVector scores;
};

struct ScoreFile {
  fs::path path;
  ImageKind kind = ImageKind::ddi;
  Direction direction = Direction::forward;
  std::vector<ScoreRow> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

ScoreFile read_score_file(const fs::path& path, int class_count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open", path.string());
  ScoreFile file{path, {}, {}, {}};
  std::optional<std::pair<ImageKind, Direction>> key;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.front() == "sequence_id") continue;  // header
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != static_cast<std::size_t>(class_count) + 3) {
      throw DataError("expected " + std::to_string(class_count + 3) + " fields, found " +
                      std::to_string(fields.size()), where);
    }
    std::pair<ImageKind, Direction> row_key;
    try {
      row_key = {parse_kind(fields[1]), parse_direction(fields[2])};
    } catch (const std::exception& e) {
      throw DataError(e.what(), where);
    }
    if (key && *key != row_key) throw DataError("mixed kind/direction within one file", where);
    key = row_key;
    ScoreRow row{fields[0], {}};
    for (std::size_t c = 3; c < fields.size(); ++c) {
      double v = 0.0;
      const auto* first = fields[c].data();
      const auto* last = first + fields[c].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !(v >= 0.0) || !std::isfinite(v)) {
        throw DataError("score '" + fields[c] + "' is not a finite nonnegative number", where);
      }
      row.scores.scores.push_back(v);
    }
    file.rows.push_back(std::move(row));
  }
  if (!key) throw DataError("no score rows", path.string());
  file.kind = key->first;
  file.direction = key->second;
  return file;
}

struct FuseArgs {
  std::vector<fs::path> scores;
  int class_count = 0;
  std::optional<fs::path> out;
  bool dump = false;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  if (a.scores.size() != 6) throw UsageError("--scores must be given exactly six times");
  if (a.class_count < 1) throw UsageError("--class-count must be >= 1");
  std::map<std::pair<ImageKind, Direction>, ScoreFile> files;
  for (const auto& p : a.scores) {
    ScoreFile f = read_score_file(p, a.class_count);
    const auto key = std::make_pair(f.kind, f.direction);
    if (files.contains(key)) {
      throw DataError("two score files hold " + std::string(to_string(f.kind)) + "/" +
                      std::string(to_string(f.direction)) + ": " + files.at(key).path.string() + " and " +
                      p.string());
    }
    files.emplace(key, std::move(f));
  }
  const ScoreFile& ref = files.begin()->second;
  for (const auto& [key, f] : files) {
    if (f.rows.size() != ref.rows.size()) {
      throw DataError("row count mismatch: " + std::to_string(ref.rows.size()) + " in " + ref.path.string() + ", " +
                      std::to_string(f.rows.size()) + " in " + f.path.string());
    }
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
      if (f.rows[r].sequence_id != ref.rows[r].sequence_id) {
        throw DataError("sequence id mismatch at row " + std::to_string(r + 1) + ": '" + ref.rows[r].sequence_id +
                        "' in " + ref.path.string() + " vs '" + f.rows[r].sequence_id + "' in " + f.path.string());
      }
    }
  }

  json predictions = json::array();
  for (std::size_t r = 0; r < ref.rows.size(); ++r) {
    std::map<ImageKind, FusedScores> pair;
    for (ImageKind k : kAllKinds) {
      pair[k] = pair_fuse(files.at({k, Direction::forward}).rows[r].scores,
                          files.at({k, Direction::backward}).rows[r].scores);
    }
    Prediction p = multi_fuse(pair[ImageKind::ddi].scores, pair[ImageKind::ddni].scores, pair[ImageKind::ddmni].scores);
    p.sequence_id = ref.rows[r].sequence_id;
    for (const auto& [k, f] : pair) p.degenerate = p.degenerate || f.degenerate;
    json row = {{"sequence_id", p.sequence_id},
                {"label", p.label},
                {"confidence", p.confidence},
                {"degenerate", p.degenerate}};
    if (a.dump) {
      for (const auto& [k, f] : pair) {
        row["pair_fused"][std::string(to_string(k))] = {{"scores", f.scores.scores}, {"degenerate", f.degenerate}};
      }
    }
    predictions.push_back(std::move(row));
  }
  const json doc = {{"class_count", a.class_count}, {"predictions", predictions}};
  if (a.out) {
    write_text(*a.out, doc.dump(2) + "\n");
  } else {
    out << doc.dump(2) << "\n";
  }
  return kSuccess;
}

}  // namespace

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("dynapool");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("DYNAPOOL_LOG")) {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept it when asked for.
    if (parsed != spdlog::level::off || std::string_view(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic depth images: synthesize, convert, evaluate and fuse.", "dynapool"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_version_flag("--version", "dynapool 0.1.0");

  std::optional<fs::path> config_file;
  bool print_config = false;
  app.add_option("--config", config_file, "JSON file overriding configuration defaults")->check(CLI::ExistingFile);
  app.add_flag("--print-config", print_config, "print the effective configuration as JSON and exit");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic gesture dataset and its manifest");
  synth_cmd->add_option("--classes", synth.classes, "number of gesture classes (1-6)")->capture_default_str();
  synth_cmd->add_option("--count", synth.count, "sequences per class")->capture_default_str();
  synth_cmd->add_option("--frames", synth.frames, "frames per sequence");
  synth_cmd->add_option("--size", synth.size, "frame width and height in pixels");
  synth_cmd->add_option("--noise", synth.noise, "depth noise standard deviation, mm");
  synth_cmd->add_option("--seed", synth.seed, "base random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  ConvertArgs convert;
  PipelineFlags convert_flags;
  auto* convert_cmd = app.add_subcommand("convert", "build the six dynamic images for every manifest entry");
  convert_cmd->add_option("--manifest", convert.manifest, "input manifest")->required();
  convert_cmd->add_option("--out", convert.out, "output directory")->required();
  convert_cmd->add_option("--workers", convert.workers, "parallel sequences")->check(CLI::PositiveNumber);
  convert_cmd->add_flag("--dump-intermediate", convert.dump, "also write normals and foreground masks");
  convert_flags.attach(*convert_cmd);

  EvaluateArgs evaluate;
  PipelineFlags evaluate_flags;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "train centroids on one manifest, report accuracy on another");
  evaluate_cmd->add_option("--train-manifest", evaluate.train_manifest, "labelled training manifest")->required();
  evaluate_cmd->add_option("--test-manifest", evaluate.test_manifest, "labelled test manifest")->required();
  evaluate_cmd->add_option("--out", evaluate.cache, "cache converted images here (resumable)");
  evaluate_cmd->add_option("--scores-dir", evaluate.scores_dir, "write per-image score CSVs for the test set");
  evaluate_cmd->add_option("--workers", evaluate.workers, "parallel sequences")->check(CLI::PositiveNumber);
  evaluate_flags.attach(*evaluate_cmd);

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "fuse six externally produced score files");
  fuse_cmd->add_option("--scores", fuse.scores, "score CSV, one per (kind, direction); give six")
      ->required()
      ->check(CLI::ExistingFile);
  fuse_cmd->add_option("--class-count", fuse.class_count, "number of classes")->required();
  fuse_cmd->add_option("--out", fuse.out, "write predictions here instead of stdout");
  fuse_cmd->add_flag("--dump-intermediate", fuse.dump, "include pair-fused scores per kind");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    RunConfig cfg;
    if (config_file) {
      try {
        apply_overrides(cfg, read_json_file(*config_file));
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
    }
    if (convert_cmd->parsed()) convert_flags.apply(cfg);
    if (evaluate_cmd->parsed()) evaluate_flags.apply(cfg);
    cfg.validate();

    if (print_config) {
      out << to_json(cfg).dump(2) << "\n";
      return kSuccess;
    }
    if (synth_cmd->parsed()) return cmd_synth(synth, cfg, out);
    if (convert_cmd->parsed()) return cmd_convert(convert, cfg, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate, cfg, out);
    if (fuse_cmd->parsed()) return cmd_fuse(fuse, out);
    err << app.help();
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace dynapool::cli
