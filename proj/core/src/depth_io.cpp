#include "dynapool/depth_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dynapool/errors.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace dynapool {

DepthFrame::DepthFrame(int width, int height, std::vector<std::uint16_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 2 || height < 2) {
    throw std::invalid_argument("depth frame must be at least 2x2, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("depth frame data length does not match width * height");
  }
}

DepthSequence::DepthSequence(std::vector<DepthFrame> frames, std::string sequence_id,
                             std::optional<int> label)
    : frames_(std::move(frames)), id_(std::move(sequence_id)), label_(label) {
  if (frames_.size() < 2) {
    throw std::invalid_argument("sequence too short: need at least 2 frames");
  }
  for (const auto& f : frames_) {
    if (f.width() != frames_.front().width() || f.height() != frames_.front().height()) {
      throw std::invalid_argument("dimension mismatch between frames of sequence " + id_);
    }
  }
  if (label_ && *label_ < 0) {
    throw std::invalid_argument("label must be nonnegative");
  }
}

DepthSequence DepthSequence::reversed() const {
  std::vector<DepthFrame> frames(frames_.rbegin(), frames_.rend());
  return DepthSequence(std::move(frames), id_, label_);
}

DepthSequence DepthSequence::with_frames(std::vector<DepthFrame> frames) const {
  return DepthSequence(std::move(frames), id_, label_);
}

DepthRange default_range(const DepthSequence& sequence) {
  std::uint16_t lo = std::numeric_limits<std::uint16_t>::max();
  std::uint16_t hi = 0;
  for (const auto& frame : sequence.frames()) {
    for (std::uint16_t v : frame.data()) {
      if (v == 0) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi == 0) return {0.0, 1.0};
  if (lo == hi) return {static_cast<double>(hi) - 1.0, static_cast<double>(hi)};
  return {static_cast<double>(lo), static_cast<double>(hi)};
}

Plane normalize_depth(const DepthFrame& frame, double d_min, double d_max) {
  if (!(d_min < d_max)) {
    throw std::invalid_argument("normalize_depth requires d_min < d_max");
  }
  Plane out(frame.width(), frame.height());
  const double span = d_max - d_min;
  const auto data = frame.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0) continue;
    out.values[i] = std::clamp((static_cast<double>(data[i]) - d_min) / span, 0.0, 1.0);
  }
  return out;
}

Plane normalize_depth(const DepthFrame& frame, DepthRange range) {
  return normalize_depth(frame, range.min_mm, range.max_mm);
}

Plane normalize_depth(const Plane& plane, double d_min, double d_max) {
  if (!(d_min < d_max)) {
    throw std::invalid_argument("normalize_depth requires d_min < d_max");
  }
  Plane out(plane.width, plane.height);
  const double span = d_max - d_min;
  for (std::size_t i = 0; i < plane.values.size(); ++i) {
    if (plane.values[i] == 0.0) continue;
    out.values[i] = std::clamp((plane.values[i] - d_min) / span, 0.0, 1.0);
  }
  return out;
}

Mask valid_mask(const DepthFrame& frame) {
  Mask out(frame.width(), frame.height());
  const auto data = frame.data();
  for (std::size_t i = 0; i < data.size(); ++i) out.values[i] = data[i] != 0 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

void validate(const Manifest& manifest) {
  if (manifest.class_count < 1) {
    throw DataError("manifest class_count must be >= 1");
  }
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (e.sequence_id.empty()) throw DataError("manifest entry with empty id");
    if (!seen.insert(e.sequence_id).second) {
      throw DataError("duplicate sequence id '" + e.sequence_id + "' in manifest");
    }
    if (e.label && (*e.label < 0 || *e.label >= manifest.class_count)) {
      throw DataError("label " + std::to_string(*e.label) + " of '" + e.sequence_id +
                      "' outside [0, class_count)");
    }
  }
}

namespace {

std::optional<int> parse_frame_index(const std::string& name) {
  constexpr std::string_view prefix = "frame_";
  constexpr std::string_view suffix = ".png";
  if (name.size() <= prefix.size() + suffix.size()) return std::nullopt;
  if (name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) return std::nullopt;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size() - suffix.size();
  int index = 0;
  auto [ptr, ec] = std::from_chars(first, last, index);
  if (ec != std::errc{} || ptr != last || index < 0) return std::nullopt;
  return index;
}

std::vector<std::pair<int, fs::path>> list_frames(const fs::path& dir) {
  std::vector<std::pair<int, fs::path>> frames;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    if (auto idx = parse_frame_index(item.path().filename().string())) {
      frames.emplace_back(*idx, item.path());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest", path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON (") + e.what() + ")", path);
  }
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "sequences" && key != "class_count") {
        throw FormatError("unknown manifest field '" + key + "'", path);
      }
    }
    Manifest manifest;
    manifest.class_count = doc.at("class_count").get<int>();
    const fs::path base = path.parent_path();
    for (const auto& item : doc.at("sequences")) {
      for (const auto& [key, _] : item.items()) {
        if (key != "id" && key != "dir" && key != "label") {
          throw FormatError("unknown manifest entry field '" + key + "'", path);
        }
      }
      ManifestEntry entry;
      entry.sequence_id = item.at("id").get<std::string>();
      fs::path dir = item.at("dir").get<std::string>();
      entry.directory = dir.is_relative() ? base / dir : dir;
      if (item.contains("label") && !item.at("label").is_null()) {
        entry.label = item.at("label").get<int>();
      }
      std::error_code ec;
      if (fs::is_directory(entry.directory, ec)) {
        entry.frame_count = static_cast<int>(list_frames(entry.directory).size());
      }
      manifest.entries.push_back(std::move(entry));
    }
    validate(manifest);
    return manifest;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest (") + e.what() + ")", path);
  }
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  validate(manifest);
  json doc;
  doc["class_count"] = manifest.class_count;
  doc["sequences"] = json::array();
  for (const auto& e : manifest.entries) {
    json item{{"id", e.sequence_id}, {"dir", e.directory.generic_string()}};
    if (e.label) item["label"] = *e.label;
    doc["sequences"].push_back(std::move(item));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest", path);
  out << doc.dump(2) << '\n';
  if (!out) throw DataError("failed writing manifest", path);
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.png", index);
  return buf;
}

DepthFrame load_depth_png(const fs::path& path) {
  cv::Mat img;
  try {
    img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    img.release();
  }
  if (img.empty()) throw FormatError("unreadable depth frame", path);
  if (img.type() != CV_16UC1) throw FormatError("non-16-bit input", path);
  if (img.cols < 2 || img.rows < 2) throw DataError("depth frame smaller than 2x2", path);
  std::vector<std::uint16_t> data(static_cast<std::size_t>(img.cols) * img.rows);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<std::uint16_t>(y);
    std::copy(row, row + img.cols, data.begin() + static_cast<std::ptrdiff_t>(y) * img.cols);
  }
  return DepthFrame(img.cols, img.rows, std::move(data));
}

void save_depth_png(const DepthFrame& frame, const fs::path& path) {
  cv::Mat img(frame.height(), frame.width(), CV_16UC1,
              const_cast<std::uint16_t*>(frame.data().data()));
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write depth frame", path);
}

DepthSequence load_sequence(const ManifestEntry& entry) {
  std::error_code ec;
  if (!fs::is_directory(entry.directory, ec)) {
    throw DataError("missing directory", entry.directory);
  }
  const auto files = list_frames(entry.directory);
  if (files.size() < 2) throw DataError("sequence too short", entry.directory);
  std::vector<DepthFrame> frames;
  frames.reserve(files.size());
  for (const auto& [index, file] : files) {
    DepthFrame frame = load_depth_png(file);
    if (!frames.empty() &&
        (frame.width() != frames.front().width() || frame.height() != frames.front().height())) {
      throw DataError("dimension mismatch", file);
    }
    frames.push_back(std::move(frame));
  }
  return DepthSequence(std::move(frames), entry.sequence_id, entry.label);
}

void save_sequence(const DepthSequence& sequence, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw DataError("cannot create directory", directory);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    save_depth_png(sequence.frames()[i], directory / frame_filename(static_cast<int>(i)));
  }
}

}  // namespace dynapool
