#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynapool/grid.hpp"

namespace dynapool {

/// One depth map. Values are millimetres; 0 marks a missing reading.
class DepthFrame {
 public:
  /// Throws std::invalid_argument unless width, height >= 2 and
  /// data.size() == width * height.
  DepthFrame(int width, int height, std::vector<std::uint16_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint16_t at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  std::span<const std::uint16_t> data() const noexcept { return data_; }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint16_t> data_;
};

/// An ordered clip of equally sized depth frames (T >= 2).
class DepthSequence {
 public:
  DepthSequence(std::vector<DepthFrame> frames, std::string sequence_id,
                std::optional<int> label = std::nullopt);

  const std::vector<DepthFrame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  int width() const noexcept { return frames_.front().width(); }
  int height() const noexcept { return frames_.front().height(); }
  const std::string& id() const noexcept { return id_; }
  std::optional<int> label() const noexcept { return label_; }

  /// Same id and label, frames in reverse temporal order.
  DepthSequence reversed() const;
  /// Same id and label, different frames.
  DepthSequence with_frames(std::vector<DepthFrame> frames) const;

  friend bool operator==(const DepthSequence&, const DepthSequence&) = default;

 private:
  std::vector<DepthFrame> frames_;
  std::string id_;
  std::optional<int> label_;
};

struct DepthRange {
  double min_mm = 0.0;
  double max_mm = 1.0;
};

/// (min nonzero depth, max depth) over the whole sequence. A single-valued
/// sequence gets (v - 1, v) so every valid pixel normalizes to 1; an all-invalid
/// sequence gets (0, 1).
DepthRange default_range(const DepthSequence& sequence);

/// clamp((v - d_min) / (d_max - d_min), 0, 1); invalid (0) readings map to 0.
Plane normalize_depth(const DepthFrame& frame, double d_min, double d_max);
Plane normalize_depth(const DepthFrame& frame, DepthRange range);
/// Same map applied to an already real-valued plane; zeros stay zero.
Plane normalize_depth(const Plane& plane, double d_min, double d_max);

/// Nonzero readings.
Mask valid_mask(const DepthFrame& frame);

// ---------------------------------------------------------------------------
// Manifest and frame files

struct ManifestEntry {
  std::string sequence_id;
  std::filesystem::path directory;
  std::optional<int> label;
  int frame_count = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  int class_count = 0;
};

/// Throws DataError on duplicate ids, out-of-range labels or class_count < 1.
void validate(const Manifest& manifest);

/// Relative directories are resolved against the manifest's own directory.
/// frame_count is filled from the frame files present on disk.
Manifest load_manifest(const std::filesystem::path& path);

/// Directories are written as given; relative ones stay relative to the file.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// `frame_%06d.png`
std::string frame_filename(int index);

DepthSequence load_sequence(const ManifestEntry& entry);
void save_sequence(const DepthSequence& sequence, const std::filesystem::path& directory);

DepthFrame load_depth_png(const std::filesystem::path& path);
void save_depth_png(const DepthFrame& frame, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dynamic images

enum class ImageKind { ddi, ddni, ddmni };
enum class Direction { forward, backward };

inline constexpr std::array<ImageKind, 3> kAllKinds = {ImageKind::ddi, ImageKind::ddni,
                                                       ImageKind::ddmni};
inline constexpr std::array<Direction, 2> kAllDirections = {Direction::forward,
                                                            Direction::backward};

std::string_view to_string(ImageKind kind);
std::string_view to_string(Direction direction);
ImageKind parse_kind(std::string_view text);
Direction parse_direction(std::string_view text);

/// Three 8-bit planes, row-major, width * height each.
struct DynamicImage {
  int width = 0;
  int height = 0;
  std::array<std::vector<std::uint8_t>, 3> channels;
  ImageKind kind = ImageKind::ddi;
  Direction direction = Direction::forward;

  friend bool operator==(const DynamicImage&, const DynamicImage&) = default;
};

/// `<sequence_id>_<kind>_<direction>.png`
std::string image_filename(std::string_view sequence_id, ImageKind kind, Direction direction);

/// Lossless 8-bit RGB PNG; channel 0 is stored as red.
void save_image(const DynamicImage& image, const std::filesystem::path& path);

/// Kind and direction are recovered from the filename suffix. Throws
/// FormatError for anything that is not an 8-bit 3-channel PNG.
DynamicImage load_image(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic fixtures

enum class Archetype { swipe_right, swipe_left, swipe_up, swipe_down, circle, push };

/// Class order used by the synthetic benchmark: class k is all_archetypes()[k].
std::span<const Archetype> all_archetypes();
std::string_view to_string(Archetype archetype);
Archetype parse_archetype(std::string_view text);

struct SynthSpec {
  Archetype archetype = Archetype::swipe_right;
  int frames = 24;
  int width = 64;
  int height = 64;
  /// Standard deviation of additive Gaussian depth noise, millimetres.
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  /// Blob radius as a fraction of min(width, height), before per-seed jitter.
  double blob_radius = 0.1;
};

/// Generated clip plus its ground truth.
struct SyntheticScene {
  DepthSequence sequence;
  std::vector<Mask> blob_masks;  // per frame, true where the blob covers the pixel
  std::uint16_t plane_depth_mm = 0;
};

/// A near disc following an archetype trajectory over a far flat plane.
/// Deterministic: same SynthSpec, same frames.
SyntheticScene synth_scene(const SynthSpec& spec, std::string sequence_id = "synthetic");
DepthSequence synth_sequence(const SynthSpec& spec, std::string sequence_id = "synthetic");

}  // namespace dynapool
