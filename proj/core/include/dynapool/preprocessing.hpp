#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "dynapool/depth_io.hpp"
#include "dynapool/grid.hpp"

namespace dynapool {

/// Per-pixel unit surface normals. Masked pixels hold (0, 0, 0).
struct NormalImage {
  int width = 0;
  int height = 0;
  Plane nx;
  Plane ny;
  Plane nz;
  Mask valid;

  friend bool operator==(const NormalImage&, const NormalImage&) = default;
};

/// Central differences on the depth plane (one-sided at the border), normal
/// (-g_x, -g_y, 1) normalized. A pixel is masked when any in-image pixel of
/// its 3x3 neighbourhood is invalid. Requires width, height >= 3.
NormalImage compute_normals(const Plane& depth, const Mask& valid);

/// Normalizes with `range` and treats zero readings as invalid.
NormalImage compute_normals(const DepthFrame& frame, DepthRange range);

struct HistogramConfig {
  int bin_count = 256;
  double peak_min_mass = 0.01;
  double tolerance = 0.1;

  void validate() const;
};

struct BackgroundRemoval {
  DepthSequence sequence;
  /// Normalized cut-off; empty when no qualifying peak was found and the
  /// sequence passed through unchanged.
  std::optional<double> threshold;
  std::size_t removed_pixels = 0;

  bool passed_through() const noexcept { return !threshold.has_value(); }
};

/// Histogram of normalized nonzero depths pooled over the clip. The
/// qualifying peak with the largest depth is taken as background; anything
/// deeper than (peak - tolerance) is zeroed in every frame.
std::optional<double> background_threshold(const DepthSequence& sequence,
                                           const HistogramConfig& config, DepthRange range);

/// Zero every pixel whose normalized depth exceeds `threshold`.
BackgroundRemoval zero_beyond(const DepthSequence& sequence, double threshold, DepthRange range);

BackgroundRemoval remove_background(const DepthSequence& sequence, const HistogramConfig& config);
BackgroundRemoval remove_background(const DepthSequence& sequence, const HistogramConfig& config,
                                    DepthRange range);

struct GmmConfig {
  int mixtures = 3;
  double learning_rate = 0.01;
  double background_threshold = 0.7;
  double match_distance = 2.5;
  double initial_variance = 0.05 * 0.05;
  double min_variance = 0.01 * 0.01;

  void validate() const;
};

/// Per-pixel adaptive Gaussian mixture over normalized depth. Frame 0 seeds
/// the model and yields an all-false mask. Not thread-safe per call; distinct
/// sequences may run concurrently.
std::vector<ForegroundMask> gmm_foreground(const DepthSequence& sequence, const GmmConfig& config);
std::vector<ForegroundMask> gmm_foreground(const DepthSequence& sequence, const GmmConfig& config,
                                           DepthRange range);

/// Zero depth wherever the mask is false.
DepthFrame apply_mask(const DepthFrame& frame, const Mask& mask);

// Debug dumps: masks as 8-bit 0/255, normals mapped from [-1, 1] to [0, 255].
void save_mask_png(const Mask& mask, const std::filesystem::path& path);
void save_normals_png(const NormalImage& normals, const std::filesystem::path& path);

}  // namespace dynapool
