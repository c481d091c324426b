#include "dynapool/preprocessing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dynapool/errors.hpp"

namespace dynapool {

// ---------------------------------------------------------------------------
// Normals

NormalImage compute_normals(const Plane& depth, const Mask& valid) {
  const int w = depth.width;
  const int h = depth.height;
  if (w < 3 || h < 3) throw std::invalid_argument("compute_normals needs frames of at least 3x3");
  if (!valid.same_shape(w, h)) throw std::invalid_argument("compute_normals: mask shape differs");

  NormalImage out{w, h, Plane(w, h), Plane(w, h), Plane(w, h), Mask(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool ok = true;
      for (int yy = std::max(0, y - 1); ok && yy <= std::min(h - 1, y + 1); ++yy) {
        for (int xx = std::max(0, x - 1); xx <= std::min(w - 1, x + 1); ++xx) {
          if (!valid.at(xx, yy)) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;

      double gx;
      if (x == 0) gx = depth.at(1, y) - depth.at(0, y);
      else if (x == w - 1) gx = depth.at(w - 1, y) - depth.at(w - 2, y);
      else gx = 0.5 * (depth.at(x + 1, y) - depth.at(x - 1, y));
      double gy;
      if (y == 0) gy = depth.at(x, 1) - depth.at(x, 0);
      else if (y == h - 1) gy = depth.at(x, h - 1) - depth.at(x, h - 2);
      else gy = 0.5 * (depth.at(x, y + 1) - depth.at(x, y - 1));

      const double inv = 1.0 / std::sqrt(gx * gx + gy * gy + 1.0);
      out.nx.at(x, y) = -gx * inv;
      out.ny.at(x, y) = -gy * inv;
      out.nz.at(x, y) = inv;
      out.valid.at(x, y) = 1;
    }
  }
  return out;
}

NormalImage compute_normals(const DepthFrame& frame, DepthRange range) {
  return compute_normals(normalize_depth(frame, range), valid_mask(frame));
}

// ---------------------------------------------------------------------------
// Histogram background removal

void HistogramConfig::validate() const {
  if (bin_count < 8) throw std::invalid_argument("histogram bin_count must be >= 8");
  if (!(peak_min_mass > 0.0 && peak_min_mass < 1.0)) {
    throw std::invalid_argument("histogram peak_min_mass must lie in (0, 1)");
  }
  if (!(tolerance > 0.0 && tolerance < 1.0)) {
    throw std::invalid_argument("histogram tolerance must lie in (0, 1)");
  }
}

namespace {

double normalized(std::uint16_t v, DepthRange range) {
  return std::clamp((static_cast<double>(v) - range.min_mm) / (range.max_mm - range.min_mm), 0.0, 1.0);
}

void require_range(DepthRange range) {
  if (!(range.min_mm < range.max_mm)) throw std::invalid_argument("depth range requires min < max");
}

}  // namespace

std::optional<double> background_threshold(const DepthSequence& sequence,
                                           const HistogramConfig& config, DepthRange range) {
  config.validate();
  require_range(range);
  const auto bins = static_cast<std::size_t>(config.bin_count);
  std::vector<std::size_t> counts(bins, 0);
  std::size_t total = 0;
  for (const auto& frame : sequence.frames()) {
    for (std::uint16_t v : frame.data()) {
      if (v == 0) continue;
      const auto b = std::min(bins - 1, static_cast<std::size_t>(normalized(v, range) * static_cast<double>(bins)));
      ++counts[b];
      ++total;
    }
  }
  if (total == 0) return std::nullopt;

  const double min_mass = config.peak_min_mass * static_cast<double>(total);
  std::optional<std::size_t> last_peak;
  for (std::size_t i = 0; i < bins; ++i) {
    const std::size_t c = counts[i];
    if (c == 0 || static_cast<double>(c) < min_mass) continue;
    const bool rises = i == 0 || c > counts[i - 1];
    const bool falls = i + 1 == bins || c >= counts[i + 1];
    if (rises && falls) last_peak = i;
  }
  if (!last_peak) return std::nullopt;
  const double peak_depth = (static_cast<double>(*last_peak) + 0.5) / static_cast<double>(bins);
  return peak_depth - config.tolerance;
}

BackgroundRemoval zero_beyond(const DepthSequence& sequence, double threshold, DepthRange range) {
  require_range(range);
  std::vector<DepthFrame> frames;
  frames.reserve(sequence.size());
  std::size_t removed = 0;
  for (const auto& frame : sequence.frames()) {
    std::vector<std::uint16_t> data(frame.data().begin(), frame.data().end());
    for (auto& v : data) {
      if (v != 0 && normalized(v, range) > threshold) {
        v = 0;
        ++removed;
      }
    }
    frames.emplace_back(frame.width(), frame.height(), std::move(data));
  }
  return {sequence.with_frames(std::move(frames)), threshold, removed};
}

BackgroundRemoval remove_background(const DepthSequence& sequence, const HistogramConfig& config,
                                    DepthRange range) {
  const auto threshold = background_threshold(sequence, config, range);
  if (!threshold) return {sequence, std::nullopt, 0};
  return zero_beyond(sequence, *threshold, range);
}

BackgroundRemoval remove_background(const DepthSequence& sequence, const HistogramConfig& config) {
  return remove_background(sequence, config, default_range(sequence));
}

// ---------------------------------------------------------------------------
// Gaussian-mixture moving foreground

void GmmConfig::validate() const {
  if (mixtures < 2) throw std::invalid_argument("gmm mixture count must be >= 2");
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) {
    throw std::invalid_argument("gmm learning_rate must lie in (0, 1)");
  }
  if (!(background_threshold > 0.0 && background_threshold < 1.0)) {
    throw std::invalid_argument("gmm background_threshold must lie in (0, 1)");
  }
  if (!(match_distance > 0.0)) throw std::invalid_argument("gmm match_distance must be > 0");
  if (!(initial_variance > 0.0)) throw std::invalid_argument("gmm initial_variance must be > 0");
  if (!(min_variance > 0.0)) throw std::invalid_argument("gmm min_variance must be > 0");
}

namespace {

/// Mixture state for every pixel of a clip, stored mode-interleaved.
class PixelMixtures {
 public:
  PixelMixtures(std::size_t pixels, const GmmConfig& config)
      : k_(static_cast<std::size_t>(config.mixtures)),
        config_(config),
        weight_(pixels * k_, 0.0),
        mean_(pixels * k_, 0.0),
        var_(pixels * k_, config.initial_variance),
        order_(k_) {}

  bool initialized(std::size_t p) const { return weight_[p * k_] > 0.0; }

  void seed(std::size_t p, double x) {
    weight_[p * k_] = 1.0;
    mean_[p * k_] = x;
    var_[p * k_] = config_.initial_variance;
  }

  /// Classifies x against the current model, then folds it in.
  bool observe(std::size_t p, double x) {
    double* w = &weight_[p * k_];
    double* mu = &mean_[p * k_];
    double* var = &var_[p * k_];

    // Active modes ranked by w / sigma, ties by slot index.
    std::size_t active = 0;
    for (std::size_t i = 0; i < k_; ++i) {
      if (w[i] > 0.0) order_[active++] = i;
    }
    std::stable_sort(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(active),
                     [&](std::size_t a, std::size_t b) {
                       return w[a] / std::sqrt(var[a]) > w[b] / std::sqrt(var[b]);
                     });
    std::size_t background = 0;
    double cumulative = 0.0;
    while (background < active) {
      cumulative += w[order_[background++]];
      if (cumulative >= config_.background_threshold) break;
    }
    std::size_t matched_rank = active;
    for (std::size_t r = 0; r < active; ++r) {
      const std::size_t i = order_[r];
      if (std::abs(x - mu[i]) <= config_.match_distance * std::sqrt(var[i])) {
        matched_rank = r;
        break;
      }
    }
    const bool foreground = matched_rank >= background;

    const double alpha = config_.learning_rate;
    if (matched_rank < active) {
      const std::size_t j = order_[matched_rank];
      for (std::size_t r = 0; r < active; ++r) w[order_[r]] *= 1.0 - alpha;
      w[j] += alpha;
      const double diff = x - mu[j];
      mu[j] += alpha * diff;
      var[j] = std::max(config_.min_variance, var[j] + alpha * (diff * diff - var[j]));
    } else {
      std::size_t slot = k_;
      for (std::size_t i = 0; i < k_; ++i) {
        if (w[i] == 0.0) {
          slot = i;
          break;
        }
      }
      if (slot == k_) slot = order_[active - 1];
      w[slot] = 0.0;
      for (std::size_t i = 0; i < k_; ++i) w[i] *= 1.0 - alpha;
      w[slot] = alpha;
      mu[slot] = x;
      var[slot] = config_.initial_variance;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k_; ++i) sum += w[i];
    for (std::size_t i = 0; i < k_; ++i) w[i] /= sum;
    return foreground;
  }

 private:
  std::size_t k_;
  GmmConfig config_;
  std::vector<double> weight_;
  std::vector<double> mean_;
  std::vector<double> var_;
  std::vector<std::size_t> order_;
};

}  // namespace

std::vector<ForegroundMask> gmm_foreground(const DepthSequence& sequence, const GmmConfig& config,
                                           DepthRange range) {
  config.validate();
  require_range(range);
  const int w = sequence.width();
  const int h = sequence.height();
  const std::size_t pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  PixelMixtures model(pixels, config);

  std::vector<ForegroundMask> masks;
  masks.reserve(sequence.size());
  for (const auto& frame : sequence.frames()) {
    ForegroundMask mask(w, h);
    const auto data = frame.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      if (data[p] == 0) continue;
      const double x = normalized(data[p], range);
      if (!model.initialized(p)) {
        model.seed(p, x);
        continue;
      }
      mask.values[p] = model.observe(p, x) ? 1 : 0;
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

std::vector<ForegroundMask> gmm_foreground(const DepthSequence& sequence, const GmmConfig& config) {
  return gmm_foreground(sequence, config, default_range(sequence));
}

DepthFrame apply_mask(const DepthFrame& frame, const Mask& mask) {
  if (!mask.same_shape(frame.width(), frame.height())) {
    throw std::invalid_argument("apply_mask: mask shape differs from frame");
  }
  std::vector<std::uint16_t> data(frame.data().begin(), frame.data().end());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!mask.values[i]) data[i] = 0;
  }
  return DepthFrame(frame.width(), frame.height(), std::move(data));
}

// ---------------------------------------------------------------------------
// Debug dumps

void save_mask_png(const Mask& mask, const std::filesystem::path& path) {
  cv::Mat img(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) img.at<std::uint8_t>(y, x) = mask.at(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), img)) throw DataError("cannot write mask", path);
}

void save_normals_png(const NormalImage& normals, const std::filesystem::path& path) {
  auto to_byte = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor((v + 1.0) * 127.5 + 0.5), 0.0, 255.0));
  };
  cv::Mat img(normals.height, normals.width, CV_8UC3);
  for (int y = 0; y < normals.height; ++y) {
    for (int x = 0; x < normals.width; ++x) {
      img.at<cv::Vec3b>(y, x) = cv::Vec3b(to_byte(normals.nz.at(x, y)), to_byte(normals.ny.at(x, y)),
                                          to_byte(normals.nx.at(x, y)));
    }
  }
  if (!cv::imwrite(path.string(), img)) throw DataError("cannot write normal image", path);
}

}  // namespace dynapool
