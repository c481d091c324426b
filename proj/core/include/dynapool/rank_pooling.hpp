#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynapool/depth_io.hpp"
#include "dynapool/grid.hpp"

namespace dynapool {

/// Per-frame representation phi(I_t).
struct FeatureVector {
  std::vector<double> values;
  std::size_t dimension() const noexcept { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// The learned ranking vector d*; doubles as the sequence descriptor.
struct RankingParams {
  std::vector<double> values;
  std::size_t dimension() const noexcept { return values.size(); }
  friend bool operator==(const RankingParams&, const RankingParams&) = default;
};

/// Running means V_1..V_T stored as a contiguous T x d matrix.
class PrefixMeans {
 public:
  PrefixMeans(std::size_t dimension, std::vector<double> rows);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t count() const noexcept { return dimension_ == 0 ? 0 : rows_.size() / dimension_; }
  std::span<const double> operator[](std::size_t t) const {
    return {rows_.data() + t * dimension_, dimension_};
  }

 private:
  std::size_t dimension_;
  std::vector<double> rows_;
};

struct PoolingConfig {
  double lambda = 1.0;
  int max_iters = 2000;
  double step_size = 1.0;
  double step_decay = 0.01;
  Direction direction = Direction::forward;

  /// Throws std::invalid_argument on lambda <= 0, max_iters < 1,
  /// step_size <= 0 or step_decay outside (0, 1].
  void validate() const;
};

struct PoolingResult {
  RankingParams params;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Row-major flattening.
FeatureVector featurize(const Plane& plane);

/// Plane-major concatenation of equally sized planes.
FeatureVector featurize(std::span<const Plane> planes);

/// V_t = ((t - 1) V_{t-1} + phi_t) / t.
PrefixMeans prefix_means(std::span<const FeatureVector> features);

/// (lambda / 2) |d|^2 + 2 / (T (T - 1)) * sum_{q > t} max(0, 1 - <d, V_q> + <d, V_t>).
double objective(const RankingParams& params, const PrefixMeans& means, double lambda);

/// Minimizes the objective above by full-batch subgradient descent from d = 0
/// with step step_size / (1 + step_decay * k). Returns the best iterate seen;
/// `converged` is false when the iteration budget ran out while the best
/// energy was still moving.
PoolingResult rank_pool(const PrefixMeans& means, const PoolingConfig& config);

/// featurize -> (reverse if backward) -> prefix_means -> rank_pool.
PoolingResult pool_features(std::span<const FeatureVector> features, const PoolingConfig& config);

/// Per-channel min-max quantization to [0, 255], rounding half up. Constant
/// channels become 128; a single channel is replicated into all three.
DynamicImage to_image(const RankingParams& params, int width, int height, int channel_count,
                      ImageKind kind, Direction direction);

}  // namespace dynapool
