#include "dynapool/rank_pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dynapool {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " contains a non-finite entry");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PrefixMeans::PrefixMeans(std::size_t dimension, std::vector<double> rows)
    : dimension_(dimension), rows_(std::move(rows)) {
  if (dimension_ == 0) throw std::invalid_argument("prefix means need a nonzero dimension");
  if (rows_.size() % dimension_ != 0) {
    throw std::invalid_argument("prefix means storage is not a whole number of rows");
  }
}

void PoolingConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("pooling lambda must be > 0");
  if (max_iters < 1) throw std::invalid_argument("pooling max_iters must be >= 1");
  if (!(step_size > 0.0)) throw std::invalid_argument("pooling step_size must be > 0");
  if (!(step_decay > 0.0 && step_decay <= 1.0)) {
    throw std::invalid_argument("pooling step_decay must lie in (0, 1]");
  }
}

FeatureVector featurize(const Plane& plane) {
  if (plane.empty()) throw std::invalid_argument("cannot featurize an empty plane");
  require_finite(plane.values, "plane");
  return FeatureVector{plane.values};
}

FeatureVector featurize(std::span<const Plane> planes) {
  if (planes.empty() || planes.front().empty()) {
    throw std::invalid_argument("cannot featurize an empty plane set");
  }
  FeatureVector out;
  out.values.reserve(planes.size() * planes.front().size());
  for (const auto& p : planes) {
    if (!p.same_shape(planes.front().width, planes.front().height)) {
      throw std::invalid_argument("featurize: planes differ in shape");
    }
    require_finite(p.values, "plane");
    out.values.insert(out.values.end(), p.values.begin(), p.values.end());
  }
  return out;
}

PrefixMeans prefix_means(std::span<const FeatureVector> features) {
  if (features.empty()) throw std::invalid_argument("prefix_means needs at least one feature vector");
  const std::size_t dim = features.front().dimension();
  if (dim == 0) throw std::invalid_argument("prefix_means: empty feature vector");
  std::vector<double> rows(features.size() * dim);
  for (std::size_t t = 0; t < features.size(); ++t) {
    if (features[t].dimension() != dim) {
      throw std::invalid_argument("prefix_means: dimension mismatch at frame " + std::to_string(t));
    }
    double* row = rows.data() + t * dim;
    const double* phi = features[t].values.data();
    if (t == 0) {
      std::copy(phi, phi + dim, row);
      continue;
    }
    const double* prev = row - dim;
    const double n = static_cast<double>(t + 1);
    for (std::size_t i = 0; i < dim; ++i) row[i] = (static_cast<double>(t) * prev[i] + phi[i]) / n;
  }
  return PrefixMeans(dim, std::move(rows));
}

double objective(const RankingParams& params, const PrefixMeans& means, double lambda) {
  const std::size_t T = means.count();
  if (T < 2) throw std::invalid_argument("objective needs at least two frames");
  if (params.dimension() != means.dimension()) {
    throw std::invalid_argument("objective: parameter and feature dimensions differ");
  }
  std::vector<double> scores(T);
  for (std::size_t t = 0; t < T; ++t) scores[t] = dot(params.values, means[t]);
  double hinge = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = t + 1; q < T; ++q) hinge += std::max(0.0, 1.0 - scores[q] + scores[t]);
  }
  const double pair_weight = 2.0 / (static_cast<double>(T) * static_cast<double>(T - 1));
  return 0.5 * lambda * dot(params.values, params.values) + pair_weight * hinge;
}

PoolingResult rank_pool(const PrefixMeans& means, const PoolingConfig& config) {
  config.validate();
  const std::size_t T = means.count();
  const std::size_t D = means.dimension();
  if (T < 2) throw std::invalid_argument("rank_pool needs at least two frames");

  // Only differences V_q - V_t enter the hinge, so work on V_t - V_1. Dimensions
  // that never move have an identically zero subgradient and stay at 0.
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t t = 1; t < T; ++t) {
      if (means[t][i] != means[0][i]) {
        active.push_back(i);
        break;
      }
    }
  }
  const std::size_t m = active.size();
  std::vector<double> centred(T * m);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < m; ++j) centred[t * m + j] = means[t][active[j]] - means[0][active[j]];
  }
  auto row = [&](std::size_t t) { return std::span<const double>(centred.data() + t * m, m); };

  const double lambda = config.lambda;
  const double pair_weight = 2.0 / (static_cast<double>(T) * static_cast<double>(T - 1));
  std::vector<double> d(m, 0.0);
  std::vector<double> best = d;
  double best_energy = std::numeric_limits<double>::infinity();
  double energy_at_tail = best_energy;
  const int tail_start = config.max_iters - std::max(1, config.max_iters / 10);

  std::vector<double> scores(T);
  std::vector<long> coeff(T);
  std::vector<double> grad(m);
  PoolingResult result;

  for (int k = 0;; ++k) {
    for (std::size_t t = 0; t < T; ++t) scores[t] = dot(d, row(t));
    std::fill(coeff.begin(), coeff.end(), 0L);
    double hinge = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t q = t + 1; q < T; ++q) {
        const double margin = 1.0 - scores[q] + scores[t];
        if (margin > 0.0) {
          hinge += margin;
          ++coeff[t];
          --coeff[q];
        }
      }
    }
    const double energy = 0.5 * lambda * dot(d, d) + pair_weight * hinge;
    if (energy < best_energy) {
      best_energy = energy;
      best = d;
    }
    if (k == tail_start) energy_at_tail = best_energy;
    if (k == config.max_iters) break;

    for (std::size_t j = 0; j < m; ++j) grad[j] = lambda * d[j];
    for (std::size_t t = 0; t < T; ++t) {
      if (coeff[t] == 0) continue;
      const double w = pair_weight * static_cast<double>(coeff[t]);
      const auto u = row(t);
      for (std::size_t j = 0; j < m; ++j) grad[j] += w * u[j];
    }
    if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) {
      result.converged = true;
      break;
    }
    const double step = config.step_size / (1.0 + config.step_decay * static_cast<double>(k));
    for (std::size_t j = 0; j < m; ++j) d[j] -= step * grad[j];
    result.iterations = k + 1;
  }

  if (!result.converged) {
    result.converged =
        energy_at_tail - best_energy <= 1e-6 * std::max(1.0, std::abs(best_energy));
  }
  result.params.values.assign(D, 0.0);
  for (std::size_t j = 0; j < m; ++j) result.params.values[active[j]] = best[j];
  result.energy = objective(result.params, means, lambda);
  return result;
}

PoolingResult pool_features(std::span<const FeatureVector> features, const PoolingConfig& config) {
  if (config.direction == Direction::forward) return rank_pool(prefix_means(features), config);
  std::vector<FeatureVector> reversed(features.rbegin(), features.rend());
  return rank_pool(prefix_means(reversed), config);
}

DynamicImage to_image(const RankingParams& params, int width, int height, int channel_count,
                      ImageKind kind, Direction direction) {
  if (width < 1 || height < 1) throw std::invalid_argument("to_image: empty image");
  if (channel_count != 1 && channel_count != 3) {
    throw std::invalid_argument("to_image: channel_count must be 1 or 3");
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (params.dimension() != n * static_cast<std::size_t>(channel_count)) {
    throw std::invalid_argument("to_image: parameter dimension does not match image size");
  }
  require_finite(params.values, "ranking parameters");

  DynamicImage image;
  image.width = width;
  image.height = height;
  image.kind = kind;
  image.direction = direction;
  for (int c = 0; c < channel_count; ++c) {
    const auto plane = std::span<const double>(params.values).subspan(static_cast<std::size_t>(c) * n, n);
    const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
    auto& out = image.channels[static_cast<std::size_t>(c)];
    if (*hi == *lo) {
      out.assign(n, 128);
      continue;
    }
    const double lo_v = *lo;
    const double span = *hi - *lo;
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double scaled = std::floor(255.0 * (plane[i] - lo_v) / span + 0.5);
      out[i] = static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
    }
  }
  if (channel_count == 1) {
    image.channels[1] = image.channels[0];
    image.channels[2] = image.channels[0];
  }
  return image;
}

}  // namespace dynapool
