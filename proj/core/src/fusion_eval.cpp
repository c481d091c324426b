#include "dynapool/fusion_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dynapool/errors.hpp"

namespace dynapool {

namespace {

void require_nonnegative(const ScoreVector& v) {
  for (double s : v.scores) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("score vectors must be finite and nonnegative");
    }
  }
}

FusedScores normalize_product(std::vector<double> product) {
  const double sum = std::accumulate(product.begin(), product.end(), 0.0);
  FusedScores out;
  if (!(sum > 0.0)) {
    out.degenerate = true;
    out.scores.scores.assign(product.size(), 1.0 / static_cast<double>(product.size()));
    return out;
  }
  for (double& p : product) p /= sum;
  out.scores.scores = std::move(product);
  return out;
}

}  // namespace

int argmax(const ScoreVector& scores) {
  if (scores.scores.empty()) throw std::invalid_argument("argmax of an empty score vector");
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return static_cast<int>(std::max_element(scores.scores.begin(), scores.scores.end()) -
                          scores.scores.begin());
}

FusedScores pair_fuse(const ScoreVector& a, const ScoreVector& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw std::invalid_argument("pair_fuse: score vectors must be nonempty and of equal length");
  }
  require_nonnegative(a);
  require_nonnegative(b);
  std::vector<double> product(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) product[i] = a.scores[i] * b.scores[i];
  return normalize_product(std::move(product));
}

Prediction multi_fuse(const ScoreVector& ddi, const ScoreVector& ddni, const ScoreVector& ddmni) {
  if (ddi.size() != ddni.size() || ddi.size() != ddmni.size() || ddi.size() == 0) {
    throw std::invalid_argument("multi_fuse: score vectors must be nonempty and of equal length");
  }
  require_nonnegative(ddi);
  require_nonnegative(ddni);
  require_nonnegative(ddmni);
  std::vector<double> product(ddi.size());
  for (std::size_t i = 0; i < ddi.size(); ++i) product[i] = ddi.scores[i] * ddni.scores[i] * ddmni.scores[i];
  const FusedScores fused = normalize_product(std::move(product));
  Prediction p;
  p.label = argmax(fused.scores);
  p.confidence = fused.scores.scores[static_cast<std::size_t>(p.label)];
  p.degenerate = fused.degenerate;
  return p;
}

EvalReport recognition_rate(std::span<const Prediction> predictions, std::span<const int> truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("recognition_rate: " + std::to_string(predictions.size()) +
                                " predictions but " + std::to_string(truths.size()) + " truths");
  }
  if (predictions.empty()) throw std::invalid_argument("recognition_rate needs at least one sample");

  EvalReport report;
  report.n = predictions.size();
  std::map<int, ClassAccuracy> per_class;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool hit = predictions[i].label == truths[i];
    auto& c = per_class[truths[i]];
    c.label = truths[i];
    ++c.n;
    if (hit) {
      ++c.correct;
      ++report.correct;
    }
  }
  report.recognition_rate = static_cast<double>(report.correct) / static_cast<double>(report.n);
  for (auto& [label, c] : per_class) {
    c.accuracy = static_cast<double>(c.correct) / static_cast<double>(c.n);
    report.per_class.push_back(c);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Nearest-centroid baseline

std::vector<double> downsample_image(const DynamicImage& image, int size) {
  if (size < 1) throw std::invalid_argument("downsample size must be >= 1");
  if (image.width < 1 || image.height < 1) throw std::invalid_argument("cannot downsample an empty image");

  // Fractional box filter: output cell j covers source [j * W / S, (j + 1) * W / S).
  auto weights = [size](int src) {
    std::vector<std::vector<std::pair<int, double>>> w(static_cast<std::size_t>(size));
    const double scale = static_cast<double>(src) / size;
    for (int j = 0; j < size; ++j) {
      const double lo = j * scale;
      const double hi = (j + 1) * scale;
      for (int i = static_cast<int>(std::floor(lo)); i < src && i < hi; ++i) {
        const double overlap = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
        if (overlap > 0.0) w[static_cast<std::size_t>(j)].emplace_back(i, overlap / scale);
      }
    }
    return w;
  };
  const auto wx = weights(image.width);
  const auto wy = weights(image.height);

  const auto cells = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  std::vector<double> out(3 * cells, 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& ch = image.channels[c];
    for (int oy = 0; oy < size; ++oy) {
      for (int ox = 0; ox < size; ++ox) {
        double acc = 0.0;
        for (const auto& [sy, fy] : wy[static_cast<std::size_t>(oy)]) {
          for (const auto& [sx, fx] : wx[static_cast<std::size_t>(ox)]) {
            acc += fy * fx * ch[static_cast<std::size_t>(sy) * image.width + sx];
          }
        }
        out[c * cells + static_cast<std::size_t>(oy) * size + ox] = acc;
      }
    }
  }
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double median_pairwise_distance(const std::vector<std::vector<double>>& centroids) {
  std::vector<double> distances;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      distances.push_back(std::sqrt(squared_distance(centroids[i], centroids[j])));
    }
  }
  if (distances.empty()) return 1.0;
  std::sort(distances.begin(), distances.end());
  const std::size_t mid = distances.size() / 2;
  const double median =
      distances.size() % 2 == 1 ? distances[mid] : 0.5 * (distances[mid - 1] + distances[mid]);
  return median > 0.0 ? median : 1.0;
}

}  // namespace

CentroidModel train_centroids(std::span<const LabeledRepresentation> train_set, int class_count,
                              int downsample) {
  if (class_count < 1) throw std::invalid_argument("class_count must be >= 1");
  if (downsample < 1) throw std::invalid_argument("downsample must be >= 1");

  CentroidModel model;
  model.class_count = class_count;
  model.downsample = downsample;
  const std::size_t dim = 3 * static_cast<std::size_t>(downsample) * static_cast<std::size_t>(downsample);
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);

  for (ImageKind kind : kAllKinds) {
    for (Direction dir : kAllDirections) {
      model.centroids[{kind, dir}].assign(static_cast<std::size_t>(class_count),
                                          std::vector<double>(dim, 0.0));
    }
  }
  for (const auto& sample : train_set) {
    if (sample.label < 0 || sample.label >= class_count) {
      throw DataError("training label " + std::to_string(sample.label) + " outside [0, class_count)");
    }
    ++counts[static_cast<std::size_t>(sample.label)];
    for (ImageKind kind : kAllKinds) {
      for (Direction dir : kAllDirections) {
        const auto x = downsample_image(sample.images.get(kind, dir), downsample);
        auto& acc = model.centroids[{kind, dir}][static_cast<std::size_t>(sample.label)];
        for (std::size_t i = 0; i < dim; ++i) acc[i] += x[i];
      }
    }
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw DataError("class " + std::to_string(c) + " has no training sample");
  }
  for (auto& [key, per_class] : model.centroids) {
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      for (double& v : per_class[c]) v /= static_cast<double>(counts[c]);
    }
    model.sigma[key] = median_pairwise_distance(per_class);
  }
  return model;
}

ScoreVector score(const CentroidModel& model, const DynamicImage& image) {
  const auto key = std::make_pair(image.kind, image.direction);
  const auto it = model.centroids.find(key);
  if (it == model.centroids.end()) {
    throw std::invalid_argument("centroid model has no entry for " + std::string(to_string(image.kind)) +
                                "/" + std::string(to_string(image.direction)));
  }
  const double sigma = model.sigma.at(key);
  const auto x = downsample_image(image, model.downsample);
  ScoreVector out;
  out.scores.reserve(it->second.size());
  for (const auto& centroid : it->second) {
    const double s = std::exp(-squared_distance(x, centroid) / (2.0 * sigma * sigma));
    out.scores.push_back(std::max(s, std::numeric_limits<double>::min()));
  }
  return out;
}

Classification classify(const CentroidModel& model, const RepresentationSet& images) {
  Classification out;
  for (ImageKind kind : kAllKinds) {
    for (Direction dir : kAllDirections) out.raw[{kind, dir}] = score(model, images.get(kind, dir));
    out.pair_fused[kind] =
        pair_fuse(out.raw.at({kind, Direction::forward}), out.raw.at({kind, Direction::backward}));
  }
  out.prediction = multi_fuse(out.pair_fused.at(ImageKind::ddi).scores,
                              out.pair_fused.at(ImageKind::ddni).scores,
                              out.pair_fused.at(ImageKind::ddmni).scores);
  out.prediction.sequence_id = images.sequence_id;
  return out;
}

}  // namespace dynapool
