#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynapool/depth_io.hpp"
#include "dynapool/representations.hpp"

namespace dynapool {

/// Nonnegative per-class scores.
struct ScoreVector {
  std::vector<double> scores;
  std::size_t size() const noexcept { return scores.size(); }
  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

struct FusedScores {
  ScoreVector scores;  // L1-normalized
  bool degenerate = false;  // product was all zero; scores are uniform
};

struct Prediction {
  std::string sequence_id;
  int label = 0;
  double confidence = 0.0;
  bool degenerate = false;
};

struct ClassAccuracy {
  int label = 0;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::size_t n = 0;
  std::size_t correct = 0;
  double recognition_rate = 0.0;
  std::vector<ClassAccuracy> per_class;  // only labels that occur in the truths
};

/// Element-wise product, then L1 normalization. An all-zero product yields the
/// uniform vector with `degenerate` set. Throws std::invalid_argument on length
/// mismatch or negative entries.
FusedScores pair_fuse(const ScoreVector& a, const ScoreVector& b);

/// Product of the three per-kind vectors, L1-normalized; label is the argmax
/// (lowest index on ties), confidence the max normalized score.
Prediction multi_fuse(const ScoreVector& ddi, const ScoreVector& ddni, const ScoreVector& ddmni);

/// r = (1 / n) * sum_i [predicted_i == truth_i].
EvalReport recognition_rate(std::span<const Prediction> predictions, std::span<const int> truths);

/// Nearest-centroid stand-in for the per-representation classifiers.
struct CentroidModel {
  int class_count = 0;
  int downsample = 0;
  /// (kind, direction) -> class -> downsample * downsample * 3 mean vector.
  std::map<std::pair<ImageKind, Direction>, std::vector<std::vector<double>>> centroids;
  /// (kind, direction) -> Gaussian kernel width (median inter-centroid distance).
  std::map<std::pair<ImageKind, Direction>, double> sigma;
};

struct LabeledRepresentation {
  RepresentationSet images;
  int label = 0;
};

/// Area-average resize to size x size, channel-major output.
std::vector<double> downsample_image(const DynamicImage& image, int size);

/// Throws DataError when some class in [0, class_count) has no sample.
CentroidModel train_centroids(std::span<const LabeledRepresentation> train_set, int class_count,
                              int downsample);

/// score_c = exp(-|x - centroid_c|^2 / (2 sigma^2)), floored at the smallest
/// normal double so every entry stays strictly positive.
ScoreVector score(const CentroidModel& model, const DynamicImage& image);

/// Scores for all six images, pair-fused per kind and multi-fused.
struct Classification {
  std::map<std::pair<ImageKind, Direction>, ScoreVector> raw;
  std::map<ImageKind, FusedScores> pair_fused;
  Prediction prediction;
};
Classification classify(const CentroidModel& model, const RepresentationSet& images);

/// argmax with lowest-index tie breaking.
int argmax(const ScoreVector& scores);

}  // namespace dynapool
