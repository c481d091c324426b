#include "dynapool/representations.hpp"

#include <array>
#include <functional>
#include <stdexcept>

namespace dynapool {

namespace {

using FeatureBuilder = std::function<std::vector<FeatureVector>(const DepthSequence&)>;

FeatureVector normal_features(const NormalImage& normals) {
  const std::array<Plane, 3> planes = {normals.nx, normals.ny, normals.nz};
  return featurize(planes);
}

// Each direction runs the whole chain on its own frame order.
DynamicImage pooled_image(const DepthSequence& ordered, const PoolingConfig& pooling,
                          const FeatureBuilder& features, int channels, ImageKind kind,
                          Direction direction) {
  PoolingConfig forward = pooling;
  forward.direction = Direction::forward;
  const auto phi = features(ordered);
  const PoolingResult pooled = pool_features(phi, forward);
  return to_image(pooled.params, ordered.width(), ordered.height(), channels, kind, direction);
}

ImagePair bidirectional(const DepthSequence& sequence, const PoolingConfig& pooling,
                        const FeatureBuilder& features, int channels, ImageKind kind) {
  pooling.validate();
  return {pooled_image(sequence, pooling, features, channels, kind, Direction::forward),
          pooled_image(sequence.reversed(), pooling, features, channels, kind, Direction::backward)};
}

}  // namespace

void RepresentationConfig::validate() const {
  pooling.validate();
  histogram.validate();
  gmm.validate();
}

const DynamicImage& RepresentationSet::get(ImageKind kind, Direction direction) const {
  const bool fwd = direction == Direction::forward;
  switch (kind) {
    case ImageKind::ddi: return fwd ? ddi_fwd : ddi_bwd;
    case ImageKind::ddni: return fwd ? ddni_fwd : ddni_bwd;
    case ImageKind::ddmni: return fwd ? ddmni_fwd : ddmni_bwd;
  }
  throw std::invalid_argument("unknown image kind");
}

ImagePair build_ddi(const DepthSequence& sequence, const PoolingConfig& pooling) {
  const DepthRange range = default_range(sequence);
  auto features = [range](const DepthSequence& seq) {
    std::vector<FeatureVector> phi;
    phi.reserve(seq.size());
    for (const auto& frame : seq.frames()) phi.push_back(featurize(normalize_depth(frame, range)));
    return phi;
  };
  return bidirectional(sequence, pooling, features, 1, ImageKind::ddi);
}

ImagePair build_ddni(const DepthSequence& sequence, const PoolingConfig& pooling,
                     const HistogramConfig& histogram) {
  histogram.validate();
  const DepthRange range = default_range(sequence);
  auto features = [range, histogram](const DepthSequence& seq) {
    const BackgroundRemoval removal = remove_background(seq, histogram, range);
    std::vector<FeatureVector> phi;
    phi.reserve(seq.size());
    for (const auto& frame : removal.sequence.frames()) {
      phi.push_back(normal_features(compute_normals(frame, range)));
    }
    return phi;
  };
  return bidirectional(sequence, pooling, features, 3, ImageKind::ddni);
}

ImagePair build_ddmni(const DepthSequence& sequence, const PoolingConfig& pooling,
                      const GmmConfig& gmm) {
  gmm.validate();
  const DepthRange range = default_range(sequence);
  auto features = [range, gmm](const DepthSequence& seq) {
    const auto masks = gmm_foreground(seq, gmm, range);
    std::vector<FeatureVector> phi;
    phi.reserve(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
      phi.push_back(normal_features(compute_normals(apply_mask(seq.frames()[t], masks[t]), range)));
    }
    return phi;
  };
  return bidirectional(sequence, pooling, features, 3, ImageKind::ddmni);
}

RepresentationSet build_all(const DepthSequence& sequence, const RepresentationConfig& config) {
  config.validate();
  auto ddi = build_ddi(sequence, config.pooling);
  auto ddni = build_ddni(sequence, config.pooling, config.histogram);
  auto ddmni = build_ddmni(sequence, config.pooling, config.gmm);
  return {sequence.id(),
          std::move(ddi.forward),   std::move(ddi.backward),
          std::move(ddni.forward),  std::move(ddni.backward),
          std::move(ddmni.forward), std::move(ddmni.backward)};
}

}  // namespace dynapool
