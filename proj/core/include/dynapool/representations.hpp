#pragma once

#include <string>

#include "dynapool/depth_io.hpp"
#include "dynapool/preprocessing.hpp"
#include "dynapool/rank_pooling.hpp"

namespace dynapool {

struct ImagePair {
  DynamicImage forward;
  DynamicImage backward;
};

struct RepresentationConfig {
  PoolingConfig pooling;
  HistogramConfig histogram;
  GmmConfig gmm;

  void validate() const;
};

/// The six dynamic images of one clip.
struct RepresentationSet {
  std::string sequence_id;
  DynamicImage ddi_fwd;
  DynamicImage ddi_bwd;
  DynamicImage ddni_fwd;
  DynamicImage ddni_bwd;
  DynamicImage ddmni_fwd;
  DynamicImage ddmni_bwd;

  const DynamicImage& get(ImageKind kind, Direction direction) const;

  friend bool operator==(const RepresentationSet&, const RepresentationSet&) = default;
};

// Every backward image is the forward image of sequence.reversed(), relabelled.

/// Rank pooling over normalized raw depth.
ImagePair build_ddi(const DepthSequence& sequence, const PoolingConfig& pooling);

/// Last-peak background removal, then per-frame normals, then pooling over the
/// concatenated (N_x, N_y, N_z) planes.
ImagePair build_ddni(const DepthSequence& sequence, const PoolingConfig& pooling,
                     const HistogramConfig& histogram);

/// GMM moving foreground, then normals of the masked depth, then pooling.
ImagePair build_ddmni(const DepthSequence& sequence, const PoolingConfig& pooling,
                      const GmmConfig& gmm);

RepresentationSet build_all(const DepthSequence& sequence, const RepresentationConfig& config);

}  // namespace dynapool
