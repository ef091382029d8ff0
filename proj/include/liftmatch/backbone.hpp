#pragma once

#include "liftmatch/tensor.hpp"

#include <array>
#include <cstdint>

namespace liftmatch {

/// Parameters of the shared encoder, the multi-scale fusion block, and the
/// two 1x1 heads. Block output depths are fixed at {4, 8, 16, 32, 64}.
struct NetWeights {
  std::array<ConvParams, 5> enc;  // 3x3, stride 1, pad 1, followed by ReLU + maxpool
  ConvParams fuse3, fuse4, fuse5;  // 1x1 projections to 64 channels
  ConvParams kpt;                  // 1x1, 64 -> 65 (64 cell positions + dustbin)
  ConvParams nrm;                  // 1x1, 64 -> 3

  /// He-uniform fan-in initialization (biases zero), deterministic in `seed`.
  static NetWeights he_init(std::uint64_t seed);

  void validate() const;  // throws std::invalid_argument on shape violations
};

struct PyramidFeatures {
  Tensor block3;  // H/8  x W/8  x 16
  Tensor block4;  // H/16 x W/16 x 32
  Tensor block5;  // H/32 x W/32 x 64
};

struct PaddedImage {
  Tensor image;
  int orig_height = 0;
  int orig_width = 0;
};

/// Replicate-pads right/bottom so both dims are multiples of 32. Original
/// dims are retained so outputs can be cropped back.
PaddedImage pad_to_32(const Tensor& image);

/// Runs the 5 encoder blocks (conv3x3 -> ReLU -> maxpool2 each) and returns
/// blocks 3-5; blocks 1-2 only feed the chain.
PyramidFeatures encode(const Tensor& image, const NetWeights& w);

/// 1x1-projects each pyramid level to 64 channels, resizes blocks 4/5 to
/// block3's resolution, and sums: the W/8 x H/8 x 64 shared map.
Tensor fuse(const PyramidFeatures& pyr, const NetWeights& w);

}  // namespace liftmatch
