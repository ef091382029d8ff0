#pragma once

#include "liftmatch/backbone.hpp"

namespace liftmatch {

/// 1x1 conv from the fused 64-channel map to 65 keypoint logits per cell.
Tensor keypoint_head(const Tensor& fused, const NetWeights& w);

/// Channel softmax over the 65 logits, dustbin dropped, remaining 64
/// channels of each cell unshuffled into its 8x8 pixel block (channel c goes
/// to block offset (c/8, c%8)), then cropped to out_h x out_w.
Tensor scores_from_logits(const Tensor& logits, int out_h, int out_w);

/// 1x1 conv 64 -> 3, bilinear upsample by 8, crop to out_h x out_w, and
/// per-pixel L2 normalization.
Tensor normal_head(const Tensor& fused, const NetWeights& w, int out_h, int out_w);

/// Samples the fused map at full-resolution points (N x 2, x then y) with
/// the 1/8 scale convention and L2-normalizes each 64-d row. The dense
/// W x H x 64 descriptor map is never materialized; sampling then
/// normalizing is the same pipeline evaluated lazily.
MatXf descriptor_at(const Tensor& fused, const MatXf& xy);

}  // namespace liftmatch
