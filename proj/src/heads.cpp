#include "liftmatch/heads.hpp"

namespace liftmatch {

Tensor keypoint_head(const Tensor& fused, const NetWeights& w) {
  if (fused.channels != 64) throw std::invalid_argument("keypoint_head: fused map must have 64 channels");
  return conv2d(fused, w.kpt);
}

Tensor scores_from_logits(const Tensor& logits, int out_h, int out_w) {
  if (logits.channels != 65) throw std::invalid_argument("scores_from_logits: expected 65 channels");
  if (out_h > logits.height * 8 || out_w > logits.width * 8)
    throw std::invalid_argument("scores_from_logits: output dims exceed 8x the logit grid");
  Tensor soft = channel_softmax(logits);
  Tensor scores(out_h, out_w, 1);
  for (int y = 0; y < out_h; ++y) {
    int gy = y / 8;
    int by = y % 8;
    for (int x = 0; x < out_w; ++x) {
      int gx = x / 8;
      int bx = x % 8;
      scores.at(y, x, 0) = soft.at(gy, gx, by * 8 + bx);
    }
  }
  return scores;
}

Tensor normal_head(const Tensor& fused, const NetWeights& w, int out_h, int out_w) {
  if (fused.channels != 64) throw std::invalid_argument("normal_head: fused map must have 64 channels");
  Tensor raw = bilinear_resize(conv2d(fused, w.nrm), fused.height * 8, fused.width * 8);
  Tensor out(out_h, out_w, 3);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) out.pixel(y, x) = raw.pixel(y, x);
  out.data = l2_normalize(std::move(out.data));
  return out;
}

MatXf descriptor_at(const Tensor& fused, const MatXf& xy) {
  if (xy.rows() == 0) return MatXf(0, fused.channels);
  return l2_normalize(grid_sample(fused, xy, 8.0));
}

}  // namespace liftmatch
