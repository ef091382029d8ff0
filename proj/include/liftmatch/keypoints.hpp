#pragma once

#include "liftmatch/tensor.hpp"

#include <vector>

namespace liftmatch {

struct Keypoint {
  float x = 0;  // column
  float y = 0;  // row
  float score = 0;
};

struct FeatureBundle {
  std::vector<Keypoint> keypoints;
  MatXf descriptors;  // N x 64, unit rows
  MatXf normals;      // N x 3, unit rows

  int size() const { return int(keypoints.size()); }

  MatXf positions() const {
    MatXf xy(keypoints.size(), 2);
    for (std::size_t i = 0; i < keypoints.size(); ++i) {
      xy(Eigen::Index(i), 0) = keypoints[i].x;
      xy(Eigen::Index(i), 1) = keypoints[i].y;
    }
    return xy;
  }
};

/// NMS + top-K. A pixel is a candidate iff its score is >= threshold and
/// strictly greater than all of its 8 neighbors (flat regions yield no
/// candidates). Candidates sorted by (score desc, row-major index asc) are
/// accepted greedily, rejecting any within Chebyshev distance <= radius of
/// an accepted point, then truncated to k.
std::vector<Keypoint> nms_topk(const Tensor& scores, int radius, float threshold, int k);

/// Samples descriptors from the 1/8-resolution fused map and normals from
/// the full-resolution normal map (re-normalized after interpolation).
/// Output order matches the input point order.
FeatureBundle gather_features(const Tensor& fused, const Tensor& normal_map,
                              const std::vector<Keypoint>& points);

}  // namespace liftmatch
