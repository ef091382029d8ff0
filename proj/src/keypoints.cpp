#include "liftmatch/keypoints.hpp"

#include "liftmatch/heads.hpp"

#include <algorithm>

namespace liftmatch {

std::vector<Keypoint> nms_topk(const Tensor& scores, int radius, float threshold, int k) {
  if (radius < 1) throw std::invalid_argument("nms_topk: radius must be >= 1");
  if (k < 1) throw std::invalid_argument("nms_topk: k must be >= 1");
  if (scores.channels != 1) throw std::invalid_argument("nms_topk: score map must be single-channel");
  const int h = scores.height, w = scores.width;

  struct Candidate {
    float score;
    int idx;
  };
  std::vector<Candidate> cands;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float s = scores.at(y, x, 0);
      if (s < threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          if (scores.at(ny, nx, 0) >= s) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({s, y * w + x});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.idx < b.idx;
  });

  std::vector<char> occupied(std::size_t(h) * w, 0);
  std::vector<Keypoint> out;
  out.reserve(std::min<std::size_t>(cands.size(), std::size_t(k)));
  for (const Candidate& c : cands) {
    int cy = c.idx / w, cx = c.idx % w;
    bool suppressed = false;
    for (int dy = -radius; dy <= radius && !suppressed; ++dy) {
      int ny = cy + dy;
      if (ny < 0 || ny >= h) continue;
      for (int dx = -radius; dx <= radius; ++dx) {
        int nx = cx + dx;
        if (nx < 0 || nx >= w) continue;
        if (occupied[std::size_t(ny) * w + nx]) {
          suppressed = true;
          break;
        }
      }
    }
    if (suppressed) continue;
    occupied[std::size_t(cy) * w + cx] = 1;
    out.push_back({float(cx), float(cy), c.score});
    if (int(out.size()) == k) break;
  }
  return out;
}

FeatureBundle gather_features(const Tensor& fused, const Tensor& normal_map,
                              const std::vector<Keypoint>& points) {
  FeatureBundle b;
  b.keypoints = points;
  if (points.empty()) {
    b.descriptors.resize(0, 64);
    b.normals.resize(0, 3);
    return b;
  }
  MatXf xy = b.positions();
  b.descriptors = descriptor_at(fused, xy);
  b.normals = l2_normalize(grid_sample(normal_map, xy, 1.0));
  return b;
}

}  // namespace liftmatch
