#include "liftmatch/normals.hpp"

#include <sstream>

namespace liftmatch {

GradientPair depth_gradients(const DepthMap& z) {
  if (z.height < 3 || z.width < 3)
    throw std::invalid_argument("depth_gradients: need at least 3x3 depth");
  if (z.channels != 1) throw std::invalid_argument("depth_gradients: depth must be single-channel");
  const int h = z.height, w = z.width;
  GradientPair g;
  g.du.resize(h, w);
  g.dv.resize(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (u == 0)
        g.du(v, u) = 2.0 * (z.at(v, 1, 0) - z.at(v, 0, 0));
      else if (u == w - 1)
        g.du(v, u) = 2.0 * (z.at(v, w - 1, 0) - z.at(v, w - 2, 0));
      else
        g.du(v, u) = z.at(v, u + 1, 0) - z.at(v, u - 1, 0);
      if (v == 0)
        g.dv(v, u) = 2.0 * (z.at(1, u, 0) - z.at(0, u, 0));
      else if (v == h - 1)
        g.dv(v, u) = 2.0 * (z.at(h - 1, u, 0) - z.at(h - 2, u, 0));
      else
        g.dv(v, u) = z.at(v + 1, u, 0) - z.at(v - 1, u, 0);
    }
  }
  return g;
}

Tensor normals_from_depth(const DepthMap& z) {
  GradientPair g = depth_gradients(z);
  Tensor n(z.height, z.width, 3);
  for (int v = 0; v < z.height; ++v) {
    for (int u = 0; u < z.width; ++u) {
      double du = g.du(v, u), dv = g.dv(v, u);
      double inv = 1.0 / std::sqrt(du * du + dv * dv + 1.0);
      n.at(v, u, 0) = float(-du * inv);
      n.at(v, u, 1) = float(-dv * inv);
      n.at(v, u, 2) = float(inv);
    }
  }
  return n;
}

void validate_depth(const DepthMap& z) {
  for (int v = 0; v < z.height; ++v) {
    for (int u = 0; u < z.width; ++u) {
      double d = z.at(v, u, 0);
      if (!(d > 0.0) || !std::isfinite(d)) {
        std::ostringstream msg;
        msg << "depth map invalid at pixel (" << u << ", " << v << "): value " << d;
        throw DataError(msg.str());
      }
    }
  }
}

}  // namespace liftmatch
