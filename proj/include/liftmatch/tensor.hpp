#pragma once

#include "liftmatch/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace liftmatch {

/// Dense H x W x C grid stored row-major as an (H*W) x C matrix, so row
/// y*width + x holds the channel vector of pixel (x, y). The flat memory
/// layout is therefore (y*width + x)*channels + c.
template <typename Scalar>
struct TensorT {
  int height = 0;
  int width = 0;
  int channels = 0;
  MatX<Scalar> data;

  TensorT() = default;
  TensorT(int h, int w, int c)
      : height(h), width(w), channels(c), data(MatX<Scalar>::Zero(std::int64_t(h) * w, c)) {}

  static TensorT constant(int h, int w, int c, Scalar value) {
    TensorT t(h, w, c);
    t.data.setConstant(value);
    return t;
  }

  int pixels() const { return height * width; }
  int index(int y, int x) const { return y * width + x; }

  Scalar at(int y, int x, int c) const { return data(index(y, x), c); }
  Scalar& at(int y, int x, int c) { return data(index(y, x), c); }

  auto pixel(int y, int x) { return data.row(index(y, x)); }
  auto pixel(int y, int x) const { return data.row(index(y, x)); }

  bool all_finite() const { return data.allFinite(); }

  template <typename T>
  TensorT<T> cast() const {
    TensorT<T> out;
    out.height = height;
    out.width = width;
    out.channels = channels;
    out.data = data.template cast<T>();
    return out;
  }
};

using Tensor = TensorT<float>;

/// 2D convolution parameters. The kernel is stored as a (k*k*cin) x cout
/// matrix with row index (ky*k + kx)*cin + ci.
template <typename Scalar>
struct ConvParamsT {
  int k = 3;
  int stride = 1;
  int padding = 0;  // zero padding, all four sides
  MatX<Scalar> kernel;
  VecX<Scalar> bias;

  int in_channels() const { return int(kernel.rows()) / (k * k); }
  int out_channels() const { return int(kernel.cols()); }
};

using ConvParams = ConvParamsT<float>;

template <typename Scalar>
TensorT<Scalar> conv2d(const TensorT<Scalar>& in, const ConvParamsT<Scalar>& p) {
  if (in.height <= 0 || in.width <= 0) throw std::invalid_argument("conv2d: empty input");
  if (p.k != 1 && p.k != 3) throw std::invalid_argument("conv2d: kernel size must be 1 or 3");
  if (p.stride != 1 && p.stride != 2) throw std::invalid_argument("conv2d: stride must be 1 or 2");
  const int cin = in.channels;
  const int cout = p.out_channels();
  if (int(p.kernel.rows()) != p.k * p.k * cin)
    throw std::invalid_argument("conv2d: kernel/input channel mismatch");
  if (int(p.bias.size()) != cout) throw std::invalid_argument("conv2d: bias size mismatch");

  const int oh = (in.height + 2 * p.padding - p.k) / p.stride + 1;
  const int ow = (in.width + 2 * p.padding - p.k) / p.stride + 1;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: output would be empty");

  TensorT<Scalar> out(oh, ow, cout);
  parallel_rows(oh, [&](int y0, int y1) {
    for (int oy = y0; oy < y1; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        auto acc = out.pixel(oy, ox);
        acc = p.bias.transpose();
        const int iy0 = oy * p.stride - p.padding;
        const int ix0 = ox * p.stride - p.padding;
        for (int ky = 0; ky < p.k; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int kx = 0; kx < p.k; ++kx) {
            const int ix = ix0 + kx;
            if (ix < 0 || ix >= in.width) continue;
            acc.noalias() += in.pixel(iy, ix) * p.kernel.middleRows((ky * p.k + kx) * cin, cin);
          }
        }
      }
    }
  });
  return out;
}

template <typename Scalar>
TensorT<Scalar> relu(TensorT<Scalar> t) {
  t.data = t.data.cwiseMax(Scalar(0));
  return t;
}

/// 2x2 max pooling with stride 2. Input dims must be even.
template <typename Scalar>
TensorT<Scalar> maxpool2(const TensorT<Scalar>& in) {
  if (in.height % 2 != 0 || in.width % 2 != 0)
    throw std::invalid_argument("maxpool2: input dims must be even");
  TensorT<Scalar> out(in.height / 2, in.width / 2, in.channels);
  parallel_rows(out.height, [&](int y0, int y1) {
    for (int oy = y0; oy < y1; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        out.pixel(oy, ox) = in.pixel(2 * oy, 2 * ox)
                                .cwiseMax(in.pixel(2 * oy, 2 * ox + 1))
                                .cwiseMax(in.pixel(2 * oy + 1, 2 * ox))
                                .cwiseMax(in.pixel(2 * oy + 1, 2 * ox + 1));
      }
    }
  });
  return out;
}

/// Bilinear resize, align-corners=false: source coord of output index i is
/// (i + 0.5) * in/out - 0.5, clamped to the border.
template <typename Scalar>
TensorT<Scalar> bilinear_resize(const TensorT<Scalar>& in, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("bilinear_resize: empty output");
  if (in.height < 1 || in.width < 1) throw std::invalid_argument("bilinear_resize: empty input");
  TensorT<Scalar> out(out_h, out_w, in.channels);
  const double sy_scale = double(in.height) / out_h;
  const double sx_scale = double(in.width) / out_w;
  parallel_rows(out_h, [&](int y0, int y1) {
    for (int oy = y0; oy < y1; ++oy) {
      double sy = std::clamp((oy + 0.5) * sy_scale - 0.5, 0.0, double(in.height - 1));
      int iy0 = int(sy);
      int iy1 = std::min(iy0 + 1, in.height - 1);
      Scalar fy = Scalar(sy - iy0);
      for (int ox = 0; ox < out_w; ++ox) {
        double sx = std::clamp((ox + 0.5) * sx_scale - 0.5, 0.0, double(in.width - 1));
        int ix0 = int(sx);
        int ix1 = std::min(ix0 + 1, in.width - 1);
        Scalar fx = Scalar(sx - ix0);
        // lerp form a + f*(b-a): exact on constant inputs
        auto top = in.pixel(iy0, ix0) + fx * (in.pixel(iy0, ix1) - in.pixel(iy0, ix0));
        auto bot = in.pixel(iy1, ix0) + fx * (in.pixel(iy1, ix1) - in.pixel(iy1, ix0));
        out.pixel(oy, ox) = top + fy * (bot - top);
      }
    }
  });
  return out;
}

/// Per-pixel softmax over channels, computed with max subtraction.
template <typename Scalar>
TensorT<Scalar> channel_softmax(const TensorT<Scalar>& in) {
  if (in.channels < 1) throw std::invalid_argument("channel_softmax: no channels");
  TensorT<Scalar> out = in;
  parallel_rows(in.pixels(), [&](int p0, int p1) {
    for (int p = p0; p < p1; ++p) {
      auto row = out.data.row(p);
      Scalar m = row.maxCoeff();
      row = (row.array() - m).exp();
      row /= row.sum();
    }
  });
  return out;
}

/// Row-wise L2 normalization of an N x D matrix. Rows with norm below 1e-12
/// map to the fixed unit vector e1 so downstream cosine math stays total.
template <typename Scalar>
MatX<Scalar> l2_normalize(MatX<Scalar> rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Scalar n = rows.row(i).norm();
    if (n < Scalar(1e-12)) {
      rows.row(i).setZero();
      rows(i, 0) = Scalar(1);
    } else {
      rows.row(i) /= n;
    }
  }
  return rows;
}

/// Bilinear sampling of `map` at full-resolution coordinates `xy` (N x 2,
/// columns x then y). For a map at 1/scale resolution the source coordinate
/// is (p + 0.5)/scale - 0.5, which composes exactly with bilinear_resize's
/// align-corners=false convention; out-of-range coordinates clamp to the
/// border.
template <typename Scalar>
MatX<Scalar> grid_sample(const TensorT<Scalar>& map, const MatX<Scalar>& xy, double scale = 1.0) {
  if (xy.cols() != 2) throw std::invalid_argument("grid_sample: xy must be N x 2");
  MatX<Scalar> out(xy.rows(), map.channels);
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    double sx = std::clamp((double(xy(i, 0)) + 0.5) / scale - 0.5, 0.0, double(map.width - 1));
    double sy = std::clamp((double(xy(i, 1)) + 0.5) / scale - 0.5, 0.0, double(map.height - 1));
    int x0 = int(sx), y0 = int(sy);
    int x1 = std::min(x0 + 1, map.width - 1);
    int y1 = std::min(y0 + 1, map.height - 1);
    Scalar fx = Scalar(sx - x0), fy = Scalar(sy - y0);
    // lerp form a + f*(b-a): exact on constant maps
    auto top = map.pixel(y0, x0) + fx * (map.pixel(y0, x1) - map.pixel(y0, x0));
    auto bot = map.pixel(y1, x0) + fx * (map.pixel(y1, x1) - map.pixel(y1, x0));
    out.row(i) = top + fy * (bot - top);
  }
  return out;
}

/// One affine layer of an MLP: x -> x*w + b.
template <typename Scalar>
struct DenseLayer {
  MatX<Scalar> w;  // Din x Dout
  VecX<Scalar> b;  // Dout
};

/// Affine + ReLU for every layer except the last, which stays affine.
template <typename Scalar>
MatX<Scalar> mlp_forward(const MatX<Scalar>& x, const std::vector<DenseLayer<Scalar>>& layers) {
  if (layers.empty()) throw std::invalid_argument("mlp_forward: no layers");
  MatX<Scalar> h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (h.cols() != layers[l].w.rows() || layers[l].w.cols() != layers[l].b.size())
      throw std::invalid_argument("mlp_forward: layer dimension mismatch");
    h = (h * layers[l].w).rowwise() + layers[l].b.transpose();
    if (l + 1 < layers.size()) h = h.cwiseMax(Scalar(0));
  }
  return h;
}

}  // namespace liftmatch
