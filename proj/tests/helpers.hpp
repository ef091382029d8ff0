#pragma once

#include "liftmatch/lifting.hpp"
#include "liftmatch/tensor.hpp"

#include <filesystem>
#include <string>

namespace liftmatch::testing {

inline Tensor random_tensor(std::uint64_t seed, int h, int w, int c, float lo = -1.0f,
                            float hi = 1.0f) {
  SplitMix64 rng(seed);
  Tensor t(h, w, c);
  for (Eigen::Index i = 0; i < t.data.rows(); ++i)
    for (Eigen::Index j = 0; j < t.data.cols(); ++j) t.data(i, j) = float(rng.uniform(lo, hi));
  return t;
}

template <typename S>
MatX<S> random_matrix(std::uint64_t seed, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  SplitMix64 rng(seed);
  MatX<S> m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = S(rng.uniform(lo, hi));
  return m;
}

template <typename S>
MatX<S> random_unit_rows(std::uint64_t seed, int rows, int cols) {
  SplitMix64 rng(seed);
  MatX<S> m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = S(rng.normal());
    m.row(i).normalize();
  }
  return m;
}

/// Scalar reference convolution: plain O(HW k^2 Cin Cout) loops, no Eigen
/// products, independent of the production kernel.
inline Tensor naive_conv2d(const Tensor& in, const ConvParams& p) {
  const int cin = in.channels, cout = p.out_channels();
  const int oh = (in.height + 2 * p.padding - p.k) / p.stride + 1;
  const int ow = (in.width + 2 * p.padding - p.k) / p.stride + 1;
  Tensor out(oh, ow, cout);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int co = 0; co < cout; ++co) {
        double acc = double(p.bias(co));
        for (int ky = 0; ky < p.k; ++ky)
          for (int kx = 0; kx < p.k; ++kx) {
            int iy = oy * p.stride - p.padding + ky;
            int ix = ox * p.stride - p.padding + kx;
            if (iy < 0 || iy >= in.height || ix < 0 || ix >= in.width) continue;
            for (int ci = 0; ci < cin; ++ci)
              acc += double(in.at(iy, ix, ci)) * double(p.kernel((ky * p.k + kx) * cin + ci, co));
          }
        out.at(oy, ox, co) = float(acc);
      }
  return out;
}

/// Two-pass reference for the linear self-attention layer: explicit
/// per-channel softmax over the keypoint axis, then the weighted sum.
template <typename S>
MatX<S> naive_attention(const MatX<S>& m, const MatX<S>& wq, const MatX<S>& wk,
                        const MatX<S>& wv) {
  const Eigen::Index n = m.rows(), d = m.cols();
  MatX<S> q(n, d), k(n, d), v(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < d; ++c) {
      S sq = 0, sk = 0, sv = 0;
      for (Eigen::Index e = 0; e < d; ++e) {
        sq += m(i, e) * wq(e, c);
        sk += m(i, e) * wk(e, c);
        sv += m(i, e) * wv(e, c);
      }
      q(i, c) = sq;
      k(i, c) = sk;
      v(i, c) = sv;
    }
  MatX<S> out(n, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    S mx = k(0, c);
    for (Eigen::Index j = 1; j < n; ++j) mx = std::max(mx, k(j, c));
    S denom = 0;
    for (Eigen::Index j = 0; j < n; ++j) denom += std::exp(k(j, c) - mx);
    S context = 0;
    for (Eigen::Index j = 0; j < n; ++j) context += std::exp(k(j, c) - mx) / denom * v(j, c);
    for (Eigen::Index i = 0; i < n; ++i) out(i, c) = q(i, c) * context + m(i, c);
  }
  return out;
}

/// Central finite difference of a scalar function at x along coordinate i.
template <typename F>
double central_difference(F&& f, VecXd& x, Eigen::Index i, double eps = 1e-5) {
  double orig = x(i);
  x(i) = orig + eps;
  double fp = f();
  x(i) = orig - eps;
  double fm = f();
  x(i) = orig;
  return (fp - fm) / (2.0 * eps);
}

inline bool grad_close(double analytic, double numeric, double tol = 1e-4) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom < tol || std::abs(analytic - numeric) < 1e-9;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / ("liftmatch_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace liftmatch::testing
