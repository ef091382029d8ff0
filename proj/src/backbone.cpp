#include "liftmatch/backbone.hpp"

namespace liftmatch {

namespace {

constexpr int kBlockDepths[5] = {4, 8, 16, 32, 64};

ConvParams he_conv(int k, int cin, int cout, SplitMix64& rng) {
  ConvParams p;
  p.k = k;
  p.stride = 1;
  p.padding = (k - 1) / 2;
  p.kernel.resize(k * k * cin, cout);
  double limit = std::sqrt(6.0 / double(k * k * cin));
  for (Eigen::Index i = 0; i < p.kernel.rows(); ++i)
    for (Eigen::Index j = 0; j < p.kernel.cols(); ++j)
      p.kernel(i, j) = float(rng.uniform(-limit, limit));
  p.bias = VecXf::Zero(cout);
  return p;
}

void check_conv(const ConvParams& p, int k, int cin, int cout, const char* name) {
  if (p.k != k || int(p.kernel.rows()) != k * k * cin || p.out_channels() != cout ||
      int(p.bias.size()) != cout)
    throw std::invalid_argument(std::string("NetWeights: bad shape for ") + name);
}

}  // namespace

NetWeights NetWeights::he_init(std::uint64_t seed) {
  NetWeights w;
  int tensor_id = 0;
  auto next_rng = [&] { return SplitMix64::derive(seed, tensor_id++); };
  int cin = 3;
  for (int b = 0; b < 5; ++b) {
    SplitMix64 rng = next_rng();
    w.enc[b] = he_conv(3, cin, kBlockDepths[b], rng);
    cin = kBlockDepths[b];
  }
  SplitMix64 r3 = next_rng();
  w.fuse3 = he_conv(1, 16, 64, r3);
  SplitMix64 r4 = next_rng();
  w.fuse4 = he_conv(1, 32, 64, r4);
  SplitMix64 r5 = next_rng();
  w.fuse5 = he_conv(1, 64, 64, r5);
  SplitMix64 rk = next_rng();
  w.kpt = he_conv(1, 64, 65, rk);
  SplitMix64 rn = next_rng();
  w.nrm = he_conv(1, 64, 3, rn);
  return w;
}

void NetWeights::validate() const {
  int cin = 3;
  for (int b = 0; b < 5; ++b) {
    check_conv(enc[b], 3, cin, kBlockDepths[b], "encoder block");
    cin = kBlockDepths[b];
  }
  check_conv(fuse3, 1, 16, 64, "fuse3");
  check_conv(fuse4, 1, 32, 64, "fuse4");
  check_conv(fuse5, 1, 64, 64, "fuse5");
  check_conv(kpt, 1, 64, 65, "kpt");
  check_conv(nrm, 1, 64, 3, "nrm");
}

PaddedImage pad_to_32(const Tensor& image) {
  if (image.height < 1 || image.width < 1)
    throw std::invalid_argument("pad_to_32: empty image");
  int ph = (image.height + 31) / 32 * 32;
  int pw = (image.width + 31) / 32 * 32;
  PaddedImage out;
  out.orig_height = image.height;
  out.orig_width = image.width;
  if (ph == image.height && pw == image.width) {
    out.image = image;
    return out;
  }
  Tensor padded(ph, pw, image.channels);
  for (int y = 0; y < ph; ++y) {
    int sy = std::min(y, image.height - 1);
    for (int x = 0; x < pw; ++x) {
      int sx = std::min(x, image.width - 1);
      padded.pixel(y, x) = image.pixel(sy, sx);
    }
  }
  out.image = std::move(padded);
  return out;
}

PyramidFeatures encode(const Tensor& image, const NetWeights& w) {
  if (image.height % 32 != 0 || image.width % 32 != 0)
    throw std::invalid_argument("encode: image dims must be multiples of 32");
  if (image.channels != int(w.enc[0].in_channels()))
    throw std::invalid_argument("encode: image channel count does not match weights");
  PyramidFeatures pyr;
  Tensor x = image;
  for (int b = 0; b < 5; ++b) {
    x = maxpool2(relu(conv2d(x, w.enc[b])));
    if (b == 2) pyr.block3 = x;
    if (b == 3) pyr.block4 = x;
  }
  pyr.block5 = std::move(x);
  return pyr;
}

Tensor fuse(const PyramidFeatures& pyr, const NetWeights& w) {
  Tensor f3 = conv2d(pyr.block3, w.fuse3);
  Tensor f4 = bilinear_resize(conv2d(pyr.block4, w.fuse4), f3.height, f3.width);
  Tensor f5 = bilinear_resize(conv2d(pyr.block5, w.fuse5), f3.height, f3.width);
  f3.data += f4.data;
  f3.data += f5.data;
  return f3;
}

}  // namespace liftmatch
