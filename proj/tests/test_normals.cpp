#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "liftmatch/normals.hpp"

using namespace liftmatch;

namespace {

DepthMap depth_from(const std::function<double(int, int)>& f, int h, int w) {
  DepthMap z(h, w, 1);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) z.at(v, u, 0) = f(u, v);
  return z;
}

}  // namespace

TEST_CASE("depth_gradients of a constant field is zero") {
  DepthMap z = depth_from([](int, int) { return 3.5; }, 6, 7);
  GradientPair g = depth_gradients(z);
  CHECK(g.du.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.dv.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("depth_gradients of linear ramps carry the un-halved convention") {
  DepthMap z = depth_from([](int u, int) { return 10.0 + double(u); }, 5, 6);
  GradientPair g = depth_gradients(z);
  // interior: Z(u+1) - Z(u-1) = 2, borders doubled one-sided also 2
  CHECK((g.du.array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK(g.dv.cwiseAbs().maxCoeff() == 0.0);

  DepthMap z2 = depth_from([](int u, int v) { return 20.0 + u + 2.0 * v; }, 5, 6);
  GradientPair g2 = depth_gradients(z2);
  CHECK((g2.du.array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK((g2.dv.array() - 4.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("depth_gradients rejects tiny inputs") {
  DepthMap z(2, 5, 1);
  CHECK_THROWS_AS(depth_gradients(z), std::invalid_argument);
}

TEST_CASE("normals_from_depth closed forms") {
  DepthMap flat = depth_from([](int, int) { return 1.0; }, 5, 5);
  Tensor n = normals_from_depth(flat);
  CHECK(n.at(2, 2, 0) == 0.0f);
  CHECK(n.at(2, 2, 1) == 0.0f);
  CHECK(n.at(2, 2, 2) == 1.0f);

  // Z = u/2: central difference 1, normal (-1, 0, 1)/sqrt(2)
  DepthMap ramp = depth_from([](int u, int) { return 5.0 + 0.5 * u; }, 5, 8);
  Tensor nr = normals_from_depth(ramp);
  float inv_sqrt2 = float(1.0 / std::sqrt(2.0));
  CHECK(nr.at(2, 3, 0) == doctest::Approx(-inv_sqrt2));
  CHECK(nr.at(2, 3, 1) == doctest::Approx(0.0f));
  CHECK(nr.at(2, 3, 2) == doctest::Approx(inv_sqrt2));

  // Z = u/2 + v/2: normal (-1, -1, 1)/sqrt(3)
  DepthMap plane = depth_from([](int u, int v) { return 9.0 + 0.5 * u + 0.5 * v; }, 6, 6);
  Tensor np = normals_from_depth(plane);
  float inv_sqrt3 = float(1.0 / std::sqrt(3.0));
  CHECK(np.at(3, 3, 0) == doctest::Approx(-inv_sqrt3));
  CHECK(np.at(3, 3, 1) == doctest::Approx(-inv_sqrt3));
  CHECK(np.at(3, 3, 2) == doctest::Approx(inv_sqrt3));
}

TEST_CASE("normals are unit with strictly positive z everywhere") {
  SplitMix64 rng(4);
  DepthMap z = depth_from(
      [&rng](int u, int v) { return 4.0 + 0.3 * u - 0.2 * v + rng.uniform(0.0, 0.5); }, 12, 9);
  Tensor n = normals_from_depth(z);
  for (int p = 0; p < n.pixels(); ++p) {
    CHECK(n.data.row(p).norm() == doctest::Approx(1.0f).epsilon(1e-6));
    CHECK(n.data(p, 2) > 0.0f);
  }
}

TEST_CASE("planar depth gives spatially constant normals") {
  DepthMap z = depth_from([](int u, int v) { return 7.0 - 0.25 * u + 0.4 * v; }, 10, 10);
  Tensor n = normals_from_depth(z);
  for (int p = 1; p < n.pixels(); ++p) {
    CHECK(n.data(p, 0) == doctest::Approx(n.data(0, 0)).epsilon(1e-7));
    CHECK(n.data(p, 1) == doctest::Approx(n.data(0, 1)).epsilon(1e-7));
  }
}

TEST_CASE("normals_from_depth is invariant to constant depth offsets") {
  SplitMix64 rng(6);
  DepthMap z = depth_from(
      [&rng](int u, int v) { return 2.0 + 0.1 * u + 0.05 * v + 0.2 * rng.uniform(); }, 9, 9);
  Tensor base = normals_from_depth(z);
  for (double c : {1.0, 64.0, 1000.0}) {
    DepthMap shifted = z;
    shifted.data.array() += c;
    Tensor n = normals_from_depth(shifted);
    // exact: double-precision gradients keep the offset noise far below
    // the float32 rounding of the output normals
    CHECK(n.data == base.data);
  }
}

TEST_CASE("validate_depth names the first offending pixel") {
  DepthMap z = depth_from([](int, int) { return 1.0; }, 4, 4);
  z.at(2, 1, 0) = 0.0;
  CHECK_THROWS_WITH_AS(validate_depth(z), doctest::Contains("(1, 2)"), DataError);
  z.at(2, 1, 0) = -3.0;
  CHECK_THROWS_AS(validate_depth(z), DataError);
}
