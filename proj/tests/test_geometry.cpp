#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "liftmatch/geometry.hpp"
#include "liftmatch/synthgen.hpp"

#include <limits>

using namespace liftmatch;
using liftmatch::testing::random_unit_rows;

namespace {

Homography random_projective(std::uint64_t seed, double scale = 1e-3) {
  SplitMix64 rng(seed);
  Homography h;
  h << 1 + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-20, 20),
      rng.uniform(-0.2, 0.2), 1 + rng.uniform(-0.2, 0.2), rng.uniform(-20, 20),
      rng.uniform(-scale, scale), rng.uniform(-scale, scale), 1.0;
  return h;
}

MatXd apply_h(const Homography& h, const MatXd& pts) {
  MatXd out(pts.rows(), 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Eigen::Vector3d q = h * Eigen::Vector3d(pts(i, 0), pts(i, 1), 1.0);
    out.row(i) = q.hnormalized().transpose();
  }
  return out;
}

}  // namespace

TEST_CASE("mnn_match identity on orthonormal descriptors") {
  MatXf eye = MatXf::Identity(5, 64);
  MatchSet ms = mnn_match(eye, eye);
  REQUIRE(ms.matches.size() == 5);
  for (const Match& m : ms.matches) {
    CHECK(m.a == m.b);
    CHECK(m.similarity == doctest::Approx(1.0f));
  }
}

TEST_CASE("mnn_match tie goes to the lower index") {
  // rows 0 and 1 of A identical; B row 0 equidistant to both
  MatXf da(2, 3);
  da << 1, 0, 0, 1, 0, 0;
  MatXf db(1, 3);
  db << 1, 0, 0;
  MatchSet ms = mnn_match(da, db);
  REQUIRE(ms.matches.size() == 1);
  CHECK(ms.matches[0].a == 0);
  CHECK(ms.matches[0].b == 0);
}

TEST_CASE("mnn_match min_sim filters everything when too high") {
  MatXf da = random_unit_rows<float>(3, 6, 64);
  MatXf db = random_unit_rows<float>(4, 6, 64);
  MatchSet ms = mnn_match(da, db, 1.1f);
  CHECK(ms.matches.empty());
}

TEST_CASE("mnn_match is symmetric under role swap") {
  MatXf da = random_unit_rows<float>(5, 12, 64);
  MatXf db = random_unit_rows<float>(6, 9, 64);
  MatchSet ab = mnn_match(da, db);
  MatchSet ba = mnn_match(db, da);
  REQUIRE(ab.matches.size() == ba.matches.size());
  for (const Match& m : ab.matches) {
    bool found = false;
    for (const Match& r : ba.matches)
      if (r.a == m.b && r.b == m.a) found = true;
    CHECK(found);
  }
}

TEST_CASE("homography_dlt recovers identity and translation exactly") {
  MatXd pts(4, 2);
  pts << 0, 0, 10, 0, 10, 10, 0, 10;
  Homography hi = homography_dlt(pts, pts);
  CHECK((hi - Homography::Identity()).cwiseAbs().maxCoeff() < 1e-10);

  MatXd dst = pts;
  dst.col(0).array() += 2.0;
  dst.col(1).array() += 3.0;
  Homography ht = homography_dlt(pts, dst);
  Homography expect;
  expect << 1, 0, 2, 0, 1, 3, 0, 0, 1;
  CHECK((ht - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("homography_dlt round-trips a random projective map") {
  for (std::uint64_t trial = 0; trial < 8; ++trial) {
    Homography h = random_projective(trial + 11);
    SplitMix64 rng(trial + 50);
    MatXd src(12, 2);
    for (int i = 0; i < 12; ++i) src.row(i) << rng.uniform(0, 200), rng.uniform(0, 150);
    MatXd dst = apply_h(h, src);
    Homography got = homography_dlt(src, dst);
    CHECK((got - h).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("homography_dlt is invariant to similarity re-normalization of inputs") {
  Homography h = random_projective(91);
  SplitMix64 rng(92);
  MatXd src(10, 2);
  for (int i = 0; i < 10; ++i) src.row(i) << rng.uniform(0, 100), rng.uniform(0, 100);
  MatXd dst = apply_h(h, src);
  Homography base = homography_dlt(src, dst);

  // scale + shift both point sets; recovered H must be S_dst * H * S_src^-1
  double s = 3.5;
  Eigen::Vector2d off(40.0, -17.0);
  MatXd src2 = src * s;
  src2.rowwise() += off.transpose();
  MatXd dst2 = dst * s;
  dst2.rowwise() += off.transpose();
  Homography re = homography_dlt(src2, dst2);
  Eigen::Matrix3d sim;
  sim << s, 0, off.x(), 0, s, off.y(), 0, 0, 1;
  Homography expect = sim * base * sim.inverse();
  expect /= expect(2, 2);
  CHECK((re - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("homography_dlt rejects degenerate input") {
  MatXd src(4, 2), dst(4, 2);
  src << 0, 0, 1, 1, 2, 2, 3, 3;  // collinear
  dst << 0, 0, 1, 1, 2, 2, 3, 3;
  CHECK_THROWS_AS(homography_dlt(src, dst), EstimationError);
  MatXd three(3, 2);
  CHECK_THROWS_AS(homography_dlt(three, three), EstimationError);
}

TEST_CASE("ransac_homography noise-free consensus is total") {
  Homography h = random_projective(101);
  SplitMix64 rng(102);
  MatXd src(30, 2);
  for (int i = 0; i < 30; ++i) src.row(i) << rng.uniform(0, 256), rng.uniform(0, 256);
  MatXd dst = apply_h(h, src);
  RansacHomography r = ransac_homography(src, dst, 200, 3.0, 9);
  REQUIRE(r.ok);
  CHECK(r.inlier_count == 30);
  CHECK(mean_corner_error(r.h, h, 256, 256) < 1e-6);
}

TEST_CASE("ransac_homography with 50% outliers recovers all planted inliers") {
  Homography h = random_projective(111);
  SplitMix64 rng(112);
  const int n_in = 40, n_out = 40;
  MatXd src(n_in + n_out, 2), dst(n_in + n_out, 2);
  for (int i = 0; i < n_in; ++i) {
    src.row(i) << rng.uniform(0, 256), rng.uniform(0, 256);
    dst.row(i) = apply_h(h, MatXd(src.row(i))).row(0);
  }
  for (int i = n_in; i < n_in + n_out; ++i) {
    src.row(i) << rng.uniform(0, 256), rng.uniform(0, 256);
    dst.row(i) << rng.uniform(0, 256), rng.uniform(0, 256);
  }
  RansacHomography r = ransac_homography(src, dst, 1000, 3.0, 13);
  REQUIRE(r.ok);
  for (int i = 0; i < n_in; ++i) CHECK(r.inliers[std::size_t(i)] == 1);
  CHECK(mean_corner_error(r.h, h, 256, 256) < 0.5);

  // bit-reproducible under the same seed
  RansacHomography r2 = ransac_homography(src, dst, 1000, 3.0, 13);
  CHECK(r.h == r2.h);
  CHECK(r.inliers == r2.inliers);
}

TEST_CASE("ransac_homography all-outlier input yields a failure result") {
  SplitMix64 rng(121);
  MatXd src(24, 2), dst(24, 2);
  for (int i = 0; i < 24; ++i) {
    src.row(i) << rng.uniform(0, 1000), rng.uniform(0, 1000);
    dst.row(i) << rng.uniform(0, 1000), rng.uniform(0, 1000);
  }
  RansacHomography r = ransac_homography(src, dst, 500, 3.0, 17);
  CHECK_FALSE(r.ok);

  MatXd tiny(3, 2);
  CHECK_THROWS_AS(ransac_homography(tiny, tiny, 10, 3.0, 1), EstimationError);
}

TEST_CASE("mha closed forms") {
  Homography h = random_projective(131);
  std::vector<double> thresholds = {3, 5, 7};
  auto perfect = mha(h, h, 640, 480, thresholds);
  CHECK(perfect == std::vector<double>{1, 1, 1});

  // compose with a 4 px translation: every corner moves exactly 4 px
  Eigen::Matrix3d t4 = Eigen::Matrix3d::Identity();
  t4(0, 2) = 4.0;
  auto four = mha(t4 * h, h, 640, 480, thresholds);
  CHECK(four == std::vector<double>{0, 1, 1});

  Eigen::Matrix3d t10 = Eigen::Matrix3d::Identity();
  t10(1, 2) = 10.0;
  auto ten = mha(t10, Eigen::Matrix3d::Identity(), 640, 480, thresholds);
  CHECK(ten == std::vector<double>{0, 0, 0});
}

TEST_CASE("estimate_pose recovers a noise-free planted pose") {
  TwoViewScene s = gen_two_view_scene(201, 100, 0.0);
  RelativePose pose = estimate_pose(s.pts_a, s.pts_b, s.k, s.k, 500, 1.0, 3);
  CHECK(rotation_error_deg(pose.r, s.r_gt) < 0.1);
  CHECK(translation_angle_deg(pose.t, s.t_gt) < 0.1);
  CHECK_FALSE(pose.degenerate);
  // orthonormality invariants
  CHECK((pose.r.transpose() * pose.r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(pose.r.determinant() == doctest::Approx(1.0));
  CHECK(pose.t.norm() == doctest::Approx(1.0));
}

TEST_CASE("estimate_pose flags pure rotation as degenerate but recovers R") {
  TwoViewScene s = gen_two_view_scene(211, 100, 0.0, /*pure_rotation=*/true);
  RelativePose pose = estimate_pose(s.pts_a, s.pts_b, s.k, s.k, 500, 1.0, 5);
  CHECK(rotation_error_deg(pose.r, s.r_gt) < 0.1);
  CHECK(pose.degenerate);
}

TEST_CASE("estimate_pose with 30% outliers") {
  TwoViewScene s = gen_two_view_scene(221, 120, 0.3);
  RelativePose pose = estimate_pose(s.pts_a, s.pts_b, s.k, s.k, 2000, 1.5, 7);
  CHECK(rotation_error_deg(pose.r, s.r_gt) < 0.5);
  CHECK(translation_angle_deg(pose.t, s.t_gt) < 1.0);
}

TEST_CASE("estimate_pose input validation") {
  MatXd seven(7, 2);
  CHECK_THROWS_AS(
      estimate_pose(seven, seven, Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity(), 10,
                    1.0, 1),
      EstimationError);
}

TEST_CASE("pose_auc closed forms") {
  std::vector<double> thresholds = {5, 10, 20};
  auto zero = pose_auc({0, 0, 0}, thresholds);
  CHECK(zero[0] == doctest::Approx(1.0));
  CHECK(zero[1] == doctest::Approx(1.0));
  CHECK(zero[2] == doctest::Approx(1.0));

  auto half = pose_auc({5.0}, {10.0});
  CHECK(half[0] == doctest::Approx(0.5));

  double inf = std::numeric_limits<double>::infinity();
  auto failed = pose_auc({inf, inf}, thresholds);
  CHECK(failed[0] == 0.0);
  CHECK(failed[2] == 0.0);

  CHECK_THROWS_AS(pose_auc({}, thresholds), std::invalid_argument);
}

TEST_CASE("pose_auc is monotone in the error list") {
  SplitMix64 rng(231);
  std::vector<double> errors(20);
  for (auto& e : errors) e = rng.uniform(0, 30);
  std::vector<double> smaller = errors;
  for (auto& e : smaller) e *= 0.7;
  std::vector<double> thresholds = {5, 10, 20};
  auto base = pose_auc(errors, thresholds);
  auto better = pose_auc(smaller, thresholds);
  for (std::size_t i = 0; i < thresholds.size(); ++i) CHECK(better[i] >= base[i]);
}
