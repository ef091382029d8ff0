#include "liftmatch/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace liftmatch {

namespace {

Eigen::Vector2d project(const Homography& h, const Eigen::Vector2d& p) {
  Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) < 1e-15) return Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  return q.hnormalized();
}

/// Similarity transform taking the points to zero centroid and RMS radius
/// sqrt(2). Throws if the points are coincident.
Eigen::Matrix3d hartley_transform(const MatXd& pts) {
  Eigen::RowVector2d centroid = pts.colwise().mean();
  double mean_dist = (pts.rowwise() - centroid).rowwise().norm().mean();
  if (mean_dist < 1e-12) throw EstimationError("degenerate point set: coincident points");
  double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

}  // namespace

MatchSet mnn_match(const MatXf& da, const MatXf& db, float min_sim) {
  MatchSet out;
  if (da.rows() == 0 || db.rows() == 0) return out;
  MatXf sim = da * db.transpose();
  std::vector<int> best_b(sim.rows()), best_a(sim.cols());
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    int arg = 0;
    for (Eigen::Index j = 1; j < sim.cols(); ++j)
      if (sim(i, j) > sim(i, arg)) arg = int(j);
    best_b[std::size_t(i)] = arg;
  }
  for (Eigen::Index j = 0; j < sim.cols(); ++j) {
    int arg = 0;
    for (Eigen::Index i = 1; i < sim.rows(); ++i)
      if (sim(i, j) > sim(arg, j)) arg = int(i);
    best_a[std::size_t(j)] = arg;
  }
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    int j = best_b[std::size_t(i)];
    if (best_a[std::size_t(j)] == int(i) && sim(i, j) >= min_sim)
      out.matches.push_back({int(i), j, sim(i, j)});
  }
  return out;
}

Homography homography_dlt(const MatXd& src, const MatXd& dst) {
  const Eigen::Index n = src.rows();
  if (n < 4 || dst.rows() != n) throw EstimationError("homography_dlt: need >= 4 correspondences");
  Eigen::Matrix3d ts = hartley_transform(src);
  Eigen::Matrix3d td = hartley_transform(dst);

  MatXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Vector3d p = ts * Eigen::Vector3d(src(i, 0), src(i, 1), 1.0);
    Eigen::Vector3d q = td * Eigen::Vector3d(dst(i, 0), dst(i, 1), 1.0);
    double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<MatXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) < sv(0) * 1e-10)
    throw EstimationError("homography_dlt: rank-deficient system (collinear points?)");
  Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Homography hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Homography out = td.inverse() * hn * ts;
  if (std::abs(out(2, 2)) > 1e-12) out /= out(2, 2);
  if (std::abs(out.determinant()) < 1e-12)
    throw EstimationError("homography_dlt: singular homography");
  return out;
}

namespace {

double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  double fwd = (project(h, a) - b).norm();
  double bwd = (project(h_inv, b) - a).norm();
  return std::max(fwd, bwd);
}

void sample_distinct(SplitMix64& rng, int n, int count, std::vector<int>& out) {
  out.clear();
  while (int(out.size()) < count) {
    int idx = rng.uniform_int(n);
    if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
  }
}

}  // namespace

RansacHomography ransac_homography(const MatXd& src, const MatXd& dst, int iters,
                                   double inlier_px, std::uint64_t seed) {
  const int n = int(src.rows());
  if (n < 4) throw EstimationError("ransac_homography: need >= 4 matches");

  auto count_inliers = [&](const Homography& h, std::vector<char>& mask) -> int {
    Homography h_inv = h.inverse();
    mask.assign(n, 0);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      double e = symmetric_transfer_error(h, h_inv, src.row(i).transpose(), dst.row(i).transpose());
      if (e < inlier_px) {
        mask[i] = 1;
        ++count;
      }
    }
    return count;
  };

  RansacHomography best;
  std::vector<int> sample;
  std::vector<char> mask;
  for (int it = 0; it < iters; ++it) {
    SplitMix64 rng = SplitMix64::derive(seed, std::uint64_t(it));
    sample_distinct(rng, n, 4, sample);
    MatXd s(4, 2), d(4, 2);
    for (int k = 0; k < 4; ++k) {
      s.row(k) = src.row(sample[std::size_t(k)]);
      d.row(k) = dst.row(sample[std::size_t(k)]);
    }
    Homography h;
    try {
      h = homography_dlt(s, d);
    } catch (const EstimationError&) {
      continue;
    }
    int count = count_inliers(h, mask);
    if (count > best.inlier_count) {
      best.inlier_count = count;
      best.h = h;
      best.inliers = mask;
    }
  }
  if (best.inlier_count < 5) return best;  // ok stays false

  // Two refit rounds on the consensus set.
  for (int round = 0; round < 2; ++round) {
    MatXd s(best.inlier_count, 2), d(best.inlier_count, 2);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (!best.inliers[std::size_t(i)]) continue;
      s.row(k) = src.row(i);
      d.row(k) = dst.row(i);
      ++k;
    }
    Homography refit;
    try {
      refit = homography_dlt(s, d);
    } catch (const EstimationError&) {
      break;
    }
    int count = count_inliers(refit, mask);
    if (count < 4) break;
    best.h = refit;
    best.inlier_count = count;
    best.inliers = mask;
  }
  best.ok = true;
  return best;
}

double mean_corner_error(const Homography& est, const Homography& gt, int width, int height) {
  Eigen::Vector2d corners[4] = {{0, 0},
                                {double(width - 1), 0},
                                {double(width - 1), double(height - 1)},
                                {0, double(height - 1)}};
  double sum = 0;
  for (const auto& c : corners) sum += (project(est, c) - project(gt, c)).norm();
  return sum / 4.0;
}

std::vector<double> mha(const Homography& est, const Homography& gt, int width, int height,
                        const std::vector<double>& thresholds) {
  double err = mean_corner_error(est, gt, width, height);
  std::vector<double> acc;
  acc.reserve(thresholds.size());
  for (double t : thresholds) acc.push_back(err <= t ? 1.0 : 0.0);
  return acc;
}

namespace {

Eigen::Matrix3d essential_8pt(const MatXd& x1, const MatXd& x2) {
  const Eigen::Index n = x1.rows();
  MatXd a(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    double u1 = x1(i, 0), v1 = x1(i, 1), u2 = x2(i, 0), v2 = x2(i, 1);
    a.row(i) << u2 * u1, u2 * v1, u2, v2 * u1, v2 * v1, v2, u1, v1, 1.0;
  }
  Eigen::JacobiSVD<MatXd> svd(a, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Eigen::Matrix3d raw;
  raw << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  // Project to the essential manifold: singular values (s, s, 0).
  Eigen::JacobiSVD<Eigen::Matrix3d> svd3(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd3.singularValues();
  double sigma = 0.5 * (s(0) + s(1));
  return svd3.matrixU() * Eigen::Vector3d(sigma, sigma, 0.0).asDiagonal() *
         svd3.matrixV().transpose();
}

double sampson_sq(const Eigen::Matrix3d& e, const Eigen::Vector3d& x1, const Eigen::Vector3d& x2) {
  Eigen::Vector3d ex1 = e * x1;
  Eigen::Vector3d etx2 = e.transpose() * x2;
  double num = x2.dot(ex1);
  double denom = ex1.head<2>().squaredNorm() + etx2.head<2>().squaredNorm();
  if (denom < 1e-18) return std::numeric_limits<double>::infinity();
  return num * num / denom;
}

/// Linear DLT triangulation with P1 = [I|0], P2 = [R|t]. Returns the point
/// in camera-A coordinates, or nullopt-ish via the success flag.
bool triangulate(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, const Eigen::Vector3d& x1,
                 const Eigen::Vector3d& x2, Eigen::Vector3d& out) {
  Eigen::Matrix<double, 3, 4> p1 = Eigen::Matrix<double, 3, 4>::Zero();
  p1.block<3, 3>(0, 0).setIdentity();
  Eigen::Matrix<double, 3, 4> p2;
  p2.block<3, 3>(0, 0) = r;
  p2.col(3) = t;
  Eigen::Matrix4d a;
  a.row(0) = x1.x() * p1.row(2) - p1.row(0);
  a.row(1) = x1.y() * p1.row(2) - p1.row(1);
  a.row(2) = x2.x() * p2.row(2) - p2.row(0);
  a.row(3) = x2.y() * p2.row(2) - p2.row(1);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  Eigen::Vector4d xh = svd.matrixV().col(3);
  if (std::abs(xh(3)) < 1e-15) return false;
  out = xh.head<3>() / xh(3);
  return true;
}

}  // namespace

RelativePose estimate_pose(const MatXd& pts_a, const MatXd& pts_b, const Eigen::Matrix3d& ka,
                           const Eigen::Matrix3d& kb, int iters, double thresh_px,
                           std::uint64_t seed) {
  const int n = int(pts_a.rows());
  if (n < 8 || pts_b.rows() != n) throw EstimationError("estimate_pose: need >= 8 matches");

  MatXd x1(n, 2), x2(n, 2);
  Eigen::Matrix3d ka_inv = ka.inverse(), kb_inv = kb.inverse();
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d p = ka_inv * Eigen::Vector3d(pts_a(i, 0), pts_a(i, 1), 1.0);
    Eigen::Vector3d q = kb_inv * Eigen::Vector3d(pts_b(i, 0), pts_b(i, 1), 1.0);
    x1.row(i) = p.hnormalized().transpose();
    x2.row(i) = q.hnormalized().transpose();
  }
  double focal = (ka(0, 0) + ka(1, 1) + kb(0, 0) + kb(1, 1)) / 4.0;
  double thresh_sq = (thresh_px / focal) * (thresh_px / focal);

  auto count_inliers = [&](const Eigen::Matrix3d& e, std::vector<char>& mask) -> int {
    mask.assign(n, 0);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d a(x1(i, 0), x1(i, 1), 1.0), b(x2(i, 0), x2(i, 1), 1.0);
      if (sampson_sq(e, a, b) < thresh_sq) {
        mask[i] = 1;
        ++count;
      }
    }
    return count;
  };

  Eigen::Matrix3d best_e = Eigen::Matrix3d::Zero();
  std::vector<char> best_mask;
  int best_count = 0;
  std::vector<int> sample;
  std::vector<char> mask;
  for (int it = 0; it < iters; ++it) {
    SplitMix64 rng = SplitMix64::derive(seed, std::uint64_t(it));
    sample_distinct(rng, n, 8, sample);
    MatXd s1(8, 2), s2(8, 2);
    for (int k = 0; k < 8; ++k) {
      s1.row(k) = x1.row(sample[std::size_t(k)]);
      s2.row(k) = x2.row(sample[std::size_t(k)]);
    }
    Eigen::Matrix3d e = essential_8pt(s1, s2);
    int count = count_inliers(e, mask);
    if (count > best_count) {
      best_count = count;
      best_e = e;
      best_mask = mask;
    }
  }
  if (best_count < 8) throw EstimationError("estimate_pose: no consensus model");

  // Refit on the consensus set.
  {
    MatXd s1(best_count, 2), s2(best_count, 2);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (!best_mask[std::size_t(i)]) continue;
      s1.row(k) = x1.row(i);
      s2.row(k) = x2.row(i);
      ++k;
    }
    Eigen::Matrix3d refit = essential_8pt(s1, s2);
    int count = count_inliers(refit, mask);
    if (count >= best_count) {
      best_e = refit;
      best_count = count;
      best_mask = mask;
    }
  }

  // Decompose into the four (R, t) candidates.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(best_e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
  if (u.determinant() < 0) u = -u;
  if (v.determinant() < 0) v = -v;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  Eigen::Matrix3d r1 = u * w * v.transpose();
  Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  Eigen::Vector3d t = u.col(2);
  struct Candidate {
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    int positive = 0;
  };
  std::array<Candidate, 4> cands = {Candidate{r1, t}, Candidate{r1, -t}, Candidate{r2, t},
                                    Candidate{r2, -t}};
  for (auto& c : cands) {
    for (int i = 0; i < n; ++i) {
      if (!best_mask[std::size_t(i)]) continue;
      Eigen::Vector3d a(x1(i, 0), x1(i, 1), 1.0), b(x2(i, 0), x2(i, 1), 1.0);
      Eigen::Vector3d p;
      if (!triangulate(c.r, c.t, a, b, p)) continue;
      double z1 = p.z();
      double z2 = (c.r * p + c.t).z();
      if (z1 > 0 && z2 > 0) ++c.positive;
    }
  }
  const Candidate* winner = &cands[0];
  for (const auto& c : cands)
    if (c.positive > winner->positive) winner = &c;
  if (winner->positive == 0) throw EstimationError("estimate_pose: cheirality check failed");

  RelativePose pose;
  pose.r = winner->r;
  pose.t = winner->t.normalized();
  pose.inlier_count = best_count;
  pose.inliers = best_mask;

  // Degeneracy flag: median parallax between corresponding viewing rays.
  std::vector<double> parallax;
  for (int i = 0; i < n; ++i) {
    if (!best_mask[std::size_t(i)]) continue;
    Eigen::Vector3d r1v = Eigen::Vector3d(x1(i, 0), x1(i, 1), 1.0).normalized();
    Eigen::Vector3d r2v = (pose.r.transpose() * Eigen::Vector3d(x2(i, 0), x2(i, 1), 1.0)).normalized();
    parallax.push_back(std::acos(std::clamp(r1v.dot(r2v), -1.0, 1.0)) * 180.0 / M_PI);
  }
  std::nth_element(parallax.begin(), parallax.begin() + parallax.size() / 2, parallax.end());
  double median = parallax[parallax.size() / 2];
  pose.degenerate = median < 0.25;
  return pose;
}

double rotation_error_deg(const Eigen::Matrix3d& r_est, const Eigen::Matrix3d& r_gt) {
  double c = ((r_est.transpose() * r_gt).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

double translation_angle_deg(const Eigen::Vector3d& t_est, const Eigen::Vector3d& t_gt) {
  double c = t_est.normalized().dot(t_gt.normalized());
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

std::vector<double> pose_auc(std::vector<double> errors, const std::vector<double>& thresholds) {
  if (errors.empty()) throw std::invalid_argument("pose_auc: empty error list");
  std::sort(errors.begin(), errors.end());
  const double n = double(errors.size());
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    if (t <= 0) throw std::invalid_argument("pose_auc: thresholds must be positive");
    double integral = 0, prev = 0, recall = 0;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      double e = errors[i];
      if (e >= t) break;
      integral += recall * (e - prev);
      recall = double(i + 1) / n;
      prev = e;
    }
    integral += recall * (t - prev);
    out.push_back(integral / t);
  }
  return out;
}

}  // namespace liftmatch
