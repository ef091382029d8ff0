#pragma once

#include "liftmatch/common.hpp"

#include <string>
#include <vector>

namespace liftmatch {

struct Match {
  int a = 0;
  int b = 0;
  float similarity = 0;
};

struct MatchSet {
  std::vector<Match> matches;
  std::string provenance;  // "lifted" or "raw"
};

/// Mutual-nearest-neighbor matching of unit descriptor rows by dot product.
/// Ties resolve to the lower index; pairs below min_sim are dropped.
MatchSet mnn_match(const MatXf& da, const MatXf& db, float min_sim = 0.0f);

using Homography = Eigen::Matrix3d;

/// Hartley-normalized direct linear transform. src/dst are N x 2 point sets
/// (N >= 4). h33 is scaled to 1. Throws EstimationError for degenerate
/// configurations.
Homography homography_dlt(const MatXd& src, const MatXd& dst);

struct RansacHomography {
  bool ok = false;
  Homography h = Homography::Identity();
  std::vector<char> inliers;
  int inlier_count = 0;
};

/// Fixed-threshold RANSAC over 4-point minimal DLT samples with two refit
/// rounds on the consensus set. A model is accepted only if it gathers at
/// least 5 inliers (a minimal sample always explains itself). Symmetric
/// transfer error: max of forward and backward point distances. Iteration i
/// draws from the derived stream (seed, i), so runs are reproducible and
/// could be parallelized without changing results.
RansacHomography ransac_homography(const MatXd& src, const MatXd& dst, int iters,
                                   double inlier_px, std::uint64_t seed);

/// Mean distance of the four image corners mapped by est vs gt.
double mean_corner_error(const Homography& est, const Homography& gt, int width, int height);

/// Per-threshold 0/1 accuracy of one pair (the harness averages over pairs).
std::vector<double> mha(const Homography& est, const Homography& gt, int width, int height,
                        const std::vector<double>& thresholds);

struct RelativePose {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::UnitZ();
  bool degenerate = false;  // near-zero parallax; t direction unreliable
  int inlier_count = 0;
  std::vector<char> inliers;
};

/// RANSAC over normalized 8-point essential-matrix estimates. The best model
/// (Sampson gate at thresh_px scaled by the mean focal length) is refit on
/// its inliers, rank-2 projected with equalized singular values, decomposed
/// into the four (R, t) candidates, and disambiguated by cheirality.
RelativePose estimate_pose(const MatXd& pts_a, const MatXd& pts_b, const Eigen::Matrix3d& ka,
                           const Eigen::Matrix3d& kb, int iters, double thresh_px,
                           std::uint64_t seed);

double rotation_error_deg(const Eigen::Matrix3d& r_est, const Eigen::Matrix3d& r_gt);
double translation_angle_deg(const Eigen::Vector3d& t_est, const Eigen::Vector3d& t_gt);

/// AUC@T = (1/T) * integral_0^T recall(e) de, with recall the fraction of
/// errors <= e; the step function is integrated exactly. Failures should be
/// encoded as +inf.
std::vector<double> pose_auc(std::vector<double> errors, const std::vector<double>& thresholds);

}  // namespace liftmatch
