#pragma once

#include "liftmatch/geometry.hpp"
#include "liftmatch/lifting.hpp"
#include "liftmatch/normals.hpp"

namespace liftmatch {

enum class TextureKind { Checker, Noise, LowTexture };
enum class DepthScene { Plane, TwoPlanes, Sphere };

struct SynthPair {
  Tensor image_a, image_b;  // 3-channel, values in [0, 1]
  Homography h_gt = Homography::Identity();
  MatXd corr_a, corr_b;  // N x 2 exact correspondences (x_b = h_gt * x_a)
  int regen_count = 0;   // times the warp magnitude was halved to keep overlap
};

/// Procedural texture pair related by a random projective warp whose corner
/// displacement is bounded by warp_magnitude. If the warped overlap drops
/// below 25% the magnitude is halved and the warp redrawn.
SynthPair gen_pair(std::uint64_t seed, int width, int height, TextureKind texture,
                   double warp_magnitude, int n_corr = 200);

/// Same generator with a caller-supplied homography (no overlap logic).
SynthPair gen_pair_with_h(std::uint64_t seed, int width, int height, TextureKind texture,
                          const Homography& h, int n_corr = 200);

struct DepthSceneData {
  DepthMap depth;
  Tensor normals_gt;  // closed-form normals of the analytic surface
};

/// Analytic depth surface plus its closed-form normals. The ground-truth
/// normals evaluate the same finite-difference construction as the oracle on
/// the exact surface, so plane scenes carry the (-2a, -2b, 1)-style
/// un-halved convention.
DepthSceneData gen_depth_scene(std::uint64_t seed, int width, int height, DepthScene scene);

/// Training batch that models low-texture ambiguity: an `ambiguity` fraction
/// of the points share near-identical descriptors (within 0.02 cosine) but
/// carry well-separated normals. View B repeats the same keypoints with
/// descriptor noise; the ground-truth pairing is the identity.
LiftBatch gen_lift_batch(std::uint64_t seed, int n_points, double ambiguity);

struct TwoViewScene {
  MatXd pts_a, pts_b;  // pixel coordinates
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d r_gt = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_gt = Eigen::Vector3d::UnitX();
  std::vector<char> is_outlier;
  bool pure_rotation = false;
};

/// Random 3D points seen by two calibrated cameras with a known relative
/// pose; an outlier_fraction of the view-B projections is replaced by
/// uniform random pixels.
TwoViewScene gen_two_view_scene(std::uint64_t seed, int n_points, double outlier_fraction,
                                bool pure_rotation = false);

}  // namespace liftmatch
