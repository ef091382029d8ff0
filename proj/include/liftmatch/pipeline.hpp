#pragma once

#include "liftmatch/geometry.hpp"
#include "liftmatch/heads.hpp"
#include "liftmatch/io.hpp"
#include "liftmatch/keypoints.hpp"
#include "liftmatch/lifting.hpp"

#include <map>
#include <optional>
#include <string>

namespace liftmatch {

struct PipelineConfig {
  int top_k = 4096;
  int nms_radius = 4;
  float nms_threshold = 0.05f;
  float min_similarity = 0.0f;
  bool use_lift = true;
  double temperature = 0.1;  // dual-softmax temperature for training/eval scores
  int ransac_iters = 1000;
  double ransac_inlier_px = 3.0;
  int pose_iters = 2000;
  double pose_thresh_px = 3.0;
  std::uint64_t seed = 0;

  /// Overlays `key = value` pairs from a config file; unknown keys are an
  /// error. CLI flags are applied on top by the caller.
  void apply(const std::map<std::string, std::string>& kv);

  /// The config-file form of this configuration; apply(load) round-trips.
  std::string serialize() const;
};

struct ExtractResult {
  FeatureBundle bundle;
  Tensor score_map;   // H x W x 1 at the original resolution
  Tensor normal_map;  // H x W x 3, unit rows
};

/// image -> pad -> encode -> fuse -> heads -> NMS/top-K -> gather.
ExtractResult extract(const Tensor& image, const NetWeights& net, const PipelineConfig& cfg);

struct PairReport {
  std::string image_a, image_b;
  int width_a = 0, height_a = 0, width_b = 0, height_b = 0;
  std::vector<Keypoint> kps_a, kps_b;
  MatchSet matches;      // lifted descriptors unless lifting is disabled
  MatchSet raw_matches;  // always recorded for ablation comparison
  bool homography_ok = false;
  Homography h_est = Homography::Identity();
  int h_inliers = 0;
  std::vector<char> h_inlier_mask;
};

/// Full two-image pipeline: extract both, lift (unless disabled), MNN match,
/// and a robust homography fit when at least four matches survive.
PairReport match_pair(const Tensor& a, const Tensor& b, const ModelWeights& w,
                      const PipelineConfig& cfg);

std::string report_to_json(const PairReport& r);
PairReport report_from_json(const std::string& text);

}  // namespace liftmatch
