#include "liftmatch/pipeline.hpp"

#include <json.hpp>

#include <sstream>

namespace liftmatch {

using ordered_json = nlohmann::ordered_json;

void PipelineConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    try {
      if (key == "top_k") top_k = std::stoi(value);
      else if (key == "nms_radius") nms_radius = std::stoi(value);
      else if (key == "nms_threshold") nms_threshold = std::stof(value);
      else if (key == "min_similarity") min_similarity = std::stof(value);
      else if (key == "use_lift") use_lift = value == "true" || value == "1";
      else if (key == "temperature") temperature = std::stod(value);
      else if (key == "ransac_iters") ransac_iters = std::stoi(value);
      else if (key == "ransac_inlier_px") ransac_inlier_px = std::stod(value);
      else if (key == "pose_iters") pose_iters = std::stoi(value);
      else if (key == "pose_thresh_px") pose_thresh_px = std::stod(value);
      else if (key == "seed") seed = std::stoull(value);
      else throw DataError("config: unknown key " + key);
    } catch (const std::invalid_argument&) {
      throw DataError("config: bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
      throw DataError("config: value out of range for " + key + ": " + value);
    }
  }
}

std::string PipelineConfig::serialize() const {
  std::ostringstream out;
  out << "top_k = " << top_k << "\n";
  out << "nms_radius = " << nms_radius << "\n";
  out << "nms_threshold = " << nms_threshold << "\n";
  out << "min_similarity = " << min_similarity << "\n";
  out << "use_lift = " << (use_lift ? "true" : "false") << "\n";
  out << "temperature = " << temperature << "\n";
  out << "ransac_iters = " << ransac_iters << "\n";
  out << "ransac_inlier_px = " << ransac_inlier_px << "\n";
  out << "pose_iters = " << pose_iters << "\n";
  out << "pose_thresh_px = " << pose_thresh_px << "\n";
  out << "seed = " << seed << "\n";
  return out.str();
}

ExtractResult extract(const Tensor& image, const NetWeights& net, const PipelineConfig& cfg) {
  net.validate();
  PaddedImage padded = pad_to_32(image);
  PyramidFeatures pyr = encode(padded.image, net);
  Tensor fused = fuse(pyr, net);
  Tensor logits = keypoint_head(fused, net);
  ExtractResult out;
  out.score_map = scores_from_logits(logits, padded.orig_height, padded.orig_width);
  out.normal_map = normal_head(fused, net, padded.orig_height, padded.orig_width);
  std::vector<Keypoint> kps =
      nms_topk(out.score_map, cfg.nms_radius, cfg.nms_threshold, cfg.top_k);
  out.bundle = gather_features(fused, out.normal_map, kps);
  return out;
}

PairReport match_pair(const Tensor& a, const Tensor& b, const ModelWeights& w,
                      const PipelineConfig& cfg) {
  ExtractResult ra = extract(a, w.net, cfg);
  ExtractResult rb = extract(b, w.net, cfg);

  PairReport rep;
  rep.width_a = a.width;
  rep.height_a = a.height;
  rep.width_b = b.width;
  rep.height_b = b.height;
  rep.kps_a = ra.bundle.keypoints;
  rep.kps_b = rb.bundle.keypoints;

  rep.raw_matches = mnn_match(ra.bundle.descriptors, rb.bundle.descriptors, cfg.min_similarity);
  rep.raw_matches.provenance = "raw";

  if (cfg.use_lift && ra.bundle.size() > 0 && rb.bundle.size() > 0) {
    MatXf la = lift(ra.bundle, a.width, a.height, w.lift);
    MatXf lb = lift(rb.bundle, b.width, b.height, w.lift);
    rep.matches = mnn_match(la, lb, cfg.min_similarity);
    rep.matches.provenance = "lifted";
  } else {
    rep.matches = rep.raw_matches;
  }

  if (int(rep.matches.matches.size()) >= 4) {
    MatXd src(rep.matches.matches.size(), 2), dst(rep.matches.matches.size(), 2);
    for (std::size_t i = 0; i < rep.matches.matches.size(); ++i) {
      const Match& m = rep.matches.matches[i];
      src.row(Eigen::Index(i)) << rep.kps_a[std::size_t(m.a)].x, rep.kps_a[std::size_t(m.a)].y;
      dst.row(Eigen::Index(i)) << rep.kps_b[std::size_t(m.b)].x, rep.kps_b[std::size_t(m.b)].y;
    }
    RansacHomography rh =
        ransac_homography(src, dst, cfg.ransac_iters, cfg.ransac_inlier_px, cfg.seed);
    rep.homography_ok = rh.ok;
    if (rh.ok) {
      rep.h_est = rh.h;
      rep.h_inliers = rh.inlier_count;
      rep.h_inlier_mask = rh.inliers;
    }
  }
  return rep;
}

namespace {

ordered_json keypoints_to_json(const std::vector<Keypoint>& kps) {
  ordered_json arr = ordered_json::array();
  for (const Keypoint& k : kps) arr.push_back({k.x, k.y, k.score});
  return arr;
}

std::vector<Keypoint> keypoints_from_json(const ordered_json& arr) {
  std::vector<Keypoint> kps;
  for (const auto& k : arr) kps.push_back({k.at(0).get<float>(), k.at(1).get<float>(), k.at(2).get<float>()});
  return kps;
}

ordered_json matchset_to_json(const MatchSet& ms) {
  ordered_json j;
  j["provenance"] = ms.provenance;
  ordered_json arr = ordered_json::array();
  for (const Match& m : ms.matches) arr.push_back({m.a, m.b, m.similarity});
  j["pairs"] = arr;
  return j;
}

MatchSet matchset_from_json(const ordered_json& j) {
  MatchSet ms;
  ms.provenance = j.at("provenance").get<std::string>();
  for (const auto& p : j.at("pairs"))
    ms.matches.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<float>()});
  return ms;
}

}  // namespace

std::string report_to_json(const PairReport& r) {
  ordered_json j;
  j["schema"] = 1;
  j["image_a"] = r.image_a;
  j["image_b"] = r.image_b;
  j["width_a"] = r.width_a;
  j["height_a"] = r.height_a;
  j["width_b"] = r.width_b;
  j["height_b"] = r.height_b;
  j["keypoints_a"] = keypoints_to_json(r.kps_a);
  j["keypoints_b"] = keypoints_to_json(r.kps_b);
  j["matches"] = matchset_to_json(r.matches);
  j["raw_matches"] = matchset_to_json(r.raw_matches);
  ordered_json h;
  h["ok"] = r.homography_ok;
  if (r.homography_ok) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({r.h_est(i, 0), r.h_est(i, 1), r.h_est(i, 2)});
    h["h"] = rows;
    h["inlier_count"] = r.h_inliers;
    ordered_json mask = ordered_json::array();
    for (char c : r.h_inlier_mask) mask.push_back(int(c));
    h["inliers"] = mask;
  }
  j["homography"] = h;
  return j.dump(2) + "\n";
}

PairReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<int>() != 1) throw DataError("report: unsupported schema version");
    PairReport r;
    r.image_a = j.at("image_a").get<std::string>();
    r.image_b = j.at("image_b").get<std::string>();
    r.width_a = j.at("width_a").get<int>();
    r.height_a = j.at("height_a").get<int>();
    r.width_b = j.at("width_b").get<int>();
    r.height_b = j.at("height_b").get<int>();
    r.kps_a = keypoints_from_json(j.at("keypoints_a"));
    r.kps_b = keypoints_from_json(j.at("keypoints_b"));
    r.matches = matchset_from_json(j.at("matches"));
    r.raw_matches = matchset_from_json(j.at("raw_matches"));
    const auto& h = j.at("homography");
    r.homography_ok = h.at("ok").get<bool>();
    if (r.homography_ok) {
      for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) r.h_est(i, c) = h.at("h").at(i).at(c).get<double>();
      r.h_inliers = h.at("inlier_count").get<int>();
      for (const auto& m : h.at("inliers")) r.h_inlier_mask.push_back(char(m.get<int>()));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: missing or malformed field: ") + e.what());
  }
}

}  // namespace liftmatch
