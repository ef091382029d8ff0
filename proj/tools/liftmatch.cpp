#include "liftmatch/io.hpp"
#include "liftmatch/pipeline.hpp"
#include "liftmatch/synthgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace liftmatch;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitEstimation = 4;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path + ": cannot open for writing");
  f << text;
  if (!f) throw DataError(path + ": write failed");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open");
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

ModelWeights load_model(const std::string& path) { return unpack_model(load_weights(path)); }

/// Shared pipeline flags. Precedence: defaults < config file < CLI flags.
struct ConfigFlags {
  std::string config_path;
  PipelineConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key = value config file");
    cmd->add_option("--top-k", cfg.top_k, "keypoints to keep after NMS");
    cmd->add_option("--nms-radius", cfg.nms_radius, "NMS suppression radius in pixels");
    cmd->add_option("--nms-threshold", cfg.nms_threshold, "minimum keypoint score");
    cmd->add_option("--min-sim", cfg.min_similarity, "minimum match similarity");
    cmd->add_option("--ransac-iters", cfg.ransac_iters, "homography RANSAC iterations");
    cmd->add_option("--inlier-px", cfg.ransac_inlier_px, "RANSAC inlier threshold (px)");
    cmd->add_option("--seed", cfg.seed, "PRNG seed for robust estimation");
  }

  /// Rebuilds the effective config so file values sit under CLI overrides.
  PipelineConfig resolve(const CLI::App* cmd) {
    if (config_path.empty()) return cfg;
    PipelineConfig out;
    out.apply(load_config(config_path));
    auto overridden = [&](const std::string& flag) { return cmd->count(flag) > 0; };
    if (overridden("--top-k")) out.top_k = cfg.top_k;
    if (overridden("--nms-radius")) out.nms_radius = cfg.nms_radius;
    if (overridden("--nms-threshold")) out.nms_threshold = cfg.nms_threshold;
    if (overridden("--min-sim")) out.min_similarity = cfg.min_similarity;
    if (overridden("--ransac-iters")) out.ransac_iters = cfg.ransac_iters;
    if (overridden("--inlier-px")) out.ransac_inlier_px = cfg.ransac_inlier_px;
    if (overridden("--seed")) out.seed = cfg.seed;
    return out;
  }
};

std::string zero_pad(int v, int width = 4) {
  std::string s = std::to_string(v);
  return std::string(std::size_t(std::max(0, width - int(s.size()))), '0') + s;
}

ordered_json h_to_json(const Homography& h) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({h(i, 0), h(i, 1), h(i, 2)});
  return rows;
}

Homography h_from_json(const ordered_json& j) {
  Homography h;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) h(i, c) = j.at(i).at(c).get<double>();
  return h;
}

ordered_json mat_to_json(const MatXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

MatXd mat_from_json(const ordered_json& j, int cols) {
  MatXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i)
    for (int c = 0; c < cols; ++c) m(Eigen::Index(i), c) = j.at(i).at(c).get<double>();
  return m;
}

// ---------------------------------------------------------------- commands

int cmd_init_weights(std::uint64_t seed, const std::string& out) {
  ModelWeights m;
  m.net = NetWeights::he_init(seed);
  m.lift = LiftWeights::he_init(seed + 1);
  save_weights(out, pack_model(m));
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_detect(const std::string& image_path, const std::string& weights_path,
               const std::string& out, const PipelineConfig& cfg) {
  Tensor image = load_image(image_path);
  ModelWeights w = load_model(weights_path);
  ExtractResult r = extract(image, w.net, cfg);
  ordered_json j;
  j["schema"] = 1;
  j["image"] = image_path;
  j["width"] = image.width;
  j["height"] = image.height;
  ordered_json arr = ordered_json::array();
  for (const Keypoint& k : r.bundle.keypoints) arr.push_back({k.x, k.y, k.score});
  j["keypoints"] = arr;
  write_text(out, j.dump(2) + "\n");
  std::cout << "detected " << r.bundle.size() << " keypoints -> " << out << "\n";
  return 0;
}

int cmd_normals(const std::string& depth_path, const std::string& out) {
  DepthMap depth = load_depth(depth_path);
  Tensor normals = normals_from_depth(depth);
  save_pfm3(out, normals);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_match(const std::string& path_a, const std::string& path_b,
              const std::string& weights_path, bool no_lift, const std::string& out,
              const std::string& viz, PipelineConfig cfg) {
  Tensor a = load_image(path_a);
  Tensor b = load_image(path_b);
  ModelWeights w = load_model(weights_path);
  cfg.use_lift = !no_lift;
  PairReport rep = match_pair(a, b, w, cfg);
  rep.image_a = path_a;
  rep.image_b = path_b;
  write_text(out, report_to_json(rep));
  std::cout << rep.matches.matches.size() << " matches (" << rep.matches.provenance << "), "
            << rep.raw_matches.matches.size() << " raw -> " << out << "\n";
  if (!viz.empty()) {
    save_ppm(viz, render_matches(a, b, rep.kps_a, rep.kps_b, rep.matches, rep.h_inlier_mask));
    std::cout << "wrote " << viz << "\n";
  }
  return 0;
}

int cmd_synth(std::uint64_t seed, int count, const std::string& scene, const std::string& out_dir,
              int width, int height, double warp, int points, double ambiguity,
              double outlier_frac) {
  fs::create_directories(out_dir);
  auto path = [&](const std::string& stem, int i, const std::string& ext) {
    return (fs::path(out_dir) / (stem + "_" + zero_pad(i) + ext)).string();
  };
  for (int i = 0; i < count; ++i) {
    std::uint64_t s = SplitMix64::derive(seed, std::uint64_t(i)).next();
    if (scene == "checker" || scene == "noise" || scene == "low_texture") {
      TextureKind kind = scene == "checker"  ? TextureKind::Checker
                         : scene == "noise"  ? TextureKind::Noise
                                             : TextureKind::LowTexture;
      SynthPair p = gen_pair(s, width, height, kind, warp, points);
      save_pgm(path("pair", i, "_a.pgm"), p.image_a);
      save_pgm(path("pair", i, "_b.pgm"), p.image_b);
      ordered_json j;
      j["schema"] = 1;
      j["scene"] = scene;
      j["width"] = width;
      j["height"] = height;
      j["image_a"] = path("pair", i, "_a.pgm");
      j["image_b"] = path("pair", i, "_b.pgm");
      j["h_gt"] = h_to_json(p.h_gt);
      j["corr_a"] = mat_to_json(p.corr_a);
      j["corr_b"] = mat_to_json(p.corr_b);
      write_text(path("pair", i, ".json"), j.dump(2) + "\n");
    } else if (scene == "plane" || scene == "two_planes" || scene == "sphere") {
      DepthScene kind = scene == "plane"        ? DepthScene::Plane
                        : scene == "two_planes" ? DepthScene::TwoPlanes
                                                : DepthScene::Sphere;
      DepthSceneData d = gen_depth_scene(s, width, height, kind);
      save_pfm(path("depth", i, ".pfm"), d.depth);
      save_pfm3(path("normals", i, ".pfm"), d.normals_gt);
      ordered_json j;
      j["schema"] = 1;
      j["scene"] = scene;
      j["width"] = width;
      j["height"] = height;
      j["depth"] = path("depth", i, ".pfm");
      j["normals_gt"] = path("normals", i, ".pfm");
      write_text(path("scene", i, ".json"), j.dump(2) + "\n");
    } else if (scene == "two_view") {
      TwoViewScene t = gen_two_view_scene(s, points, outlier_frac);
      ordered_json j;
      j["schema"] = 1;
      j["scene"] = scene;
      ordered_json k = ordered_json::array();
      for (int r = 0; r < 3; ++r) k.push_back({t.k(r, 0), t.k(r, 1), t.k(r, 2)});
      j["k"] = k;
      ordered_json rot = ordered_json::array();
      for (int r = 0; r < 3; ++r) rot.push_back({t.r_gt(r, 0), t.r_gt(r, 1), t.r_gt(r, 2)});
      j["r_gt"] = rot;
      j["t_gt"] = {t.t_gt.x(), t.t_gt.y(), t.t_gt.z()};
      j["pts_a"] = mat_to_json(t.pts_a);
      j["pts_b"] = mat_to_json(t.pts_b);
      ordered_json outliers = ordered_json::array();
      for (char c : t.is_outlier) outliers.push_back(int(c));
      j["is_outlier"] = outliers;
      write_text(path("twoview", i, ".json"), j.dump(2) + "\n");
    } else if (scene == "lift_batch") {
      LiftBatch b = gen_lift_batch(s, points, ambiguity);
      ordered_json j;
      j["schema"] = 1;
      j["scene"] = scene;
      j["width"] = b.width;
      j["height"] = b.height;
      j["pos_a"] = mat_to_json(b.pos_a);
      j["desc_a"] = mat_to_json(b.desc_a);
      j["normal_a"] = mat_to_json(b.normal_a);
      j["pos_b"] = mat_to_json(b.pos_b);
      j["desc_b"] = mat_to_json(b.desc_b);
      j["normal_b"] = mat_to_json(b.normal_b);
      write_text(path("batch", i, ".json"), j.dump(2) + "\n");
    } else {
      throw CLI::ValidationError("--scene", "unknown scene " + scene);
    }
  }
  std::cout << "wrote " << count << " " << scene << " item(s) to " << out_dir << "\n";
  return 0;
}

std::vector<std::string> sorted_files(const std::string& dir, const std::string& prefix,
                                      const std::string& suffix) {
  if (!fs::is_directory(dir)) throw DataError(dir + ": not a directory");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

LiftBatch batch_from_json(const std::string& path) {
  ordered_json j = ordered_json::parse(read_text(path));
  LiftBatch b;
  b.width = j.at("width").get<int>();
  b.height = j.at("height").get<int>();
  b.pos_a = mat_from_json(j.at("pos_a"), 2);
  b.desc_a = mat_from_json(j.at("desc_a"), 64);
  b.normal_a = mat_from_json(j.at("normal_a"), 3);
  b.pos_b = mat_from_json(j.at("pos_b"), 2);
  b.desc_b = mat_from_json(j.at("desc_b"), 64);
  b.normal_b = mat_from_json(j.at("normal_b"), 3);
  int n = int(b.pos_a.rows());
  b.gt.count_a = b.gt.count_b = n;
  for (int i = 0; i < n; ++i) b.gt.pairs.emplace_back(i, i);
  return b;
}

int cmd_train_lift(const std::string& data_dir, int iters, double lr, std::uint64_t seed,
                   const std::string& out, const std::string& trace_path) {
  std::vector<LiftBatch> data;
  for (const std::string& f : sorted_files(data_dir, "batch_", ".json"))
    data.push_back(batch_from_json(f));
  if (data.empty()) throw DataError(data_dir + ": no batch_*.json files");
  TrainConfig cfg;
  cfg.iterations = iters;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  TrainResult res = train_lift(data, cfg);

  ModelWeights m;
  m.net = NetWeights::he_init(seed);
  m.lift = res.weights.cast<float>();
  save_weights(out, pack_model(m));

  if (!trace_path.empty()) {
    std::ostringstream csv;
    csv << "iteration,loss\n";
    for (std::size_t i = 0; i < res.loss_trace.size(); ++i)
      csv << i << "," << std::setprecision(17) << res.loss_trace[i] << "\n";
    write_text(trace_path, csv.str());
  }
  std::cout << "trained " << iters << " iterations on " << data.size() << " batches; loss "
            << res.loss_trace.front() << " -> " << res.loss_trace.back() << "; wrote " << out
            << "\n";
  return 0;
}

int cmd_eval_homography(const std::string& pairs_dir, const std::string& weights_path,
                        const std::string& thresholds_csv, bool no_lift, const std::string& out,
                        PipelineConfig cfg) {
  std::vector<double> thresholds;
  {
    std::stringstream ss(thresholds_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) thresholds.push_back(std::stod(tok));
    if (thresholds.empty()) throw CLI::ValidationError("--thresholds", "no thresholds given");
  }
  ModelWeights w = load_model(weights_path);
  cfg.use_lift = !no_lift;

  ordered_json pairs = ordered_json::array();
  std::vector<double> acc_sum(thresholds.size(), 0.0);
  int n_pairs = 0;
  for (const std::string& f : sorted_files(pairs_dir, "pair_", ".json")) {
    ordered_json meta = ordered_json::parse(read_text(f));
    Homography h_gt = h_from_json(meta.at("h_gt"));
    Tensor a = load_image(meta.at("image_a").get<std::string>());
    Tensor b = load_image(meta.at("image_b").get<std::string>());
    PairReport rep = match_pair(a, b, w, cfg);
    ordered_json pj;
    pj["pair"] = f;
    pj["matches"] = int(rep.matches.matches.size());
    if (rep.homography_ok) {
      double err = mean_corner_error(rep.h_est, h_gt, a.width, a.height);
      std::vector<double> acc = mha(rep.h_est, h_gt, a.width, a.height, thresholds);
      for (std::size_t t = 0; t < acc.size(); ++t) acc_sum[t] += acc[t];
      pj["corner_error"] = err;
      pj["acc"] = acc;
      pj["failed"] = false;
    } else {
      pj["failed"] = true;  // counts as a miss at every threshold
    }
    pairs.push_back(pj);
    ++n_pairs;
  }
  if (n_pairs == 0) throw DataError(pairs_dir + ": no pair_*.json files");

  ordered_json j;
  j["schema"] = 1;
  j["thresholds"] = thresholds;
  ordered_json mha_j = ordered_json::array();
  for (double s : acc_sum) mha_j.push_back(s / n_pairs);
  j["mha"] = mha_j;
  j["pairs_evaluated"] = n_pairs;
  j["lift"] = !no_lift;
  j["pairs"] = pairs;
  write_text(out, j.dump(2) + "\n");
  std::cout << "MHA over " << n_pairs << " pairs:";
  for (std::size_t t = 0; t < thresholds.size(); ++t)
    std::cout << " @" << thresholds[t] << "px " << acc_sum[t] / n_pairs;
  std::cout << " -> " << out << "\n";
  return 0;
}

int cmd_eval_pose(const std::string& pairs_dir, const std::string& out, int iters,
                  double thresh_px, std::uint64_t seed) {
  std::vector<double> errors;
  ordered_json pairs = ordered_json::array();
  for (const std::string& f : sorted_files(pairs_dir, "twoview_", ".json")) {
    ordered_json meta = ordered_json::parse(read_text(f));
    Eigen::Matrix3d k, r_gt;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        k(r, c) = meta.at("k").at(r).at(c).get<double>();
        r_gt(r, c) = meta.at("r_gt").at(r).at(c).get<double>();
      }
    Eigen::Vector3d t_gt(meta.at("t_gt").at(0).get<double>(), meta.at("t_gt").at(1).get<double>(),
                         meta.at("t_gt").at(2).get<double>());
    MatXd pts_a = mat_from_json(meta.at("pts_a"), 2);
    MatXd pts_b = mat_from_json(meta.at("pts_b"), 2);
    ordered_json pj;
    pj["pair"] = f;
    try {
      RelativePose pose = estimate_pose(pts_a, pts_b, k, k, iters, thresh_px, seed);
      double rot = rotation_error_deg(pose.r, r_gt);
      double err;
      if (t_gt.norm() < 1e-12) {  // planted pure rotation: only R is defined
        err = rot;
        pj["translation_error_deg"] = nullptr;
      } else {
        double trans = translation_angle_deg(pose.t, t_gt);
        err = std::max(rot, trans);
        pj["translation_error_deg"] = trans;
      }
      pj["rotation_error_deg"] = rot;
      pj["degenerate"] = pose.degenerate;
      pj["inliers"] = pose.inlier_count;
      pj["error"] = err;
      errors.push_back(err);
    } catch (const EstimationError& e) {
      pj["failed"] = e.what();
      errors.push_back(std::numeric_limits<double>::infinity());
    }
    pairs.push_back(pj);
  }
  if (errors.empty()) throw DataError(pairs_dir + ": no twoview_*.json files");

  std::vector<double> thresholds = {5.0, 10.0, 20.0};
  std::vector<double> auc = pose_auc(errors, thresholds);
  ordered_json j;
  j["schema"] = 1;
  j["thresholds_deg"] = thresholds;
  j["auc"] = auc;
  j["pairs_evaluated"] = int(errors.size());
  j["pairs"] = pairs;
  write_text(out, j.dump(2) + "\n");
  std::cout << "pose AUC over " << errors.size() << " scenes: @5 " << auc[0] << " @10 " << auc[1]
            << " @20 " << auc[2] << " -> " << out << "\n";
  return 0;
}

int cmd_draw(const std::string& report_path, const std::string& out) {
  PairReport rep = report_from_json(read_text(report_path));
  Tensor a = load_image(rep.image_a);
  Tensor b = load_image(rep.image_b);
  save_ppm(out, render_matches(a, b, rep.kps_a, rep.kps_b, rep.matches, rep.h_inlier_mask));
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liftmatch: local feature matching with 3D-lifted descriptors"};
  app.require_subcommand(1);

  auto* init = app.add_subcommand("init-weights", "write a random-initialized weight file");
  std::uint64_t init_seed = 0;
  std::string init_out;
  init->add_option("--seed", init_seed, "initialization seed");
  init->add_option("--out", init_out, "output .lfw path")->required();

  auto* detect = app.add_subcommand("detect", "detect keypoints and write them as JSON");
  std::string d_image, d_weights, d_out;
  ConfigFlags d_cfg;
  detect->add_option("--image", d_image, "input image (PGM/PPM)")->required();
  detect->add_option("--weights", d_weights, "LFW1 weight file")->required();
  detect->add_option("--out", d_out, "output keypoint JSON")->required();
  d_cfg.attach(detect);

  auto* normals = app.add_subcommand("normals", "depth map to surface normal map");
  std::string n_depth, n_out;
  normals->add_option("--depth", n_depth, "input depth PFM (Pf)")->required();
  normals->add_option("--out", n_out, "output 3-channel PFM (PF)")->required();

  auto* match = app.add_subcommand("match", "match two images and write a report");
  std::string m_a, m_b, m_weights, m_out, m_viz;
  bool m_no_lift = false;
  ConfigFlags m_cfg;
  match->add_option("--image-a", m_a)->required();
  match->add_option("--image-b", m_b)->required();
  match->add_option("--weights", m_weights)->required();
  match->add_option("--out", m_out, "output report JSON")->required();
  match->add_option("--viz", m_viz, "optional side-by-side PPM rendering");
  match->add_flag("--no-lift", m_no_lift, "match raw descriptors instead of lifted ones");
  m_cfg.attach(match);

  auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
  std::uint64_t s_seed = 0;
  int s_count = 1, s_width = 256, s_height = 256, s_points = 200;
  double s_warp = 16.0, s_ambiguity = 0.5, s_outlier = 0.3;
  std::string s_scene = "checker", s_out;
  synth->add_option("--seed", s_seed);
  synth->add_option("--count", s_count);
  synth->add_option("--scene", s_scene,
                    "checker|noise|low_texture|plane|two_planes|sphere|two_view|lift_batch");
  synth->add_option("--out", s_out, "output directory")->required();
  synth->add_option("--width", s_width);
  synth->add_option("--height", s_height);
  synth->add_option("--warp", s_warp, "max corner perturbation (px)");
  synth->add_option("--points", s_points, "correspondences / scene points / batch size");
  synth->add_option("--ambiguity", s_ambiguity, "lift_batch ambiguous fraction");
  synth->add_option("--outlier-frac", s_outlier, "two_view outlier fraction");

  auto* train = app.add_subcommand("train-lift", "train the lifting module on batch files");
  std::string t_data, t_out, t_trace;
  int t_iters = 200;
  double t_lr = 1e-4;
  std::uint64_t t_seed = 0;
  train->add_option("--data", t_data, "directory of batch_*.json files")->required();
  train->add_option("--iters", t_iters);
  train->add_option("--lr", t_lr);
  train->add_option("--seed", t_seed);
  train->add_option("--out", t_out, "output .lfw path")->required();
  train->add_option("--trace", t_trace, "per-iteration loss CSV");

  auto* evalh = app.add_subcommand("eval-homography", "MHA over a directory of synth pairs");
  std::string eh_pairs, eh_weights, eh_out, eh_thresholds = "3,5,7";
  bool eh_no_lift = false;
  ConfigFlags eh_cfg;
  evalh->add_option("--pairs", eh_pairs, "directory with pair_*.json")->required();
  evalh->add_option("--weights", eh_weights)->required();
  evalh->add_option("--thresholds", eh_thresholds, "comma-separated pixel thresholds");
  evalh->add_option("--out", eh_out)->required();
  evalh->add_flag("--no-lift", eh_no_lift);
  eh_cfg.attach(evalh);

  auto* evalp = app.add_subcommand("eval-pose", "pose AUC over planted two-view scenes");
  std::string ep_pairs, ep_weights, ep_out;
  int ep_iters = 2000;
  double ep_thresh = 3.0;
  std::uint64_t ep_seed = 0;
  evalp->add_option("--pairs", ep_pairs, "directory with twoview_*.json")->required();
  evalp->add_option("--weights", ep_weights,
                    "accepted for interface parity; planted scenes carry their own correspondences");
  evalp->add_option("--out", ep_out)->required();
  evalp->add_option("--iters", ep_iters);
  evalp->add_option("--thresh-px", ep_thresh);
  evalp->add_option("--seed", ep_seed);

  auto* draw = app.add_subcommand("draw", "render a match report to a PPM image");
  std::string dr_report, dr_out;
  draw->add_option("--report", dr_report)->required();
  draw->add_option("--out", dr_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (init->parsed()) return cmd_init_weights(init_seed, init_out);
    if (detect->parsed()) return cmd_detect(d_image, d_weights, d_out, d_cfg.resolve(detect));
    if (normals->parsed()) return cmd_normals(n_depth, n_out);
    if (match->parsed())
      return cmd_match(m_a, m_b, m_weights, m_no_lift, m_out, m_viz, m_cfg.resolve(match));
    if (synth->parsed())
      return cmd_synth(s_seed, s_count, s_scene, s_out, s_width, s_height, s_warp, s_points,
                       s_ambiguity, s_outlier);
    if (train->parsed()) return cmd_train_lift(t_data, t_iters, t_lr, t_seed, t_out, t_trace);
    if (evalh->parsed())
      return cmd_eval_homography(eh_pairs, eh_weights, eh_thresholds, eh_no_lift, eh_out,
                                 eh_cfg.resolve(evalh));
    if (evalp->parsed()) return cmd_eval_pose(ep_pairs, ep_out, ep_iters, ep_thresh, ep_seed);
    if (draw->parsed()) return cmd_draw(dr_report, dr_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
