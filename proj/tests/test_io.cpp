#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "liftmatch/io.hpp"
#include "liftmatch/pipeline.hpp"

#include <fstream>

using namespace liftmatch;
using liftmatch::testing::temp_dir;

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("load_image parses P5 bytes with the /255 convention") {
  auto dir = temp_dir("io_p5");
  std::string path = (dir / "t.pgm").string();
  write_bytes(path, std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\x80' + '\x40');
  Tensor img = load_image(path);
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.channels == 3);  // grayscale expands to 3 identical channels
  CHECK(img.at(0, 0, 0) == 0.0f);
  CHECK(img.at(0, 1, 0) == 1.0f);
  CHECK(img.at(1, 0, 0) == doctest::Approx(128.0f / 255));
  CHECK(img.at(1, 1, 2) == doctest::Approx(64.0f / 255));
}

TEST_CASE("load_image parses P6 and honors comments") {
  auto dir = temp_dir("io_p6");
  std::string path = (dir / "t.ppm").string();
  write_bytes(path, std::string("P6 # comment\n1 1\n255\n") + '\xff' + '\x00' + '\x00');
  Tensor img = load_image(path);
  CHECK(img.at(0, 0, 0) == 1.0f);
  CHECK(img.at(0, 0, 1) == 0.0f);
  CHECK(img.at(0, 0, 2) == 0.0f);
}

TEST_CASE("load_image error paths name the problem") {
  auto dir = temp_dir("io_err");
  std::string p4 = (dir / "p4.pbm").string();
  write_bytes(p4, "P4\n1 1\n\x00");
  CHECK_THROWS_WITH_AS(load_image(p4), doctest::Contains("P4"), DataError);

  std::string trunc = (dir / "trunc.pgm").string();
  write_bytes(trunc, "P5\n4 4\n255\nab");
  CHECK_THROWS_WITH_AS(load_image(trunc), doctest::Contains("truncated"), DataError);

  std::string maxval = (dir / "maxval.pgm").string();
  write_bytes(maxval, std::string("P5\n1 1\n65535\n") + '\x00' + '\x00');
  CHECK_THROWS_WITH_AS(load_image(maxval), doctest::Contains("maxval"), DataError);
}

TEST_CASE("PGM and PPM writers round-trip deterministically") {
  auto dir = temp_dir("io_roundtrip");
  Tensor img = liftmatch::testing::random_tensor(3, 17, 23, 3, 0.0f, 1.0f);
  std::string a = (dir / "a.ppm").string();
  std::string b = (dir / "b.ppm").string();
  save_ppm(a, img);
  save_ppm(b, img);
  CHECK(read_bytes(a) == read_bytes(b));
  Tensor back = load_image(a);
  CHECK(back.width == 23);
  CHECK(back.height == 17);
  // quantization to bytes and back stays within half a step
  CHECK((back.data - img.data).cwiseAbs().maxCoeff() <= 0.5f / 255 + 1e-6f);
}

TEST_CASE("PFM depth round trip, both endiannesses") {
  auto dir = temp_dir("io_pfm");
  DepthMap depth(4, 5, 1);
  SplitMix64 rng(5);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 5; ++u) depth.at(v, u, 0) = 1.0 + rng.uniform();

  std::string le = (dir / "le.pfm").string();
  std::string be = (dir / "be.pfm").string();
  save_pfm(le, depth, /*big_endian=*/false);
  save_pfm(be, depth, /*big_endian=*/true);
  CHECK(read_bytes(le) != read_bytes(be));
  DepthMap from_le = load_depth(le);
  DepthMap from_be = load_depth(be);
  CHECK(from_le.data == from_be.data);  // endianness is a header property only
  // float32 storage: values match to float precision
  CHECK((from_le.data - depth.data).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("load_depth rejects nonpositive values with the pixel location") {
  auto dir = temp_dir("io_pfm_bad");
  DepthMap depth = DepthMap(3, 3, 1);
  depth.data.setConstant(2.0);
  depth.at(1, 2, 0) = 0.0;
  std::string p = (dir / "bad.pfm").string();
  save_pfm(p, depth);
  CHECK_THROWS_WITH_AS(load_depth(p), doctest::Contains("(2, 1)"), DataError);
}

TEST_CASE("3-channel PFM round trip preserves normal maps") {
  auto dir = temp_dir("io_pfm3");
  Tensor n = liftmatch::testing::random_tensor(7, 6, 6, 3);
  n.data = l2_normalize(std::move(n.data));
  std::string p = (dir / "n.pfm").string();
  save_pfm3(p, n);
  Tensor back = load_pfm3(p);
  CHECK(back.data == n.data);  // float32 in, float32 out
}

TEST_CASE("LFW1 weight container round trip is bit exact") {
  auto dir = temp_dir("io_lfw");
  WeightContainer c;
  c.add("alpha", {2, 3}, {1, 2, 3, 4, 5, 6});
  c.add("beta", {4}, {0.5f, -0.5f, 100.0f, 1e-30f});
  c.add("custom.extra", {1, 1, 1}, {42.0f});  // unknown names survive
  std::string p1 = (dir / "w1.lfw").string();
  std::string p2 = (dir / "w2.lfw").string();
  save_weights(p1, c);
  WeightContainer back = load_weights(p1);
  REQUIRE(back.tensors.size() == 3);
  CHECK(back.tensors[0].name == "alpha");
  CHECK(back.tensors[0].dims == std::vector<std::uint32_t>{2, 3});
  CHECK(back.tensors[0].data == c.tensors[0].data);
  CHECK(back.find("custom.extra") != nullptr);
  save_weights(p2, back);
  CHECK(read_bytes(p1) == read_bytes(p2));
}

TEST_CASE("LFW1 handles an empty container") {
  auto dir = temp_dir("io_lfw_empty");
  std::string p = (dir / "empty.lfw").string();
  save_weights(p, WeightContainer{});
  WeightContainer back = load_weights(p);
  CHECK(back.tensors.empty());
}

TEST_CASE("LFW1 error paths") {
  auto dir = temp_dir("io_lfw_err");
  std::string magic = (dir / "magic.lfw").string();
  write_bytes(magic, "NOPE\x00\x00\x00\x00");
  CHECK_THROWS_WITH_AS(load_weights(magic), doctest::Contains("magic"), DataError);

  WeightContainer c;
  c.add("t", {2, 2}, {1, 2, 3, 4});
  std::string good = (dir / "good.lfw").string();
  save_weights(good, c);
  std::string bytes = read_bytes(good);
  std::string truncated = (dir / "trunc.lfw").string();
  write_bytes(truncated, bytes.substr(0, bytes.size() - 6));
  CHECK_THROWS_WITH_AS(load_weights(truncated), doctest::Contains("t"), DataError);

  WeightContainer dup;
  dup.tensors.push_back({"same", {1}, {1.0f}});
  dup.tensors.push_back({"same", {1}, {2.0f}});
  std::string dup_path = (dir / "dup.lfw").string();
  CHECK_THROWS_WITH_AS(save_weights(dup_path, dup), doctest::Contains("duplicate"), DataError);

  CHECK_THROWS_AS(c.add("t", {1}, {9.0f}), DataError);           // duplicate via add
  CHECK_THROWS_AS(c.add("len", {3}, {1.0f}), DataError);         // length mismatch
}

TEST_CASE("model weights survive pack/unpack") {
  ModelWeights m;
  m.net = NetWeights::he_init(3);
  m.lift = LiftWeights::he_init(4);
  WeightContainer c = pack_model(m);
  ModelWeights back = unpack_model(c);
  CHECK(back.net.enc[0].kernel == m.net.enc[0].kernel);
  CHECK(back.net.enc[4].bias == m.net.enc[4].bias);
  CHECK(back.net.kpt.kernel == m.net.kpt.kernel);
  CHECK(back.lift.mlp3d.w1 == m.lift.mlp3d.w1);
  CHECK(back.lift.attn[2].wv == m.lift.attn[2].wv);

  WeightContainer missing = c;
  missing.tensors.erase(missing.tensors.begin());  // drop net.enc1.kernel
  CHECK_THROWS_WITH_AS(unpack_model(missing), doctest::Contains("net.enc1"), DataError);
}

TEST_CASE("config files parse key = value lines") {
  auto dir = temp_dir("io_cfg");
  std::string p = (dir / "c.cfg").string();
  write_bytes(p, "# comment\ntop_k = 128\n  nms_radius=2 # trailing\n\nseed = 99\n");
  auto kv = load_config(p);
  CHECK(kv.at("top_k") == "128");
  CHECK(kv.at("nms_radius") == "2");
  CHECK(kv.at("seed") == "99");

  PipelineConfig cfg;
  cfg.apply(kv);
  CHECK(cfg.top_k == 128);
  CHECK(cfg.nms_radius == 2);
  CHECK(cfg.seed == 99);

  std::string bad = (dir / "bad.cfg").string();
  write_bytes(bad, "key_without_value\n");
  CHECK_THROWS_AS(load_config(bad), DataError);
  CHECK_THROWS_AS(cfg.apply({{"unknown_key", "1"}}), DataError);
}

TEST_CASE("PipelineConfig serializes to its own config format") {
  auto dir = temp_dir("io_cfg_rt");
  PipelineConfig cfg;
  cfg.top_k = 321;
  cfg.nms_radius = 7;
  cfg.min_similarity = 0.25f;
  cfg.use_lift = false;
  cfg.seed = 123456789;
  std::string p = (dir / "rt.cfg").string();
  write_bytes(p, cfg.serialize());
  PipelineConfig back;
  back.apply(load_config(p));
  CHECK(back.top_k == cfg.top_k);
  CHECK(back.nms_radius == cfg.nms_radius);
  CHECK(back.min_similarity == cfg.min_similarity);
  CHECK(back.use_lift == cfg.use_lift);
  CHECK(back.seed == cfg.seed);
  CHECK(back.serialize() == cfg.serialize());
}

TEST_CASE("render_matches draws lines with the documented colors") {
  Tensor a = Tensor::constant(16, 16, 3, 0.5f);
  Tensor b = Tensor::constant(16, 16, 3, 0.5f);
  std::vector<Keypoint> ka = {{2, 2, 1.0f}, {4, 12, 1.0f}};
  std::vector<Keypoint> kb = {{9, 2, 1.0f}, {12, 12, 1.0f}};
  MatchSet ms;
  ms.matches = {{0, 0, 1.0f}, {1, 1, 0.9f}};
  std::vector<char> mask = {1, 0};
  Tensor canvas = render_matches(a, b, ka, kb, ms, mask);
  CHECK(canvas.width == 32);
  CHECK(canvas.height == 16);
  // endpoints: green line at (2,2) -> (16+9, 2); red at (4,12) -> (16+12,12)
  // endpoints themselves are keypoint squares, so probe just inside
  CHECK(canvas.at(2, 6, 1) == 1.0f);   // green channel on the top line
  CHECK(canvas.at(2, 6, 0) == 0.0f);
  CHECK(canvas.at(12, 8, 0) == 1.0f);  // red channel on the bottom line
  CHECK(canvas.at(12, 8, 1) == 0.0f);
  // keypoints drawn as 3x3 squares (blue)
  CHECK(canvas.at(3, 3, 2) == 1.0f);

  // no matches: just the side-by-side canvas with squares
  Tensor plain = render_matches(a, b, ka, kb, MatchSet{}, {});
  CHECK(plain.at(8, 8, 0) == 0.5f);
}

TEST_CASE("render_matches correctness mask agrees with a transfer-error mask") {
  // plant a translation homography and color by symmetric transfer error
  Homography h = Homography::Identity();
  h(0, 2) = 4.0;
  std::vector<Keypoint> ka = {{2, 3, 1}, {8, 9, 1}, {1, 12, 1}};
  std::vector<Keypoint> kb = {{6, 3, 1}, {14, 9, 1}, {9, 2, 1}};  // third is wrong
  MatchSet ms;
  ms.matches = {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}};
  std::vector<char> mask;
  for (const Match& m : ms.matches) {
    Eigen::Vector3d p = h * Eigen::Vector3d(ka[std::size_t(m.a)].x, ka[std::size_t(m.a)].y, 1);
    double err = (p.hnormalized() -
                  Eigen::Vector2d(kb[std::size_t(m.b)].x, kb[std::size_t(m.b)].y)).norm();
    mask.push_back(err < 3.0);
  }
  CHECK(mask == std::vector<char>{1, 1, 0});
  Tensor a = Tensor::constant(16, 16, 3, 0.0f);
  Tensor canvas = render_matches(a, a, ka, kb, ms, mask);
  CHECK(canvas.at(3, 4, 1) == 1.0f);  // first line green
}

TEST_CASE("match reports round-trip through JSON") {
  PairReport r;
  r.image_a = "a.pgm";
  r.image_b = "b.pgm";
  r.width_a = 64;
  r.height_a = 48;
  r.width_b = 64;
  r.height_b = 48;
  r.kps_a = {{1.5f, 2.5f, 0.9f}, {3.0f, 4.0f, 0.8f}};
  r.kps_b = {{5.0f, 6.0f, 0.7f}};
  r.matches.provenance = "lifted";
  r.matches.matches = {{0, 0, 0.99f}};
  r.raw_matches.provenance = "raw";
  r.raw_matches.matches = {{1, 0, 0.55f}};
  r.homography_ok = true;
  r.h_est << 1, 0, 2, 0, 1, 3, 0, 0, 1;
  r.h_inliers = 1;
  r.h_inlier_mask = {1};

  std::string text = report_to_json(r);
  PairReport back = report_from_json(text);
  CHECK(back.image_a == r.image_a);
  CHECK(back.kps_a.size() == 2);
  CHECK(back.kps_a[0].x == 1.5f);
  CHECK(back.matches.matches[0].similarity == 0.99f);
  CHECK(back.raw_matches.matches[0].a == 1);
  CHECK(back.h_est == r.h_est);
  // serialization is deterministic
  CHECK(report_to_json(back) == text);

  CHECK_THROWS_AS(report_from_json("{not json"), DataError);
  CHECK_THROWS_AS(report_from_json("{\"schema\": 1}"), DataError);
}
