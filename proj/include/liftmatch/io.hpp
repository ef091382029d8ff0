#pragma once

#include "liftmatch/backbone.hpp"
#include "liftmatch/geometry.hpp"
#include "liftmatch/keypoints.hpp"
#include "liftmatch/lifting.hpp"
#include "liftmatch/normals.hpp"

#include <map>
#include <string>
#include <vector>

namespace liftmatch {

/// Loads binary PGM (P5) or PPM (P6), maxval 255, as floats in [0, 1].
/// Grayscale expands to 3 identical channels. Parse errors carry the byte
/// offset.
Tensor load_image(const std::string& path);

/// Writes a grayscale P5 image; multi-channel inputs are averaged.
void save_pgm(const std::string& path, const Tensor& image);

/// Writes a 3-channel P6 image.
void save_ppm(const std::string& path, const Tensor& image);

/// Loads a grayscale PFM ("Pf"). The scale field's sign gives endianness and
/// rows are normalized to top-down. Depth values must be positive and
/// finite.
DepthMap load_depth(const std::string& path);

/// Writes a grayscale PFM; big_endian selects the scale-field sign.
void save_pfm(const std::string& path, const DepthMap& depth, bool big_endian = false);

/// 3-channel PFM ("PF") for normal maps.
void save_pfm3(const std::string& path, const Tensor& map3);
Tensor load_pfm3(const std::string& path);

/// One entry of the LFW1 weight container.
struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;  // row-major over dims
};

/// LFW1 container: magic "LFW1", little-endian, u32 tensor count; per
/// tensor u16 name length + UTF-8 name, u8 ndim, u32 dims[], float payload.
/// Unknown tensor names survive a load/save round trip.
struct WeightContainer {
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
  void add(const std::string& name, std::vector<std::uint32_t> dims, std::vector<float> data);
};

WeightContainer load_weights(const std::string& path);
void save_weights(const std::string& path, const WeightContainer& c);

struct ModelWeights {
  NetWeights net;
  LiftWeights lift;
};

WeightContainer pack_model(const ModelWeights& m);
ModelWeights unpack_model(const WeightContainer& c);

/// Flat `key = value` config file; '#' starts a comment.
std::map<std::string, std::string> load_config(const std::string& path);

/// Side-by-side match rendering: Bresenham lines, green where the mask is
/// true and red where false, keypoints as 3x3 squares.
Tensor render_matches(const Tensor& a, const Tensor& b, const std::vector<Keypoint>& kps_a,
                      const std::vector<Keypoint>& kps_b, const MatchSet& matches,
                      const std::vector<char>& correct_mask);

}  // namespace liftmatch
