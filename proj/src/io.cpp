#include "liftmatch/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace liftmatch {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path + ": cannot open file for writing");
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f) throw DataError(path + ": write failed");
}

/// Byte cursor with offset-carrying errors for the PNM/PFM parsers.
struct Reader {
  const std::string& path;
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << path << ": " << what << " at byte " << pos;
    throw DataError(msg.str());
  }

  bool eof() const { return pos >= bytes.size(); }
  std::uint8_t peek() const { return eof() ? 0 : bytes[pos]; }

  void skip_space_and_comments() {
    while (!eof()) {
      std::uint8_t c = peek();
      if (c == '#') {
        while (!eof() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }

  int read_int() {
    skip_space_and_comments();
    if (eof() || !std::isdigit(peek())) fail("expected integer");
    long v = 0;
    while (!eof() && std::isdigit(peek())) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 30) fail("integer out of range");
      ++pos;
    }
    return int(v);
  }

  std::string read_token() {
    skip_space_and_comments();
    std::string t;
    while (!eof() && !std::isspace(peek())) t.push_back(char(bytes[pos++]));
    if (t.empty()) fail("expected token");
    return t;
  }
};

float byte_to_float(std::uint8_t b) { return float(b) / 255.0f; }

std::uint8_t float_to_byte(float v) {
  return std::uint8_t(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

}  // namespace

Tensor load_image(const std::string& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  Reader r{path, bytes};
  std::string magic = r.read_token();
  if (magic != "P5" && magic != "P6")
    throw DataError(path + ": unsupported PNM format \"" + magic + "\" (only binary P5/P6)");
  int w = r.read_int();
  int h = r.read_int();
  int maxval = r.read_int();
  if (w < 1 || h < 1) r.fail("invalid dimensions");
  if (maxval != 255) r.fail("unsupported maxval (must be 255)");
  if (r.eof() || !std::isspace(r.peek())) r.fail("expected single whitespace after maxval");
  ++r.pos;
  const int ch = magic == "P6" ? 3 : 1;
  std::size_t need = std::size_t(w) * h * ch;
  if (bytes.size() - r.pos < need) r.fail("truncated pixel payload");
  Tensor img(h, w, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (ch == 1) {
        img.pixel(y, x).setConstant(byte_to_float(bytes[r.pos++]));
      } else {
        img.at(y, x, 0) = byte_to_float(bytes[r.pos++]);
        img.at(y, x, 1) = byte_to_float(bytes[r.pos++]);
        img.at(y, x, 2) = byte_to_float(bytes[r.pos++]);
      }
    }
  }
  return img;
}

void save_pgm(const std::string& path, const Tensor& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + std::size_t(image.pixels()));
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      out.push_back(char(float_to_byte(image.pixel(y, x).mean())));
  write_file(path, out);
}

void save_ppm(const std::string& path, const Tensor& image) {
  if (image.channels != 3) throw std::invalid_argument("save_ppm: need 3 channels");
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + std::size_t(image.pixels()) * 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) out.push_back(char(float_to_byte(image.at(y, x, c))));
  write_file(path, out);
}

namespace {

TensorT<double> load_pfm_impl(const std::string& path, int expected_channels) {
  std::vector<std::uint8_t> bytes = read_file(path);
  Reader r{path, bytes};
  std::string magic = r.read_token();
  int channels = magic == "PF" ? 3 : magic == "Pf" ? 1 : 0;
  if (channels == 0) throw DataError(path + ": not a PFM file (magic \"" + magic + "\")");
  if (channels != expected_channels)
    throw DataError(path + ": expected " + std::to_string(expected_channels) +
                    "-channel PFM, got \"" + magic + "\"");
  int w = r.read_int();
  int h = r.read_int();
  std::string scale_tok = r.read_token();
  double scale = std::strtod(scale_tok.c_str(), nullptr);
  if (scale == 0.0) r.fail("invalid scale field");
  bool file_little = scale < 0.0;
  if (r.eof() || !std::isspace(r.peek())) r.fail("expected single whitespace after scale");
  ++r.pos;
  std::size_t count = std::size_t(w) * h * channels;
  if (bytes.size() - r.pos < count * 4) r.fail("truncated float payload");

  TensorT<double> out(h, w, channels);
  const bool host_little = std::endian::native == std::endian::little;
  // PFM stores rows bottom-up; normalize to top-down.
  for (int row = 0; row < h; ++row) {
    int y = h - 1 - row;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint32_t u;
        std::memcpy(&u, bytes.data() + r.pos, 4);
        r.pos += 4;
        if (file_little != host_little) u = swap32(u);
        float f;
        std::memcpy(&f, &u, 4);
        out.at(y, x, c) = double(f);
      }
    }
  }
  return out;
}

void save_pfm_impl(const std::string& path, const TensorT<double>& map, bool big_endian) {
  const char* magic = map.channels == 3 ? "PF" : "Pf";
  std::string out = std::string(magic) + "\n" + std::to_string(map.width) + " " +
                    std::to_string(map.height) + "\n" + (big_endian ? "1.0" : "-1.0") + "\n";
  const bool host_little = std::endian::native == std::endian::little;
  const bool file_little = !big_endian;
  for (int row = 0; row < map.height; ++row) {
    int y = map.height - 1 - row;  // bottom-up on disk
    for (int x = 0; x < map.width; ++x) {
      for (int c = 0; c < map.channels; ++c) {
        float f = float(map.at(y, x, c));
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        if (file_little != host_little) u = swap32(u);
        char b[4];
        std::memcpy(b, &u, 4);
        out.append(b, 4);
      }
    }
  }
  write_file(path, out);
}

}  // namespace

DepthMap load_depth(const std::string& path) {
  DepthMap depth = load_pfm_impl(path, 1);
  validate_depth(depth);
  return depth;
}

void save_pfm(const std::string& path, const DepthMap& depth, bool big_endian) {
  save_pfm_impl(path, depth, big_endian);
}

void save_pfm3(const std::string& path, const Tensor& map3) {
  if (map3.channels != 3) throw std::invalid_argument("save_pfm3: need 3 channels");
  save_pfm_impl(path, map3.cast<double>(), false);
}

Tensor load_pfm3(const std::string& path) { return load_pfm_impl(path, 3).cast<float>(); }

const NamedTensor* WeightContainer::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void WeightContainer::add(const std::string& name, std::vector<std::uint32_t> dims,
                          std::vector<float> data) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  if (n != data.size()) throw DataError("weight container: payload length mismatch for " + name);
  if (find(name)) throw DataError("weight container: duplicate tensor name " + name);
  tensors.push_back({name, std::move(dims), std::move(data)});
}

WeightContainer load_weights(const std::string& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n, const std::string& what) {
    if (bytes.size() - pos < n) throw DataError(path + ": truncated container (" + what + ")");
  };
  auto read_u16 = [&]() {
    need(2, "u16");
    std::uint16_t v = std::uint16_t(bytes[pos]) | std::uint16_t(bytes[pos + 1]) << 8;
    pos += 2;
    return v;
  };
  auto read_u32 = [&]() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  };

  need(4, "magic");
  if (std::memcmp(bytes.data(), "LFW1", 4) != 0)
    throw DataError(path + ": magic mismatch (not an LFW1 weight file)");
  pos = 4;
  std::uint32_t count = read_u32();
  WeightContainer c;
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t name_len = read_u16();
    need(name_len, "tensor name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + pos), name_len);
    pos += name_len;
    if (!names.insert(name).second)
      throw DataError(path + ": duplicate tensor name " + name);
    need(1, "ndim");
    std::uint8_t ndim = bytes[pos++];
    std::vector<std::uint32_t> dims(ndim);
    std::size_t n = 1;
    for (auto& d : dims) {
      d = read_u32();
      n *= d;
      if (n > (std::size_t(1) << 32)) throw DataError(path + ": tensor " + name + " too large");
    }
    if (bytes.size() - pos < n * 4)
      throw DataError(path + ": truncated payload for tensor " + name);
    std::vector<float> data(n);
    if (std::endian::native == std::endian::little) {
      std::memcpy(data.data(), bytes.data() + pos, n * 4);
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        std::uint32_t u;
        std::memcpy(&u, bytes.data() + pos + 4 * j, 4);
        u = swap32(u);
        std::memcpy(&data[j], &u, 4);
      }
    }
    pos += n * 4;
    c.tensors.push_back({std::move(name), std::move(dims), std::move(data)});
  }
  return c;
}

void save_weights(const std::string& path, const WeightContainer& c) {
  std::set<std::string> names;
  for (const auto& t : c.tensors) {
    if (!names.insert(t.name).second)
      throw DataError("save_weights: duplicate tensor name " + t.name);
    if (t.name.size() > 0xFFFF) throw DataError("save_weights: tensor name too long");
    if (t.dims.size() > 0xFF) throw DataError("save_weights: too many dims for " + t.name);
    std::size_t n = 1;
    for (auto d : t.dims) n *= d;
    if (n != t.data.size())
      throw DataError("save_weights: payload length mismatch for " + t.name);
  }
  std::string out = "LFW1";
  auto put_u16 = [&](std::uint16_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char(v >> 8));
  };
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
  };
  put_u32(std::uint32_t(c.tensors.size()));
  for (const auto& t : c.tensors) {
    put_u16(std::uint16_t(t.name.size()));
    out += t.name;
    out.push_back(char(t.dims.size()));
    for (auto d : t.dims) put_u32(d);
    std::size_t base = out.size();
    out.resize(base + t.data.size() * 4);
    if (std::endian::native == std::endian::little) {
      std::memcpy(out.data() + base, t.data.data(), t.data.size() * 4);
    } else {
      for (std::size_t j = 0; j < t.data.size(); ++j) {
        std::uint32_t u;
        std::memcpy(&u, &t.data[j], 4);
        u = swap32(u);
        std::memcpy(out.data() + base + 4 * j, &u, 4);
      }
    }
  }
  write_file(path, out);
}

namespace {

std::vector<float> mat_data(const MatXf& m) {
  return std::vector<float>(m.data(), m.data() + m.size());
}

std::vector<float> vec_data(const VecXf& v) {
  return std::vector<float>(v.data(), v.data() + v.size());
}

void pack_conv(WeightContainer& c, const std::string& prefix, const ConvParams& p,
               std::uint32_t cin, std::uint32_t cout) {
  c.add(prefix + ".kernel", {std::uint32_t(p.k), std::uint32_t(p.k), cin, cout},
        mat_data(p.kernel));
  c.add(prefix + ".bias", {cout}, vec_data(p.bias));
}

ConvParams unpack_conv(const WeightContainer& c, const std::string& prefix, int k, int cin,
                       int cout) {
  const NamedTensor* kt = c.find(prefix + ".kernel");
  const NamedTensor* bt = c.find(prefix + ".bias");
  if (!kt || !bt) throw DataError("weights: missing tensor " + prefix + ".kernel/.bias");
  std::vector<std::uint32_t> want = {std::uint32_t(k), std::uint32_t(k), std::uint32_t(cin),
                                     std::uint32_t(cout)};
  if (kt->dims != want) throw DataError("weights: bad dims for " + prefix + ".kernel");
  if (bt->dims != std::vector<std::uint32_t>{std::uint32_t(cout)})
    throw DataError("weights: bad dims for " + prefix + ".bias");
  ConvParams p;
  p.k = k;
  p.stride = 1;
  p.padding = (k - 1) / 2;
  p.kernel = Eigen::Map<const MatXf>(kt->data.data(), k * k * cin, cout);
  p.bias = Eigen::Map<const VecXf>(bt->data.data(), cout);
  return p;
}

void pack_mat(WeightContainer& c, const std::string& name, const MatXf& m) {
  c.add(name, {std::uint32_t(m.rows()), std::uint32_t(m.cols())}, mat_data(m));
}

void pack_vec(WeightContainer& c, const std::string& name, const VecXf& v) {
  c.add(name, {std::uint32_t(v.size())}, vec_data(v));
}

MatXf unpack_mat(const WeightContainer& c, const std::string& name, int rows, int cols) {
  const NamedTensor* t = c.find(name);
  if (!t) throw DataError("weights: missing tensor " + name);
  if (t->dims != std::vector<std::uint32_t>{std::uint32_t(rows), std::uint32_t(cols)})
    throw DataError("weights: bad dims for " + name);
  return Eigen::Map<const MatXf>(t->data.data(), rows, cols);
}

VecXf unpack_vec(const WeightContainer& c, const std::string& name, int size) {
  const NamedTensor* t = c.find(name);
  if (!t) throw DataError("weights: missing tensor " + name);
  if (t->dims != std::vector<std::uint32_t>{std::uint32_t(size)})
    throw DataError("weights: bad dims for " + name);
  return Eigen::Map<const VecXf>(t->data.data(), size);
}

constexpr int kDepths[5] = {4, 8, 16, 32, 64};

}  // namespace

WeightContainer pack_model(const ModelWeights& m) {
  WeightContainer c;
  int cin = 3;
  for (int b = 0; b < 5; ++b) {
    pack_conv(c, "net.enc" + std::to_string(b + 1), m.net.enc[std::size_t(b)], cin, kDepths[b]);
    cin = kDepths[b];
  }
  pack_conv(c, "net.fuse3", m.net.fuse3, 16, 64);
  pack_conv(c, "net.fuse4", m.net.fuse4, 32, 64);
  pack_conv(c, "net.fuse5", m.net.fuse5, 64, 64);
  pack_conv(c, "net.kpt", m.net.kpt, 64, 65);
  pack_conv(c, "net.nrm", m.net.nrm, 64, 3);
  pack_mat(c, "lift.mlp2d.w1", m.lift.mlp2d.w1);
  pack_vec(c, "lift.mlp2d.b1", m.lift.mlp2d.b1);
  pack_mat(c, "lift.mlp2d.w2", m.lift.mlp2d.w2);
  pack_vec(c, "lift.mlp2d.b2", m.lift.mlp2d.b2);
  pack_mat(c, "lift.mlp3d.w1", m.lift.mlp3d.w1);
  pack_vec(c, "lift.mlp3d.b1", m.lift.mlp3d.b1);
  pack_mat(c, "lift.mlp3d.w2", m.lift.mlp3d.w2);
  pack_vec(c, "lift.mlp3d.b2", m.lift.mlp3d.b2);
  for (int l = 0; l < 3; ++l) {
    std::string p = "lift.attn" + std::to_string(l);
    pack_mat(c, p + ".wq", m.lift.attn[std::size_t(l)].wq);
    pack_mat(c, p + ".wk", m.lift.attn[std::size_t(l)].wk);
    pack_mat(c, p + ".wv", m.lift.attn[std::size_t(l)].wv);
  }
  return c;
}

ModelWeights unpack_model(const WeightContainer& c) {
  ModelWeights m;
  int cin = 3;
  for (int b = 0; b < 5; ++b) {
    m.net.enc[std::size_t(b)] = unpack_conv(c, "net.enc" + std::to_string(b + 1), 3, cin, kDepths[b]);
    cin = kDepths[b];
  }
  m.net.fuse3 = unpack_conv(c, "net.fuse3", 1, 16, 64);
  m.net.fuse4 = unpack_conv(c, "net.fuse4", 1, 32, 64);
  m.net.fuse5 = unpack_conv(c, "net.fuse5", 1, 64, 64);
  m.net.kpt = unpack_conv(c, "net.kpt", 1, 64, 65);
  m.net.nrm = unpack_conv(c, "net.nrm", 1, 64, 3);
  m.lift.mlp2d.w1 = unpack_mat(c, "lift.mlp2d.w1", 64, 64);
  m.lift.mlp2d.b1 = unpack_vec(c, "lift.mlp2d.b1", 64);
  m.lift.mlp2d.w2 = unpack_mat(c, "lift.mlp2d.w2", 64, 64);
  m.lift.mlp2d.b2 = unpack_vec(c, "lift.mlp2d.b2", 64);
  m.lift.mlp3d.w1 = unpack_mat(c, "lift.mlp3d.w1", 3, 64);
  m.lift.mlp3d.b1 = unpack_vec(c, "lift.mlp3d.b1", 64);
  m.lift.mlp3d.w2 = unpack_mat(c, "lift.mlp3d.w2", 64, 64);
  m.lift.mlp3d.b2 = unpack_vec(c, "lift.mlp3d.b2", 64);
  for (int l = 0; l < 3; ++l) {
    std::string p = "lift.attn" + std::to_string(l);
    m.lift.attn[std::size_t(l)].wq = unpack_mat(c, p + ".wq", 64, 64);
    m.lift.attn[std::size_t(l)].wk = unpack_mat(c, p + ".wk", 64, 64);
    m.lift.attn[std::size_t(l)].wv = unpack_mat(c, p + ".wv", 64, 64);
  }
  return m;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError(path + ": cannot open config file");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
  };
  while (std::getline(f, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

namespace {

void draw_square(Tensor& canvas, int cx, int cy, const Eigen::Vector3f& color) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      int y = cy + dy, x = cx + dx;
      if (y < 0 || y >= canvas.height || x < 0 || x >= canvas.width) continue;
      canvas.pixel(y, x) = color.transpose();
    }
  }
}

void draw_line(Tensor& canvas, int x0, int y0, int x1, int y1, const Eigen::Vector3f& color) {
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (y0 >= 0 && y0 < canvas.height && x0 >= 0 && x0 < canvas.width)
      canvas.pixel(y0, x0) = color.transpose();
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

Tensor render_matches(const Tensor& a, const Tensor& b, const std::vector<Keypoint>& kps_a,
                      const std::vector<Keypoint>& kps_b, const MatchSet& matches,
                      const std::vector<char>& correct_mask) {
  int h = std::max(a.height, b.height);
  int w = a.width + b.width;
  Tensor canvas(h, w, 3);  // shorter image padded with black
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) canvas.pixel(y, x).setConstant(a.pixel(y, x).mean());
  for (int y = 0; y < b.height; ++y)
    for (int x = 0; x < b.width; ++x)
      canvas.pixel(y, a.width + x).setConstant(b.pixel(y, x).mean());

  const Eigen::Vector3f kp_color(0.0f, 0.0f, 1.0f);
  for (const Keypoint& k : kps_a) draw_square(canvas, int(std::lround(k.x)), int(std::lround(k.y)), kp_color);
  for (const Keypoint& k : kps_b)
    draw_square(canvas, a.width + int(std::lround(k.x)), int(std::lround(k.y)), kp_color);

  const Eigen::Vector3f green(0.0f, 1.0f, 0.0f), red(1.0f, 0.0f, 0.0f);
  for (std::size_t i = 0; i < matches.matches.size(); ++i) {
    const Match& m = matches.matches[i];
    const Keypoint& ka = kps_a[std::size_t(m.a)];
    const Keypoint& kb = kps_b[std::size_t(m.b)];
    bool correct = i < correct_mask.size() ? correct_mask[i] != 0 : true;
    draw_line(canvas, int(std::lround(ka.x)), int(std::lround(ka.y)),
              a.width + int(std::lround(kb.x)), int(std::lround(kb.y)), correct ? green : red);
  }
  return canvas;
}

}  // namespace liftmatch
