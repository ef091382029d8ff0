#include "liftmatch/synthgen.hpp"

#include <iostream>

namespace liftmatch {

namespace {

// Stream ids so every aspect of a scene has its own counter-based sequence.
enum Stream : std::uint64_t {
  kTexture = 1,
  kWarp = 2,
  kCorrespondence = 3,
  kBlobs = 4,
  kSceneParams = 5,
  kDescriptors = 6,
  kNormals = 7,
  kPositions = 8,
  kNoiseB = 9,
  kGeometry = 10,
  kOutliers = 11,
};

Tensor render_texture(std::uint64_t seed, int w, int h, TextureKind kind) {
  Tensor img(h, w, 3);
  switch (kind) {
    case TextureKind::Checker: {
      const int cell = 16;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          std::uint64_t cell_id = std::uint64_t(y / cell) * 4096 + std::uint64_t(x / cell);
          SplitMix64 rng = SplitMix64::derive(seed ^ kTexture, cell_id);
          float v = float(0.15 + 0.7 * rng.uniform());
          img.pixel(y, x).setConstant(v);
        }
      }
      break;
    }
    case TextureKind::Noise: {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          SplitMix64 rng = SplitMix64::derive(seed ^ kTexture, std::uint64_t(y) * 65536 + x);
          img.pixel(y, x).setConstant(float(rng.uniform()));
        }
      }
      break;
    }
    case TextureKind::LowTexture: {
      // Constant background with sparse weak blobs: detection still fires
      // but descriptors collide.
      SplitMix64 rng = SplitMix64::derive(seed ^ kBlobs, 0);
      const int n_blobs = 12;
      std::vector<double> bx(n_blobs), by(n_blobs), bs(n_blobs), ba(n_blobs);
      for (int i = 0; i < n_blobs; ++i) {
        bx[i] = rng.uniform(0, w - 1);
        by[i] = rng.uniform(0, h - 1);
        bs[i] = rng.uniform(4.0, 10.0);
        ba[i] = rng.uniform(-0.08, 0.08);
      }
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double v = 0.5;
          for (int i = 0; i < n_blobs; ++i) {
            double d2 = (x - bx[i]) * (x - bx[i]) + (y - by[i]) * (y - by[i]);
            v += ba[i] * std::exp(-d2 / (2.0 * bs[i] * bs[i]));
          }
          img.pixel(y, x).setConstant(float(std::clamp(v, 0.0, 1.0)));
        }
      }
      break;
    }
  }
  return img;
}

Tensor warp_image(const Tensor& a, const Homography& h) {
  Homography h_inv = h.inverse();
  Tensor b(a.height, a.width, a.channels);
  parallel_rows(a.height, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < a.width; ++x) {
        Eigen::Vector3d q = h_inv * Eigen::Vector3d(x, y, 1.0);
        if (std::abs(q.z()) < 1e-12) continue;
        double sx = q.x() / q.z(), sy = q.y() / q.z();
        if (sx < 0 || sx > a.width - 1 || sy < 0 || sy > a.height - 1) continue;  // black
        int x0 = int(sx), y0i = int(sy);
        int x1 = std::min(x0 + 1, a.width - 1), y1i = std::min(y0i + 1, a.height - 1);
        float fx = float(sx - x0), fy = float(sy - y0i);
        b.pixel(y, x) = (1 - fy) * ((1 - fx) * a.pixel(y0i, x0) + fx * a.pixel(y0i, x1)) +
                        fy * ((1 - fx) * a.pixel(y1i, x0) + fx * a.pixel(y1i, x1));
      }
    }
  });
  return b;
}

double overlap_fraction(const Homography& h, int w, int hgt) {
  Homography h_inv = h.inverse();
  int inside = 0, total = 0;
  for (int gy = 0; gy < 16; ++gy) {
    for (int gx = 0; gx < 16; ++gx) {
      double x = (gx + 0.5) * w / 16.0, y = (gy + 0.5) * hgt / 16.0;
      Eigen::Vector3d q = h_inv * Eigen::Vector3d(x, y, 1.0);
      ++total;
      if (std::abs(q.z()) < 1e-12) continue;
      double sx = q.x() / q.z(), sy = q.y() / q.z();
      if (sx >= 0 && sx <= w - 1 && sy >= 0 && sy <= hgt - 1) ++inside;
    }
  }
  return double(inside) / total;
}

Homography corner_perturbation_h(std::uint64_t seed, int attempt, int w, int h, double mag) {
  if (mag == 0.0) return Homography::Identity();
  SplitMix64 rng = SplitMix64::derive(seed ^ kWarp, std::uint64_t(attempt));
  MatXd src(4, 2), dst(4, 2);
  src << 0, 0, w - 1, 0, w - 1, h - 1, 0, h - 1;
  for (int i = 0; i < 4; ++i) {
    dst(i, 0) = src(i, 0) + rng.uniform(-mag, mag);
    dst(i, 1) = src(i, 1) + rng.uniform(-mag, mag);
  }
  return homography_dlt(src, dst);
}

}  // namespace

SynthPair gen_pair_with_h(std::uint64_t seed, int width, int height, TextureKind texture,
                          const Homography& h, int n_corr) {
  if (width % 32 != 0 || height % 32 != 0)
    throw std::invalid_argument("gen_pair: dims must be multiples of 32");
  SynthPair pair;
  pair.h_gt = h;
  pair.image_a = render_texture(seed, width, height, texture);
  pair.image_b = h.isIdentity(0.0) ? pair.image_a : warp_image(pair.image_a, h);

  SplitMix64 rng = SplitMix64::derive(seed ^ kCorrespondence, 0);
  std::vector<Eigen::Vector4d> corr;
  int tries = 0;
  while (int(corr.size()) < n_corr && tries < 50 * n_corr) {
    ++tries;
    double xa = rng.uniform(0, width - 1);
    double ya = rng.uniform(0, height - 1);
    Eigen::Vector3d q = h * Eigen::Vector3d(xa, ya, 1.0);
    if (std::abs(q.z()) < 1e-12) continue;
    double xb = q.x() / q.z(), yb = q.y() / q.z();
    if (xb < 0 || xb > width - 1 || yb < 0 || yb > height - 1) continue;
    corr.emplace_back(xa, ya, xb, yb);
  }
  pair.corr_a.resize(corr.size(), 2);
  pair.corr_b.resize(corr.size(), 2);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    pair.corr_a.row(Eigen::Index(i)) << corr[i](0), corr[i](1);
    pair.corr_b.row(Eigen::Index(i)) << corr[i](2), corr[i](3);
  }
  return pair;
}

SynthPair gen_pair(std::uint64_t seed, int width, int height, TextureKind texture,
                   double warp_magnitude, int n_corr) {
  double mag = warp_magnitude;
  for (int attempt = 0;; ++attempt) {
    Homography h = corner_perturbation_h(seed, attempt, width, height, mag);
    if (overlap_fraction(h, width, height) >= 0.25) {
      SynthPair pair = gen_pair_with_h(seed, width, height, texture, h, n_corr);
      pair.regen_count = attempt;
      return pair;
    }
    mag *= 0.5;
    std::cerr << "gen_pair: overlap below 25%, retrying with warp magnitude " << mag << "\n";
  }
}

DepthSceneData gen_depth_scene(std::uint64_t seed, int width, int height, DepthScene scene) {
  if (width < 16 || height < 16) throw std::invalid_argument("gen_depth_scene: dims must be >= 16");
  SplitMix64 rng = SplitMix64::derive(seed ^ kSceneParams, 0);

  // The surface as an exact function of (u, v).
  std::function<double(double, double)> zfun;
  switch (scene) {
    case DepthScene::Plane: {
      double a = rng.uniform(-0.5, 0.5), b = rng.uniform(-0.5, 0.5);
      double z0 = 2.0 + std::abs(a) * width + std::abs(b) * height;
      zfun = [a, b, z0](double u, double v) { return z0 + a * u + b * v; };
      break;
    }
    case DepthScene::TwoPlanes: {
      double a1 = rng.uniform(-0.5, 0.5), b1 = rng.uniform(-0.5, 0.5);
      double a2 = rng.uniform(-0.5, 0.5), b2 = rng.uniform(-0.5, 0.5);
      double z0 = 2.0 + (std::abs(a1) + std::abs(a2)) * width + (std::abs(b1) + std::abs(b2)) * height;
      double split = width / 2.0;
      zfun = [=](double u, double v) {
        return u < split ? z0 + a1 * u + b1 * v : z0 + a2 * (u - split) + b2 * v;
      };
      break;
    }
    case DepthScene::Sphere: {
      double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
      double radius = 1.25 * std::sqrt(cx * cx + cy * cy) + 4.0;
      zfun = [cx, cy, radius](double u, double v) {
        double rho2 = (u - cx) * (u - cx) + (v - cy) * (v - cy);
        return 2.0 + radius - std::sqrt(radius * radius - rho2);
      };
      break;
    }
  }

  DepthSceneData out;
  out.depth = DepthMap(height, width, 1);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) out.depth.at(v, u, 0) = zfun(u, v);

  // Closed-form normals: the un-halved central differences of the exact
  // surface, with the same doubled one-sided rule at the borders.
  auto grad_u = [&](int u, int v) {
    if (u == 0) return 2.0 * (zfun(1, v) - zfun(0, v));
    if (u == width - 1) return 2.0 * (zfun(width - 1, v) - zfun(width - 2, v));
    return zfun(u + 1, v) - zfun(u - 1, v);
  };
  auto grad_v = [&](int u, int v) {
    if (v == 0) return 2.0 * (zfun(u, 1) - zfun(u, 0));
    if (v == height - 1) return 2.0 * (zfun(u, height - 1) - zfun(u, height - 2));
    return zfun(u, v + 1) - zfun(u, v - 1);
  };
  out.normals_gt = Tensor(height, width, 3);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      double du = grad_u(u, v), dv = grad_v(u, v);
      double inv = 1.0 / std::sqrt(du * du + dv * dv + 1.0);
      out.normals_gt.at(v, u, 0) = float(-du * inv);
      out.normals_gt.at(v, u, 1) = float(-dv * inv);
      out.normals_gt.at(v, u, 2) = float(inv);
    }
  }
  return out;
}

LiftBatch gen_lift_batch(std::uint64_t seed, int n_points, double ambiguity) {
  if (n_points < 4) throw std::invalid_argument("gen_lift_batch: need >= 4 points");
  if (ambiguity < 0.0 || ambiguity > 1.0)
    throw std::invalid_argument("gen_lift_batch: ambiguity must be in [0, 1]");
  const int n = n_points;
  const int n_amb = int(std::lround(ambiguity * n));

  LiftBatch batch;
  batch.width = 256;
  batch.height = 256;
  batch.pos_a.resize(n, 2);
  batch.desc_a.resize(n, 64);
  batch.normal_a.resize(n, 3);

  SplitMix64 drng = SplitMix64::derive(seed ^ kDescriptors, 0);
  VecXd base(64);
  for (int c = 0; c < 64; ++c) base(c) = drng.normal();
  base.normalize();
  for (int i = 0; i < n; ++i) {
    VecXd d(64);
    if (i < n_amb) {
      for (int c = 0; c < 64; ++c) d(c) = base(c) + 0.005 * drng.normal();
    } else {
      for (int c = 0; c < 64; ++c) d(c) = drng.normal();
    }
    batch.desc_a.row(i) = d.normalized().transpose();
  }

  // Ambiguous points get well-separated directions on the upper hemisphere
  // (Fibonacci spiral); the rest draw random upward normals.
  SplitMix64 nrng = SplitMix64::derive(seed ^ kNormals, 0);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d nv;
    if (i < n_amb) {
      double z = 0.1 + 0.85 * (i + 0.5) / std::max(1, n_amb);
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      nv = {r * std::cos(golden * i), r * std::sin(golden * i), z};
    } else {
      nv = {nrng.normal(), nrng.normal(), std::abs(nrng.normal()) + 0.2};
    }
    batch.normal_a.row(i) = nv.normalized().transpose();
  }

  SplitMix64 prng = SplitMix64::derive(seed ^ kPositions, 0);
  for (int i = 0; i < n; ++i) {
    batch.pos_a(i, 0) = prng.uniform(0, batch.width - 1);
    batch.pos_a(i, 1) = prng.uniform(0, batch.height - 1);
  }

  // View B: same keypoints, noisy appearance.
  batch.pos_b = batch.pos_a;
  batch.desc_b.resize(n, 64);
  batch.normal_b.resize(n, 3);
  SplitMix64 brng = SplitMix64::derive(seed ^ kNoiseB, 0);
  for (int i = 0; i < n; ++i) {
    VecXd d = batch.desc_a.row(i).transpose();
    for (int c = 0; c < 64; ++c) d(c) += 0.05 * brng.normal();
    batch.desc_b.row(i) = d.normalized().transpose();
    Eigen::Vector3d nv = batch.normal_a.row(i).transpose();
    for (int c = 0; c < 3; ++c) nv(c) += 0.01 * brng.normal();
    batch.normal_b.row(i) = nv.normalized().transpose();
  }

  batch.gt.count_a = n;
  batch.gt.count_b = n;
  for (int i = 0; i < n; ++i) batch.gt.pairs.emplace_back(i, i);
  return batch;
}

TwoViewScene gen_two_view_scene(std::uint64_t seed, int n_points, double outlier_fraction,
                                bool pure_rotation) {
  if (n_points < 8) throw std::invalid_argument("gen_two_view_scene: need >= 8 points");
  TwoViewScene scene;
  scene.pure_rotation = pure_rotation;
  scene.k << 500, 0, 320, 0, 500, 240, 0, 0, 1;

  SplitMix64 grng = SplitMix64::derive(seed ^ kGeometry, 0);
  Eigen::Vector3d axis(grng.normal(), grng.normal(), grng.normal());
  axis.normalize();
  double angle = grng.uniform(5.0, 12.0) * M_PI / 180.0;
  scene.r_gt = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  if (pure_rotation) {
    scene.t_gt.setZero();
  } else {
    Eigen::Vector3d t(grng.normal(), grng.normal(), grng.normal());
    scene.t_gt = t.normalized();
  }

  scene.pts_a.resize(n_points, 2);
  scene.pts_b.resize(n_points, 2);
  scene.is_outlier.assign(n_points, 0);
  SplitMix64 orng = SplitMix64::derive(seed ^ kOutliers, 0);
  int placed = 0;
  std::uint64_t draw = 0;
  while (placed < n_points) {
    SplitMix64 prng = SplitMix64::derive(seed ^ kPositions, draw++);
    double z = prng.uniform(4.0, 10.0);
    Eigen::Vector3d p(z * prng.uniform(-0.5, 0.5), z * prng.uniform(-0.38, 0.38), z);
    Eigen::Vector3d pb = scene.r_gt * p + scene.t_gt;
    if (pb.z() <= 0.5) continue;
    Eigen::Vector3d qa = scene.k * p;
    Eigen::Vector3d qb = scene.k * pb;
    scene.pts_a.row(placed) << qa.x() / qa.z(), qa.y() / qa.z();
    if (orng.uniform() < outlier_fraction) {
      scene.is_outlier[std::size_t(placed)] = 1;
      scene.pts_b.row(placed) << orng.uniform(0, 639), orng.uniform(0, 479);
    } else {
      scene.pts_b.row(placed) << qb.x() / qb.z(), qb.y() / qb.z();
    }
    ++placed;
  }
  return scene;
}

}  // namespace liftmatch
