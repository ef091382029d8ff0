#pragma once

#include "liftmatch/keypoints.hpp"
#include "liftmatch/losses.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace liftmatch {

/// One-hidden-layer MLP (ReLU), used to align descriptor and normal
/// dimensions before mixing.
template <typename S>
struct MlpWeights {
  MatX<S> w1;  // Din x 64
  VecX<S> b1;  // 64
  MatX<S> w2;  // 64 x 64
  VecX<S> b2;  // 64
};

template <typename S>
struct AttnWeights {
  MatX<S> wq, wk, wv;  // 64 x 64 each
};

template <typename S>
struct LiftWeightsT {
  MlpWeights<S> mlp2d;  // 64 -> 64 -> 64
  MlpWeights<S> mlp3d;  // 3 -> 64 -> 64
  std::array<AttnWeights<S>, 3> attn;

  static LiftWeightsT he_init(std::uint64_t seed);
  static LiftWeightsT zeros();

  template <typename T>
  LiftWeightsT<T> cast() const {
    LiftWeightsT<T> out;
    auto c = [](const MatX<S>& m) { return m.template cast<T>().eval(); };
    out.mlp2d = {c(mlp2d.w1), mlp2d.b1.template cast<T>(), c(mlp2d.w2), mlp2d.b2.template cast<T>()};
    out.mlp3d = {c(mlp3d.w1), mlp3d.b1.template cast<T>(), c(mlp3d.w2), mlp3d.b2.template cast<T>()};
    for (int l = 0; l < 3; ++l) out.attn[l] = {c(attn[l].wq), c(attn[l].wk), c(attn[l].wv)};
    return out;
  }
};

using LiftWeights = LiftWeightsT<float>;

/// Flat views over every parameter tensor, in a fixed documented order, so
/// the optimizer and gradient code can walk weights and gradients in
/// lockstep.
template <typename S>
std::vector<Eigen::Map<VecX<S>>> tensor_views(LiftWeightsT<S>& w) {
  std::vector<Eigen::Map<VecX<S>>> v;
  auto add = [&](auto& t) { v.emplace_back(t.data(), t.size()); };
  add(w.mlp2d.w1);
  add(w.mlp2d.b1);
  add(w.mlp2d.w2);
  add(w.mlp2d.b2);
  add(w.mlp3d.w1);
  add(w.mlp3d.b1);
  add(w.mlp3d.w2);
  add(w.mlp3d.b2);
  for (auto& a : w.attn) {
    add(a.wq);
    add(a.wk);
    add(a.wv);
  }
  return v;
}

template <typename S>
LiftWeightsT<S> LiftWeightsT<S>::zeros() {
  LiftWeightsT<S> w;
  w.mlp2d = {MatX<S>::Zero(64, 64), VecX<S>::Zero(64), MatX<S>::Zero(64, 64), VecX<S>::Zero(64)};
  w.mlp3d = {MatX<S>::Zero(3, 64), VecX<S>::Zero(64), MatX<S>::Zero(64, 64), VecX<S>::Zero(64)};
  for (auto& a : w.attn)
    a = {MatX<S>::Zero(64, 64), MatX<S>::Zero(64, 64), MatX<S>::Zero(64, 64)};
  return w;
}

template <typename S>
LiftWeightsT<S> LiftWeightsT<S>::he_init(std::uint64_t seed) {
  LiftWeightsT<S> w = zeros();
  auto views = tensor_views(w);
  for (std::size_t t = 0; t < views.size(); ++t) {
    bool is_bias = t < 8 && (t % 2 == 1);
    if (is_bias) continue;
    double fan_in = (t == 4) ? 3.0 : 64.0;  // mlp3d.w1 maps from 3 dims
    double limit = std::sqrt(6.0 / fan_in);
    SplitMix64 rng = SplitMix64::derive(seed, 0x11F70000ULL + t);
    for (Eigen::Index i = 0; i < views[t].size(); ++i)
      views[t][i] = S(rng.uniform(-limit, limit));
  }
  return w;
}

/// Fourier positional encoding of keypoint locations: coordinates are mapped
/// to [-1, 1] and, for each octave f in 0..15, the four values
/// [cos(2^f pi x), sin(2^f pi x), cos(2^f pi y), sin(2^f pi y)] fill columns
/// 4f..4f+3. Computed in double regardless of S (the high octaves need the
/// precision).
template <typename S>
MatX<S> positional_encode(const MatX<S>& xy, int width, int height) {
  MatX<S> pe(xy.rows(), 64);
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    double xn = width > 1 ? 2.0 * double(xy(i, 0)) / (width - 1) - 1.0 : 0.0;
    double yn = height > 1 ? 2.0 * double(xy(i, 1)) / (height - 1) - 1.0 : 0.0;
    for (int f = 0; f < 16; ++f) {
      double s = double(std::uint64_t(1) << f) * M_PI;
      pe(i, 4 * f + 0) = S(std::cos(s * xn));
      pe(i, 4 * f + 1) = S(std::sin(s * xn));
      pe(i, 4 * f + 2) = S(std::cos(s * yn));
      pe(i, 4 * f + 3) = S(std::sin(s * yn));
    }
  }
  return pe;
}

template <typename S>
struct MlpTrace {
  MatX<S> input, pre1, hidden;
};

template <typename S>
struct AttnTrace {
  MatX<S> input, q, k, v, alpha;
  VecX<S> context;
};

template <typename S>
struct LiftTrace {
  MatX<S> pe;
  MlpTrace<S> t2d, t3d;
  MatX<S> mixed;
  std::array<AttnTrace<S>, 3> attn;
  MatX<S> pre_norm;
  VecX<S> norms;
  MatX<S> lifted;
};

template <typename S>
MatX<S> mlp_apply(const MatX<S>& x, const MlpWeights<S>& w, MlpTrace<S>* tr = nullptr) {
  if (x.cols() != w.w1.rows()) throw std::invalid_argument("mlp_apply: input dim mismatch");
  MatX<S> pre1 = (x * w.w1).rowwise() + w.b1.transpose();
  MatX<S> hidden = pre1.cwiseMax(S(0));
  MatX<S> out = (hidden * w.w2).rowwise() + w.b2.transpose();
  if (tr) {
    tr->input = x;
    tr->pre1 = std::move(pre1);
    tr->hidden = std::move(hidden);
  }
  return out;
}

/// m_i = pe_i (elementwise*) (MLP_2D(d_i) + MLP_3D(n_i)). The explicit `pe`
/// argument doubles as the test hook for replacing the encoding.
template <typename S>
MatX<S> mix_features(const MatX<S>& pe, const MatX<S>& desc, const MatX<S>& normals,
                     const LiftWeightsT<S>& w, MlpTrace<S>* t2d = nullptr,
                     MlpTrace<S>* t3d = nullptr) {
  if (pe.rows() != desc.rows() || desc.rows() != normals.rows())
    throw std::invalid_argument("mix_features: row count mismatch");
  return pe.cwiseProduct(mlp_apply(desc, w.mlp2d, t2d) + mlp_apply(normals, w.mlp3d, t3d));
}

/// One linear self-attention layer. The key softmax normalizes each feature
/// channel over the keypoint axis, giving a single 64-d context vector:
///   context_c = sum_j softmax_j(K_jc) * V_jc
///   out_i     = (Q_i (elementwise*) context) + m_i        (residual)
/// Cost is O(N * 64^2).
template <typename S>
MatX<S> attention_layer(const MatX<S>& m, const MatX<S>& wq, const MatX<S>& wk,
                        const MatX<S>& wv, AttnTrace<S>* tr = nullptr) {
  if (m.rows() == 0) throw std::invalid_argument("attention_layer: empty input");
  MatX<S> q = m * wq;
  MatX<S> k = m * wk;
  MatX<S> v = m * wv;
  MatX<S> alpha(k.rows(), k.cols());
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    S mx = k.col(c).maxCoeff();
    alpha.col(c) = (k.col(c).array() - mx).exp();
    alpha.col(c) /= alpha.col(c).sum();
  }
  VecX<S> context = alpha.cwiseProduct(v).colwise().sum().transpose();
  MatX<S> out = q.array().rowwise() * context.transpose().array();
  out += m;
  if (tr) {
    tr->input = m;
    tr->q = std::move(q);
    tr->k = std::move(k);
    tr->v = std::move(v);
    tr->alpha = std::move(alpha);
    tr->context = std::move(context);
  }
  return out;
}

template <typename S>
MatX<S> attention_layer(const MatX<S>& m, const AttnWeights<S>& w, AttnTrace<S>* tr = nullptr) {
  return attention_layer(m, w.wq, w.wk, w.wv, tr);
}

/// Full lifting pass: mix -> 3 attention layers -> row-wise L2
/// normalization. Returns the lifted N x 64 descriptors.
template <typename S>
MatX<S> lift(const MatX<S>& xy, const MatX<S>& desc, const MatX<S>& normals, int width,
             int height, const LiftWeightsT<S>& w, LiftTrace<S>* tr = nullptr) {
  if (xy.rows() == 0) throw std::invalid_argument("lift: empty bundle");
  MatX<S> pe = positional_encode<S>(xy, width, height);
  LiftTrace<S> local;
  LiftTrace<S>* t = tr ? tr : &local;
  t->pe = pe;
  MatX<S> m = mix_features(pe, desc, normals, w, &t->t2d, &t->t3d);
  t->mixed = m;
  for (int l = 0; l < 3; ++l) m = attention_layer(m, w.attn[l], &t->attn[l]);
  t->pre_norm = m;
  t->norms.resize(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) t->norms(i) = m.row(i).norm();
  t->lifted = l2_normalize(std::move(m));
  return t->lifted;
}

inline MatXf lift(const FeatureBundle& b, int width, int height, const LiftWeights& w) {
  return lift<float>(b.positions(), b.descriptors, b.normals, width, height, w);
}

template <typename S>
struct LiftBackward {
  LiftWeightsT<S> grad;
  MatX<S> ddesc;     // gradient w.r.t. input descriptors
  MatX<S> dnormals;  // gradient w.r.t. input normals
};

namespace detail {

template <typename S>
MatX<S> mlp_backward(const MlpTrace<S>& tr, const MlpWeights<S>& w, const MatX<S>& dout,
                     MlpWeights<S>& grad) {
  grad.w2 += tr.hidden.transpose() * dout;
  grad.b2 += dout.colwise().sum().transpose();
  MatX<S> dpre1 =
      (dout * w.w2.transpose()).cwiseProduct((tr.pre1.array() > S(0)).template cast<S>().matrix());
  grad.w1 += tr.input.transpose() * dpre1;
  grad.b1 += dpre1.colwise().sum().transpose();
  return dpre1 * w.w1.transpose();
}

template <typename S>
MatX<S> attention_backward(const AttnTrace<S>& tr, const AttnWeights<S>& w, const MatX<S>& dout,
                           AttnWeights<S>& grad) {
  MatX<S> dq = dout.array().rowwise() * tr.context.transpose().array();
  VecX<S> dcontext = dout.cwiseProduct(tr.q).colwise().sum().transpose();
  MatX<S> dv = tr.alpha.array().rowwise() * dcontext.transpose().array();
  MatX<S> dalpha = tr.v.array().rowwise() * dcontext.transpose().array();
  MatX<S> dk(dalpha.rows(), dalpha.cols());
  for (Eigen::Index c = 0; c < dk.cols(); ++c) {
    S dot = tr.alpha.col(c).dot(dalpha.col(c));
    dk.col(c) = tr.alpha.col(c).cwiseProduct((dalpha.col(c).array() - dot).matrix());
  }
  grad.wq += tr.input.transpose() * dq;
  grad.wk += tr.input.transpose() * dk;
  grad.wv += tr.input.transpose() * dv;
  MatX<S> din = dout;  // residual path
  din += dq * w.wq.transpose();
  din += dk * w.wk.transpose();
  din += dv * w.wv.transpose();
  return din;
}

}  // namespace detail

/// Reverse-mode gradients through the full lifting pass, given the upstream
/// gradient with respect to the lifted (unit) descriptors.
template <typename S>
LiftBackward<S> lift_backward(const LiftTrace<S>& tr, const LiftWeightsT<S>& w,
                              const MatX<S>& dlifted) {
  LiftBackward<S> out;
  out.grad = LiftWeightsT<S>::zeros();

  // L2 normalization backward: y = x/|x|, dx = (dy - y (y.dy)) / |x|.
  MatX<S> dm(dlifted.rows(), dlifted.cols());
  for (Eigen::Index i = 0; i < dlifted.rows(); ++i) {
    S n = tr.norms(i);
    if (n < S(1e-12)) {
      dm.row(i).setZero();  // degenerate rows map to a constant
      continue;
    }
    auto y = tr.lifted.row(i);
    dm.row(i) = (dlifted.row(i) - y * y.dot(dlifted.row(i))) / n;
  }

  for (int l = 2; l >= 0; --l)
    dm = detail::attention_backward(tr.attn[l], w.attn[l], dm, out.grad.attn[l]);

  MatX<S> dsum = dm.cwiseProduct(tr.pe);
  out.ddesc = detail::mlp_backward(tr.t2d, w.mlp2d, dsum, out.grad.mlp2d);
  out.dnormals = detail::mlp_backward(tr.t3d, w.mlp3d, dsum, out.grad.mlp3d);
  return out;
}

/// A pair of keypoint sets with ground-truth pairing, the training unit for
/// the lifting module. Kept in double precision for the optimizer.
struct LiftBatch {
  int width = 0, height = 0;
  MatXd pos_a, pos_b;        // N x 2
  MatXd desc_a, desc_b;      // N x 64, unit rows
  MatXd normal_a, normal_b;  // N x 3, unit rows
  MatchGroundTruth gt;
};

struct TrainConfig {
  int iterations = 200;
  double learning_rate = 1e-4;
  double temperature = 0.1;
  std::uint64_t seed = 0;  // weight initialization
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  LiftWeightsT<double> weights;
  std::vector<double> loss_trace;
};

/// Adam on the descriptor matching loss of lifted descriptors, cycling
/// through the batches. Deterministic for a fixed config.
inline TrainResult train_lift(const std::vector<LiftBatch>& data, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train_lift: no training batches");
  TrainResult res;
  res.weights = LiftWeightsT<double>::he_init(cfg.seed);
  LiftWeightsT<double> adam_m = LiftWeightsT<double>::zeros();
  LiftWeightsT<double> adam_v = LiftWeightsT<double>::zeros();
  auto vw = tensor_views(res.weights);
  auto vm = tensor_views(adam_m);
  auto vv = tensor_views(adam_v);
  res.loss_trace.reserve(cfg.iterations);
  for (int t = 0; t < cfg.iterations; ++t) {
    const LiftBatch& b = data[std::size_t(t) % data.size()];
    LiftTrace<double> ta, tb;
    MatXd la = lift<double>(b.pos_a, b.desc_a, b.normal_a, b.width, b.height, res.weights, &ta);
    MatXd lb = lift<double>(b.pos_b, b.desc_b, b.normal_b, b.width, b.height, res.weights, &tb);
    MatXd dla, dlb;
    double loss = descriptor_loss_grad<double>(la, lb, cfg.temperature, b.gt, &dla, &dlb);
    if (!std::isfinite(loss))
      throw TrainingError("train_lift: loss diverged at iteration " + std::to_string(t));
    res.loss_trace.push_back(loss);
    LiftBackward<double> ga = lift_backward(ta, res.weights, dla);
    LiftBackward<double> gb = lift_backward(tb, res.weights, dlb);
    auto vga = tensor_views(ga.grad);
    auto vgb = tensor_views(gb.grad);
    double c1 = 1.0 - std::pow(cfg.beta1, t + 1);
    double c2 = 1.0 - std::pow(cfg.beta2, t + 1);
    for (std::size_t j = 0; j < vw.size(); ++j) {
      for (Eigen::Index e = 0; e < vw[j].size(); ++e) {
        double g = vga[j][e] + vgb[j][e];
        vm[j][e] = cfg.beta1 * vm[j][e] + (1.0 - cfg.beta1) * g;
        vv[j][e] = cfg.beta2 * vv[j][e] + (1.0 - cfg.beta2) * g * g;
        double mhat = vm[j][e] / c1;
        double vhat = vv[j][e] / c2;
        vw[j][e] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      }
    }
  }
  return res;
}

}  // namespace liftmatch
