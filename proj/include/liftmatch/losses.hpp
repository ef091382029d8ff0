#pragma once

#include "liftmatch/tensor.hpp"

#include <utility>
#include <vector>

namespace liftmatch {

struct MatchGroundTruth {
  std::vector<std::pair<int, int>> pairs;  // (index in A, index in B)
  int count_a = 0;
  int count_b = 0;

  void validate() const {
    std::vector<char> seen_a(count_a, 0), seen_b(count_b, 0);
    for (const auto& [i, j] : pairs) {
      if (i < 0 || i >= count_a || j < 0 || j >= count_b)
        throw std::invalid_argument("MatchGroundTruth: index out of range");
      if (seen_a[i]++ || seen_b[j]++)
        throw std::invalid_argument("MatchGroundTruth: pairing is not one-to-one");
    }
  }
};

namespace detail {

template <typename S>
MatX<S> rowwise_log_softmax(const MatX<S>& m) {
  MatX<S> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    S mx = m.row(i).maxCoeff();
    S lse = std::log((m.row(i).array() - mx).exp().sum()) + mx;
    out.row(i) = m.row(i).array() - lse;
  }
  return out;
}

}  // namespace detail

/// Mean over cells of -log softmax(logits)[gt class]. `logits` is the
/// cells x 65 view of a keypoint logit map; class 64 is the dustbin. If
/// `grad` is given, it receives d(loss)/d(logits).
template <typename S>
S keypoint_nll(const MatX<S>& logits, const std::vector<int>& gt_cells, MatX<S>* grad = nullptr) {
  const Eigen::Index cells = logits.rows();
  if (cells == 0) throw std::invalid_argument("keypoint_nll: no cells");
  if (Eigen::Index(gt_cells.size()) != cells)
    throw std::invalid_argument("keypoint_nll: gt size mismatch");
  MatX<S> logp = detail::rowwise_log_softmax(logits);
  S loss = 0;
  if (grad) grad->setZero(logits.rows(), logits.cols());
  const S inv = S(1) / S(cells);
  for (Eigen::Index i = 0; i < cells; ++i) {
    int c = gt_cells[std::size_t(i)];
    if (c < 0 || c >= int(logits.cols()))
      throw std::invalid_argument("keypoint_nll: gt class out of range");
    loss -= logp(i, c) * inv;
    if (grad) {
      grad->row(i) = logp.row(i).array().exp() * inv;
      (*grad)(i, c) -= inv;
    }
  }
  return loss;
}

inline float keypoint_nll(const Tensor& logits, const std::vector<int>& gt_cells) {
  return keypoint_nll<float>(logits.data, gt_cells);
}

/// Mean over rows of 1 - cos(pred, gt). If `grad_pred` is given it receives
/// d(loss)/d(pred). Zero-norm rows are an input error.
template <typename S>
S normal_loss(const MatX<S>& pred, const MatX<S>& gt, MatX<S>* grad_pred = nullptr) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("normal_loss: shape mismatch");
  if (pred.rows() == 0) throw std::invalid_argument("normal_loss: empty input");
  const S inv = S(1) / S(pred.rows());
  if (grad_pred) grad_pred->setZero(pred.rows(), pred.cols());
  S loss = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    S np = pred.row(i).norm(), ng = gt.row(i).norm();
    if (np < S(1e-12) || ng < S(1e-12))
      throw std::invalid_argument("normal_loss: zero-norm row");
    S dot = pred.row(i).dot(gt.row(i));
    loss += (S(1) - dot / (np * ng)) * inv;
    if (grad_pred) {
      grad_pred->row(i) =
          -inv * (gt.row(i) / (np * ng) - (dot / (np * np * np * ng)) * pred.row(i));
    }
  }
  return loss;
}

/// Dual-softmax similarity: L = (dA dB^T)/temperature, S = rowwise_softmax(L)
/// elementwise-times colwise_softmax(L). Entries lie in (0, 1).
template <typename S>
MatX<S> match_score_matrix(const MatX<S>& da, const MatX<S>& db, S temperature) {
  if (temperature <= S(0)) throw std::invalid_argument("match_score_matrix: temperature must be positive");
  if (da.cols() != db.cols()) throw std::invalid_argument("match_score_matrix: descriptor dim mismatch");
  MatX<S> logits = (da * db.transpose()) / temperature;
  MatX<S> logr = detail::rowwise_log_softmax(logits);
  MatX<S> logc = detail::rowwise_log_softmax(MatX<S>(logits.transpose()));
  return (logr + MatX<S>(logc.transpose())).array().exp();
}

/// -(1/|pairs|) sum log S(i,j) over ground-truth pairs. Entries below 1e-12
/// are clamped; `clamped` (if given) counts how many were.
template <typename S>
S descriptor_nll(const MatX<S>& scores, const MatchGroundTruth& gt, int* clamped = nullptr) {
  if (gt.pairs.empty()) throw std::invalid_argument("descriptor_nll: no ground-truth pairs");
  gt.validate();
  if (clamped) *clamped = 0;
  S loss = 0;
  for (const auto& [i, j] : gt.pairs) {
    if (i >= scores.rows() || j >= scores.cols())
      throw std::invalid_argument("descriptor_nll: gt pair outside score matrix");
    S s = scores(i, j);
    if (s < S(1e-12)) {
      s = S(1e-12);
      if (clamped) ++*clamped;
    }
    loss -= std::log(s);
  }
  return loss / S(gt.pairs.size());
}

/// Loss and analytic gradients of descriptor_nll(match_score_matrix(dA, dB))
/// with respect to both descriptor sets.
template <typename S>
S descriptor_loss_grad(const MatX<S>& da, const MatX<S>& db, S temperature,
                       const MatchGroundTruth& gt, MatX<S>* dda, MatX<S>* ddb) {
  if (gt.pairs.empty()) throw std::invalid_argument("descriptor_loss_grad: no ground-truth pairs");
  gt.validate();
  MatX<S> logits = (da * db.transpose()) / temperature;
  MatX<S> logr = detail::rowwise_log_softmax(logits);
  MatX<S> logct = detail::rowwise_log_softmax(MatX<S>(logits.transpose()));  // n x m
  const S invp = S(1) / S(gt.pairs.size());
  S loss = 0;
  MatX<S> dlogits = MatX<S>::Zero(logits.rows(), logits.cols());
  for (const auto& [i, j] : gt.pairs) {
    loss -= (logr(i, j) + logct(j, i)) * invp;
    dlogits.row(i) += logr.row(i).array().exp().matrix() * invp;
    dlogits.col(j) += logct.row(j).array().exp().matrix().transpose() * invp;
    dlogits(i, j) -= 2 * invp;
  }
  if (dda) *dda = dlogits * db / temperature;
  if (ddb) *ddb = dlogits.transpose() * da / temperature;
  return loss;
}

/// Weighted sum of the three training losses with alpha1 = 2, alpha2 = 1.
template <typename S>
S total_loss(S keypoint, S normal, S descriptor) {
  return keypoint + S(2) * normal + S(1) * descriptor;
}

}  // namespace liftmatch
