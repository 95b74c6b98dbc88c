#include "simuda/adapt/mcc.hpp"

#include <cmath>

#include "simuda/core/errors.hpp"
#include "simuda/nn/layers.hpp"

namespace simuda::adapt {

template <typename S>
MccResult<S> mcc_loss(const nn::Matrix<S>& logits, const MccConfig& cfg, bool compute_gradients) {
  const Eigen::Index batch = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (batch < 2) throw ConfigError("mcc_loss: batch size must be >= 2");
  if (classes < 1) throw ShapeError("mcc_loss: logits have no class columns");
  if (!(cfg.temperature > 0.0)) throw ConfigError("mcc_loss: temperature must be > 0");

  const nn::Matrix<S> probs = nn::softmax_rows<S>(logits, static_cast<S>(cfg.temperature));

  // Entropy weights. log(0) terms contribute 0 to H.
  nn::ColVector<S> entropy(batch);
  nn::Matrix<S> log_probs(batch, classes);
  for (Eigen::Index i = 0; i < batch; ++i) {
    S h = 0;
    for (Eigen::Index j = 0; j < classes; ++j) {
      const S p = probs(i, j);
      log_probs(i, j) = p > S(0) ? std::log(p) : S(0);
      h -= p * log_probs(i, j);
    }
    entropy(i) = h;
  }
  const nn::ColVector<S> raw = (S(1) + (-entropy.array()).exp()).matrix();
  const S raw_sum = raw.sum();
  const nn::ColVector<S> weight = raw * (static_cast<S>(batch) / raw_sum);

  // C = Y^T diag(W) Y; rows are renormalized so only the diagonal matters:
  // loss = 1 - (1/C) sum_j C_jj / r_j with r_j = sum_i W_i Y_ij.
  const nn::Matrix<S> weighted = weight.asDiagonal() * probs;
  const nn::RowVector<S> row_sum = weighted.colwise().sum();
  const nn::RowVector<S> diag = (weighted.array() * probs.array()).colwise().sum();
  const S inv_classes = S(1) / static_cast<S>(classes);

  MccResult<S> out;
  S trace_ratio = 0;
  for (Eigen::Index j = 0; j < classes; ++j) trace_ratio += diag(j) / row_sum(j);
  out.loss = S(1) - inv_classes * trace_ratio;
  if (!compute_gradients) return out;

  const nn::RowVector<S> g_diag = -inv_classes * row_sum.cwiseInverse();
  const nn::RowVector<S> g_row = inv_classes * diag.cwiseQuotient(row_sum.cwiseProduct(row_sum));

  // Direct dependence of C_jj and r_j on Y.
  nn::Matrix<S> g_probs(batch, classes);
  for (Eigen::Index i = 0; i < batch; ++i) {
    g_probs.row(i) = weight(i) * (S(2) * probs.row(i).cwiseProduct(g_diag) + g_row);
  }
  // Through W_i.
  nn::ColVector<S> g_weight(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    g_weight(i) = probs.row(i).cwiseProduct(probs.row(i)).dot(g_diag) + probs.row(i).dot(g_row);
  }
  const S weighted_mean = g_weight.dot(raw) / raw_sum;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const S g_raw = static_cast<S>(batch) / raw_sum * (g_weight(i) - weighted_mean);
    // raw_i = 1 + exp(-H_i), dH_i/dY_ij = -(log Y_ij + 1)
    const S g_entropy = -g_raw * std::exp(-entropy(i));
    g_probs.row(i).array() -= g_entropy * (log_probs.row(i).array() + S(1));
  }
  // Softmax backward with temperature.
  out.grad.resize(batch, classes);
  const S inv_t = static_cast<S>(1.0 / cfg.temperature);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const S dot = g_probs.row(i).dot(probs.row(i));
    out.grad.row(i) = inv_t * probs.row(i).cwiseProduct((g_probs.row(i).array() - dot).matrix());
  }
  return out;
}

template MccResult<float> mcc_loss<float>(const nn::Matrix<float>&, const MccConfig&, bool);
template MccResult<double> mcc_loss<double>(const nn::Matrix<double>&, const MccConfig&, bool);

}  // namespace simuda::adapt
