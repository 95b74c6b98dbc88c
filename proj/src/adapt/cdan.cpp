#include "simuda/adapt/cdan.hpp"

#include <algorithm>
#include <cmath>

#include "simuda/adapt/grl.hpp"
#include "simuda/core/errors.hpp"

namespace simuda::adapt {

namespace {

template <typename S>
void accumulate_bce(const nn::Matrix<S>& d, const nn::ColVector<S>& w, double label, double inv_count,
                    Eigen::Index offset, double& loss, nn::Matrix<S>& dlogit) {
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const double raw = static_cast<double>(d(i, 0));
    const double p = std::clamp(raw, kBceEpsilon, 1.0 - kBceEpsilon);
    const double wi = static_cast<double>(w(i));
    loss -= wi * inv_count * (label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
    const bool clamped = raw < kBceEpsilon || raw > 1.0 - kBceEpsilon;
    // sigmoid + BCE: dL/dlogit = w (p - y) / N inside the clamp window.
    dlogit(offset + i, 0) = clamped ? S(0) : static_cast<S>(wi * inv_count * (raw - label));
  }
}

}  // namespace

template <typename S>
DomainBce<S> domain_bce(const nn::Matrix<S>& d_source, const nn::Matrix<S>& d_target,
                        const nn::ColVector<S>& w_source, const nn::ColVector<S>& w_target) {
  const Eigen::Index total = d_source.rows() + d_target.rows();
  if (total == 0) throw ContractError("domain_bce: empty batch");
  DomainBce<S> out;
  out.dlogit.resize(total, 1);
  const double inv = 1.0 / static_cast<double>(total);
  double loss = 0.0;
  accumulate_bce(d_source, w_source, 1.0, inv, 0, loss, out.dlogit);
  accumulate_bce(d_target, w_target, 0.0, inv, d_source.rows(), loss, out.dlogit);
  out.loss = static_cast<S>(loss);
  return out;
}

template <typename S>
nn::ColVector<S> entropy_weights(const nn::Matrix<S>& probs) {
  nn::ColVector<S> w(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const double p = static_cast<double>(probs(i, j));
      if (p > 0.0) h -= p * std::log(p);
    }
    w(i) = static_cast<S>(1.0 + std::exp(-h));
  }
  const S mean = w.mean();
  return w / mean;
}

template <typename S>
CdanResult<S> cdan_loss(const nn::Matrix<S>& features_source, const nn::Matrix<S>& probs_source,
                        const nn::Matrix<S>& features_target, const nn::Matrix<S>& probs_target,
                        DomainDiscriminator<S>& discriminator, const JointEmbedder<S>& embedder, double lambda,
                        bool entropy_conditioning, bool compute_gradients) {
  const Eigen::Index batch = features_source.rows();
  if (features_target.rows() != batch || probs_source.rows() != batch || probs_target.rows() != batch) {
    throw ContractError("cdan_loss: source and target batches must have equal size");
  }
  // Joint pass over [source; target] so the discriminator sees one batch.
  nn::Matrix<S> features(2 * batch, features_source.cols());
  features << grl_forward(features_source), grl_forward(features_target);
  nn::Matrix<S> probs(2 * batch, probs_source.cols());
  probs << probs_source, probs_target;

  const nn::Matrix<S> joint = embedder.embed(features, probs);
  const nn::Matrix<S> d = discriminator.forward(joint, compute_gradients);
  if (!d.allFinite()) throw NumericError("cdan_loss: discriminator produced a non-finite output");

  CdanResult<S> out;
  if (entropy_conditioning) {
    out.weights_source = entropy_weights(probs_source);
    out.weights_target = entropy_weights(probs_target);
  } else {
    out.weights_source = nn::ColVector<S>::Ones(batch);
    out.weights_target = nn::ColVector<S>::Ones(batch);
  }
  const DomainBce<S> bce = domain_bce<S>(d.topRows(batch), d.bottomRows(batch), out.weights_source, out.weights_target);
  out.loss = bce.loss;
  if (compute_gradients) {
    const nn::Matrix<S> djoint = discriminator.backward(bce.dlogit);
    const nn::Matrix<S> dfeatures = grl_backward(embedder.backward_features(djoint, probs), lambda);
    out.grad_source = dfeatures.topRows(batch);
    out.grad_target = dfeatures.bottomRows(batch);
  }
  return out;
}

template DomainBce<float> domain_bce<float>(const nn::Matrix<float>&, const nn::Matrix<float>&,
                                            const nn::ColVector<float>&, const nn::ColVector<float>&);
template DomainBce<double> domain_bce<double>(const nn::Matrix<double>&, const nn::Matrix<double>&,
                                              const nn::ColVector<double>&, const nn::ColVector<double>&);
template nn::ColVector<float> entropy_weights<float>(const nn::Matrix<float>&);
template nn::ColVector<double> entropy_weights<double>(const nn::Matrix<double>&);
template CdanResult<float> cdan_loss<float>(const nn::Matrix<float>&, const nn::Matrix<float>&,
                                            const nn::Matrix<float>&, const nn::Matrix<float>&,
                                            DomainDiscriminator<float>&, const JointEmbedder<float>&, double, bool,
                                            bool);
template CdanResult<double> cdan_loss<double>(const nn::Matrix<double>&, const nn::Matrix<double>&,
                                              const nn::Matrix<double>&, const nn::Matrix<double>&,
                                              DomainDiscriminator<double>&, const JointEmbedder<double>&, double,
                                              bool, bool);

}  // namespace simuda::adapt
