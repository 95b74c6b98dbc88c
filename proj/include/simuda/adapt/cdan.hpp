#pragma once

#include "simuda/adapt/discriminator.hpp"
#include "simuda/adapt/joint_embed.hpp"

namespace simuda::adapt {

template <typename S>
struct DomainBce {
  S loss = 0;
  nn::Matrix<S> dlogit;  // dL/dlogit, rows: source then target
};

/// Weighted binary cross-entropy over discriminator outputs with source
/// label 1 and target label 0, averaged over all 2B rows. Outputs are clamped
/// to [eps, 1 - eps]; the clamped region carries no gradient.
template <typename S>
DomainBce<S> domain_bce(const nn::Matrix<S>& d_source, const nn::Matrix<S>& d_target,
                        const nn::ColVector<S>& w_source, const nn::ColVector<S>& w_target);

/// Per-row certainty weights 1 + exp(-H(p)), rescaled to mean 1 over the batch.
template <typename S>
nn::ColVector<S> entropy_weights(const nn::Matrix<S>& probs);

template <typename S>
struct CdanResult {
  S loss = 0;
  nn::Matrix<S> grad_source;  // dL/dF_s, already reversed through the GRL
  nn::Matrix<S> grad_target;  // dL/dF_t
  nn::ColVector<S> weights_source;
  nn::ColVector<S> weights_target;
};

/// Conditional adversarial loss.
///
/// The class probabilities are constants here: the adversarial signal reaches
/// the classifier only through the features, via gradient reversal with
/// coefficient `lambda`. When `compute_gradients` is set, discriminator
/// parameter gradients are accumulated and feature gradients are returned.
/// Throws ContractError on unequal batch sizes and NumericError on NaN
/// discriminator output.
template <typename S>
CdanResult<S> cdan_loss(const nn::Matrix<S>& features_source, const nn::Matrix<S>& probs_source,
                        const nn::Matrix<S>& features_target, const nn::Matrix<S>& probs_target,
                        DomainDiscriminator<S>& discriminator, const JointEmbedder<S>& embedder, double lambda,
                        bool entropy_conditioning, bool compute_gradients = true);

}  // namespace simuda::adapt
