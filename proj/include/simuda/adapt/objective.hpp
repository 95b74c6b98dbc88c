#pragma once

#include <span>
#include <string>
#include <string_view>

#include "simuda/adapt/cdan.hpp"
#include "simuda/adapt/mcc.hpp"

namespace simuda::adapt {

enum class UdaMethod { cdan, mcc, cdan_mcc };

std::string_view to_string(UdaMethod m);
/// Throws ConfigError listing the valid names.
UdaMethod parse_uda_method(std::string_view name);

template <typename S>
struct CrossEntropy {
  S loss = 0;
  nn::Matrix<S> grad;
};

/// Mean softmax cross-entropy. Throws ContractError on out-of-range labels.
template <typename S>
CrossEntropy<S> cross_entropy(const nn::Matrix<S>& logits, std::span<const int> labels);

struct UdaWeights {
  double cdan = 1.0;
  double mcc = 1.0;
};

/// Discriminator-side state needed by the adversarial term.
template <typename S>
struct AdversarialHead {
  DomainDiscriminator<S>* discriminator = nullptr;
  const JointEmbedder<S>* embedder = nullptr;
  double lambda = 0.0;
  bool entropy_conditioning = false;
};

struct UdaTerms {
  double total = 0;
  double ce = 0;
  double cdan = 0;
  double mcc = 0;
};

template <typename S>
struct UdaResult {
  UdaTerms terms;
  nn::Matrix<S> grad_source_features;
  nn::Matrix<S> grad_source_logits;
  nn::Matrix<S> grad_target_features;
  nn::Matrix<S> grad_target_logits;
};

/// total = CE(Z_s, y_s) + a * cdan + b * mcc where the method masks (a, b) over
/// the configured weights. Terms masked out are exactly 0 and are never
/// evaluated, so the discriminator is untouched under method=mcc.
template <typename S>
UdaResult<S> uda_objective(const nn::Matrix<S>& features_source, const nn::Matrix<S>& logits_source,
                           std::span<const int> labels_source, const nn::Matrix<S>& features_target,
                           const nn::Matrix<S>& logits_target, UdaMethod method, AdversarialHead<S> head,
                           const UdaWeights& weights, const MccConfig& mcc);

}  // namespace simuda::adapt
