#include "simuda/adapt/objective.hpp"

#include <cmath>

#include "simuda/core/errors.hpp"
#include "simuda/nn/layers.hpp"

namespace simuda::adapt {

std::string_view to_string(UdaMethod m) {
  switch (m) {
    case UdaMethod::cdan:
      return "cdan";
    case UdaMethod::mcc:
      return "mcc";
    case UdaMethod::cdan_mcc:
      return "cdan_mcc";
  }
  return "?";
}

UdaMethod parse_uda_method(std::string_view name) {
  if (name == "cdan") return UdaMethod::cdan;
  if (name == "mcc") return UdaMethod::mcc;
  if (name == "cdan_mcc") return UdaMethod::cdan_mcc;
  throw ConfigError("invalid uda method '" + std::string(name) + "' (valid: cdan, mcc, cdan_mcc)");
}

template <typename S>
CrossEntropy<S> cross_entropy(const nn::Matrix<S>& logits, std::span<const int> labels) {
  const Eigen::Index batch = logits.rows();
  if (static_cast<std::size_t>(batch) != labels.size()) throw ShapeError("cross_entropy: label count != batch");
  if (batch == 0) throw ContractError("cross_entropy: empty batch");
  CrossEntropy<S> out;
  out.grad = nn::softmax_rows<S>(logits);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw ContractError("cross_entropy: label " + std::to_string(y) + " out of range");
    const S m = logits.row(i).maxCoeff();
    const double lse = static_cast<double>(m) + std::log(static_cast<double>((logits.row(i).array() - m).exp().sum()));
    loss += lse - static_cast<double>(logits(i, y));
    out.grad(i, y) -= S(1);
  }
  out.grad /= static_cast<S>(batch);
  out.loss = static_cast<S>(loss / static_cast<double>(batch));
  return out;
}

template <typename S>
UdaResult<S> uda_objective(const nn::Matrix<S>& features_source, const nn::Matrix<S>& logits_source,
                           std::span<const int> labels_source, const nn::Matrix<S>& features_target,
                           const nn::Matrix<S>& logits_target, UdaMethod method, AdversarialHead<S> head,
                           const UdaWeights& weights, const MccConfig& mcc) {
  const double alpha = method == UdaMethod::mcc ? 0.0 : weights.cdan;
  const double beta = method == UdaMethod::cdan ? 0.0 : weights.mcc;

  UdaResult<S> out;
  const CrossEntropy<S> ce = cross_entropy(logits_source, labels_source);
  out.terms.ce = static_cast<double>(ce.loss);
  out.grad_source_logits = ce.grad;
  out.grad_source_features = nn::Matrix<S>::Zero(features_source.rows(), features_source.cols());
  out.grad_target_features = nn::Matrix<S>::Zero(features_target.rows(), features_target.cols());
  out.grad_target_logits = nn::Matrix<S>::Zero(logits_target.rows(), logits_target.cols());

  if (alpha != 0.0) {
    if (head.discriminator == nullptr || head.embedder == nullptr) {
      throw StateError("uda_objective: adversarial term requested without a discriminator");
    }
    const nn::Matrix<S> ps = nn::softmax_rows<S>(logits_source);
    const nn::Matrix<S> pt = nn::softmax_rows<S>(logits_target);
    const CdanResult<S> adv = cdan_loss(features_source, ps, features_target, pt, *head.discriminator, *head.embedder,
                                        head.lambda, head.entropy_conditioning, true);
    out.terms.cdan = static_cast<double>(adv.loss);
    out.grad_source_features += static_cast<S>(alpha) * adv.grad_source;
    out.grad_target_features += static_cast<S>(alpha) * adv.grad_target;
    // The discriminator accumulated dL/dtheta for a unit weight; rescale.
    if (alpha != 1.0) {
      for (auto* p : head.discriminator->parameters()) p->grad *= static_cast<S>(alpha);
    }
  }
  if (beta != 0.0) {
    const MccResult<S> conf = mcc_loss(logits_target, mcc, true);
    out.terms.mcc = static_cast<double>(conf.loss);
    out.grad_target_logits += static_cast<S>(beta) * conf.grad;
  }
  out.terms.total = out.terms.ce + alpha * out.terms.cdan + beta * out.terms.mcc;
  return out;
}

template CrossEntropy<float> cross_entropy<float>(const nn::Matrix<float>&, std::span<const int>);
template CrossEntropy<double> cross_entropy<double>(const nn::Matrix<double>&, std::span<const int>);
template UdaResult<float> uda_objective<float>(const nn::Matrix<float>&, const nn::Matrix<float>&,
                                               std::span<const int>, const nn::Matrix<float>&,
                                               const nn::Matrix<float>&, UdaMethod, AdversarialHead<float>,
                                               const UdaWeights&, const MccConfig&);
template UdaResult<double> uda_objective<double>(const nn::Matrix<double>&, const nn::Matrix<double>&,
                                                 std::span<const int>, const nn::Matrix<double>&,
                                                 const nn::Matrix<double>&, UdaMethod, AdversarialHead<double>,
                                                 const UdaWeights&, const MccConfig&);

}  // namespace simuda::adapt
