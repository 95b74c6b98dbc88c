#include "simuda/adapt/joint_embed.hpp"

#include <cmath>

#include "simuda/core/errors.hpp"
#include "simuda/core/random.hpp"

namespace simuda::adapt {

template <typename S>
JointEmbedder<S>::JointEmbedder(int feature_dim, int num_classes, std::uint64_t seed, int random_dim)
    : feature_dim_(feature_dim), num_classes_(num_classes), random_dim_(random_dim) {
  if (feature_dim <= 0 || num_classes <= 0) throw ConfigError("joint embedding needs positive dimensions");
  mode_ = (feature_dim * num_classes <= kExactEmbedLimit) ? EmbedMode::exact : EmbedMode::randomized;
  if (mode_ == EmbedMode::randomized) {
    if (random_dim <= 0) throw ConfigError("randomized joint embedding needs random_dim > 0");
    Rng rng(derive_seed(seed, 0x6a6f696e74ULL));
    rf_.resize(random_dim, feature_dim);
    rg_.resize(random_dim, num_classes);
    for (Eigen::Index i = 0; i < rf_.size(); ++i) rf_.data()[i] = static_cast<S>(normal(rng));
    for (Eigen::Index i = 0; i < rg_.size(); ++i) rg_.data()[i] = static_cast<S>(normal(rng));
  }
}

template <typename S>
int JointEmbedder<S>::output_dim() const {
  return mode_ == EmbedMode::exact ? feature_dim_ * num_classes_ : random_dim_;
}

template <typename S>
nn::Matrix<S> JointEmbedder<S>::embed(const nn::Matrix<S>& features, const nn::Matrix<S>& probs) const {
  if (features.rows() != probs.rows() || features.cols() != feature_dim_ || probs.cols() != num_classes_) {
    throw ShapeError("joint embedding: expected B x " + std::to_string(feature_dim_) + " features and B x " +
                     std::to_string(num_classes_) + " probabilities");
  }
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double total = static_cast<double>(probs.row(i).sum());
    if (!(std::abs(total - 1.0) <= 1e-4)) {
      throw ContractError("joint embedding: probability row " + std::to_string(i) + " sums to " +
                          std::to_string(total));
    }
  }
  const Eigen::Index batch = features.rows();
  if (mode_ == EmbedMode::exact) {
    nn::Matrix<S> joint(batch, static_cast<Eigen::Index>(feature_dim_) * num_classes_);
    for (Eigen::Index i = 0; i < batch; ++i) {
      for (int k = 0; k < feature_dim_; ++k) {
        joint.row(i).segment(static_cast<Eigen::Index>(k) * num_classes_, num_classes_) = features(i, k) * probs.row(i);
      }
    }
    return joint;
  }
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(random_dim_)));
  nn::Matrix<S> pf = features * rf_.transpose();
  nn::Matrix<S> pg = probs * rg_.transpose();
  return (pf.array() * pg.array() * scale).matrix();
}

template <typename S>
nn::Matrix<S> JointEmbedder<S>::backward_features(const nn::Matrix<S>& djoint, const nn::Matrix<S>& probs) const {
  const Eigen::Index batch = djoint.rows();
  if (mode_ == EmbedMode::exact) {
    nn::Matrix<S> df(batch, feature_dim_);
    for (Eigen::Index i = 0; i < batch; ++i) {
      for (int k = 0; k < feature_dim_; ++k) {
        df(i, k) = djoint.row(i).segment(static_cast<Eigen::Index>(k) * num_classes_, num_classes_).dot(probs.row(i));
      }
    }
    return df;
  }
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(random_dim_)));
  nn::Matrix<S> pg = probs * rg_.transpose();
  nn::Matrix<S> dpf = (djoint.array() * pg.array() * scale).matrix();
  return dpf * rf_;
}

template class JointEmbedder<float>;
template class JointEmbedder<double>;

}  // namespace simuda::adapt
