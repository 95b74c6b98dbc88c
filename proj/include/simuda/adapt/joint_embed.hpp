#pragma once

#include <cstdint>

#include "simuda/nn/tensor.hpp"

namespace simuda::adapt {

enum class EmbedMode { exact, randomized };

inline constexpr int kExactEmbedLimit = 4096;
inline constexpr int kDefaultRandomDim = 1024;

/// Multilinear conditioning of features on class predictions.
///
/// Exact mode emits the flattened outer product f (x) p with component f_k * p_j
/// at index k*C + j. Randomized mode emits (R_f f) .* (R_g p) / sqrt(d_r) with
/// fixed standard-normal projections. Exact is used iff d_f * C <= 4096.
template <typename S>
class JointEmbedder {
 public:
  JointEmbedder() = default;
  JointEmbedder(int feature_dim, int num_classes, std::uint64_t seed, int random_dim = kDefaultRandomDim);

  EmbedMode mode() const { return mode_; }
  int output_dim() const;
  int feature_dim() const { return feature_dim_; }
  int num_classes() const { return num_classes_; }

  /// Throws ContractError if a row of `probs` does not sum to 1 within 1e-4.
  nn::Matrix<S> embed(const nn::Matrix<S>& features, const nn::Matrix<S>& probs) const;

  /// dL/dfeatures for a given dL/djoint with `probs` held constant.
  nn::Matrix<S> backward_features(const nn::Matrix<S>& djoint, const nn::Matrix<S>& probs) const;

  const nn::Matrix<S>& feature_projection() const { return rf_; }
  const nn::Matrix<S>& class_projection() const { return rg_; }

 private:
  EmbedMode mode_ = EmbedMode::exact;
  int feature_dim_ = 0;
  int num_classes_ = 0;
  int random_dim_ = kDefaultRandomDim;
  nn::Matrix<S> rf_;  // d_r x d_f
  nn::Matrix<S> rg_;  // d_r x C
};

}  // namespace simuda::adapt
