#pragma once

#include "simuda/nn/tensor.hpp"

namespace simuda::adapt {

struct MccConfig {
  double temperature = 1.0;
};

template <typename S>
struct MccResult {
  S loss = 0;
  nn::Matrix<S> grad;  // dL/dlogits, empty unless requested
};

/// Minimum class confusion on a batch of target logits (B x C, B >= 2).
///
///   Y = softmax(Z / T)
///   H_i = -sum_j Y_ij log Y_ij
///   W_ii = B (1 + e^{-H_i}) / sum_b (1 + e^{-H_b})
///   C = Y^T W Y, row-normalized
///   loss = (1 / C) sum_{j != j'} C_jj'
///
/// The gradient is the full derivative, including the path through the
/// entropy weights.
template <typename S>
MccResult<S> mcc_loss(const nn::Matrix<S>& logits, const MccConfig& cfg, bool compute_gradients = true);

}  // namespace simuda::adapt
