#pragma once

#include "simuda/nn/tensor.hpp"

namespace simuda::adapt {

/// Gradient reversal: identity on the way forward.
template <typename S>
nn::Matrix<S> grl_forward(const nn::Matrix<S>& x) {
  return x;
}

/// Gradient reversal backward: -lambda * upstream. Throws ContractError for lambda < 0.
template <typename S>
nn::Matrix<S> grl_backward(const nn::Matrix<S>& upstream, double lambda);

/// Warm-up schedule for the reversal coefficient,
/// lambda = lo + (hi - lo) * (2 / (1 + exp(-gamma * p)) - 1) with p = step / max_steps.
struct GrlSchedule {
  double gamma = 10.0;
  double lo = 0.0;
  double hi = 1.0;
  long max_steps = 1;
  long step = 0;

  void advance() {
    if (step < max_steps) ++step;
  }
};

double grl_lambda(const GrlSchedule& sched);

}  // namespace simuda::adapt
