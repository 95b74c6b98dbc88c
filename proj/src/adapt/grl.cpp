#include "simuda/adapt/grl.hpp"

#include <cmath>

#include "simuda/core/errors.hpp"

namespace simuda::adapt {

template <typename S>
nn::Matrix<S> grl_backward(const nn::Matrix<S>& upstream, double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("gradient reversal coefficient must be >= 0");
  return upstream * static_cast<S>(-lambda);
}

double grl_lambda(const GrlSchedule& sched) {
  if (sched.max_steps <= 0) throw ConfigError("grl schedule: max_steps must be > 0");
  const double p = static_cast<double>(sched.step) / static_cast<double>(sched.max_steps);
  return sched.lo + (sched.hi - sched.lo) * (2.0 / (1.0 + std::exp(-sched.gamma * p)) - 1.0);
}

template nn::Matrix<float> grl_backward<float>(const nn::Matrix<float>&, double);
template nn::Matrix<double> grl_backward<double>(const nn::Matrix<double>&, double);

}  // namespace simuda::adapt
