#include "simuda/nn/optim.hpp"

#include <cmath>

namespace simuda::nn {

template <typename S>
Sgd<S>::Sgd(std::vector<Parameter<S>*> params, double momentum, double weight_decay)
    : Optimizer<S>(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
  buffers_.resize(this->params_.size());
  initialized_.assign(this->params_.size(), false);
}

template <typename S>
void Sgd<S>::step(double lr) {
  for (std::size_t i = 0; i < this->params_.size(); ++i) {
    Parameter<S>& p = *this->params_[i];
    if (!p.trainable || !p.has_grad) continue;
    Matrix<S> g = p.grad;
    if (weight_decay_ != 0.0) g += static_cast<S>(weight_decay_) * p.value;
    if (momentum_ != 0.0) {
      if (!initialized_[i]) {
        buffers_[i] = g;
        initialized_[i] = true;
      } else {
        buffers_[i] = static_cast<S>(momentum_) * buffers_[i] + g;
      }
      g = buffers_[i];
    }
    p.value -= static_cast<S>(lr) * g;
  }
}

template <typename S>
AdamW<S>::AdamW(std::vector<Parameter<S>*> params, double weight_decay, double beta1, double beta2, double eps)
    : Optimizer<S>(std::move(params)), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.resize(this->params_.size());
  v_.resize(this->params_.size());
  steps_.assign(this->params_.size(), 0);
}

template <typename S>
void AdamW<S>::step(double lr) {
  for (std::size_t i = 0; i < this->params_.size(); ++i) {
    Parameter<S>& p = *this->params_[i];
    if (!p.trainable || !p.has_grad) continue;
    if (steps_[i] == 0) {
      m_[i] = Matrix<S>::Zero(p.value.rows(), p.value.cols());
      v_[i] = Matrix<S>::Zero(p.value.rows(), p.value.cols());
    }
    const long t = ++steps_[i];
    p.value *= static_cast<S>(1.0 - lr * weight_decay_);
    m_[i] = static_cast<S>(beta1_) * m_[i] + static_cast<S>(1.0 - beta1_) * p.grad;
    v_[i] = static_cast<S>(beta2_) * v_[i] + static_cast<S>(1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
    const S step_size = static_cast<S>(lr / bc1);
    const S denom_scale = static_cast<S>(1.0 / std::sqrt(bc2));
    p.value.array() -= step_size * m_[i].array() / (v_[i].array().sqrt() * denom_scale + static_cast<S>(eps_));
  }
}

template class Sgd<float>;
template class Sgd<double>;
template class AdamW<float>;
template class AdamW<double>;

}  // namespace simuda::nn
