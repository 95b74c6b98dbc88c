#pragma once

#include <vector>

#include "simuda/nn/tensor.hpp"

namespace simuda::nn {

template <typename S>
class Optimizer {
 public:
  explicit Optimizer(std::vector<Parameter<S>*> params) : params_(std::move(params)) {}
  virtual ~Optimizer() = default;

  /// Applies one update with learning rate `lr`. Parameters that are frozen
  /// or received no gradient since the last zero_grad() are left untouched.
  virtual void step(double lr) = 0;

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  const std::vector<Parameter<S>*>& params() const { return params_; }

 protected:
  std::vector<Parameter<S>*> params_;
};

/// SGD with heavy-ball momentum (buffer = mu * buffer + g; p -= lr * buffer).
template <typename S>
class Sgd final : public Optimizer<S> {
 public:
  Sgd(std::vector<Parameter<S>*> params, double momentum, double weight_decay);
  void step(double lr) override;

 private:
  double momentum_;
  double weight_decay_;
  std::vector<Matrix<S>> buffers_;
  std::vector<bool> initialized_;
};

/// Adam with decoupled weight decay.
template <typename S>
class AdamW final : public Optimizer<S> {
 public:
  AdamW(std::vector<Parameter<S>*> params, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8);
  void step(double lr) override;

 private:
  double weight_decay_;
  double beta1_;
  double beta2_;
  double eps_;
  std::vector<Matrix<S>> m_;
  std::vector<Matrix<S>> v_;
  std::vector<long> steps_;
};

}  // namespace simuda::nn
