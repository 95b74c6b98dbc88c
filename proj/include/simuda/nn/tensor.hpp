#pragma once

#include <Eigen/Core>
#include <string>

namespace simuda::nn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

template <typename S>
using ColVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// NHWC activation map stored as an (n*h*w) x c matrix, one row per pixel.
template <typename S>
struct FeatureMap {
  int n = 0;
  int h = 0;
  int w = 0;
  int c = 0;
  Matrix<S> data;

  FeatureMap() = default;
  FeatureMap(int n_, int h_, int w_, int c_) : n(n_), h(h_), w(w_), c(c_), data(n_ * h_ * w_, c_) {}
};

/// A named trainable tensor with its gradient accumulator.
///
/// `has_grad` mirrors a framework's "grad is populated" flag: optimizers skip
/// parameters that received no gradient in the current step, which is what
/// keeps an unused discriminator bitwise untouched under weight decay.
template <typename S>
struct Parameter {
  std::string name;
  Matrix<S> value;
  Matrix<S> grad;
  bool trainable = true;
  bool has_grad = false;

  Parameter() = default;
  Parameter(std::string name_, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(name_)), value(Matrix<S>::Zero(rows, cols)), grad(Matrix<S>::Zero(rows, cols)) {}

  void zero_grad() {
    grad.setZero();
    has_grad = false;
  }

  template <typename Derived>
  void accumulate(const Eigen::MatrixBase<Derived>& g) {
    grad += g;
    has_grad = true;
  }

  Eigen::Index size() const { return value.size(); }
};

}  // namespace simuda::nn
