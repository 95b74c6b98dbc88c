#pragma once

#include <vector>

#include "simuda/core/random.hpp"
#include "simuda/nn/tensor.hpp"

namespace simuda::nn {

/// Fully connected layer, y = x W^T + b, W is out x in.
template <typename S>
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features);

  /// Kaiming-uniform style init matching the usual default for linear layers.
  void reset(Rng& rng);

  Matrix<S> forward(const Matrix<S>& x) const;
  /// Accumulates weight/bias gradients; returns dL/dx when `want_input_grad`.
  Matrix<S> backward(const Matrix<S>& x, const Matrix<S>& dy, bool want_input_grad = true);

  int in_features() const { return static_cast<int>(weight.value.cols()); }
  int out_features() const { return static_cast<int>(weight.value.rows()); }

  Parameter<S> weight;
  Parameter<S> bias;
};

/// 2-D convolution over NHWC maps, square kernel, zero padding.
template <typename S>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride, int padding);

  void reset(Rng& rng);

  /// When `keep_cache` is set the im2col matrix is retained for backward().
  FeatureMap<S> forward(const FeatureMap<S>& x, bool keep_cache);
  /// Requires a preceding forward(..., true). Returns dL/dx when requested.
  FeatureMap<S> backward(const FeatureMap<S>& dy, bool want_input_grad);

  int out_size(int in) const { return (in + 2 * padding_ - kernel_) / stride_ + 1; }
  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }

  Parameter<S> weight;  // out x (k*k*in), column index (ky*k + kx)*in + ci
  Parameter<S> bias;    // 1 x out

 private:
  int in_channels_ = 0;
  int out_channels_ = 0;
  int kernel_ = 3;
  int stride_ = 1;
  int padding_ = 1;
  Matrix<S> cols_;
  int in_n_ = 0, in_h_ = 0, in_w_ = 0;
};

template <typename S>
void relu_inplace(Matrix<S>& x);

/// dL/dx for y = relu(x), given the forward output y.
template <typename S>
void relu_backward_inplace(const Matrix<S>& y, Matrix<S>& dy);

/// Mean over spatial positions: (n*h*w) x c -> n x c.
template <typename S>
Matrix<S> global_average_pool(const FeatureMap<S>& x);

template <typename S>
FeatureMap<S> global_average_pool_backward(const Matrix<S>& dy, int n, int h, int w);

/// Row-wise softmax of `logits / temperature`.
template <typename S>
Matrix<S> softmax_rows(const Matrix<S>& logits, S temperature = S(1));

}  // namespace simuda::nn
