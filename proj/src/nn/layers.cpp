#include "simuda/nn/layers.hpp"

#include <cmath>

#include "simuda/core/errors.hpp"

namespace simuda::nn {

template <typename S>
Linear<S>::Linear(std::string name, int in_features, int out_features)
    : weight(name + ".weight", out_features, in_features), bias(name + ".bias", 1, out_features) {}

template <typename S>
void Linear<S>::reset(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features()));
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) {
    weight.value.data()[i] = static_cast<S>(uniform(rng, -bound, bound));
  }
  for (Eigen::Index i = 0; i < bias.value.size(); ++i) {
    bias.value.data()[i] = static_cast<S>(uniform(rng, -bound, bound));
  }
}

template <typename S>
Matrix<S> Linear<S>::forward(const Matrix<S>& x) const {
  if (x.cols() != weight.value.cols()) {
    throw ShapeError(weight.name + ": expected " + std::to_string(weight.value.cols()) +
                     " input features, got " + std::to_string(x.cols()));
  }
  Matrix<S> y = x * weight.value.transpose();
  y.rowwise() += bias.value.row(0);
  return y;
}

template <typename S>
Matrix<S> Linear<S>::backward(const Matrix<S>& x, const Matrix<S>& dy, bool want_input_grad) {
  if (weight.trainable) weight.accumulate(dy.transpose() * x);
  if (bias.trainable) bias.accumulate(dy.colwise().sum());
  if (!want_input_grad) return {};
  return dy * weight.value;
}

template <typename S>
Conv2d<S>::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride, int padding)
    : weight(name + ".weight", out_channels, kernel * kernel * in_channels),
      bias(name + ".bias", 1, out_channels),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding) {}

template <typename S>
void Conv2d<S>::reset(Rng& rng) {
  // He-normal for ReLU stacks.
  const double fan_in = static_cast<double>(weight.value.cols());
  const double std = std::sqrt(2.0 / fan_in);
  for (Eigen::Index i = 0; i < weight.value.size(); ++i) {
    weight.value.data()[i] = static_cast<S>(normal(rng) * std);
  }
  bias.value.setZero();
}

template <typename S>
FeatureMap<S> Conv2d<S>::forward(const FeatureMap<S>& x, bool keep_cache) {
  if (x.c != in_channels_) {
    throw ShapeError(weight.name + ": expected " + std::to_string(in_channels_) + " channels, got " +
                     std::to_string(x.c));
  }
  const int ho = out_size(x.h);
  const int wo = out_size(x.w);
  const int k = kernel_;
  const int ci = in_channels_;
  Matrix<S> cols = Matrix<S>::Zero(static_cast<Eigen::Index>(x.n) * ho * wo, k * k * ci);
  for (int b = 0; b < x.n; ++b) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        const Eigen::Index row = (static_cast<Eigen::Index>(b) * ho + oy) * wo + ox;
        S* dst = cols.row(row).data();
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride_ - padding_ + ky;
          if (iy < 0 || iy >= x.h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * stride_ - padding_ + kx;
            if (ix < 0 || ix >= x.w) continue;
            const S* src = x.data.row((static_cast<Eigen::Index>(b) * x.h + iy) * x.w + ix).data();
            std::copy(src, src + ci, dst + (ky * k + kx) * ci);
          }
        }
      }
    }
  }
  FeatureMap<S> y;
  y.n = x.n;
  y.h = ho;
  y.w = wo;
  y.c = out_channels_;
  y.data.noalias() = cols * weight.value.transpose();
  y.data.rowwise() += bias.value.row(0);
  if (keep_cache) {
    cols_ = std::move(cols);
    in_n_ = x.n;
    in_h_ = x.h;
    in_w_ = x.w;
  }
  return y;
}

template <typename S>
FeatureMap<S> Conv2d<S>::backward(const FeatureMap<S>& dy, bool want_input_grad) {
  if (cols_.rows() != dy.data.rows()) {
    throw StateError(weight.name + ": backward without a cached forward pass");
  }
  if (weight.trainable) weight.accumulate(dy.data.transpose() * cols_);
  if (bias.trainable) bias.accumulate(dy.data.colwise().sum());
  FeatureMap<S> dx;
  if (want_input_grad) {
    const Matrix<S> dcols = dy.data * weight.value;
    dx = FeatureMap<S>(in_n_, in_h_, in_w_, in_channels_);
    dx.data.setZero();
    const int k = kernel_;
    const int ci = in_channels_;
    for (int b = 0; b < dy.n; ++b) {
      for (int oy = 0; oy < dy.h; ++oy) {
        for (int ox = 0; ox < dy.w; ++ox) {
          const Eigen::Index row = (static_cast<Eigen::Index>(b) * dy.h + oy) * dy.w + ox;
          const S* src = dcols.row(row).data();
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride_ - padding_ + ky;
            if (iy < 0 || iy >= in_h_) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * stride_ - padding_ + kx;
              if (ix < 0 || ix >= in_w_) continue;
              S* dst = dx.data.row((static_cast<Eigen::Index>(b) * in_h_ + iy) * in_w_ + ix).data();
              const S* s = src + (ky * k + kx) * ci;
              for (int c = 0; c < ci; ++c) dst[c] += s[c];
            }
          }
        }
      }
    }
  }
  cols_.resize(0, 0);
  return dx;
}

template <typename S>
void relu_inplace(Matrix<S>& x) {
  x = x.cwiseMax(S(0));
}

template <typename S>
void relu_backward_inplace(const Matrix<S>& y, Matrix<S>& dy) {
  dy = (y.array() > S(0)).select(dy, S(0));
}

template <typename S>
Matrix<S> global_average_pool(const FeatureMap<S>& x) {
  const int hw = x.h * x.w;
  Matrix<S> out(x.n, x.c);
  for (int b = 0; b < x.n; ++b) {
    out.row(b) = x.data.middleRows(static_cast<Eigen::Index>(b) * hw, hw).colwise().sum() / static_cast<S>(hw);
  }
  return out;
}

template <typename S>
FeatureMap<S> global_average_pool_backward(const Matrix<S>& dy, int n, int h, int w) {
  FeatureMap<S> dx(n, h, w, static_cast<int>(dy.cols()));
  const int hw = h * w;
  for (int b = 0; b < n; ++b) {
    const RowVector<S> g = dy.row(b) / static_cast<S>(hw);
    for (int p = 0; p < hw; ++p) dx.data.row(static_cast<Eigen::Index>(b) * hw + p) = g;
  }
  return dx;
}

template <typename S>
Matrix<S> softmax_rows(const Matrix<S>& logits, S temperature) {
  Matrix<S> p = logits / temperature;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const S m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

template class Linear<float>;
template class Linear<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template void relu_inplace<float>(Matrix<float>&);
template void relu_inplace<double>(Matrix<double>&);
template void relu_backward_inplace<float>(const Matrix<float>&, Matrix<float>&);
template void relu_backward_inplace<double>(const Matrix<double>&, Matrix<double>&);
template Matrix<float> global_average_pool<float>(const FeatureMap<float>&);
template Matrix<double> global_average_pool<double>(const FeatureMap<double>&);
template FeatureMap<float> global_average_pool_backward<float>(const Matrix<float>&, int, int, int);
template FeatureMap<double> global_average_pool_backward<double>(const Matrix<double>&, int, int, int);
template Matrix<float> softmax_rows<float>(const Matrix<float>&, float);
template Matrix<double> softmax_rows<double>(const Matrix<double>&, double);

}  // namespace simuda::nn
