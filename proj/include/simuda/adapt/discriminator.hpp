#pragma once

#include <vector>

#include "simuda/core/random.hpp"
#include "simuda/nn/layers.hpp"

namespace simuda::adapt {

inline constexpr double kBceEpsilon = 1e-7;

/// Domain classifier: input -> hidden -> hidden -> 1 with ReLU between layers
/// and a sigmoid output. Source is the positive class.
template <typename S>
class DomainDiscriminator {
 public:
  DomainDiscriminator() = default;
  DomainDiscriminator(int input_dim, int hidden = 1024);

  void reset(Rng& rng);

  /// Returns sigmoid outputs (B x 1). When `keep_cache` is set the activations
  /// are retained for backward().
  nn::Matrix<S> forward(const nn::Matrix<S>& joint, bool keep_cache);

  /// Backpropagates dL/dlogit (B x 1) and returns dL/djoint.
  nn::Matrix<S> backward(const nn::Matrix<S>& dlogit);

  std::vector<nn::Parameter<S>*> parameters();
  std::vector<const nn::Parameter<S>*> parameters() const;

  int input_dim() const { return layer1_.in_features(); }
  int hidden() const { return layer1_.out_features(); }

 private:
  nn::Linear<S> layer1_;
  nn::Linear<S> layer2_;
  nn::Linear<S> layer3_;
  nn::Matrix<S> input_, h1_, h2_;
};

}  // namespace simuda::adapt
