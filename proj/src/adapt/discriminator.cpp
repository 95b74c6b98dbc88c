#include "simuda/adapt/discriminator.hpp"

#include "simuda/core/errors.hpp"

namespace simuda::adapt {

template <typename S>
DomainDiscriminator<S>::DomainDiscriminator(int input_dim, int hidden)
    : layer1_("discriminator.fc1", input_dim, hidden),
      layer2_("discriminator.fc2", hidden, hidden),
      layer3_("discriminator.fc3", hidden, 1) {}

template <typename S>
void DomainDiscriminator<S>::reset(Rng& rng) {
  layer1_.reset(rng);
  layer2_.reset(rng);
  layer3_.reset(rng);
}

template <typename S>
nn::Matrix<S> DomainDiscriminator<S>::forward(const nn::Matrix<S>& joint, bool keep_cache) {
  nn::Matrix<S> h1 = layer1_.forward(joint);
  nn::relu_inplace(h1);
  nn::Matrix<S> h2 = layer2_.forward(h1);
  nn::relu_inplace(h2);
  nn::Matrix<S> out = layer3_.forward(h2);
  out = (S(1) + (-out.array()).exp()).inverse().matrix();
  if (keep_cache) {
    input_ = joint;
    h1_ = std::move(h1);
    h2_ = std::move(h2);
  }
  return out;
}

template <typename S>
nn::Matrix<S> DomainDiscriminator<S>::backward(const nn::Matrix<S>& dlogit) {
  if (h2_.rows() != dlogit.rows()) throw StateError("discriminator backward without cached forward pass");
  nn::Matrix<S> dh2 = layer3_.backward(h2_, dlogit);
  nn::relu_backward_inplace(h2_, dh2);
  nn::Matrix<S> dh1 = layer2_.backward(h1_, dh2);
  nn::relu_backward_inplace(h1_, dh1);
  nn::Matrix<S> dx = layer1_.backward(input_, dh1);
  input_.resize(0, 0);
  h1_.resize(0, 0);
  h2_.resize(0, 0);
  return dx;
}

template <typename S>
std::vector<nn::Parameter<S>*> DomainDiscriminator<S>::parameters() {
  return {&layer1_.weight, &layer1_.bias, &layer2_.weight, &layer2_.bias, &layer3_.weight, &layer3_.bias};
}

template <typename S>
std::vector<const nn::Parameter<S>*> DomainDiscriminator<S>::parameters() const {
  return {&layer1_.weight, &layer1_.bias, &layer2_.weight, &layer2_.bias, &layer3_.weight, &layer3_.bias};
}

template class DomainDiscriminator<float>;
template class DomainDiscriminator<double>;

}  // namespace simuda::adapt
