#include "simuda/backbone/model.hpp"

#include "simuda/core/errors.hpp"

namespace simuda::backbone {

std::string_view to_string(BackboneSource s) { return s == BackboneSource::compact ? "compact" : "hub"; }

std::string_view to_string(Pooling p) {
  switch (p) {
    case Pooling::pooled:
      return "pooled";
    case Pooling::mean:
      return "mean";
    case Pooling::cls:
      return "cls";
  }
  return "?";
}

BackboneSource parse_backbone_source(std::string_view s) {
  if (s == "compact") return BackboneSource::compact;
  if (s == "hub") return BackboneSource::hub;
  throw ConfigError("invalid backbone source '" + std::string(s) + "' (valid: compact, hub)");
}

Pooling parse_pooling(std::string_view s) {
  if (s == "pooled") return Pooling::pooled;
  if (s == "mean") return Pooling::mean;
  if (s == "cls") return Pooling::cls;
  throw ConfigError("invalid pooling '" + std::string(s) + "' (valid: pooled, mean, cls)");
}

BackboneSpec BackboneSpec::compact(int feature_dim, int resolution) {
  BackboneSpec s;
  s.feature_dim = feature_dim;
  s.resolution = resolution;
  return s;
}

CompactBackbone::CompactBackbone(int feature_dim) : feature_dim_(feature_dim) {
  if (feature_dim <= 0) throw ConfigError("feature_dim must be positive");
  const int widths[] = {3, 16, 32, 64, feature_dim};
  for (int i = 0; i < 4; ++i) {
    convs_.emplace_back("features.conv" + std::to_string(i + 1), widths[i], widths[i + 1], 3, 2, 1);
  }
}

void CompactBackbone::reset(Rng& rng) {
  for (auto& c : convs_) c.reset(rng);
}

Matrix CompactBackbone::forward(const FeatureMap<float>& images, bool keep_cache) {
  activations_.clear();
  FeatureMap<float> x = images;
  for (auto& conv : convs_) {
    x = conv.forward(x, keep_cache);
    nn::relu_inplace(x.data);
    if (keep_cache) activations_.push_back(x);
  }
  return nn::global_average_pool(x);
}

void CompactBackbone::backward(const Matrix& dfeatures) {
  if (activations_.size() != convs_.size()) throw StateError("backbone backward without cached forward pass");
  const FeatureMap<float>& last = activations_.back();
  FeatureMap<float> grad = nn::global_average_pool_backward(dfeatures, last.n, last.h, last.w);
  for (int i = static_cast<int>(convs_.size()) - 1; i >= 0; --i) {
    nn::relu_backward_inplace(activations_[static_cast<std::size_t>(i)].data, grad.data);
    grad = convs_[static_cast<std::size_t>(i)].backward(grad, i > 0);
  }
  activations_.clear();
}

std::vector<Param*> CompactBackbone::parameters() {
  std::vector<Param*> out;
  for (auto& c : convs_) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  return out;
}

std::vector<const Param*> CompactBackbone::parameters() const {
  std::vector<const Param*> out;
  for (const auto& c : convs_) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  return out;
}

ClassifierModel::ClassifierModel(const BackboneSpec& spec, int num_classes, Rng& rng)
    : spec_(spec), backbone_(spec.feature_dim) {
  if (spec.pooling == Pooling::cls) {
    throw ConfigError("the compact backbone has no class token; use pooling = pooled or mean");
  }
  backbone_.reset(rng);
  replace_head(num_classes, rng);
}

ClassifierModel::Output ClassifierModel::forward(const FeatureMap<float>& images, bool training) {
  if (images.h != spec_.resolution || images.w != spec_.resolution || images.c != 3) {
    throw ShapeError("model expects " + std::to_string(spec_.resolution) + "x" + std::to_string(spec_.resolution) +
                     "x3 inputs, got " + std::to_string(images.h) + "x" + std::to_string(images.w) + "x" +
                     std::to_string(images.c));
  }
  Output out;
  out.features = backbone_.forward(images, training && features_trainable());
  out.logits = head_.forward(out.features);
  if (training) cached_features_ = out.features;
  return out;
}

void ClassifierModel::backward(const Matrix& dfeatures, const Matrix& dlogits) {
  if (cached_features_.rows() == 0) throw StateError("model backward without a training forward pass");
  Matrix dF;
  if (dlogits.size() > 0) {
    dF = head_.backward(cached_features_, dlogits, features_trainable());
  }
  if (features_trainable()) {
    if (dfeatures.size() > 0) dF = dF.size() > 0 ? Matrix(dF + dfeatures) : dfeatures;
    if (dF.size() > 0) backbone_.backward(dF);
  }
  cached_features_.resize(0, 0);
}

void ClassifierModel::replace_head(int num_classes, Rng& rng) {
  if (num_classes < 2) throw ConfigError("classification head needs at least 2 classes, got " + std::to_string(num_classes));
  const bool trainable = head_.weight.value.size() == 0 || head_.weight.trainable;
  head_ = nn::Linear<float>("head", backbone_.feature_dim(), num_classes);
  for (Eigen::Index i = 0; i < head_.weight.value.size(); ++i) {
    head_.weight.value.data()[i] = static_cast<float>(truncated_normal(rng, 0.02));
  }
  head_.bias.value.setZero();
  head_.weight.trainable = head_.bias.trainable = trainable;
}

void ClassifierModel::set_trainable(TrainScheme scheme) {
  const bool train_features = scheme == TrainScheme::FT;
  for (auto* p : backbone_.parameters()) p->trainable = train_features;
  head_.weight.trainable = head_.bias.trainable = true;
}

bool ClassifierModel::features_trainable() const {
  for (const auto* p : backbone_.parameters()) {
    if (p->trainable) return true;
  }
  return false;
}

std::vector<Param*> ClassifierModel::parameters() {
  auto out = backbone_.parameters();
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::vector<const Param*> ClassifierModel::parameters() const {
  auto out = backbone_.parameters();
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

std::size_t ClassifierModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

std::size_t ClassifierModel::trainable_parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) {
    if (p->trainable) n += static_cast<std::size_t>(p->size());
  }
  return n;
}

}  // namespace simuda::backbone
