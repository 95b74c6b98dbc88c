#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "simuda/core/random.hpp"
#include "simuda/nn/layers.hpp"

namespace simuda::backbone {

using nn::FeatureMap;
using Matrix = nn::Matrix<float>;
using Param = nn::Parameter<float>;

enum class BackboneSource { compact, hub };

/// Which embedding is exposed as the feature F fed to the head and to CDAN.
enum class Pooling { pooled, mean, cls };

std::string_view to_string(BackboneSource s);
std::string_view to_string(Pooling p);
BackboneSource parse_backbone_source(std::string_view s);
Pooling parse_pooling(std::string_view s);

struct BackboneSpec {
  BackboneSource source = BackboneSource::compact;
  std::string hub_id;  // hub only
  int resolution = 64;
  int feature_dim = 128;  // 0: take the checkpoint's published width
  Pooling pooling = Pooling::pooled;

  static BackboneSpec compact(int feature_dim = 128, int resolution = 64);
};

enum class TrainScheme { CH, FT };

/// Convolutional pyramid: four 3x3 stride-2 conv+ReLU stages (16, 32, 64,
/// feature_dim channels) followed by global average pooling.
class CompactBackbone {
 public:
  CompactBackbone() = default;
  explicit CompactBackbone(int feature_dim);

  void reset(Rng& rng);
  Matrix forward(const FeatureMap<float>& images, bool keep_cache);
  void backward(const Matrix& dfeatures);

  std::vector<Param*> parameters();
  std::vector<const Param*> parameters() const;
  int feature_dim() const { return feature_dim_; }

 private:
  int feature_dim_ = 0;
  std::vector<nn::Conv2d<float>> convs_;
  std::vector<FeatureMap<float>> activations_;  // post-ReLU outputs, cached
};

/// Feature extractor f plus linear head g, logits = F W^T + b.
class ClassifierModel {
 public:
  struct Output {
    Matrix features;  // B x d_f
    Matrix logits;    // B x C
  };

  ClassifierModel() = default;
  ClassifierModel(const BackboneSpec& spec, int num_classes, Rng& rng);

  const BackboneSpec& spec() const { return spec_; }
  int feature_dim() const { return backbone_.feature_dim(); }
  int num_classes() const { return head_.out_features(); }

  /// Throws ShapeError on a resolution or channel mismatch. With
  /// `training` set, activations are cached for backward().
  Output forward(const FeatureMap<float>& images, bool training);

  /// Gradient of the loss w.r.t. the features (excluding the path through
  /// the head) and w.r.t. the logits. Either may be empty.
  void backward(const Matrix& dfeatures, const Matrix& dlogits);

  /// New head: W ~ truncated normal (std 0.02), b = 0. Throws ConfigError for C < 2.
  void replace_head(int num_classes, Rng& rng);
  void set_trainable(TrainScheme scheme);
  bool features_trainable() const;

  std::vector<Param*> parameters();
  std::vector<const Param*> parameters() const;
  std::vector<Param*> feature_parameters() { return backbone_.parameters(); }
  std::vector<Param*> head_parameters() { return {&head_.weight, &head_.bias}; }
  std::size_t parameter_count() const;
  std::size_t trainable_parameter_count() const;

  const nn::Linear<float>& head() const { return head_; }
  nn::Linear<float>& head() { return head_; }

 private:
  BackboneSpec spec_;
  CompactBackbone backbone_;
  nn::Linear<float> head_;
  Matrix cached_features_;
};

}  // namespace simuda::backbone
