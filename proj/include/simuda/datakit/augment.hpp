#pragma once

#include <array>
#include <string_view>

#include "simuda/core/random.hpp"
#include "simuda/datakit/dataset.hpp"
#include "simuda/datakit/image.hpp"

namespace simuda::datakit {

enum class AugmentKind { base, augmix, eval };

std::string_view to_string(AugmentKind k);
AugmentKind parse_augment_kind(std::string_view name);

struct ColorJitter {
  double brightness = 0.3;
  double contrast = 0.3;
  double saturation = 0.3;
  double hue = 0.3;
};

/// AugMix parameters; defaults are the reference implementation's.
struct AugMixParams {
  int severity = 3;
  int mixture_width = 3;
  int chain_depth = -1;  // -1: uniform in [1, 3]
  double alpha = 1.0;
  bool all_ops = true;
};

struct AugmentationPolicy {
  AugmentKind kind = AugmentKind::eval;
  double crop_scale_lo = 0.7;
  double crop_scale_hi = 1.0;
  double flip_p = 0.5;
  ColorJitter jitter;
  double grayscale_p = 0.1;
  AugMixParams augmix;
  std::array<float, 3> mean{0.5f, 0.5f, 0.5f};
  std::array<float, 3> std{0.5f, 0.5f, 0.5f};
  int resolution = 64;

  static AugmentationPolicy make(AugmentKind kind, int resolution);
  /// Throws ConfigError unless 0 < lo <= hi <= 1, resolution > 0, std > 0.
  void validate() const;
};

/// Runs the policy's pipeline and normalizes to (pixel/255 - mean) / std.
///   base:   random resized crop -> flip -> color jitter -> random grayscale
///   augmix: random resized crop -> flip -> AugMix
///   eval:   resize -> normalize (no randomness, rng untouched)
FloatImage apply_policy(const Image& image, const AugmentationPolicy& policy, Rng& rng);

/// Loads sample i and applies the policy; decoding errors carry the path.
FloatImage apply_policy(const DomainDataset& dataset, std::size_t index, const AugmentationPolicy& policy, Rng& rng);

FloatImage normalize(const Image& image, const AugmentationPolicy& policy);
/// Inverse of the normalization, in pixel units (not rounded).
std::vector<double> denormalize(const FloatImage& image, const AugmentationPolicy& policy);

// Individual transforms, exposed for testing.
namespace ops {

struct CropBox {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};

/// Area fraction in [lo, hi], log-uniform aspect in [3/4, 4/3], ten attempts,
/// then a center crop fallback.
CropBox sample_resized_crop(int height, int width, double lo, double hi, Rng& rng);
Image crop(const Image& image, const CropBox& box);
Image hflip(const Image& image);

Image adjust_brightness(const Image& image, double factor);
Image adjust_contrast(const Image& image, double factor);
Image adjust_saturation(const Image& image, double factor);
/// Rotates hue by `shift` turns, shift in [-0.5, 0.5].
Image adjust_hue(const Image& image, double shift);
Image adjust_sharpness(const Image& image, double factor);
Image to_grayscale(const Image& image);

/// Random-order brightness/contrast/saturation/hue with factors drawn from the
/// jitter ranges.
Image color_jitter(const Image& image, const ColorJitter& jitter, Rng& rng);

Image autocontrast(const Image& image);
Image equalize(const Image& image);
Image posterize(const Image& image, int bits);
Image solarize(const Image& image, double threshold);
Image rotate(const Image& image, double degrees);
Image shear_x(const Image& image, double amount);
Image shear_y(const Image& image, double amount);
Image translate(const Image& image, int dx, int dy);

Image augmix(const Image& image, const AugMixParams& params, Rng& rng);

}  // namespace ops

}  // namespace simuda::datakit
