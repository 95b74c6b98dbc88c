#include "simuda/datakit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simuda/core/errors.hpp"

namespace simuda::datakit {

std::string_view to_string(AugmentKind k) {
  switch (k) {
    case AugmentKind::base:
      return "base";
    case AugmentKind::augmix:
      return "augmix";
    case AugmentKind::eval:
      return "eval";
  }
  return "?";
}

AugmentKind parse_augment_kind(std::string_view name) {
  if (name == "base") return AugmentKind::base;
  if (name == "augmix") return AugmentKind::augmix;
  if (name == "eval") return AugmentKind::eval;
  throw ConfigError("invalid augmentation kind '" + std::string(name) + "' (valid: base, augmix, eval)");
}

AugmentationPolicy AugmentationPolicy::make(AugmentKind kind, int resolution) {
  AugmentationPolicy p;
  p.kind = kind;
  p.resolution = resolution;
  return p;
}

void AugmentationPolicy::validate() const {
  if (!(crop_scale_lo > 0.0 && crop_scale_lo <= crop_scale_hi && crop_scale_hi <= 1.0)) {
    throw ConfigError("augmentation crop scale must satisfy 0 < lo <= hi <= 1");
  }
  if (resolution <= 0) throw ConfigError("augmentation resolution must be positive");
  for (float s : std) {
    if (!(s > 0.0f)) throw ConfigError("normalization std must be positive");
  }
  if (grayscale_p < 0.0 || grayscale_p > 1.0 || flip_p < 0.0 || flip_p > 1.0) {
    throw ConfigError("augmentation probabilities must lie in [0, 1]");
  }
}

namespace {

std::uint8_t clamp_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

double luma(const Image& img, std::size_t px) {
  const auto* p = &img.pixels[px * 3];
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

// degenerate + factor * (image - degenerate), per pixel and channel.
template <typename DegenerateFn>
Image blend(const Image& image, double factor, DegenerateFn degenerate) {
  Image out(image.height, image.width);
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  for (std::size_t px = 0; px < n; ++px) {
    for (int c = 0; c < 3; ++c) {
      const double d = degenerate(px, c);
      out.pixels[px * 3 + c] = clamp_pixel(d + factor * (image.pixels[px * 3 + c] - d));
    }
  }
  return out;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  v = mx;
  const double delta = mx - mn;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r) {
    h = (g - b) / delta;
  } else if (mx == g) {
    h = 2.0 + (b - r) / delta;
  } else {
    h = 4.0 + (r - g) / delta;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double hh = h * 6.0;
  const int i = static_cast<int>(std::floor(hh)) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (i) {
    case 0:
      r = v, g = t, b = p;
      break;
    case 1:
      r = q, g = v, b = p;
      break;
    case 2:
      r = p, g = v, b = t;
      break;
    case 3:
      r = p, g = q, b = v;
      break;
    case 4:
      r = t, g = p, b = v;
      break;
    default:
      r = v, g = p, b = q;
      break;
  }
}

}  // namespace

namespace ops {

CropBox sample_resized_crop(int height, int width, double lo, double hi, Rng& rng) {
  const double area = static_cast<double>(height) * width;
  const double log_lo = std::log(3.0 / 4.0);
  const double log_hi = std::log(4.0 / 3.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * uniform(rng, lo, hi);
    const double aspect = std::exp(uniform(rng, log_lo, log_hi));
    const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
    if (w > 0 && w <= width && h > 0 && h <= height) {
      const int top = static_cast<int>(uniform_int(rng, 0, height - h));
      const int left = static_cast<int>(uniform_int(rng, 0, width - w));
      return {top, left, h, w};
    }
  }
  // Fallback: whole image center crop clamped to the aspect range.
  const double ratio = static_cast<double>(width) / height;
  int w = width, h = height;
  if (ratio < 3.0 / 4.0) {
    h = static_cast<int>(std::lround(w / (3.0 / 4.0)));
  } else if (ratio > 4.0 / 3.0) {
    w = static_cast<int>(std::lround(h * (4.0 / 3.0)));
  }
  return {(height - h) / 2, (width - w) / 2, h, w};
}

Image crop(const Image& image, const CropBox& box) {
  Image out(box.height, box.width);
  for (int y = 0; y < box.height; ++y) {
    const auto* src = &image.pixels[(static_cast<std::size_t>(box.top + y) * image.width + box.left) * 3];
    std::copy(src, src + static_cast<std::size_t>(box.width) * 3, &out.pixels[static_cast<std::size_t>(y) * box.width * 3]);
  }
  return out;
}

Image hflip(const Image& image) {
  Image out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
    }
  }
  return out;
}

Image adjust_brightness(const Image& image, double factor) {
  return blend(image, factor, [](std::size_t, int) { return 0.0; });
}

Image adjust_contrast(const Image& image, double factor) {
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  double mean = 0.0;
  for (std::size_t px = 0; px < n; ++px) mean += std::round(luma(image, px));
  mean = n ? mean / static_cast<double>(n) : 0.0;
  return blend(image, factor, [mean](std::size_t, int) { return mean; });
}

Image adjust_saturation(const Image& image, double factor) {
  return blend(image, factor, [&image](std::size_t px, int) { return std::round(luma(image, px)); });
}

Image adjust_hue(const Image& image, double shift) {
  if (shift < -0.5 || shift > 0.5) throw ConfigError("hue shift must lie in [-0.5, 0.5]");
  Image out(image.height, image.width);
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  for (std::size_t px = 0; px < n; ++px) {
    const auto* p = &image.pixels[px * 3];
    double h, s, v;
    rgb_to_hsv(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0, h, s, v);
    h += shift;
    h -= std::floor(h);
    double r, g, b;
    hsv_to_rgb(h, s, v, r, g, b);
    out.pixels[px * 3 + 0] = clamp_pixel(r * 255.0);
    out.pixels[px * 3 + 1] = clamp_pixel(g * 255.0);
    out.pixels[px * 3 + 2] = clamp_pixel(b * 255.0);
  }
  return out;
}

Image adjust_sharpness(const Image& image, double factor) {
  // Degenerate image: 3x3 smoothing (center weight 5, total 13), border kept.
  Image smooth = image;
  for (int y = 1; y + 1 < image.height; ++y) {
    for (int x = 1; x + 1 < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        int acc = 4 * image.at(y, x, c);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) acc += image.at(y + dy, x + dx, c);
        }
        smooth.at(y, x, c) = clamp_pixel(acc / 13.0);
      }
    }
  }
  return blend(image, factor, [&smooth](std::size_t px, int c) { return static_cast<double>(smooth.pixels[px * 3 + c]); });
}

Image to_grayscale(const Image& image) {
  Image out(image.height, image.width);
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  for (std::size_t px = 0; px < n; ++px) {
    const std::uint8_t l = clamp_pixel(luma(image, px));
    out.pixels[px * 3] = out.pixels[px * 3 + 1] = out.pixels[px * 3 + 2] = l;
  }
  return out;
}

Image color_jitter(const Image& image, const ColorJitter& jitter, Rng& rng) {
  std::array<int, 4> order{0, 1, 2, 3};
  // Fisher-Yates with our own uniform draws to stay stdlib-independent.
  for (int i = 3; i > 0; --i) std::swap(order[i], order[uniform_int(rng, 0, i)]);
  const double b = uniform(rng, std::max(0.0, 1.0 - jitter.brightness), 1.0 + jitter.brightness);
  const double c = uniform(rng, std::max(0.0, 1.0 - jitter.contrast), 1.0 + jitter.contrast);
  const double s = uniform(rng, std::max(0.0, 1.0 - jitter.saturation), 1.0 + jitter.saturation);
  const double h = uniform(rng, -jitter.hue, jitter.hue);
  Image out = image;
  for (int op : order) {
    switch (op) {
      case 0:
        out = adjust_brightness(out, b);
        break;
      case 1:
        out = adjust_contrast(out, c);
        break;
      case 2:
        out = adjust_saturation(out, s);
        break;
      default:
        out = adjust_hue(out, h);
        break;
    }
  }
  return out;
}

}  // namespace ops

FloatImage normalize(const Image& image, const AugmentationPolicy& policy) {
  FloatImage out;
  out.height = image.height;
  out.width = image.width;
  out.values.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const int c = static_cast<int>(i % 3);
    out.values[i] = (static_cast<float>(image.pixels[i]) / 255.0f - policy.mean[c]) / policy.std[c];
  }
  return out;
}

std::vector<double> denormalize(const FloatImage& image, const AugmentationPolicy& policy) {
  std::vector<double> out(image.values.size());
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    const int c = static_cast<int>(i % 3);
    out[i] = (static_cast<double>(image.values[i]) * policy.std[c] + policy.mean[c]) * 255.0;
  }
  return out;
}

FloatImage apply_policy(const Image& image, const AugmentationPolicy& policy, Rng& rng) {
  policy.validate();
  const int res = policy.resolution;
  if (policy.kind == AugmentKind::eval) return normalize(resize(image, res, res), policy);

  const ops::CropBox box = ops::sample_resized_crop(image.height, image.width, policy.crop_scale_lo,
                                                     policy.crop_scale_hi, rng);
  Image img = resize(ops::crop(image, box), res, res);
  if (bernoulli(rng, policy.flip_p)) img = ops::hflip(img);
  if (policy.kind == AugmentKind::base) {
    img = ops::color_jitter(img, policy.jitter, rng);
    if (bernoulli(rng, policy.grayscale_p)) img = ops::to_grayscale(img);
  } else {
    img = ops::augmix(img, policy.augmix, rng);
  }
  return normalize(img, policy);
}

FloatImage apply_policy(const DomainDataset& dataset, std::size_t index, const AugmentationPolicy& policy, Rng& rng) {
  Image img;
  try {
    img = dataset.load(index);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError("cannot decode '" + dataset.describe(index) + "': " + e.what());
  }
  return apply_policy(img, policy, rng);
}

}  // namespace simuda::datakit
