// AugMix and the image operations it samples from.

#include <algorithm>
#include <array>
#include <cmath>
#include <opencv2/imgproc.hpp>
#include <random>

#include "cv_interop.hpp"
#include "simuda/core/errors.hpp"
#include "simuda/datakit/augment.hpp"

namespace simuda::datakit::ops {

namespace {

Image warp(const Image& image, const cv::Mat& affine) {
  cv::Mat out;
  cv::warpAffine(to_mat(image), out, affine, cv::Size(image.width, image.height), cv::INTER_LINEAR,
                 cv::BORDER_CONSTANT, cv::Scalar(0, 0, 0));
  return from_mat(out);
}

double gamma_draw(Rng& rng, double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

std::vector<double> dirichlet(Rng& rng, double alpha, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& x : w) total += (x = gamma_draw(rng, alpha));
  for (auto& x : w) x /= total;
  return w;
}

enum class Op {
  shear_x,
  shear_y,
  translate_x,
  translate_y,
  rotate,
  posterize,
  solarize,
  autocontrast,
  equalize,
  brightness,
  color,
  contrast,
  sharpness
};

struct OpSpec {
  Op op;
  bool signed_magnitude;
  bool has_magnitude;
};

constexpr std::array<OpSpec, 13> kOps{{{Op::shear_x, true, true},
                                       {Op::shear_y, true, true},
                                       {Op::translate_x, true, true},
                                       {Op::translate_y, true, true},
                                       {Op::rotate, true, true},
                                       {Op::posterize, false, true},
                                       {Op::solarize, false, true},
                                       {Op::autocontrast, false, false},
                                       {Op::equalize, false, false},
                                       {Op::brightness, true, true},
                                       {Op::color, true, true},
                                       {Op::contrast, true, true},
                                       {Op::sharpness, true, true}}};

constexpr int kBins = 11;

// Magnitude of bin `b` (0..10) for an op on an image of the given size.
double magnitude(Op op, int bin, int height, int width) {
  const double t = static_cast<double>(bin) / (kBins - 1);
  switch (op) {
    case Op::shear_x:
    case Op::shear_y:
      return 0.3 * t;
    case Op::translate_x:
      return t * width / 3.0;
    case Op::translate_y:
      return t * height / 3.0;
    case Op::rotate:
      return 30.0 * t;
    case Op::posterize:
      return 4.0 - std::round(bin / ((kBins - 1) / 4.0));
    case Op::solarize:
      return 255.0 * (1.0 - t);
    case Op::brightness:
    case Op::color:
    case Op::contrast:
    case Op::sharpness:
      return 0.9 * t;
    default:
      return 0.0;
  }
}

Image apply_op(const Image& img, Op op, double mag) {
  switch (op) {
    case Op::shear_x:
      return shear_x(img, mag);
    case Op::shear_y:
      return shear_y(img, mag);
    case Op::translate_x:
      return translate(img, static_cast<int>(mag), 0);
    case Op::translate_y:
      return translate(img, 0, static_cast<int>(mag));
    case Op::rotate:
      return rotate(img, mag);
    case Op::posterize:
      return posterize(img, static_cast<int>(mag));
    case Op::solarize:
      return solarize(img, mag);
    case Op::autocontrast:
      return autocontrast(img);
    case Op::equalize:
      return equalize(img);
    case Op::brightness:
      return adjust_brightness(img, 1.0 + mag);
    case Op::color:
      return adjust_saturation(img, 1.0 + mag);
    case Op::contrast:
      return adjust_contrast(img, 1.0 + mag);
    case Op::sharpness:
      return adjust_sharpness(img, 1.0 + mag);
  }
  return img;
}

}  // namespace

Image autocontrast(const Image& image) {
  Image out = image;
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  for (int c = 0; c < 3; ++c) {
    int lo = 255, hi = 0;
    for (std::size_t px = 0; px < n; ++px) {
      lo = std::min<int>(lo, image.pixels[px * 3 + c]);
      hi = std::max<int>(hi, image.pixels[px * 3 + c]);
    }
    if (hi <= lo) continue;
    const double scale = 255.0 / (hi - lo);
    for (std::size_t px = 0; px < n; ++px) {
      const double v = (image.pixels[px * 3 + c] - lo) * scale;
      out.pixels[px * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::floor(v), 0.0, 255.0));
    }
  }
  return out;
}

Image equalize(const Image& image) {
  Image out = image;
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  for (int c = 0; c < 3; ++c) {
    std::array<long, 256> hist{};
    for (std::size_t px = 0; px < n; ++px) ++hist[image.pixels[px * 3 + c]];
    long last = 0;
    for (int v = 255; v >= 0; --v) {
      if (hist[v]) {
        last = hist[v];
        break;
      }
    }
    const long step = (static_cast<long>(n) - last) / 255;
    if (step == 0) continue;
    std::array<std::uint8_t, 256> lut{};
    long acc = step / 2;
    for (int v = 0; v < 256; ++v) {
      lut[v] = static_cast<std::uint8_t>(std::min(acc / step, 255L));
      acc += hist[v];
    }
    for (std::size_t px = 0; px < n; ++px) out.pixels[px * 3 + c] = lut[image.pixels[px * 3 + c]];
  }
  return out;
}

Image posterize(const Image& image, int bits) {
  if (bits < 0 || bits > 8) throw ConfigError("posterize bits must lie in [0, 8]");
  const auto mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
  Image out = image;
  for (auto& p : out.pixels) p &= mask;
  return out;
}

Image solarize(const Image& image, double threshold) {
  Image out = image;
  for (auto& p : out.pixels) {
    if (p >= threshold) p = static_cast<std::uint8_t>(255 - p);
  }
  return out;
}

Image rotate(const Image& image, double degrees) {
  const cv::Point2f center(static_cast<float>(image.width - 1) * 0.5f, static_cast<float>(image.height - 1) * 0.5f);
  return warp(image, cv::getRotationMatrix2D(center, degrees, 1.0));
}

Image shear_x(const Image& image, double amount) {
  cv::Mat m = (cv::Mat_<double>(2, 3) << 1.0, amount, 0.0, 0.0, 1.0, 0.0);
  return warp(image, m);
}

Image shear_y(const Image& image, double amount) {
  cv::Mat m = (cv::Mat_<double>(2, 3) << 1.0, 0.0, 0.0, amount, 1.0, 0.0);
  return warp(image, m);
}

Image translate(const Image& image, int dx, int dy) {
  cv::Mat m = (cv::Mat_<double>(2, 3) << 1.0, 0.0, dx, 0.0, 1.0, dy);
  return warp(image, m);
}

Image augmix(const Image& image, const AugMixParams& params, Rng& rng) {
  if (params.severity < 1 || params.severity > kBins - 1) throw ConfigError("augmix severity must lie in [1, 10]");
  if (params.mixture_width < 1) throw ConfigError("augmix mixture width must be >= 1");
  const int num_ops = params.all_ops ? static_cast<int>(kOps.size()) : 9;

  const std::vector<double> m = dirichlet(rng, params.alpha, 2);
  const std::vector<double> ws = dirichlet(rng, params.alpha, params.mixture_width);

  std::vector<double> mix(image.pixels.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = m[0] * image.pixels[i];
  for (int chain = 0; chain < params.mixture_width; ++chain) {
    Image aug = image;
    const int depth = params.chain_depth > 0 ? params.chain_depth : static_cast<int>(uniform_int(rng, 1, 3));
    for (int d = 0; d < depth; ++d) {
      const OpSpec& spec = kOps[static_cast<std::size_t>(uniform_int(rng, 0, num_ops - 1))];
      double mag = 0.0;
      if (spec.has_magnitude) {
        mag = magnitude(spec.op, static_cast<int>(uniform_int(rng, 0, params.severity - 1)), aug.height, aug.width);
      }
      if (spec.signed_magnitude && uniform_int(rng, 0, 1) == 1) mag = -mag;
      aug = apply_op(aug, spec.op, mag);
    }
    const double w = ws[static_cast<std::size_t>(chain)] * m[1];
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += w * aug.pixels[i];
  }
  // Cast back to 8 bits by truncation.
  Image out(image.height, image.width);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(mix[i], 0.0, 255.0));
  }
  return out;
}

}  // namespace simuda::datakit::ops
