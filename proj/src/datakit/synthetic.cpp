#include "simuda/datakit/synthetic.hpp"

#include <cmath>
#include <map>
#include <opencv2/imgproc.hpp>
#include <sstream>

#include "cv_interop.hpp"
#include "simuda/core/errors.hpp"
#include "simuda/core/random.hpp"
#include "simuda/datakit/augment.hpp"

namespace fs = std::filesystem;

namespace simuda::datakit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSupersample = 4;

const std::vector<std::string> kShapeNames = {"circle", "square", "triangle", "plus",  "ring",  "cross",
                                              "diamond", "bars",  "tee",      "ell",   "star",  "chevron"};

using Poly = std::vector<cv::Point2d>;

struct GlyphParams {
  double angle = 0.0;   // radians
  double radius = 0.0;  // pixels
  double cx = 0.0;
  double cy = 0.0;
  cv::Vec3d glyph_rgb;
  cv::Vec3d background_rgb;
};

cv::Vec3d hsv_rgb(double h, double s, double v) {
  cv::Mat3f px(1, 1, cv::Vec3f(static_cast<float>(h * 360.0), static_cast<float>(s), static_cast<float>(v)));
  cv::Mat3f rgb;
  cv::cvtColor(px, rgb, cv::COLOR_HSV2RGB);
  const cv::Vec3f c = rgb(0, 0);
  return {c[0] * 255.0, c[1] * 255.0, c[2] * 255.0};
}

Poly rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

Poly regular(int n, double r, double phase) {
  Poly p;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2.0 * kPi * i / n;
    p.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return p;
}

// Filled polygons and (outer, inner) annuli describing a glyph in [-1, 1]^2.
struct Shape {
  std::vector<Poly> fills;
  std::vector<std::pair<double, double>> rings;
  std::vector<double> disks;
};

Shape procedural_shape(int cls) {
  // 4x4 cell bitmap from a class hash, 5 to 11 cells set.
  Rng rng(derive_seed(0x676c797068ULL, static_cast<std::uint64_t>(cls)));
  Shape s;
  std::uint32_t bits = 0;
  while (__builtin_popcount(bits) < 5 || __builtin_popcount(bits) > 11) bits = static_cast<std::uint32_t>(rng() & 0xFFFF);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (bits & (1u << (r * 4 + c))) {
        const double x0 = -1.0 + 0.5 * c, y0 = -1.0 + 0.5 * r;
        s.fills.push_back(rect(x0, y0, x0 + 0.5, y0 + 0.5));
      }
    }
  }
  return s;
}

Shape make_shape(int cls) {
  Shape s;
  switch (cls) {
    case 0:
      s.disks.push_back(0.85);
      break;
    case 1:
      s.fills.push_back(rect(-0.7, -0.7, 0.7, 0.7));
      break;
    case 2:
      s.fills.push_back(regular(3, 0.95, -kPi / 2));
      break;
    case 3:
      s.fills.push_back(rect(-0.9, -0.2, 0.9, 0.2));
      s.fills.push_back(rect(-0.2, -0.9, 0.2, 0.9));
      break;
    case 4:
      s.rings.emplace_back(0.9, 0.55);
      break;
    case 5: {
      const double t = 0.2;
      s.fills.push_back({{-0.85 + t, -0.85}, {0.85, 0.85 - t}, {0.85 - t, 0.85}, {-0.85, -0.85 + t}});
      s.fills.push_back({{0.85 - t, -0.85}, {0.85, -0.85 + t}, {-0.85 + t, 0.85}, {-0.85, 0.85 - t}});
      break;
    }
    case 6:
      s.fills.push_back(regular(4, 0.95, 0.0));
      break;
    case 7:
      s.fills.push_back(rect(-0.85, -0.65, 0.85, -0.25));
      s.fills.push_back(rect(-0.85, 0.25, 0.85, 0.65));
      break;
    case 8:
      s.fills.push_back(rect(-0.85, -0.85, 0.85, -0.45));
      s.fills.push_back(rect(-0.2, -0.45, 0.2, 0.9));
      break;
    case 9:
      s.fills.push_back(rect(-0.6, -0.9, -0.2, 0.9));
      s.fills.push_back(rect(-0.2, 0.5, 0.7, 0.9));
      break;
    case 10: {
      Poly star;
      for (int i = 0; i < 10; ++i) {
        const double r = (i % 2 == 0) ? 0.95 : 0.4;
        const double a = -kPi / 2 + kPi * i / 5;
        star.emplace_back(r * std::cos(a), r * std::sin(a));
      }
      s.fills.push_back(star);
      break;
    }
    case 11:
      s.fills.push_back({{-0.8, -0.8}, {0.8, 0.0}, {-0.8, 0.8}, {-0.8, 0.35}, {0.0, 0.0}, {-0.8, -0.35}});
      break;
    default:
      return procedural_shape(cls);
  }
  return s;
}

// Anti-aliased coverage mask in [0, 1] at the target resolution.
cv::Mat1f render_mask(const Shape& shape, const GlyphParams& g, int res) {
  const int big = res * kSupersample;
  cv::Mat1b canvas(big, big, static_cast<std::uint8_t>(0));
  const double ca = std::cos(g.angle), sa = std::sin(g.angle);
  auto to_canvas = [&](const cv::Point2d& p) {
    const double x = g.cx + g.radius * (ca * p.x - sa * p.y);
    const double y = g.cy + g.radius * (sa * p.x + ca * p.y);
    return cv::Point(static_cast<int>(std::lround(x * kSupersample)), static_cast<int>(std::lround(y * kSupersample)));
  };
  for (const Poly& poly : shape.fills) {
    std::vector<cv::Point> pts;
    for (const auto& p : poly) pts.push_back(to_canvas(p));
    cv::fillPoly(canvas, std::vector<std::vector<cv::Point>>{pts}, cv::Scalar(255), cv::LINE_8);
  }
  const cv::Point center = to_canvas({0.0, 0.0});
  for (double r : shape.disks) {
    cv::circle(canvas, center, static_cast<int>(std::lround(r * g.radius * kSupersample)), cv::Scalar(255), cv::FILLED);
  }
  for (const auto& [outer, inner] : shape.rings) {
    cv::circle(canvas, center, static_cast<int>(std::lround(outer * g.radius * kSupersample)), cv::Scalar(255),
               cv::FILLED);
    cv::circle(canvas, center, static_cast<int>(std::lround(inner * g.radius * kSupersample)), cv::Scalar(0),
               cv::FILLED);
  }
  cv::Mat1b small;
  cv::resize(canvas, small, cv::Size(res, res), 0, 0, cv::INTER_AREA);
  cv::Mat1f mask;
  small.convertTo(mask, CV_32F, 1.0 / 255.0);
  return mask;
}

GlyphParams sample_params(Rng& rng, int res) {
  GlyphParams g;
  g.angle = uniform(rng, -20.0, 20.0) * kPi / 180.0;
  g.radius = uniform(rng, 0.26, 0.36) * res;
  g.cx = res * (0.5 + uniform(rng, -0.1, 0.1));
  g.cy = res * (0.5 + uniform(rng, -0.1, 0.1));
  g.glyph_rgb = hsv_rgb(uniform01(rng), uniform(rng, 0.5, 1.0), uniform(rng, 0.75, 1.0));
  g.background_rgb = hsv_rgb(uniform01(rng), uniform(rng, 0.0, 0.3), uniform(rng, 0.1, 0.35));
  return g;
}

// Background texture: sum of oriented gratings blended between two random colors.
cv::Mat3d make_texture(Rng& rng, int res) {
  const cv::Vec3d c1 = hsv_rgb(uniform01(rng), uniform(rng, 0.3, 1.0), uniform(rng, 0.3, 1.0));
  const cv::Vec3d c2 = hsv_rgb(uniform01(rng), uniform(rng, 0.3, 1.0), uniform(rng, 0.3, 1.0));
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 3; ++k) {
    const double freq = uniform(rng, 2.0, 9.0);
    const double dir = uniform(rng, 0.0, kPi);
    waves.push_back({freq * std::cos(dir) / res, freq * std::sin(dir) / res, uniform(rng, 0.0, 2.0 * kPi),
                     uniform(rng, 0.3, 1.0)});
  }
  double amp_total = 0.0;
  for (const auto& w : waves) amp_total += w.amp;
  cv::Mat3d tex(res, res);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      double t = 0.0;
      for (const auto& w : waves) t += w.amp * std::sin(2.0 * kPi * (w.fx * x + w.fy * y) + w.phase);
      const double a = 0.5 + 0.5 * t / amp_total;
      tex(y, x) = c1 * a + c2 * (1.0 - a);
    }
  }
  return tex;
}

Image composite(const cv::Mat1f& mask, const cv::Vec3d& glyph, const cv::Mat3d& background) {
  const int res = mask.rows;
  Image out(res, res);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const double m = mask(y, x);
      for (int c = 0; c < 3; ++c) {
        const double v = m * glyph[c] + (1.0 - m) * background(y, x)[c];
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
      }
    }
  }
  return out;
}

void set_field(ShiftSpec& s, const std::string& field, const Value& v, const std::string& key) {
  if (field == "hue_rotation") {
    s.hue_rotation = v.as_boolean(key);
  } else if (field == "hue_degrees") {
    s.hue_degrees = v.as_real(key);
  } else if (field == "texture") {
    s.texture = v.as_boolean(key);
  } else if (field == "texture_strength") {
    s.texture_strength = v.as_real(key);
  } else if (field == "noise") {
    s.noise = v.as_boolean(key);
  } else if (field == "noise_sigma") {
    s.noise_sigma = v.as_real(key);
  } else {
    throw ConfigError("unknown shift field '" + field +
                      "' (valid: hue_rotation, hue_degrees, texture, texture_strength, noise, noise_sigma)");
  }
}

void validate(const ShiftSpec& s) {
  if (s.texture_strength < 0.0 || s.texture_strength > 1.0) throw ConfigError("texture_strength must lie in [0, 1]");
  if (s.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
}

}  // namespace

ShiftSpec ShiftSpec::benchmark() {
  ShiftSpec s;
  s.hue_rotation = true;
  s.hue_degrees = 120.0;
  s.texture = true;
  s.texture_strength = 0.65;
  s.noise = true;
  s.noise_sigma = 12.0;
  return s;
}

ShiftSpec ShiftSpec::parse(std::string_view text) {
  if (text == "identity" || text.empty()) return identity();
  if (text == "benchmark") return benchmark();
  ShiftSpec s;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("shift entry '" + item + "' must be field=value");
    const std::string field = item.substr(0, eq);
    const KeyValueDoc one = KeyValueDoc::parse("v = " + item.substr(eq + 1), "--shift");
    set_field(s, field, *one.find("v"), field);
  }
  validate(s);
  return s;
}

ShiftSpec ShiftSpec::from_doc(const KeyValueDoc& doc, const std::string& prefix) {
  ShiftSpec s;
  const std::string p = prefix + ".";
  for (const auto& [key, value] : doc.entries()) {
    if (key.rfind(p, 0) != 0) continue;
    set_field(s, key.substr(p.size()), value, key);
  }
  validate(s);
  return s;
}

void ShiftSpec::to_doc(KeyValueDoc& doc, const std::string& prefix) const {
  doc.set(prefix + ".hue_rotation", Value::boolean(hue_rotation));
  doc.set(prefix + ".hue_degrees", Value::real(hue_degrees));
  doc.set(prefix + ".texture", Value::boolean(texture));
  doc.set(prefix + ".texture_strength", Value::real(texture_strength));
  doc.set(prefix + ".noise", Value::boolean(noise));
  doc.set(prefix + ".noise_sigma", Value::real(noise_sigma));
}

std::vector<std::string> synthetic_class_names(int num_classes) {
  std::vector<std::string> names;
  for (int c = 0; c < num_classes; ++c) {
    if (c < static_cast<int>(kShapeNames.size())) {
      names.push_back(kShapeNames[static_cast<std::size_t>(c)]);
    } else {
      names.push_back("glyph_" + std::to_string(c));
    }
  }
  return names;
}

SyntheticPair make_synthetic_pair(int num_classes, int per_class, const ShiftSpec& shift, std::uint64_t seed,
                                  int resolution) {
  if (num_classes < 2) throw ConfigError("synthetic benchmark needs num_classes >= 2");
  if (per_class < 1) throw ConfigError("synthetic benchmark needs per_class >= 1");
  if (resolution < 16) throw ConfigError("synthetic benchmark needs resolution >= 16");
  validate(shift);

  std::vector<Sample> source, target;
  for (int cls = 0; cls < num_classes; ++cls) {
    const Shape shape = make_shape(cls);
    for (int k = 0; k < per_class; ++k) {
      const auto index = static_cast<std::uint64_t>(cls) * static_cast<std::uint64_t>(per_class) + k;
      Rng rng(derive_seed(seed, index));
      const GlyphParams g = sample_params(rng, resolution);
      const cv::Mat1f mask = render_mask(shape, g, resolution);
      const cv::Mat3d plain(resolution, resolution, g.background_rgb);
      const Image clean = composite(mask, g.glyph_rgb, plain);
      source.push_back(Sample{std::make_shared<const Image>(clean), cls, Domain::source});

      if (shift.is_identity()) {
        target.push_back(Sample{std::make_shared<const Image>(clean), cls, Domain::target});
        continue;
      }
      Rng shift_rng(derive_seed(seed, index, 0x7368696674ULL));
      Image shifted = clean;
      if (shift.texture) {
        const cv::Mat3d tex = make_texture(shift_rng, resolution);
        cv::Mat3d bg = plain * (1.0 - shift.texture_strength) + tex * shift.texture_strength;
        shifted = composite(mask, g.glyph_rgb, bg);
      }
      if (shift.hue_rotation) {
        double turns = shift.hue_degrees / 360.0;
        turns -= std::round(turns);
        shifted = ops::adjust_hue(shifted, turns);
      }
      if (shift.noise) {
        for (auto& p : shifted.pixels) {
          p = static_cast<std::uint8_t>(std::clamp(std::round(p + shift.noise_sigma * normal(shift_rng)), 0.0, 255.0));
        }
      }
      target.push_back(Sample{std::make_shared<const Image>(std::move(shifted)), cls, Domain::target});
    }
  }
  const auto names = synthetic_class_names(num_classes);
  return {DomainDataset("synthetic-source", Domain::source, names, std::move(source)),
          DomainDataset("synthetic-target", Domain::target, names, std::move(target))};
}

void write_folder_dataset(const DomainDataset& dataset, const fs::path& root) {
  std::map<int, int> counter;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int c = dataset.label(i);
    const fs::path dir = root / dataset.class_names()[static_cast<std::size_t>(c)];
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof name, "%05d.png", counter[c]++);
    save_image(dir / name, dataset.load(i));
  }
}

}  // namespace simuda::datakit
