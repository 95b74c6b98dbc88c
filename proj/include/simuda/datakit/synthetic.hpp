#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "simuda/core/keyvalue.hpp"
#include "simuda/datakit/dataset.hpp"

namespace simuda::datakit {

/// Appearance shift applied to target renders. Each effect is a toggle with a
/// magnitude; all toggles off is the identity shift.
struct ShiftSpec {
  bool hue_rotation = false;
  double hue_degrees = 0.0;
  bool texture = false;
  double texture_strength = 0.0;  // 0 = plain background, 1 = full texture
  bool noise = false;
  double noise_sigma = 0.0;  // additive Gaussian, pixel units

  static ShiftSpec identity() { return {}; }
  /// The benchmark's default rendered-vs-real stand-in.
  static ShiftSpec benchmark();

  bool is_identity() const { return !hue_rotation && !texture && !noise; }

  /// "identity", "benchmark", or comma-separated field=value pairs applied on
  /// top of the identity shift. Unknown fields raise ConfigError.
  static ShiftSpec parse(std::string_view text);
  /// Reads `<prefix>.<field>` keys; any other key under the prefix is an error.
  static ShiftSpec from_doc(const KeyValueDoc& doc, const std::string& prefix);
  void to_doc(KeyValueDoc& doc, const std::string& prefix) const;
};

struct SyntheticPair {
  DomainDataset source;
  DomainDataset target;
};

inline constexpr int kSyntheticResolution = 64;

/// Glyph-classification benchmark: class identity is the glyph's shape;
/// position, scale, rotation, and colors vary per sample. Source renders sit on
/// a plain background; target sample i is source sample i under `shift`.
/// Pixel-deterministic for a fixed seed.
SyntheticPair make_synthetic_pair(int num_classes, int per_class, const ShiftSpec& shift, std::uint64_t seed,
                                  int resolution = kSyntheticResolution);

/// Names of the glyph classes, in id order.
std::vector<std::string> synthetic_class_names(int num_classes);

/// Writes a dataset in folder-per-class layout (PNG files).
void write_folder_dataset(const DomainDataset& dataset, const std::filesystem::path& root);

}  // namespace simuda::datakit
