#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "simuda/backbone/model.hpp"

namespace simuda::backbone {

/// Environment variable naming the offline checkpoint cache.
inline constexpr const char* kHubCacheEnv = "SIMUDA_HUB_CACHE";

/// Head size given to freshly loaded backbones until replace_head is called.
inline constexpr int kPlaceholderClasses = 2;

/// Offline hub adapter. An id like "org/name" lives at
/// `<cache>/org--name/backbone.ckpt`. Never touches the network.
class HubClient {
 public:
  explicit HubClient(std::filesystem::path cache_dir);
  /// Cache from SIMUDA_HUB_CACHE, or `~/.cache/simuda/hub` when unset.
  static HubClient from_env();

  const std::filesystem::path& cache_dir() const { return cache_dir_; }
  std::filesystem::path entry_path(const std::string& id) const;
  /// Throws DependencyError naming the id when no cached entry exists.
  std::filesystem::path resolve(const std::string& id) const;

  /// Published embedding width for well-known architecture ids.
  static std::optional<int> published_feature_dim(const std::string& id);

 private:
  std::filesystem::path cache_dir_;
};

/// Builds the classifier for `spec`: random init for the compact backbone,
/// cached weights for a hub id. The head always starts as a fresh
/// kPlaceholderClasses-way head. A spec feature_dim that disagrees with the
/// checkpoint raises IntegrityError.
ClassifierModel load_backbone(const BackboneSpec& spec, Rng& rng, const HubClient* hub = nullptr);

}  // namespace simuda::backbone
