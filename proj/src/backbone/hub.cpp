#include "simuda/backbone/hub.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "simuda/backbone/checkpoint.hpp"
#include "simuda/core/errors.hpp"

namespace simuda::backbone {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

HubClient::HubClient(std::filesystem::path cache_dir) : cache_dir_(std::move(cache_dir)) {}

HubClient HubClient::from_env() {
  if (const char* dir = std::getenv(kHubCacheEnv); dir && *dir) return HubClient(dir);
  const char* home = std::getenv("HOME");
  return HubClient(std::filesystem::path(home ? home : ".") / ".cache" / "simuda" / "hub");
}

std::filesystem::path HubClient::entry_path(const std::string& id) const {
  std::string key;
  for (char c : id) {
    if (c == '/') key += "--";
    else key += c;
  }
  return cache_dir_ / key / "backbone.ckpt";
}

std::filesystem::path HubClient::resolve(const std::string& id) const {
  if (id.empty()) throw ConfigError("hub backbone requires a checkpoint id");
  const auto p = entry_path(id);
  if (!std::filesystem::is_regular_file(p)) {
    throw DependencyError("hub checkpoint '" + id + "' is not in the cache (" + p.string() + "); set " + kHubCacheEnv);
  }
  return p;
}

std::optional<int> HubClient::published_feature_dim(const std::string& id) {
  const std::string s = lower(id);
  struct Known {
    const char* key;
    int dim;
  };
  static constexpr Known known[] = {
      {"vit-base", 768}, {"vit_base", 768},  {"deit-base", 768},      {"deit_base", 768},
      {"swinv2-base", 1024}, {"swinv2_base", 1024}, {"convnextv2-base", 1024}, {"convnextv2_base", 1024},
  };
  for (const auto& k : known) {
    if (s.find(k.key) != std::string::npos) return k.dim;
  }
  return std::nullopt;
}

ClassifierModel load_backbone(const BackboneSpec& spec, Rng& rng, const HubClient* hub) {
  if (spec.source == BackboneSource::compact) {
    if (spec.feature_dim <= 0) throw ConfigError("compact backbone needs a positive feature_dim");
    return ClassifierModel(spec, kPlaceholderClasses, rng);
  }
  const HubClient fallback = hub ? *hub : HubClient::from_env();
  const Checkpoint ck = read_checkpoint(fallback.resolve(spec.hub_id));
  int expected = spec.feature_dim;
  if (expected <= 0) expected = HubClient::published_feature_dim(spec.hub_id).value_or(ck.meta.feature_dim);
  if (expected != ck.meta.feature_dim) {
    throw IntegrityError("hub checkpoint '" + spec.hub_id + "' has d_f = " + std::to_string(ck.meta.feature_dim) +
                         " but the spec requires " + std::to_string(expected));
  }
  BackboneSpec resolved = spec;
  resolved.feature_dim = expected;
  ClassifierModel model(resolved, kPlaceholderClasses, rng);
  load_state(model, ck, false);
  return model;
}

}  // namespace simuda::backbone
