#include "simuda/datakit/loader.hpp"

#include <algorithm>
#include <future>
#include <numeric>

#include "simuda/core/errors.hpp"
#include "simuda/core/random.hpp"

namespace simuda::datakit {

namespace {

constexpr std::uint64_t kSourceStream = 0x5352;
constexpr std::uint64_t kTargetStream = 0x5447;

// Draws `count` indices from consecutive permutations of [0, n).
std::vector<std::size_t> cycle_draw(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> out;
  out.reserve(count);
  std::uint64_t pass = 0;
  while (out.size() < count) {
    const auto perm = permutation(n, derive_seed(seed, pass++));
    const std::size_t take = std::min(n, count - out.size());
    out.insert(out.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i - 1)));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

PairedLoader::PairedLoader(std::size_t source_size, std::size_t target_size, std::size_t batch, std::uint64_t seed)
    : source_size_(source_size), target_size_(target_size), batch_(batch), seed_(seed) {
  if (batch < 1) throw ConfigError("paired loader: batch must be >= 1");
  if (source_size == 0 || target_size == 0) throw ConfigError("paired loader: both datasets must be non-empty");
  if (batch > std::min(source_size, target_size)) {
    throw ConfigError("paired loader: batch " + std::to_string(batch) + " exceeds the smaller dataset (" +
                      std::to_string(std::min(source_size, target_size)) + " samples)");
  }
  const std::size_t longest = std::max(source_size, target_size);
  steps_ = (longest + batch - 1) / batch;
}

std::vector<PairedIndices> PairedLoader::epoch(std::size_t epoch_index) const {
  const std::size_t total = steps_ * batch_;
  const auto src = cycle_draw(source_size_, total, derive_seed(seed_, kSourceStream, epoch_index));
  const auto tgt = cycle_draw(target_size_, total, derive_seed(seed_, kTargetStream, epoch_index));
  std::vector<PairedIndices> out(steps_);
  for (std::size_t s = 0; s < steps_; ++s) {
    const auto b = static_cast<std::ptrdiff_t>(s * batch_);
    const auto e = b + static_cast<std::ptrdiff_t>(batch_);
    out[s].source.assign(src.begin() + b, src.begin() + e);
    out[s].target.assign(tgt.begin() + b, tgt.begin() + e);
  }
  return out;
}

ShuffledLoader::ShuffledLoader(std::size_t size, std::size_t batch, std::uint64_t seed)
    : size_(size), batch_(batch), seed_(seed) {
  if (batch < 1) throw ConfigError("loader: batch must be >= 1");
  if (batch > size) {
    throw ConfigError("loader: batch " + std::to_string(batch) + " exceeds dataset size " + std::to_string(size));
  }
}

std::vector<IndexBatch> ShuffledLoader::epoch(std::size_t epoch_index) const {
  const auto perm = permutation(size_, derive_seed(seed_, kSourceStream, epoch_index));
  std::vector<IndexBatch> out(steps_per_epoch());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].assign(perm.begin() + static_cast<std::ptrdiff_t>(s * batch_),
                  perm.begin() + static_cast<std::ptrdiff_t>((s + 1) * batch_));
  }
  return out;
}

std::vector<IndexBatch> sequential_batches(std::size_t size, std::size_t batch) {
  if (batch < 1) throw ConfigError("evaluation batch must be >= 1");
  std::vector<IndexBatch> out;
  for (std::size_t b = 0; b < size; b += batch) {
    IndexBatch ib(std::min(batch, size - b));
    std::iota(ib.begin(), ib.end(), b);
    out.push_back(std::move(ib));
  }
  return out;
}

nn::FeatureMap<float> make_images(const DomainDataset& dataset, std::span<const std::size_t> indices,
                                  const AugmentationPolicy& policy, std::uint64_t seed, std::uint64_t stream_position,
                                  int workers) {
  const int res = policy.resolution;
  const int n = static_cast<int>(indices.size());
  nn::FeatureMap<float> out(n, res, res, 3);
  const std::size_t per_image = static_cast<std::size_t>(res) * res * 3;

  auto fill = [&](int begin, int end) {
    for (int k = begin; k < end; ++k) {
      Rng rng(derive_seed(seed, stream_position + static_cast<std::uint64_t>(k)));
      const FloatImage img = apply_policy(dataset, indices[static_cast<std::size_t>(k)], policy, rng);
      std::copy(img.values.begin(), img.values.end(), out.data.data() + per_image * static_cast<std::size_t>(k));
    }
  };
  if (workers <= 1 || n < 2) {
    fill(0, n);
  } else {
    std::vector<std::future<void>> jobs;
    const int chunk = (n + workers - 1) / workers;
    for (int b = 0; b < n; b += chunk) jobs.push_back(std::async(std::launch::async, fill, b, std::min(n, b + chunk)));
    for (auto& j : jobs) j.get();
  }
  return out;
}

std::vector<int> batch_labels(const DomainDataset& dataset, std::span<const std::size_t> indices) {
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) labels.push_back(dataset.label(i));
  return labels;
}

}  // namespace simuda::datakit
