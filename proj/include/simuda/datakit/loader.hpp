#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simuda/datakit/augment.hpp"
#include "simuda/datakit/dataset.hpp"
#include "simuda/nn/tensor.hpp"

namespace simuda::datakit {

using IndexBatch = std::vector<std::size_t>;

struct PairedIndices {
  IndexBatch source;
  IndexBatch target;
};

/// Simultaneous source/target batching for adaptation.
///
/// Each epoch runs ceil(max(|S|, |T|) / batch) steps. Both streams walk fresh
/// per-epoch permutations (sub-seeds derived from seed, epoch and domain) and
/// wrap into a new permutation when exhausted, so every emitted pair holds
/// exactly `batch` indices per domain.
class PairedLoader {
 public:
  /// Throws ConfigError when batch < 1, a domain is empty, or
  /// batch > min(|S|, |T|).
  PairedLoader(std::size_t source_size, std::size_t target_size, std::size_t batch, std::uint64_t seed);

  std::size_t steps_per_epoch() const { return steps_; }
  std::size_t batch_size() const { return batch_; }
  std::vector<PairedIndices> epoch(std::size_t epoch_index) const;

 private:
  std::size_t source_size_;
  std::size_t target_size_;
  std::size_t batch_;
  std::uint64_t seed_;
  std::size_t steps_;
};

/// Shuffled single-domain batches; the partial tail batch is dropped.
class ShuffledLoader {
 public:
  ShuffledLoader(std::size_t size, std::size_t batch, std::uint64_t seed);
  std::size_t steps_per_epoch() const { return size_ / batch_; }
  std::vector<IndexBatch> epoch(std::size_t epoch_index) const;

 private:
  std::size_t size_;
  std::size_t batch_;
  std::uint64_t seed_;
};

/// Sequential evaluation batches; the partial tail batch is kept.
std::vector<IndexBatch> sequential_batches(std::size_t size, std::size_t batch);

/// Random permutation of [0, n) driven by `seed`.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

/// Augments the given samples into an NHWC batch. Sample k of the batch uses
/// the sub-seed derive_seed(seed, stream_position + k), so results do not
/// depend on `workers`.
nn::FeatureMap<float> make_images(const DomainDataset& dataset, std::span<const std::size_t> indices,
                                  const AugmentationPolicy& policy, std::uint64_t seed, std::uint64_t stream_position,
                                  int workers = 1);

/// Counted label reads for a labeled batch.
std::vector<int> batch_labels(const DomainDataset& dataset, std::span<const std::size_t> indices);

}  // namespace simuda::datakit
