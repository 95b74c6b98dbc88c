#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "simuda/datakit/image.hpp"

namespace simuda::datakit {

enum class Domain { source, target };

std::string_view to_string(Domain d);

/// Where a sample's pixels come from: a file on disk or an in-memory image.
using ImageRef = std::variant<std::filesystem::path, std::shared_ptr<const Image>>;

struct Sample {
  ImageRef image;
  std::optional<int> label;
  Domain domain = Domain::source;
};

/// Ordered labeled (or unlabeled) samples from one domain.
///
/// Label reads go through label(), which counts them; the trainer uses the
/// counter to prove that target labels never enter the optimization path.
/// Copies share the counter.
class DomainDataset {
 public:
  DomainDataset() = default;
  /// Throws ConfigError if a sample's domain or label violates the dataset's
  /// invariants (domain tag shared, labels in [0, C)).
  DomainDataset(std::string name, Domain domain, std::vector<std::string> class_names, std::vector<Sample> samples);

  const std::string& name() const { return name_; }
  Domain domain() const { return domain_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  int num_classes() const { return static_cast<int>(class_names_.size()); }
  std::size_t size() const { return images_.size(); }
  bool empty() const { return images_.empty(); }

  const ImageRef& image_ref(std::size_t i) const { return images_.at(i); }
  /// Decodes (or returns) the pixels of sample i.
  Image load(std::size_t i) const;
  /// Human-readable reference for error messages.
  std::string describe(std::size_t i) const;

  bool has_label(std::size_t i) const { return labels_.at(i).has_value(); }
  /// Counted label access. Throws StateError for an unlabeled sample.
  int label(std::size_t i) const;
  std::uint64_t label_reads() const { return label_reads_->load(); }

  DomainDataset subset(std::span<const std::size_t> indices, std::string name) const;
  /// Same images, labels removed.
  DomainDataset without_labels() const;

 private:
  std::string name_;
  Domain domain_ = Domain::source;
  std::vector<std::string> class_names_;
  std::vector<ImageRef> images_;
  std::vector<std::optional<int>> labels_;
  std::shared_ptr<std::atomic<std::uint64_t>> label_reads_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

/// Folder-per-class layout: root/<class>/<image>. Samples are ordered by
/// (class name, file name); ids follow sorted class names, or
/// `expected_classes` exactly when given.
DomainDataset ingest_folder(const std::filesystem::path& root, Domain domain,
                            const std::optional<std::vector<std::string>>& expected_classes = std::nullopt);

/// List-file layout: one "relative/path label" pair per line, paths relative
/// to the list file's directory (or `image_root` when given).
DomainDataset ingest_list(const std::filesystem::path& list_file, Domain domain,
                          const std::optional<std::vector<std::string>>& class_names = std::nullopt,
                          const std::optional<std::filesystem::path>& image_root = std::nullopt);

struct HoldoutSplit {
  DomainDataset train;
  DomainDataset validation;
};

/// Seed-free stratified split: within each class, every `every`-th sample
/// (positions every-1, 2*every-1, ...) goes to validation.
HoldoutSplit split_holdout(const DomainDataset& dataset, int every);

}  // namespace simuda::datakit
