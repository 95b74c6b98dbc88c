#include "simuda/datakit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "simuda/core/errors.hpp"

namespace fs = std::filesystem;

namespace simuda::datakit {

std::string_view to_string(Domain d) { return d == Domain::source ? "source" : "target"; }

DomainDataset::DomainDataset(std::string name, Domain domain, std::vector<std::string> class_names,
                             std::vector<Sample> samples)
    : name_(std::move(name)), domain_(domain), class_names_(std::move(class_names)) {
  std::set<std::string> unique(class_names_.begin(), class_names_.end());
  if (unique.size() != class_names_.size()) throw ConfigError("dataset '" + name_ + "': duplicate class names");
  images_.reserve(samples.size());
  labels_.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Sample& s = samples[i];
    if (s.domain != domain_) {
      throw ConfigError("dataset '" + name_ + "': sample " + std::to_string(i) + " has domain " +
                        std::string(to_string(s.domain)));
    }
    if (s.label && (*s.label < 0 || *s.label >= num_classes())) {
      throw ConfigError("dataset '" + name_ + "': sample " + std::to_string(i) + " label " +
                        std::to_string(*s.label) + " outside [0, " + std::to_string(num_classes()) + ")");
    }
    images_.push_back(std::move(s.image));
    labels_.push_back(s.label);
  }
}

Image DomainDataset::load(std::size_t i) const {
  const ImageRef& ref = images_.at(i);
  if (const auto* p = std::get_if<fs::path>(&ref)) return load_image(*p);
  return *std::get<std::shared_ptr<const Image>>(ref);
}

std::string DomainDataset::describe(std::size_t i) const {
  const ImageRef& ref = images_.at(i);
  if (const auto* p = std::get_if<fs::path>(&ref)) return p->string();
  return name_ + "[" + std::to_string(i) + "]";
}

int DomainDataset::label(std::size_t i) const {
  const auto& l = labels_.at(i);
  if (!l) throw StateError("dataset '" + name_ + "': sample " + std::to_string(i) + " has no label");
  label_reads_->fetch_add(1, std::memory_order_relaxed);
  return *l;
}

DomainDataset DomainDataset::subset(std::span<const std::size_t> indices, std::string name) const {
  DomainDataset out;
  out.name_ = std::move(name);
  out.domain_ = domain_;
  out.class_names_ = class_names_;
  for (std::size_t i : indices) {
    out.images_.push_back(images_.at(i));
    out.labels_.push_back(labels_.at(i));
  }
  return out;
}

DomainDataset DomainDataset::without_labels() const {
  DomainDataset out = *this;
  out.labels_.assign(labels_.size(), std::nullopt);
  out.label_reads_ = std::make_shared<std::atomic<std::uint64_t>>(0);
  return out;
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

DomainDataset ingest_folder(const fs::path& root, Domain domain,
                            const std::optional<std::vector<std::string>>& expected_classes) {
  if (!fs::is_directory(root)) throw ConfigError("dataset root '" + root.string() + "' does not exist");

  std::map<std::string, std::vector<fs::path>> by_class;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    auto& files = by_class[entry.path().filename().string()];
    for (const auto& f : fs::directory_iterator(entry.path())) {
      if (f.is_regular_file() && is_image_file(f.path())) files.push_back(f.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  }
  for (const auto& [name, files] : by_class) {
    if (files.empty()) throw IngestionError("class directory '" + name + "' under '" + root.string() + "' is empty");
  }

  std::vector<std::string> classes;
  if (expected_classes) {
    classes = *expected_classes;
    const std::set<std::string> expected(classes.begin(), classes.end());
    for (const auto& [name, files] : by_class) {
      if (!expected.count(name)) {
        throw IngestionError("class '" + name + "' found under '" + root.string() + "' is not in the expected class list");
      }
    }
    for (const auto& name : classes) {
      if (!by_class.count(name)) {
        throw IngestionError("expected class '" + name + "' missing under '" + root.string() + "'");
      }
    }
  } else {
    for (const auto& [name, files] : by_class) classes.push_back(name);
  }
  if (classes.empty()) throw IngestionError("no class directories under '" + root.string() + "'");

  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < classes.size(); ++i) ids[classes[i]] = static_cast<int>(i);

  // Sample order is (class name, file name) regardless of id assignment.
  std::vector<Sample> samples;
  for (const auto& [name, files] : by_class) {
    for (const auto& f : files) samples.push_back(Sample{f, ids.at(name), domain});
  }
  return DomainDataset(root.filename().string(), domain, std::move(classes), std::move(samples));
}

DomainDataset ingest_list(const fs::path& list_file, Domain domain,
                          const std::optional<std::vector<std::string>>& class_names,
                          const std::optional<fs::path>& image_root) {
  std::ifstream in(list_file);
  if (!in) throw ConfigError("list file '" + list_file.string() + "' does not exist");
  const fs::path base = image_root ? *image_root : list_file.parent_path();

  std::vector<std::pair<fs::path, int>> entries;
  std::string line;
  int line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto sep = line.find_last_of(" \t");
    if (sep == std::string::npos) {
      throw IngestionError(list_file.string() + ":" + std::to_string(line_no) + ": expected 'path label'");
    }
    const std::string path = line.substr(0, line.find_last_not_of(" \t", sep) + 1);
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(line.substr(sep + 1), &used);
      if (used != line.size() - sep - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw IngestionError(list_file.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    if (label < 0) throw IngestionError(list_file.string() + ":" + std::to_string(line_no) + ": negative label");
    max_label = std::max(max_label, label);
    entries.emplace_back(base / path, label);
  }
  if (entries.empty()) throw IngestionError("list file '" + list_file.string() + "' has no entries");

  std::vector<std::string> classes;
  if (class_names) {
    classes = *class_names;
    if (max_label >= static_cast<int>(classes.size())) {
      throw IngestionError("list file '" + list_file.string() + "' has label " + std::to_string(max_label) +
                           " but only " + std::to_string(classes.size()) + " class names");
    }
  } else {
    std::set<int> seen;
    for (const auto& e : entries) seen.insert(e.second);
    if (static_cast<int>(seen.size()) != max_label + 1) {
      throw IngestionError("list file '" + list_file.string() + "': class ids are not dense in [0, C)");
    }
    for (int c = 0; c <= max_label; ++c) classes.push_back("class_" + std::to_string(c));
  }
  std::vector<Sample> samples;
  samples.reserve(entries.size());
  for (auto& [p, l] : entries) samples.push_back(Sample{std::move(p), l, domain});
  return DomainDataset(list_file.stem().string(), domain, std::move(classes), std::move(samples));
}

HoldoutSplit split_holdout(const DomainDataset& dataset, int every) {
  if (every < 2) throw ConfigError("holdout split needs every >= 2");
  std::vector<std::size_t> train, val;
  std::vector<int> seen(static_cast<std::size_t>(dataset.num_classes()), 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    // Splitting is bookkeeping over the source domain, not part of any
    // optimization path, but it still goes through the counted accessor.
    const int c = dataset.label(i);
    const int pos = seen[static_cast<std::size_t>(c)]++;
    ((pos % every) == every - 1 ? val : train).push_back(i);
  }
  return {dataset.subset(train, dataset.name() + "-train"), dataset.subset(val, dataset.name() + "-val")};
}

}  // namespace simuda::datakit
