#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "simuda/evalkit/evaluate.hpp"
#include "simuda/trainer/config.hpp"

namespace simuda::trainer {

inline constexpr const char* kStatusRunning = "running";
inline constexpr const char* kStatusCompleted = "completed";
inline constexpr const char* kStatusUnstable = "aborted-unstable";

/// One completed epoch. Metric names: train.* (loss terms, lr, top1),
/// val.* and target.* (top1 / macro / micro).
struct EpochRecord {
  int epoch = 0;  // 1-based
  std::map<std::string, double> train;
  std::map<std::string, double> val;
  std::map<std::string, double> target;
  std::vector<double> target_per_class;
  evalkit::CountMatrix target_confusion;
  std::string checkpoint;  // relative to the run directory
  std::uint64_t target_label_reads_in_optimization = 0;
};

struct RunManifest {
  std::string config_text;  // resolved config, rendered
  std::string config_hash;
  std::string code_revision;
  std::uint64_t seed = 0;
  std::string scheme;
  std::string method_label;
  std::string status = kStatusRunning;
  std::string status_detail;
  std::string init_checkpoint;
  int epoch_offset = 0;  // epochs spent in an earlier stage (CH of CH-FT)
  std::string selection_metric;
  std::vector<std::string> class_names;
  std::vector<EpochRecord> epochs;
  std::optional<int> best_epoch;
  std::string best_checkpoint;
  std::uint64_t target_label_reads_in_optimization = 0;
  std::uint64_t target_label_reads_in_evaluation = 0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  /// manifest.json in `run_dir`, written atomically.
  void write(const std::filesystem::path& run_dir) const;
  /// Throws DataError when the directory has no manifest.
  static RunManifest load(const std::filesystem::path& run_dir);

  /// Target report of the given epoch record.
  evalkit::EvalReport target_report(const EpochRecord& record) const;
};

/// Long-format metrics: header `epoch,split,metric,value`, six decimals.
std::string render_metrics_csv(const RunManifest& manifest);

/// Argmax over the per-epoch metric (val.top1 or target.macro); ties go to
/// the earliest epoch. Throws StateError for an empty log.
const EpochRecord& select_best_record(const RunManifest& manifest, SelectionMetric metric);
/// Checkpoint path (absolute, under `run_dir`) of the selected epoch.
std::filesystem::path select_best(const RunManifest& manifest, SelectionMetric metric,
                                  const std::filesystem::path& run_dir);

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kConfigFile = "config.toml";
inline constexpr const char* kCheckpointDir = "checkpoints";
inline constexpr const char* kBestPointer = "best";

}  // namespace simuda::trainer
