#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "simuda/evalkit/table.hpp"

namespace simuda::cli {

struct ReportOptions {
  std::vector<std::filesystem::path> run_dirs;
  evalkit::TableFormat format = evalkit::TableFormat::markdown;
  std::filesystem::path out;
  std::vector<std::string> class_order;
  std::optional<std::filesystem::path> confusion_dir;  // per-run confusion CSVs
};

struct ReportResult {
  std::vector<evalkit::EvalReport> rows;   // in table order
  std::vector<std::string> skipped;        // "dir: reason"
};

/// Target report at each run's selected epoch; rows ordered by method label.
/// Directories without a usable manifest are skipped with a reason. Runs
/// with different class sets raise ConfigError.
ReportResult collect_reports(const std::vector<std::filesystem::path>& run_dirs);

/// Collects, emits the table (and confusion CSVs) and prints skip reasons.
ReportResult report(const ReportOptions& options);

}  // namespace simuda::cli
