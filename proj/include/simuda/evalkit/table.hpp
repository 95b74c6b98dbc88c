#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "simuda/evalkit/evaluate.hpp"

namespace simuda::evalkit {

enum class TableFormat { csv, markdown };

TableFormat parse_table_format(std::string_view s);

struct TableOptions {
  /// Column order by class name; empty keeps the reports' order.
  std::vector<std::string> class_order;
  /// Replace known VisDA class names with their short column headers.
  bool abbreviate = true;
};

/// Short header for a VisDA class name ("aeroplane" -> "Pl"), or the name itself.
std::string class_abbreviation(const std::string& name);

/// One row per report: label, per-class top-1, macro, micro. Two decimals.
/// Markdown bolds the best value of each column when there are several rows.
/// Throws ConfigError when the reports' class sets differ.
std::string render_table(const std::vector<EvalReport>& reports, TableFormat format, const TableOptions& options = {});
void emit_table(const std::vector<EvalReport>& reports, TableFormat format, const std::filesystem::path& path,
                const TableOptions& options = {});

/// Confusion matrix as CSV: a block of counts then row-normalized percentages.
std::string render_confusion_csv(const EvalReport& report);

/// Fixed two-decimal rendering; NaN renders as "n/a".
std::string format_percent(double v);

}  // namespace simuda::evalkit
