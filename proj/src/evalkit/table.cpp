#include "simuda/evalkit/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"

namespace simuda::evalkit {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string row_label(const EvalReport& r) {
  std::string label = r.label.empty() ? "run" : r.label;
  if (!r.status.empty()) label += " [" + r.status + "]";
  return label;
}

}  // namespace

TableFormat parse_table_format(std::string_view s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "markdown" || s == "md") return TableFormat::markdown;
  throw ConfigError("invalid table format '" + std::string(s) + "' (valid: csv, markdown)");
}

std::string class_abbreviation(const std::string& name) {
  static const std::map<std::string, std::string> visda = {
      {"aeroplane", "Pl"}, {"bicycle", "Bcl"},   {"bus", "Bus"},        {"car", "Car"},
      {"horse", "Hrs"},    {"knife", "Knf"},     {"motorcycle", "Mcy"}, {"person", "Per"},
      {"plant", "Plt"},    {"skateboard", "Skb"}, {"train", "Trn"},     {"truck", "Tck"},
  };
  const auto it = visda.find(name);
  return it == visda.end() ? name : it->second;
}

std::string format_percent(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string render_table(const std::vector<EvalReport>& reports, TableFormat format, const TableOptions& options) {
  if (reports.empty()) throw ConfigError("emit_table needs at least one report");
  const auto& names = reports.front().class_names;
  const std::set<std::string> name_set(names.begin(), names.end());
  for (const auto& r : reports) {
    if (std::set<std::string>(r.class_names.begin(), r.class_names.end()) != name_set ||
        r.class_names.size() != names.size()) {
      throw ConfigError("reports '" + row_label(reports.front()) + "' and '" + row_label(r) +
                        "' have different class sets");
    }
  }

  std::vector<std::string> order = names;
  if (!options.class_order.empty()) {
    if (std::set<std::string>(options.class_order.begin(), options.class_order.end()) != name_set ||
        options.class_order.size() != names.size()) {
      throw ConfigError("table class order does not match the reports' classes");
    }
    order = options.class_order;
  }

  // values[row][col]: per-class columns in `order`, then macro, micro.
  std::vector<std::vector<double>> values;
  for (const auto& r : reports) {
    std::vector<double> row;
    for (const auto& name : order) {
      const auto pos = std::find(r.class_names.begin(), r.class_names.end(), name) - r.class_names.begin();
      row.push_back(r.per_class_top1[static_cast<std::size_t>(pos)]);
    }
    row.push_back(r.macro_mean);
    row.push_back(r.micro_accuracy);
    values.push_back(std::move(row));
  }

  std::vector<std::string> header{"Method"};
  for (const auto& name : order) header.push_back(options.abbreviate ? class_abbreviation(name) : name);
  header.push_back("Mean");
  header.push_back("Micro");

  std::string out;
  if (format == TableFormat::csv) {
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_field(header[i]);
    out += "\n";
    for (std::size_t r = 0; r < reports.size(); ++r) {
      out += csv_field(row_label(reports[r]));
      for (double v : values[r]) out += "," + format_percent(v);
      out += "\n";
    }
    return out;
  }

  const std::size_t cols = values.front().size();
  std::vector<double> best(cols, -1.0);
  for (const auto& row : values) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!std::isnan(row[c])) best[c] = std::max(best[c], std::round(row[c] * 100.0));
    }
  }
  out += "|";
  for (const auto& h : header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (std::size_t r = 0; r < reports.size(); ++r) {
    out += "| " + row_label(reports[r]) + " |";
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r][c];
      const bool bold = reports.size() > 1 && !std::isnan(v) && std::round(v * 100.0) == best[c];
      out += bold ? " **" + format_percent(v) + "** |" : " " + format_percent(v) + " |";
    }
    out += "\n";
  }
  return out;
}

void emit_table(const std::vector<EvalReport>& reports, TableFormat format, const std::filesystem::path& path,
                const TableOptions& options) {
  write_text_atomic(path, render_table(reports, format, options));
}

std::string render_confusion_csv(const EvalReport& report) {
  const auto norm = confusion_normalized(report);
  const auto& names = report.class_names;
  std::string out = "kind,true";
  for (const auto& n : names) out += "," + csv_field(n);
  out += "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += "count," + csv_field(names[i]);
    for (std::size_t j = 0; j < names.size(); ++j) {
      out += "," + std::to_string(report.confusion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += "percent," + csv_field(names[i]);
    for (std::size_t j = 0; j < names.size(); ++j) {
      out += "," + format_percent(100.0 * norm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out += "\n";
  }
  return out;
}

}  // namespace simuda::evalkit
