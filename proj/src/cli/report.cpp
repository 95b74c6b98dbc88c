#include "simuda/cli/report.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/trainer/manifest.hpp"

namespace simuda::cli {

ReportResult collect_reports(const std::vector<std::filesystem::path>& run_dirs) {
  ReportResult out;
  for (const auto& dir : run_dirs) {
    try {
      const auto m = trainer::RunManifest::load(dir);
      if (m.epochs.empty()) {
        if (m.status != trainer::kStatusUnstable || m.class_names.empty()) {
          out.skipped.push_back(dir.string() + ": no completed epoch");
          continue;
        }
        // Aborted before the first evaluation: keep the row, every value n/a.
        evalkit::EvalReport r;
        r.label = m.method_label;
        r.status = m.status;
        r.class_names = m.class_names;
        r.per_class_top1.assign(m.class_names.size(), std::numeric_limits<double>::quiet_NaN());
        r.macro_mean = r.micro_accuracy = std::numeric_limits<double>::quiet_NaN();
        const auto c = static_cast<Eigen::Index>(m.class_names.size());
        r.confusion = evalkit::CountMatrix::Zero(c, c);
        out.rows.push_back(std::move(r));
        continue;
      }
      const auto& best = trainer::select_best_record(m, trainer::parse_selection(m.selection_metric));
      if (best.target_confusion.size() == 0) {
        out.skipped.push_back(dir.string() + ": no target evaluation");
        continue;
      }
      out.rows.push_back(m.target_report(best));
    } catch (const DataError& e) {
      out.skipped.push_back(dir.string() + ": " + e.what());
    } catch (const IntegrityError& e) {
      out.skipped.push_back(dir.string() + ": " + e.what());
    }
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const evalkit::EvalReport& a, const evalkit::EvalReport& b) { return a.label < b.label; });
  return out;
}

ReportResult report(const ReportOptions& options) {
  auto result = collect_reports(options.run_dirs);
  for (const auto& s : result.skipped) std::cerr << "skipped " << s << "\n";
  if (result.rows.empty()) throw DataError("no run directory produced a report");
  evalkit::TableOptions table;
  table.class_order = options.class_order;
  evalkit::emit_table(result.rows, options.format, options.out, table);
  if (options.confusion_dir) {
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      std::string slug = result.rows[i].label;
      for (char& c : slug) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
      }
      write_text_atomic(*options.confusion_dir / ("confusion_" + std::to_string(i + 1) + "_" + slug + ".csv"),
                        evalkit::render_confusion_csv(result.rows[i]));
    }
  }
  std::cout << "report: " << options.out.string() << " (" << result.rows.size() << " rows, " << result.skipped.size()
            << " skipped)" << std::endl;
  return result;
}

}  // namespace simuda::cli
