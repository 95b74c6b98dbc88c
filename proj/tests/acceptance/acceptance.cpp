// Acceptance checks: one PASS/FAIL line per criterion.
//
//   acceptance --work DIR [--configs DIR] [--seeds 42,43,44]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "schedule_oracle.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/evalkit/table.hpp"
#include "simuda/trainer/trainer.hpp"

using namespace simuda;
using namespace simuda::trainer;
namespace fs = std::filesystem;

namespace {

struct Line {
  std::string name;
  oracle::Outcome outcome;
  double seconds = 0;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

using Snapshot = std::vector<nn::Matrix<float>>;

template <typename Params>
Snapshot snapshot(const Params& params) {
  Snapshot out;
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

bool bitwise_equal(const Snapshot& a, const Snapshot& b) {
  if (a.size() != b.size() || a.empty()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    if (std::memcmp(a[i].data(), b[i].data(), sizeof(float) * a[i].size()) != 0) return false;
  }
  return true;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TrainConfig load_config(const fs::path& dir, const std::string& file, std::uint64_t seed, const std::string& init = {}) {
  auto doc = KeyValueDoc::load(dir / file);
  doc.set("run.seed", Value::integer(static_cast<std::int64_t>(seed)));
  if (!init.empty()) doc.set("train.init_checkpoint", Value::string(init));
  return TrainConfig::from_doc(doc);
}

const char* kStages[] = {"ch_ft", "uda_cdan", "uda_mcc", "uda_cdan_mcc"};

struct EndToEnd {
  std::map<std::string, std::vector<double>> final_macro;  // stage -> per seed
  std::map<std::string, std::vector<RunManifest>> manifests;
  bool mcc_discriminator_unchanged = true;
  int mcc_runs_probed = 0;
  double seconds = 0;
};

EndToEnd run_end_to_end(const fs::path& configs, const fs::path& work, const std::vector<std::uint64_t>& seeds) {
  EndToEnd e;
  const auto t0 = Clock::now();
  for (auto seed : seeds) {
    const fs::path base = work / ("seed" + std::to_string(seed));
    const auto ch = load_config(configs, "ch.toml", seed);
    run_experiment(ch, {base / "ch", {}, {}});
    for (const char* stage : kStages) {
      const auto cfg = load_config(configs, std::string(stage) + ".toml", seed, (base / "ch").string());
      Snapshot start, end;
      ProbeFn probe;
      if (std::string(stage) == "uda_mcc") {
        probe = [&](const std::string& phase, const backbone::ClassifierModel&,
                    const adapt::DomainDiscriminator<float>* d) {
          if (d) (phase == "start" ? start : end) = snapshot(d->parameters());
        };
      }
      auto m = run_experiment(cfg, {base / stage, {}, probe});
      if (probe) {
        ++e.mcc_runs_probed;
        e.mcc_discriminator_unchanged = e.mcc_discriminator_unchanged && bitwise_equal(start, end);
      }
      const double final_macro = m.epochs.empty() ? 0.0 : m.epochs.back().target.at("macro");
      std::cout << "  seed " << seed << " " << stage << ": status=" << m.status << " final target macro "
                << evalkit::format_percent(final_macro) << "\n"
                << std::flush;
      e.final_macro[stage].push_back(final_macro);
      e.manifests[stage].push_back(std::move(m));
    }
  }
  e.seconds = since(t0);
  return e;
}

oracle::Outcome check_ch_freeze(const fs::path& configs, const fs::path& work) {
  oracle::Outcome out;
  auto cfg = load_config(configs, "ch.toml", 42);
  cfg.epochs = 2;
  Snapshot start, end, head_start, head_end;
  auto probe = [&](const std::string& phase, const backbone::ClassifierModel& m, const auto*) {
    auto all = m.parameters();
    const std::vector<const backbone::Param*> features(all.begin(), all.end() - 2), head(all.end() - 2, all.end());
    (phase == "start" ? start : end) = snapshot(features);
    (phase == "start" ? head_start : head_end) = snapshot(head);
  };
  const auto m = run_experiment(cfg, {work / "ch-freeze", {}, probe});
  if (m.status != kStatusCompleted) out.fail("CH run did not complete");
  if (!bitwise_equal(start, end)) out.fail("backbone parameters changed under CH");
  if (bitwise_equal(head_start, head_end)) out.fail("head did not train under CH");
  return out;
}

oracle::Outcome check_reporting(const EndToEnd& e, const fs::path& work) {
  oracle::Outcome out;
  std::vector<evalkit::EvalReport> reports;
  for (const char* stage : {"ch_ft", "uda_cdan_mcc"}) {
    const auto& m = e.manifests.at(stage).front();
    reports.push_back(m.target_report(select_best_record(m, parse_selection(m.selection_metric))));
  }
  const fs::path csv_path = work / "table.csv", md_path = work / "table.md";
  evalkit::emit_table(reports, evalkit::TableFormat::csv, csv_path);
  evalkit::emit_table(reports, evalkit::TableFormat::markdown, md_path);
  std::stringstream in(read_text(csv_path));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  const std::size_t classes = reports.front().class_names.size();
  if (rows.size() != 3) out.fail("expected a header and two rows");
  for (const auto& r : rows)
    if (r.size() != 1 + classes + 2) out.fail("row width is not label + classes + mean + micro");
  if (!rows.empty() && (rows[0][1 + classes] != "Mean")) out.fail("Mean column missing after the class columns");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (std::size_t j = 1; j < rows[i].size(); ++j) {
      const auto dot = rows[i][j].find('.');
      if (dot == std::string::npos || rows[i][j].size() - dot - 1 != 2) out.fail("value without 2 decimals");
    }
  }
  double worst = 0;
  for (const auto& r : reports) {
    const auto n = evalkit::confusion_normalized(r);
    for (Eigen::Index i = 0; i < n.values.rows(); ++i) {
      if (std::find(n.empty_rows.begin(), n.empty_rows.end(), i) != n.empty_rows.end()) continue;
      worst = std::max(worst, std::abs(n.values.row(i).sum() - 1.0));
    }
  }
  if (worst > 1e-9) out.fail(oracle::fmt("confusion row sum off by %.3g", worst));
  if (out.ok) out.detail = oracle::fmt("%g columns, max |row sum - 1| %.1e", static_cast<double>(rows[0].size()), worst);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string work = "acceptance-work";
  std::string configs = SIMUDA_DESK_CONFIGS;
  std::vector<std::uint64_t> seeds{42, 43, 44};
  app.add_option("--work", work, "scratch directory (wiped)");
  app.add_option("--configs", configs, "desk benchmark configs");
  app.add_option("--seeds", seeds, "seeds for the end-to-end runs")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const fs::path work_dir = fs::absolute(work);
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);
  std::vector<Line> lines;

  auto timed = [&](const std::string& name, auto&& fn, double budget) {
    const auto t0 = Clock::now();
    Line l{name, fn(), 0};
    l.seconds = since(t0);
    if (budget > 0 && l.seconds > budget) l.outcome.fail(oracle::fmt("took %.1f s (budget %g s)", l.seconds, budget));
    lines.push_back(std::move(l));
  };

  timed("mcc-analytic", [] { return oracle::check_mcc_values(); }, 5);
  timed("gradient-checks",
        [] {
          auto a = oracle::check_mcc_gradients(24);
          const auto b = oracle::check_cdan_gradients(20);
          if (!b.ok) a.fail(b.detail);
          if (a.ok) a.detail += "; " + b.detail;
          return a;
        },
        30);
  timed("cdan-analytics", [] { return oracle::check_cdan_analytics(); }, 0);
  timed("scheduler", [] { return oracle::check_scheduler(); }, 0);

  std::cout << "end-to-end runs (" << seeds.size() << " seeds)\n" << std::flush;
  EndToEnd e;
  oracle::Outcome e2e_failure;
  try {
    e = run_end_to_end(configs, work_dir / "e2e", seeds);
  } catch (const std::exception& ex) {
    e2e_failure.fail(std::string("end-to-end runs failed: ") + ex.what());
  }
  const bool have_runs = e2e_failure.ok;

  timed("scheme-integrity",
        [&] {
          auto out = check_ch_freeze(configs, work_dir);
          if (!have_runs) out.fail(e2e_failure.detail);
          else if (e.mcc_runs_probed == 0 || !e.mcc_discriminator_unchanged)
            out.fail("discriminator parameters changed during an mcc run");
          if (out.ok) out.detail = oracle::fmt("CH backbone bitwise frozen; discriminator untouched in %g mcc runs", e.mcc_runs_probed);
          return out;
        },
        0);

  {
    Line l{"end-to-end", have_runs ? oracle::Outcome{} : e2e_failure, e.seconds};
    if (have_runs) {
      const double base = median(e.final_macro.at("ch_ft"));
      const double cdan = median(e.final_macro.at("uda_cdan"));
      const double mcc = median(e.final_macro.at("uda_mcc"));
      const double both = median(e.final_macro.at("uda_cdan_mcc"));
      std::string summary = "stage,seed,final_target_macro\n";
      for (const char* stage : kStages)
        for (std::size_t i = 0; i < seeds.size(); ++i)
          summary += std::string(stage) + "," + std::to_string(seeds[i]) + "," +
                     evalkit::format_percent(e.final_macro.at(stage)[i]) + "\n";
      write_text_atomic(work_dir / "end_to_end.csv", summary);
      l.outcome.detail = oracle::fmt("median target macro: CH-FT %.2f, cdan_mcc %.2f (gain %.2f)", base, both, both - base) +
                         oracle::fmt(", cdan %.2f, mcc %.2f", cdan, mcc);
      if (both - base < 10.0) l.outcome.fail(l.outcome.detail + "; gain below 10 points");
      if (both < std::max(cdan, mcc) - 2.0) l.outcome.fail(l.outcome.detail + "; cdan_mcc more than 2 points below the best single method");
      if (l.seconds > 900) l.outcome.fail(oracle::fmt("took %.0f s (budget 900 s)", l.seconds));
    }
    lines.push_back(std::move(l));
  }

  timed("determinism",
        [&] {
          oracle::Outcome out;
          const fs::path a = work_dir / "det-a", b = work_dir / "det-b";
          const auto ch = load_config(configs, "ch.toml", 42);
          run_experiment(ch, {work_dir / "det-ch", {}, {}});
          auto cfg = load_config(configs, "uda_cdan_mcc.toml", 42, (work_dir / "det-ch").string());
          cfg.epochs = 5;
          cfg.optim.warmup_epochs = 0.5;
          cfg.workers = 4;
          run_experiment(cfg, {a, {}, {}});
          run_experiment(cfg, {b, {}, {}});
          const auto ta = read_text(a / kMetricsFile), tb = read_text(b / kMetricsFile);
          if (ta != tb) out.fail("metrics.csv differs between identical deterministic runs");
          out.detail = oracle::fmt("metrics.csv byte-equal (%g bytes)", static_cast<double>(ta.size()));
          return out;
        },
        0);

  timed("leakage",
        [&] {
          oracle::Outcome out;
          if (!have_runs) {
            out.fail(e2e_failure.detail);
            return out;
          }
          std::uint64_t opt = 0, eval = 0;
          int runs = 0;
          for (const char* stage : {"uda_cdan", "uda_mcc", "uda_cdan_mcc"}) {
            for (const auto& m : e.manifests.at(stage)) {
              ++runs;
              opt += m.target_label_reads_in_optimization;
              for (const auto& ep : m.epochs) opt += ep.target_label_reads_in_optimization;
              eval += m.target_label_reads_in_evaluation;
            }
          }
          if (opt != 0) out.fail(oracle::fmt("%g target-label reads during optimization", static_cast<double>(opt)));
          if (eval == 0) out.fail("instrumentation saw no evaluation reads either; counter is not wired");
          out.detail = oracle::fmt("%g UDA runs: 0 reads in optimization, %g in evaluation", runs, static_cast<double>(eval));
          return out;
        },
        0);

  timed("reporting",
        [&] {
          if (!have_runs) return e2e_failure;
          return check_reporting(e, work_dir);
        },
        0);

  int failures = 0;
  for (const auto& l : lines) {
    failures += !l.outcome.ok;
    std::cout << (l.outcome.ok ? "PASS " : "FAIL ") << l.name << " (" << oracle::fmt("%.1f s", l.seconds) << ")";
    if (!l.outcome.detail.empty()) std::cout << ": " << l.outcome.detail;
    std::cout << "\n";
  }
  return failures == 0 ? 0 : 1;
}
