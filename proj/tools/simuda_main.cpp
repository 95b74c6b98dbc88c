// simuda: run, grid, report, synth-data.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "simuda/cli/experiment.hpp"
#include "simuda/cli/grid.hpp"
#include "simuda/cli/report.hpp"
#include "simuda/core/errors.hpp"

namespace {

std::filesystem::path self_executable(const char* argv0) {
  std::error_code ec;
  auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) return p;
  return std::filesystem::absolute(argv0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sim-to-real unsupervised domain adaptation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int parallel = 1;
  std::optional<bool> deterministic;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "train one configuration");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override run.seed");
  run->add_option("--out", out, "run directory (default runs/<run.name>)");
  run->add_option("--parallel", parallel, "image loading workers")->check(CLI::PositiveNumber);
  run->add_flag("--deterministic,!--no-deterministic", deterministic, "deterministic mode (default on)");
  run->add_flag("--quiet", quiet, "no per-epoch progress");

  auto* grid = app.add_subcommand("grid", "expand a gridspec and run every cell");
  grid->add_option("--config", config_path, "gridspec file")->required();
  grid->add_option("--seed", seed, "run a single seed instead of the grid.seed axis");
  grid->add_option("--out", out, "output directory")->required();
  grid->add_option("--parallel", parallel, "concurrent cells")->check(CLI::PositiveNumber);
  grid->add_flag("--deterministic,!--no-deterministic", deterministic, "deterministic mode (default on)");
  grid->add_flag("--quiet", quiet, "no progress lines");

  std::vector<std::string> run_dirs;
  std::string format = "markdown";
  std::vector<std::string> class_order;
  std::string confusion_dir;
  auto* report = app.add_subcommand("report", "merge run directories into one table");
  report->add_option("run_dirs", run_dirs, "run directories")->required();
  report->add_option("--out", out, "table file")->required();
  report->add_option("--format", format, "csv or markdown");
  report->add_option("--class-order", class_order, "column order by class name")->delimiter(',');
  report->add_option("--confusion-dir", confusion_dir, "also write confusion CSVs here");

  simuda::cli::SynthOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth-data", "write the synthetic benchmark as image folders");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--seed", seed, "dataset seed (default 0)");
  synth_cmd->add_option("--classes", synth.classes, "number of glyph classes");
  synth_cmd->add_option("--per-class", synth.per_class, "images per class and domain");
  synth_cmd->add_option("--shift", synth.shift, "identity, benchmark, or field=value,...");
  synth_cmd->add_option("--resolution", synth.resolution, "image side in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      simuda::cli::RunOptions o;
      o.config_path = config_path;
      o.seed = seed;
      if (!out.empty()) o.out = out;
      o.deterministic = deterministic;
      if (run->count("--parallel")) o.workers = parallel;
      o.quiet = quiet;
      simuda::cli::run(o);
    } else if (*grid) {
      simuda::cli::GridOptions o;
      o.gridspec = config_path;
      o.out = out;
      o.parallel = parallel;
      o.seed = seed;
      o.deterministic = deterministic;
      o.executable = self_executable(argv[0]);
      o.quiet = quiet;
      simuda::cli::grid(o);
    } else if (*report) {
      simuda::cli::ReportOptions o;
      for (const auto& d : run_dirs) o.run_dirs.emplace_back(d);
      o.format = simuda::evalkit::parse_table_format(format);
      o.out = out;
      o.class_order = class_order;
      if (!confusion_dir.empty()) o.confusion_dir = confusion_dir;
      simuda::cli::report(o);
    } else if (*synth_cmd) {
      synth.out = synth_out;
      synth.seed = seed.value_or(0);
      simuda::cli::synth_data(synth);
    }
  } catch (const simuda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return simuda::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
