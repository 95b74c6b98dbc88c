#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "simuda/cli/experiment.hpp"
#include "simuda/cli/grid.hpp"
#include "simuda/cli/report.hpp"
#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/trainer/trainer.hpp"
#include "support.hpp"

using namespace simuda;
using namespace simuda::cli;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"(
run.scheme = "FT"
data.synthetic_classes = 3
data.synthetic_per_class = 10
model.resolution = 32
model.feature_dim = 8
train.epochs = 1
train.batch_size = 6
uda.discriminator_hidden = 16
)";

GridSpec spec(const std::string& axes) { return GridSpec::parse(KeyValueDoc::parse(std::string(kTiny) + axes)); }

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

trainer::TrainConfig tiny_config(trainer::Scheme scheme) {
  auto doc = KeyValueDoc::parse(kTiny);
  doc.set("run.scheme", Value::string(std::string(trainer::to_string(scheme))));
  return trainer::TrainConfig::from_doc(doc);
}

}  // namespace

TEST_CASE("grid expansion counts") {
  testing::TempDir dir("grid");
  const auto ch = expand_grid(spec("grid.scheme = [\"CH\"]\ngrid.lr = [10.0, 0.1, 0.001]\n"), dir.path());
  CHECK(ch.cells.size() == 3);
  CHECK(ch.ch_stages.empty());
  for (const auto& c : ch.cells) CHECK(c.config.scheme == trainer::Scheme::CH);

  const auto uda = expand_grid(spec("grid.scheme = [\"UDA\"]\ngrid.uda_method = [\"cdan\", \"mcc\", \"cdan_mcc\"]\n"
                                    "grid.init_checkpoint = [\"hub\", \"CH\"]\n"),
                               dir.path());
  CHECK(uda.cells.size() == 6);
  CHECK(uda.ch_stages.size() == 1);
  int from_ch = 0;
  for (const auto& c : uda.cells) from_ch += c.init == "CH";
  CHECK(from_ch == 3);

  const auto seeds = expand_grid(spec("grid.scheme = [\"FT\"]\ngrid.seed = [1, 2]\ngrid.augmentation = [\"base\", \"augmix\"]\n"),
                                 dir.path());
  CHECK(seeds.cells.size() == 4);
}

TEST_CASE("grid duplicates are merged with a warning") {
  testing::TempDir dir("dups");
  const auto plan = expand_grid(spec("grid.scheme = [\"FT\"]\ngrid.uda_method = [\"cdan\", \"mcc\"]\n"), dir.path());
  CHECK(plan.expanded == 2);
  CHECK(plan.cells.size() == 1);
  CHECK(plan.warnings.size() == 1);
}

TEST_CASE("grid errors") {
  CHECK_THROWS_AS(spec("grid.lr = []\n"), ConfigError);
  CHECK_THROWS_AS(spec("grid.learning_rate = [0.1]\n"), ConfigError);
  CHECK_THROWS_AS(spec("grid.scheme = [\"XT\"]\n"), ConfigError);
  CHECK_THROWS_AS(spec("grid.init_checkpoint = [\"imagenet\"]\n"), ConfigError);
  testing::TempDir dir("cap");
  CHECK_THROWS_AS(expand_grid(spec("grid.max_cells = 2\ngrid.lr = [1.0, 2.0, 3.0]\n"), dir.path()), ConfigError);
}

TEST_CASE("grid runs cells as processes and summarizes every cell") {
  testing::TempDir dir("gridrun");
  write_text_atomic(dir / "g.toml", std::string(kTiny) + "grid.scheme = [\"FT\"]\ngrid.lr = [0.001, 1e30]\n"
                                                           "optim.kind = \"sgd\"\noptim.momentum = 0.0\n");
  GridOptions o;
  o.gridspec = dir / "g.toml";
  o.out = dir / "out";
  o.parallel = 2;
  o.executable = SIMUDA_EXE;
  o.quiet = true;
  const auto summary = grid(o);
  const auto text = read_text(summary);
  CHECK(count_lines(text) == 3);
  CHECK(text.find("aborted-unstable") != std::string::npos);
  CHECK(text.find("completed") != std::string::npos);
  CHECK(text.rfind("cell,Model,Pre-training,train scheme,transform,lr,Acc@1", 0) == 0);
}

TEST_CASE("report merges runs and flags problems") {
  testing::TempDir dir("report");
  trainer::run_experiment(tiny_config(trainer::Scheme::FT), {dir / "ft", {}, {}});
  trainer::run_experiment(tiny_config(trainer::Scheme::CH), {dir / "ch", {}, {}});
  auto bad = tiny_config(trainer::Scheme::FT);
  bad.optim.lr = 1e30;
  bad.optim.kind = trainer::OptimizerKind::sgd;
  bad.optim.momentum = 0.0;
  trainer::run_experiment(bad, {dir / "bad", {}, {}});
  std::filesystem::create_directories(dir / "empty");

  ReportOptions o;
  o.run_dirs = {dir / "ft", dir / "ch", dir / "bad", dir / "empty"};
  o.format = evalkit::TableFormat::csv;
  o.out = dir / "table.csv";
  o.confusion_dir = dir / "conf";
  const auto r = report(o);
  CHECK(r.rows.size() == 3);
  CHECK(r.skipped.size() == 1);
  const auto table = read_text(dir / "table.csv");
  CHECK(count_lines(table) == 4);
  CHECK(table.find("[aborted-unstable]") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "conf"));

  auto four = tiny_config(trainer::Scheme::FT);
  four.data.synthetic_classes = 4;
  trainer::run_experiment(four, {dir / "four", {}, {}});
  o.run_dirs = {dir / "ft", dir / "four"};
  CHECK_THROWS_AS(report(o), ConfigError);
  o.run_dirs = {dir / "empty"};
  CHECK_THROWS_AS(report(o), DataError);
}

TEST_CASE("run verb resolves overrides and writes the run directory") {
  testing::TempDir dir("run");
  write_text_atomic(dir / "c.toml", kTiny);
  RunOptions o;
  o.config_path = dir / "c.toml";
  o.seed = 5;
  o.out = dir / "r";
  o.quiet = true;
  const auto cfg = resolve_run_config(o);
  CHECK(cfg.seed == 5);
  run(o);
  const auto m = trainer::RunManifest::load(dir / "r");
  CHECK(m.seed == 5);
  const auto reread = trainer::TrainConfig::load(dir / "r" / trainer::kConfigFile);
  CHECK(reread.render() == cfg.render());
  CHECK(read_text(dir / "r/checkpoints/best").rfind("epoch_1.ckpt", 0) == 0);
  o.config_path = dir / "missing.toml";
  CHECK_THROWS_AS(resolve_run_config(o), ConfigError);
}

TEST_CASE("synth-data writes both domains") {
  testing::TempDir dir("synth");
  SynthOptions o;
  o.out = dir / "d";
  o.classes = 2;
  o.per_class = 2;
  o.resolution = 32;
  synth_data(o);
  CHECK(std::filesystem::is_directory(dir / "d/source"));
  CHECK(std::filesystem::is_directory(dir / "d/target"));
}

TEST_CASE("bundled gridspecs expand") {
  testing::TempDir dir("bundled");
  const std::map<std::string, std::size_t> expected{{"ch_lr.toml", 3},        {"ft_lr_aug.toml", 6},
                                                    {"ch_ft_lr_aug.toml", 6}, {"uda_methods.toml", 6},
                                                    {"desk_benchmark.toml", 12}};
  for (const auto& [file, cells] : expected) {
    INFO(file);
    const auto plan = expand_grid(GridSpec::load(fs::path(SIMUDA_SOURCE_DIR) / "paper-grids" / file), dir.path());
    CHECK(plan.cells.size() == cells);
  }
  for (const auto& entry : fs::directory_iterator(fs::path(SIMUDA_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".toml") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(trainer::TrainConfig::load(entry.path()).validate());
  }
}
