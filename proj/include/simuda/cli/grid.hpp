#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "simuda/core/keyvalue.hpp"
#include "simuda/trainer/config.hpp"

namespace simuda::cli {

/// Base config plus `grid.*` axes. Axis keys: grid.lr, grid.augmentation,
/// grid.scheme, grid.uda_method, grid.init_checkpoint ("hub" or "CH"),
/// grid.seed. An absent axis takes the base value; an empty one is an error.
struct GridSpec {
  std::string name = "grid";
  int max_cells = 512;
  KeyValueDoc base;
  std::vector<double> lrs;
  std::vector<std::string> augmentations;
  std::vector<std::string> schemes;
  std::vector<std::string> uda_methods;
  std::vector<std::string> inits;
  std::vector<std::uint64_t> seeds;

  static GridSpec parse(const KeyValueDoc& doc);
  static GridSpec load(const std::filesystem::path& path);
};

struct GridCell {
  std::string id;
  std::string init;  // "hub", "CH", or "" for source-only schemes
  std::uint64_t seed = 42;
  KeyValueDoc doc;   // full cell config, init_checkpoint resolved to the CH stage dir
  trainer::TrainConfig config;
  std::filesystem::path run_dir;
};

/// Head-tuning run shared by all cells of one seed that start from CH.
struct ChStage {
  std::uint64_t seed = 42;
  KeyValueDoc doc;
  std::filesystem::path run_dir;
};

struct GridPlan {
  std::vector<GridCell> cells;
  std::vector<ChStage> ch_stages;
  std::vector<std::string> warnings;  // deduplicated cells
  std::size_t expanded = 0;           // before deduplication
};

/// Cartesian expansion (scheme, init, uda_method, augmentation, lr, seed;
/// the last varies fastest). Every cell is validated here. Cells that
/// resolve to the same config are merged with a warning. Source-only
/// schemes ignore uda_method and init; CH_FT always starts from CH.
GridPlan expand_grid(const GridSpec& spec, const std::filesystem::path& out_dir);

struct GridOptions {
  std::filesystem::path gridspec;
  std::filesystem::path out;
  int parallel = 1;
  std::optional<std::uint64_t> seed;
  std::optional<bool> deterministic;
  std::filesystem::path executable;  // binary providing the `run` verb
  bool quiet = false;
};

/// Runs every cell as a child process and writes <out>/summary.csv with one
/// row per cell (unstable and failed cells included). Returns the summary path.
std::filesystem::path grid(const GridOptions& options);

/// Summary header in the supplementary-table column order.
const std::vector<std::string>& summary_columns();

}  // namespace simuda::cli
