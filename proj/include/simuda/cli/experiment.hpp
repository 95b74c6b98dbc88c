#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "simuda/trainer/config.hpp"
#include "simuda/trainer/manifest.hpp"

namespace simuda::cli {

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;  // run directory; default runs/<name>
  std::optional<bool> deterministic;
  std::optional<int> workers;
  bool quiet = false;
};

/// Loads and overrides the config; ConfigError on any problem.
trainer::TrainConfig resolve_run_config(const RunOptions& options);

/// Executes one experiment and prints the final metric line to stdout.
/// Returns the run directory.
std::filesystem::path run(const RunOptions& options);

/// "status=... best_epoch=... val.top1=... target.macro=... target.micro=..."
std::string final_metric_line(const trainer::RunManifest& manifest);

struct SynthOptions {
  std::filesystem::path out;
  int classes = 8;
  int per_class = 32;
  std::string shift = "benchmark";
  std::uint64_t seed = 0;
  int resolution = 64;
};

/// Writes <out>/source/<class>/*.png and <out>/target/<class>/*.png.
void synth_data(const SynthOptions& options);

}  // namespace simuda::cli
