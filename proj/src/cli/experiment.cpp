#include "simuda/cli/experiment.hpp"

#include <cstdio>
#include <iostream>

#include "simuda/datakit/synthetic.hpp"
#include "simuda/trainer/trainer.hpp"

namespace simuda::cli {

namespace {

std::string metric(const std::map<std::string, double>& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", it->second);
  return buf;
}

}  // namespace

trainer::TrainConfig resolve_run_config(const RunOptions& options) {
  auto doc = KeyValueDoc::load(options.config_path);
  if (options.seed) doc.set("run.seed", Value::integer(static_cast<std::int64_t>(*options.seed)));
  if (options.deterministic) doc.set("run.deterministic", Value::boolean(*options.deterministic));
  if (options.workers) doc.set("run.workers", Value::integer(*options.workers));
  return trainer::TrainConfig::from_doc(doc);
}

std::string final_metric_line(const trainer::RunManifest& manifest) {
  std::string line = "status=" + manifest.status;
  if (manifest.best_epoch) {
    const auto& best = manifest.epochs.at(static_cast<std::size_t>(*manifest.best_epoch - 1));
    line += " best_epoch=" + std::to_string(best.epoch) + " val.top1=" + metric(best.val, "top1") +
            " target.macro=" + metric(best.target, "macro") + " target.micro=" + metric(best.target, "micro");
  }
  if (!manifest.epochs.empty()) {
    line += " final.target.macro=" + metric(manifest.epochs.back().target, "macro");
  }
  return line;
}

std::filesystem::path run(const RunOptions& options) {
  const auto config = resolve_run_config(options);
  const auto dir = options.out.value_or(std::filesystem::path("runs") / config.name);
  trainer::RunContext ctx;
  ctx.run_dir = dir;
  if (!options.quiet) ctx.log = [](const std::string& line) { std::cerr << line << "\n"; };
  const auto manifest = trainer::run_experiment(config, ctx);
  std::cout << final_metric_line(manifest) << " run_dir=" << dir.string() << std::endl;
  return dir;
}

void synth_data(const SynthOptions& options) {
  const auto shift = datakit::ShiftSpec::parse(options.shift);
  const auto pair =
      datakit::make_synthetic_pair(options.classes, options.per_class, shift, options.seed, options.resolution);
  datakit::write_folder_dataset(pair.source, options.out / "source");
  datakit::write_folder_dataset(pair.target, options.out / "target");
  std::cout << "wrote " << pair.source.size() << " source and " << pair.target.size() << " target images to "
            << options.out.string() << std::endl;
}

}  // namespace simuda::cli
