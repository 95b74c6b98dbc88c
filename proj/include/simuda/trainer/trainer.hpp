#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "simuda/adapt/discriminator.hpp"
#include "simuda/backbone/model.hpp"
#include "simuda/datakit/dataset.hpp"
#include "simuda/trainer/config.hpp"
#include "simuda/trainer/manifest.hpp"

namespace simuda::trainer {

/// Source split into train/validation plus the labeled target set.
struct Datasets {
  datakit::DomainDataset source_train;
  datakit::DomainDataset source_val;
  datakit::DomainDataset target;
};

/// Synthetic pair or folder-per-class roots, per the config's data section.
Datasets load_datasets(const TrainConfig& config);

/// Evaluation sets scored after every epoch. Either may be null.
struct EvalSets {
  const datakit::DomainDataset* source_val = nullptr;
  const datakit::DomainDataset* target = nullptr;
};

using LogFn = std::function<void(const std::string&)>;

/// Called with "start" before the first step and "end" after the last one
/// (or after an abort). The discriminator is null outside UDA.
using ProbeFn = std::function<void(const std::string& phase, const backbone::ClassifierModel& model,
                                   const adapt::DomainDiscriminator<float>* discriminator)>;

struct RunContext {
  std::filesystem::path run_dir;
  LogFn log;      // progress lines; may be empty
  ProbeFn probe;  // may be empty
};

/// CH or FT on source batches with cross-entropy only.
RunManifest train_source_only(const TrainConfig& config, backbone::ClassifierModel& model,
                              const datakit::DomainDataset& source_train, const EvalSets& eval,
                              const RunContext& ctx);

/// Loads the CH checkpoint named by config.init_checkpoint, unfreezes
/// everything and runs the FT procedure. A missing checkpoint is a
/// ConfigError.
RunManifest train_ch_ft(const TrainConfig& config, const Datasets& data, const RunContext& ctx);

/// Joint classifier + discriminator optimization on paired source/target
/// batches. `target_unlabeled` must carry no labels; `eval.target` is used
/// for reporting only and its label reads during optimization are recorded.
RunManifest train_uda(const TrainConfig& config, backbone::ClassifierModel& model,
                      const datakit::DomainDataset& source_train, const datakit::DomainDataset& target_unlabeled,
                      const EvalSets& eval, const RunContext& ctx);

/// Resolves "path/to/run" (via its best pointer) or a checkpoint file.
std::filesystem::path resolve_checkpoint(const std::string& reference);

/// Builds the model for the config's init_checkpoint and scheme.
backbone::ClassifierModel initial_model(const TrainConfig& config, int num_classes);

/// Loads data, builds the model and dispatches on the scheme.
RunManifest run_experiment(const TrainConfig& config, const RunContext& ctx);

/// Code revision baked in at build time.
std::string code_revision();

}  // namespace simuda::trainer
