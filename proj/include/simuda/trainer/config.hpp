#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "simuda/adapt/objective.hpp"
#include "simuda/backbone/model.hpp"
#include "simuda/core/keyvalue.hpp"
#include "simuda/datakit/augment.hpp"
#include "simuda/datakit/synthetic.hpp"

namespace simuda::trainer {

enum class Scheme { CH, FT, CH_FT, UDA };
enum class OptimizerKind { sgd, adamw };
enum class SchedulerKind { none, warmup_cosine };
enum class SelectionMetric { val_top1, target_macro };

std::string_view to_string(Scheme s);
std::string_view to_string(OptimizerKind k);
std::string_view to_string(SchedulerKind k);
std::string_view to_string(SelectionMetric m);
Scheme parse_scheme(std::string_view s);
OptimizerKind parse_optimizer(std::string_view s);
SchedulerKind parse_scheduler(std::string_view s);
SelectionMetric parse_selection(std::string_view s);

struct DataConfig {
  std::string kind = "synthetic";  // synthetic | folder
  std::string source_root;
  std::string target_root;
  int synthetic_classes = 8;
  int synthetic_per_class = 32;
  std::uint64_t synthetic_seed = 0;  // dataset contents; independent of the run seed
  datakit::ShiftSpec shift = datakit::ShiftSpec::benchmark();
  int holdout_every = 10;  // source validation split
};

struct OptimConfig {
  OptimizerKind kind = OptimizerKind::adamw;
  double lr = 1e-3;
  double momentum = 0.9;
  double weight_decay = 0.01;
  SchedulerKind scheduler = SchedulerKind::warmup_cosine;
  double warmup_epochs = 2.0;
};

struct UdaConfig {
  std::optional<adapt::UdaMethod> method;
  double cdan_weight = 1.0;
  double mcc_weight = 1.0;
  double mcc_temperature = 1.0;
  bool entropy_conditioning = false;
  double grl_gamma = 10.0;
  double grl_lo = 0.0;
  double grl_hi = 1.0;
  int discriminator_hidden = 1024;
  int random_dim = 1024;
};

/// Head-tuning stage used when a grid or CH_FT pipeline needs a CH checkpoint.
struct HeadStageConfig {
  double lr = 0.1;
  int epochs = 20;
};

struct TrainConfig {
  std::string name = "run";
  Scheme scheme = Scheme::FT;
  std::uint64_t seed = 42;
  bool deterministic = true;
  int workers = 1;

  DataConfig data;
  backbone::BackboneSpec model;
  OptimConfig optim;
  UdaConfig uda;
  HeadStageConfig ch;

  int epochs = 20;
  int batch_size = 32;
  int eval_batch = 128;
  datakit::AugmentKind augmentation = datakit::AugmentKind::base;
  SelectionMetric selection = SelectionMetric::val_top1;
  /// "" (none), "hub", a checkpoint file, or a run directory (its best checkpoint).
  std::string init_checkpoint;
  bool keep_all_checkpoints = true;

  /// Paper defaults for a scheme: CH -> SGD (momentum 0.9, no decay, no
  /// scheduler); FT, CH_FT, UDA -> AdamW (decay 0.01, warmup-cosine).
  static TrainConfig defaults_for(Scheme scheme);

  /// Unknown keys, wrong types, and invalid enums raise ConfigError. The
  /// scheme's defaults fill every unset field; the result is validated.
  static TrainConfig from_doc(const KeyValueDoc& doc);
  static TrainConfig load(const std::filesystem::path& path);

  /// Every field, explicitly. from_doc(to_doc()) reproduces the config.
  KeyValueDoc to_doc() const;
  std::string render() const { return to_doc().render(); }
  /// FNV-1a of the rendered resolved config, 16 hex digits.
  std::string hash() const;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  /// Row label used by reports, e.g. "FT", "CH-FT", "UDA cdan_mcc (CH)".
  std::string method_label() const;
};

/// Keys accepted by from_doc, for error messages and documentation.
const std::vector<std::string>& known_config_keys();

}  // namespace simuda::trainer
