#include "simuda/trainer/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "simuda/adapt/grl.hpp"
#include "simuda/adapt/objective.hpp"
#include "simuda/backbone/checkpoint.hpp"
#include "simuda/backbone/hub.hpp"
#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/core/random.hpp"
#include "simuda/datakit/loader.hpp"
#include "simuda/datakit/synthetic.hpp"
#include "simuda/evalkit/evaluate.hpp"
#include "simuda/nn/optim.hpp"
#include "simuda/trainer/schedule.hpp"

#ifndef SIMUDA_GIT_REVISION
#define SIMUDA_GIT_REVISION "unknown"
#endif

namespace simuda::trainer {

namespace fs = std::filesystem;
using backbone::ClassifierModel;
using datakit::DomainDataset;

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kLoaderStream = 2;
constexpr std::uint64_t kSourceAugStream = 3;
constexpr std::uint64_t kTargetAugStream = 4;
constexpr std::uint64_t kDiscriminatorStream = 5;
constexpr std::uint64_t kEmbedStream = 6;

int worker_count(const TrainConfig& c) { return c.deterministic ? 1 : c.workers; }

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

nn::FeatureMap<float> concat(const nn::FeatureMap<float>& a, const nn::FeatureMap<float>& b) {
  nn::FeatureMap<float> out(a.n + b.n, a.h, a.w, a.c);
  out.data.topRows(a.data.rows()) = a.data;
  out.data.bottomRows(b.data.rows()) = b.data;
  return out;
}

std::unique_ptr<nn::Optimizer<float>> make_optimizer(const OptimConfig& o, std::vector<nn::Parameter<float>*> params) {
  if (o.kind == OptimizerKind::sgd) return std::make_unique<nn::Sgd<float>>(std::move(params), o.momentum, o.weight_decay);
  return std::make_unique<nn::AdamW<float>>(std::move(params), o.weight_decay);
}

double top1(const nn::Matrix<float>& logits, const std::vector<int>& labels) {
  const auto pred = evalkit::argmax_rows(logits);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return 100.0 * static_cast<double>(hit) / static_cast<double>(labels.size());
}

/// Owns the run directory: config copy, manifest, metrics, checkpoints.
class RunRecorder {
 public:
  RunRecorder(const TrainConfig& config, const RunContext& ctx, const std::vector<std::string>& class_names,
              std::string init_checkpoint, int epoch_offset)
      : config_(config), ctx_(ctx) {
    fs::create_directories(ctx.run_dir / kCheckpointDir);
    write_text_atomic(ctx.run_dir / kConfigFile, config.render());
    manifest_.config_text = config.render();
    manifest_.config_hash = config.hash();
    manifest_.code_revision = code_revision();
    manifest_.seed = config.seed;
    manifest_.scheme = std::string(to_string(config.scheme));
    manifest_.method_label = config.method_label();
    manifest_.init_checkpoint = std::move(init_checkpoint);
    manifest_.epoch_offset = epoch_offset;
    manifest_.selection_metric = std::string(to_string(config.selection));
    manifest_.class_names = class_names;
    flush();
  }

  void log(const std::string& line) const {
    if (ctx_.log) ctx_.log(line);
  }

  void finish_epoch(EpochRecord rec, ClassifierModel& model, const EvalSets& eval) {
    const auto batch = static_cast<std::size_t>(config_.eval_batch);
    const int workers = worker_count(config_);
    if (eval.source_val && eval.source_val->size() > 0) {
      const auto r = evalkit::evaluate(model, *eval.source_val, batch, workers);
      rec.val["top1"] = r.micro_accuracy;
      rec.val["macro"] = r.macro_mean;
    }
    if (eval.target) {
      const auto before = eval.target->label_reads();
      const auto r = evalkit::evaluate(model, *eval.target, batch, workers);
      manifest_.target_label_reads_in_evaluation += eval.target->label_reads() - before;
      rec.target["macro"] = r.macro_mean;
      rec.target["micro"] = r.micro_accuracy;
      rec.target_per_class = r.per_class_top1;
      rec.target_confusion = r.confusion;
    }
    manifest_.target_label_reads_in_optimization += rec.target_label_reads_in_optimization;

    const std::string name = "epoch_" + std::to_string(rec.epoch) + ".ckpt";
    rec.checkpoint = std::string(kCheckpointDir) + "/" + name;
    backbone::save_checkpoint(ctx_.run_dir / rec.checkpoint, model, config_.method_label(),
                              {{"epoch", rec.epoch},
                               {"planned_epochs", config_.epochs},
                               {"seed", config_.seed},
                               {"config_hash", manifest_.config_hash}});
    manifest_.epochs.push_back(std::move(rec));

    const auto& best = select_best_record(manifest_, config_.selection);
    const std::string previous = manifest_.best_checkpoint;
    manifest_.best_epoch = best.epoch;
    manifest_.best_checkpoint = best.checkpoint;
    write_text_atomic(ctx_.run_dir / kCheckpointDir / kBestPointer,
                      fs::path(best.checkpoint).filename().string() + "\n");
    if (!config_.keep_all_checkpoints) {
      const auto& latest = manifest_.epochs.back().checkpoint;
      if (!previous.empty() && previous != best.checkpoint) fs::remove(ctx_.run_dir / previous);
      if (latest != best.checkpoint) fs::remove(ctx_.run_dir / latest);
    }
    flush();

    const auto& e = manifest_.epochs.back();
    std::string line = "epoch " + std::to_string(e.epoch) + "/" + std::to_string(config_.epochs);
    for (const auto& [k, v] : e.train) line += " train." + k + "=" + fmt(v);
    for (const auto& [k, v] : e.val) line += " val." + k + "=" + fmt(v, 2);
    for (const auto& [k, v] : e.target) line += " target." + k + "=" + fmt(v, 2);
    log(line);
  }

  void abort_unstable(int epoch, const std::string& detail) {
    manifest_.status = kStatusUnstable;
    manifest_.status_detail = "epoch " + std::to_string(epoch) + ": " + detail;
    flush();
    log("aborted-unstable: " + manifest_.status_detail);
  }

  void complete() {
    manifest_.status = kStatusCompleted;
    flush();
  }

  const RunManifest& manifest() const { return manifest_; }

 private:
  void flush() {
    write_text_atomic(ctx_.run_dir / kMetricsFile, render_metrics_csv(manifest_));
    manifest_.write(ctx_.run_dir);
  }

  const TrainConfig& config_;
  const RunContext& ctx_;
  RunManifest manifest_;
};

struct StepTotals {
  std::map<std::string, double> sums;
  int steps = 0;

  void add(const std::map<std::string, double>& m) {
    for (const auto& [k, v] : m) sums[k] += v;
    ++steps;
  }
  std::map<std::string, double> means() const {
    std::map<std::string, double> out;
    for (const auto& [k, v] : sums) out[k] = steps > 0 ? v / steps : 0.0;
    return out;
  }
};

RunManifest source_only_impl(const TrainConfig& config, ClassifierModel& model, const DomainDataset& source,
                             const EvalSets& eval, const RunContext& ctx, const std::string& init_checkpoint,
                             int epoch_offset) {
  if (config.scheme == Scheme::UDA) throw ConfigError("source-only training needs scheme CH, FT or CH_FT");
  if (source.num_classes() != model.num_classes()) {
    throw ConfigError("source has " + std::to_string(source.num_classes()) + " classes, model head has " +
                      std::to_string(model.num_classes()));
  }
  RunRecorder rec(config, ctx, source.class_names(), init_checkpoint, epoch_offset);
  const datakit::ShuffledLoader loader(source.size(), static_cast<std::size_t>(config.batch_size),
                                       derive_seed(config.seed, kLoaderStream));
  const auto steps_per_epoch = static_cast<std::int64_t>(loader.steps_per_epoch());
  const auto schedule = LrSchedule::from_config(config.optim, config.epochs, steps_per_epoch);
  const auto policy = datakit::AugmentationPolicy::make(config.augmentation, model.spec().resolution);
  const auto optimizer = make_optimizer(config.optim, model.parameters());
  const std::uint64_t aug_seed = derive_seed(config.seed, kSourceAugStream);
  const int workers = worker_count(config);

  if (ctx.probe) ctx.probe("start", model, nullptr);
  std::int64_t global_step = 0;
  std::uint64_t stream = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    StepTotals totals;
    double lr = 0.0;
    for (const auto& idx : loader.epoch(static_cast<std::size_t>(epoch - 1))) {
      const auto images = datakit::make_images(source, idx, policy, aug_seed, stream, workers);
      stream += idx.size();
      const auto labels = datakit::batch_labels(source, idx);
      optimizer->zero_grad();
      const auto out = model.forward(images, true);
      const auto ce = adapt::cross_entropy<float>(out.logits, labels);
      if (!std::isfinite(static_cast<double>(ce.loss))) {
        rec.abort_unstable(epoch, "non-finite loss at step " + std::to_string(global_step));
        if (ctx.probe) ctx.probe("end", model, nullptr);
        return rec.manifest();
      }
      model.backward({}, ce.grad);
      lr = lr_at(global_step, schedule);
      optimizer->step(lr);
      ++global_step;
      totals.add({{"loss", ce.loss}, {"ce", ce.loss}, {"top1", top1(out.logits, labels)}});
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train = totals.means();
    record.train["lr"] = lr;
    rec.finish_epoch(std::move(record), model, eval);
  }
  rec.complete();
  if (ctx.probe) ctx.probe("end", model, nullptr);
  return rec.manifest();
}

}  // namespace

std::string code_revision() { return SIMUDA_GIT_REVISION; }

Datasets load_datasets(const TrainConfig& config) {
  if (config.data.kind == "synthetic") {
    auto pair = datakit::make_synthetic_pair(config.data.synthetic_classes, config.data.synthetic_per_class,
                                             config.data.shift, config.data.synthetic_seed, config.model.resolution);
    auto split = datakit::split_holdout(pair.source, config.data.holdout_every);
    return {std::move(split.train), std::move(split.validation), std::move(pair.target)};
  }
  auto source = datakit::ingest_folder(config.data.source_root, datakit::Domain::source);
  auto target = datakit::ingest_folder(config.data.target_root, datakit::Domain::target, source.class_names());
  auto split = datakit::split_holdout(source, config.data.holdout_every);
  return {std::move(split.train), std::move(split.validation), std::move(target)};
}

fs::path resolve_checkpoint(const std::string& reference) {
  const fs::path p(reference);
  if (fs::is_directory(p)) {
    const auto pointer = p / kCheckpointDir / kBestPointer;
    if (!fs::is_regular_file(pointer)) {
      throw ConfigError("run directory '" + reference + "' has no best checkpoint pointer");
    }
    std::string name = read_text(pointer);
    while (!name.empty() && (name.back() == '\n' || name.back() == '\r')) name.pop_back();
    const auto ckpt = p / kCheckpointDir / name;
    if (!fs::is_regular_file(ckpt)) throw ConfigError("best checkpoint '" + ckpt.string() + "' is missing");
    return ckpt;
  }
  if (!fs::is_regular_file(p)) throw ConfigError("checkpoint '" + reference + "' does not exist");
  return p;
}

ClassifierModel initial_model(const TrainConfig& config, int num_classes) {
  Rng rng(derive_seed(config.seed, kInitStream));
  if (config.init_checkpoint.empty() || config.init_checkpoint == "hub") {
    ClassifierModel model = backbone::load_backbone(config.model, rng);
    model.replace_head(num_classes, rng);
    return model;
  }
  const auto ck = backbone::read_checkpoint(resolve_checkpoint(config.init_checkpoint));
  if (ck.meta.spec.resolution != config.model.resolution) {
    throw ConfigError("init checkpoint expects resolution " + std::to_string(ck.meta.spec.resolution) +
                      ", config has " + std::to_string(config.model.resolution));
  }
  ClassifierModel model = backbone::model_from_checkpoint(ck);
  if (model.num_classes() != num_classes) model.replace_head(num_classes, rng);
  return model;
}

RunManifest train_source_only(const TrainConfig& config, ClassifierModel& model, const DomainDataset& source_train,
                              const EvalSets& eval, const RunContext& ctx) {
  if (config.scheme != Scheme::CH && config.scheme != Scheme::FT) {
    throw ConfigError("train_source_only needs scheme CH or FT");
  }
  model.set_trainable(config.scheme == Scheme::CH ? backbone::TrainScheme::CH : backbone::TrainScheme::FT);
  return source_only_impl(config, model, source_train, eval, ctx, config.init_checkpoint, 0);
}

RunManifest train_ch_ft(const TrainConfig& config, const Datasets& data, const RunContext& ctx) {
  if (config.scheme != Scheme::CH_FT) throw ConfigError("train_ch_ft needs scheme CH_FT");
  if (config.init_checkpoint.empty() || config.init_checkpoint == "hub") {
    throw ConfigError("CH_FT requires a CH checkpoint in train.init_checkpoint");
  }
  const auto path = resolve_checkpoint(config.init_checkpoint);
  const auto ck = backbone::read_checkpoint(path);
  ClassifierModel model = backbone::model_from_checkpoint(ck);
  if (model.num_classes() != data.source_train.num_classes()) {
    throw ConfigError("CH checkpoint has " + std::to_string(model.num_classes()) + " classes, data has " +
                      std::to_string(data.source_train.num_classes()));
  }
  model.set_trainable(backbone::TrainScheme::FT);
  const int offset = ck.meta.extra.value("planned_epochs", 0);
  const EvalSets eval{&data.source_val, &data.target};
  return source_only_impl(config, model, data.source_train, eval, ctx, path.string(), offset);
}

RunManifest train_uda(const TrainConfig& config, ClassifierModel& model, const DomainDataset& source,
                      const DomainDataset& target_unlabeled, const EvalSets& eval, const RunContext& ctx) {
  if (config.scheme != Scheme::UDA || !config.uda.method) throw ConfigError("train_uda needs scheme UDA and uda.method");
  if (source.num_classes() != model.num_classes() || target_unlabeled.num_classes() != model.num_classes()) {
    throw ConfigError("source, target and model class counts differ");
  }
  for (std::size_t i = 0; i < target_unlabeled.size(); ++i) {
    if (target_unlabeled.has_label(i)) throw ContractError("train_uda: the training target set must be unlabeled");
  }
  model.set_trainable(backbone::TrainScheme::FT);
  const std::string init = config.init_checkpoint.empty() || config.init_checkpoint == "hub"
                               ? std::string("hub")
                               : resolve_checkpoint(config.init_checkpoint).string();
  RunRecorder rec(config, ctx, source.class_names(), init, 0);

  const int C = model.num_classes();
  const adapt::JointEmbedder<float> embedder(model.feature_dim(), C, derive_seed(config.seed, kEmbedStream),
                                             config.uda.random_dim);
  adapt::DomainDiscriminator<float> discriminator(embedder.output_dim(), config.uda.discriminator_hidden);
  {
    Rng drng(derive_seed(config.seed, kDiscriminatorStream));
    discriminator.reset(drng);
  }

  const datakit::PairedLoader loader(source.size(), target_unlabeled.size(), static_cast<std::size_t>(config.batch_size),
                                     derive_seed(config.seed, kLoaderStream));
  const auto steps_per_epoch = static_cast<std::int64_t>(loader.steps_per_epoch());
  const auto schedule = LrSchedule::from_config(config.optim, config.epochs, steps_per_epoch);
  auto params = model.parameters();
  for (auto* p : discriminator.parameters()) params.push_back(p);
  const auto optimizer = make_optimizer(config.optim, params);
  const auto policy = datakit::AugmentationPolicy::make(config.augmentation, model.spec().resolution);
  const std::uint64_t source_seed = derive_seed(config.seed, kSourceAugStream);
  const std::uint64_t target_seed = derive_seed(config.seed, kTargetAugStream);
  const int workers = worker_count(config);

  adapt::GrlSchedule grl;
  grl.gamma = config.uda.grl_gamma;
  grl.lo = config.uda.grl_lo;
  grl.hi = config.uda.grl_hi;
  grl.max_steps = steps_per_epoch * config.epochs;
  const adapt::UdaWeights weights{config.uda.cdan_weight, config.uda.mcc_weight};
  const adapt::MccConfig mcc{config.uda.mcc_temperature};

  if (ctx.probe) ctx.probe("start", model, &discriminator);
  std::int64_t global_step = 0;
  std::uint64_t stream = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    StepTotals totals;
    double lr = 0.0;
    double lambda = 0.0;
    const std::uint64_t reads_before = eval.target ? eval.target->label_reads() : 0;
    for (const auto& pair : loader.epoch(static_cast<std::size_t>(epoch - 1))) {
      const auto xs = datakit::make_images(source, pair.source, policy, source_seed, stream, workers);
      const auto xt = datakit::make_images(target_unlabeled, pair.target, policy, target_seed, stream, workers);
      stream += pair.source.size();
      const auto ys = datakit::batch_labels(source, pair.source);
      const auto B = static_cast<Eigen::Index>(pair.source.size());

      optimizer->zero_grad();
      const auto out = model.forward(concat(xs, xt), true);
      const nn::Matrix<float> fs_ = out.features.topRows(B);
      const nn::Matrix<float> ft_ = out.features.bottomRows(B);
      const nn::Matrix<float> zs = out.logits.topRows(B);
      const nn::Matrix<float> zt = out.logits.bottomRows(B);
      lambda = adapt::grl_lambda(grl);
      const adapt::AdversarialHead<float> head{&discriminator, &embedder, lambda, config.uda.entropy_conditioning};
      const auto res = adapt::uda_objective<float>(fs_, zs, ys, ft_, zt, *config.uda.method, head, weights, mcc);
      if (!std::isfinite(res.terms.total)) {
        rec.abort_unstable(epoch, "non-finite loss at step " + std::to_string(global_step));
        if (ctx.probe) ctx.probe("end", model, &discriminator);
        return rec.manifest();
      }
      nn::Matrix<float> dF(2 * B, out.features.cols());
      dF.topRows(B) = res.grad_source_features;
      dF.bottomRows(B) = res.grad_target_features;
      nn::Matrix<float> dZ(2 * B, out.logits.cols());
      dZ.topRows(B) = res.grad_source_logits;
      dZ.bottomRows(B) = res.grad_target_logits;
      model.backward(dF, dZ);
      lr = lr_at(global_step, schedule);
      optimizer->step(lr);
      grl.advance();
      ++global_step;
      totals.add({{"loss", res.terms.total},
                  {"ce", res.terms.ce},
                  {"cdan", res.terms.cdan},
                  {"mcc", res.terms.mcc},
                  {"top1", top1(zs, ys)}});
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train = totals.means();
    record.train["lr"] = lr;
    record.train["grl_lambda"] = lambda;
    record.target_label_reads_in_optimization =
        (eval.target ? eval.target->label_reads() - reads_before : 0) + target_unlabeled.label_reads();
    rec.finish_epoch(std::move(record), model, eval);
  }
  rec.complete();
  if (ctx.probe) ctx.probe("end", model, &discriminator);
  return rec.manifest();
}

RunManifest run_experiment(const TrainConfig& config, const RunContext& ctx) {
  config.validate();
  const Datasets data = load_datasets(config);
  const EvalSets eval{&data.source_val, &data.target};
  const int C = data.source_train.num_classes();
  switch (config.scheme) {
    case Scheme::CH:
    case Scheme::FT: {
      ClassifierModel model = initial_model(config, C);
      return train_source_only(config, model, data.source_train, eval, ctx);
    }
    case Scheme::CH_FT:
      return train_ch_ft(config, data, ctx);
    case Scheme::UDA: {
      ClassifierModel model = initial_model(config, C);
      const DomainDataset target_unlabeled = data.target.without_labels();
      return train_uda(config, model, data.source_train, target_unlabeled, eval, ctx);
    }
  }
  throw ConfigError("unhandled scheme");
}

}  // namespace simuda::trainer
