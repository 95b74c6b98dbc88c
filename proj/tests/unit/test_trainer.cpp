#include <cstring>

#include "doctest.h"
#include "schedule_oracle.hpp"
#include "simuda/backbone/checkpoint.hpp"
#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/trainer/trainer.hpp"
#include "support.hpp"

using namespace simuda;
using namespace simuda::trainer;

namespace {

TrainConfig small(Scheme scheme) {
  auto c = TrainConfig::defaults_for(scheme);
  c.data.synthetic_classes = 4;
  c.data.synthetic_per_class = 12;
  c.model = backbone::BackboneSpec::compact(16, 32);
  c.epochs = 2;
  c.optim.warmup_epochs = scheme == Scheme::CH ? 0.0 : 0.2;
  c.batch_size = 8;
  c.eval_batch = 32;
  c.augmentation = datakit::AugmentKind::base;
  c.uda.discriminator_hidden = 32;
  if (scheme != Scheme::CH) c.optim.lr = 1e-3;
  return c;
}

using Snapshot = std::vector<nn::Matrix<float>>;

template <typename Params>
Snapshot snapshot(const Params& params) {
  Snapshot out;
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

bool bitwise_equal(const Snapshot& a, const Snapshot& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    if (std::memcmp(a[i].data(), b[i].data(), sizeof(float) * a[i].size()) != 0) return false;
  }
  return true;
}

Snapshot feature_values(const backbone::ClassifierModel& m) {
  auto all = m.parameters();
  all.resize(all.size() - 2);  // head weight and bias come last
  return snapshot(all);
}

}  // namespace

TEST_CASE("scheduler oracle") {
  const auto r = oracle::check_scheduler();
  INFO(r.detail);
  CHECK(r.ok);
  LrSchedule none;
  none.kind = SchedulerKind::none;
  none.lr_max = 0.1;
  CHECK(lr_at(0, none) == 0.1);
  CHECK(lr_at(1000, none) == 0.1);
  OptimConfig o;
  o.warmup_epochs = 2;
  const auto s = LrSchedule::from_config(o, 20, 50);
  CHECK(s.warmup_steps == 100);
  CHECK(s.total_steps == 1000);
}

TEST_CASE("config defaults, round trip and validation") {
  const auto ft = TrainConfig::defaults_for(Scheme::FT);
  CHECK(ft.seed == 42);
  CHECK(ft.optim.warmup_epochs == doctest::Approx(0.1 * ft.epochs));
  const auto doc = small(Scheme::UDA).to_doc();
  const auto again = TrainConfig::from_doc(KeyValueDoc::parse(doc.render()));
  CHECK(again.render() == doc.render());
  again.validate();

  auto ch = small(Scheme::CH);
  ch.validate();
  ch.optim.scheduler = SchedulerKind::warmup_cosine;
  CHECK_THROWS_AS(ch.validate(), ConfigError);
  auto uda = small(Scheme::UDA);
  uda.uda.method.reset();
  CHECK_THROWS_AS(uda.validate(), ConfigError);
  auto chft = small(Scheme::CH_FT);
  CHECK_THROWS_AS(chft.validate(), ConfigError);

  CHECK_THROWS_AS(TrainConfig::from_doc(KeyValueDoc::parse("run.scheme = \"FT\"\noptim.lrr = 1.0\n")), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_doc(KeyValueDoc::parse("run.scheme = \"XX\"\n")), ConfigError);
  const auto parsed = TrainConfig::from_doc(KeyValueDoc::parse("run.scheme = \"FT\"\ntrain.epochs = 30\n"));
  CHECK(parsed.optim.warmup_epochs == doctest::Approx(3.0));
  CHECK(small(Scheme::UDA).method_label() == "UDA cdan_mcc (hub)");
}

TEST_CASE("best-epoch selection") {
  RunManifest m;
  for (double v : {70.0, 80.0, 75.0}) {
    EpochRecord r;
    r.epoch = static_cast<int>(m.epochs.size()) + 1;
    r.val["top1"] = v;
    m.epochs.push_back(r);
  }
  CHECK(select_best_record(m, SelectionMetric::val_top1).epoch == 2);
  m.epochs[2].val["top1"] = 80.0;
  m.epochs.resize(2);
  m.epochs[0].val["top1"] = 80.0;
  CHECK(select_best_record(m, SelectionMetric::val_top1).epoch == 1);
  CHECK_THROWS_AS(select_best_record(RunManifest{}, SelectionMetric::val_top1), StateError);
}

TEST_CASE("CH keeps the backbone frozen") {
  testing::TempDir dir("ch");
  Snapshot start, end, head_start, head_end;
  RunContext ctx{dir / "run", {}, [&](const std::string& phase, const backbone::ClassifierModel& m, const auto*) {
                   (phase == "start" ? start : end) = feature_values(m);
                   auto all = m.parameters();
                   (phase == "start" ? head_start : head_end) = snapshot(std::vector(all.end() - 2, all.end()));
                 }};
  const auto manifest = run_experiment(small(Scheme::CH), ctx);
  CHECK(manifest.status == kStatusCompleted);
  REQUIRE(!start.empty());
  CHECK(bitwise_equal(start, end));
  CHECK_FALSE(bitwise_equal(head_start, head_end));
  CHECK(std::filesystem::exists(dir / "run/checkpoints/epoch_2.ckpt"));
  CHECK(std::filesystem::exists(dir / "run/metrics.csv"));
  CHECK(RunManifest::load(dir / "run").epochs.size() == 2);
}

TEST_CASE("mcc leaves the discriminator untouched, cdan does not") {
  testing::TempDir dir("mcc");
  for (auto method : {adapt::UdaMethod::mcc, adapt::UdaMethod::cdan}) {
    Snapshot start, end;
    RunContext ctx{dir / std::string(adapt::to_string(method)), {},
                   [&](const std::string& phase, const backbone::ClassifierModel&,
                       const adapt::DomainDiscriminator<float>* d) {
                     REQUIRE(d != nullptr);
                     (phase == "start" ? start : end) = snapshot(d->parameters());
                   }};
    auto config = small(Scheme::UDA);
    config.uda.method = method;
    const auto manifest = run_experiment(config, ctx);
    CHECK(manifest.status == kStatusCompleted);
    CHECK(bitwise_equal(start, end) == (method == adapt::UdaMethod::mcc));
  }
}

TEST_CASE("non-finite loss aborts the run as unstable") {
  testing::TempDir dir("nan");
  auto config = small(Scheme::FT);
  config.optim.kind = OptimizerKind::sgd;
  config.optim.momentum = 0.0;
  config.optim.weight_decay = 0.0;
  config.optim.lr = 1e30;
  config.epochs = 3;
  config.optim.warmup_epochs = 0.0;
  const auto manifest = run_experiment(config, {dir / "run", {}, {}});
  CHECK(manifest.status == kStatusUnstable);
  CHECK_FALSE(manifest.status_detail.empty());
  CHECK(RunManifest::load(dir / "run").status == kStatusUnstable);
}

TEST_CASE("CH-FT starts from the best CH head") {
  testing::TempDir dir("chft");
  run_experiment(small(Scheme::CH), {dir / "ch", {}, {}});
  const auto best = resolve_checkpoint((dir / "ch").string());
  const auto ck = backbone::read_checkpoint(best);

  auto config = small(Scheme::CH_FT);
  config.init_checkpoint = (dir / "ch").string();
  Snapshot start;
  RunContext ctx{dir / "ft", {}, [&](const std::string& phase, const backbone::ClassifierModel& m, const auto*) {
                   if (phase == "start") start = snapshot(m.parameters());
                 }};
  const auto manifest = run_experiment(config, ctx);
  CHECK(manifest.status == kStatusCompleted);
  CHECK(manifest.epoch_offset == 2);
  CHECK(manifest.init_checkpoint == best.string());
  const auto loaded = backbone::model_from_checkpoint(ck);
  CHECK(bitwise_equal(start, snapshot(loaded.parameters())));

  config.init_checkpoint = (dir / "nowhere").string();
  CHECK_THROWS_AS(run_experiment(config, {dir / "ft2", {}, {}}), ConfigError);
}

TEST_CASE("deterministic mode gives byte-equal metrics") {
  testing::TempDir dir("det");
  auto config = small(Scheme::UDA);
  config.workers = 4;
  run_experiment(config, {dir / "a", {}, {}});
  run_experiment(config, {dir / "b", {}, {}});
  const auto a = read_text(dir / "a/metrics.csv");
  CHECK(a == read_text(dir / "b/metrics.csv"));
  config.seed = 7;
  run_experiment(config, {dir / "c", {}, {}});
  CHECK(a != read_text(dir / "c/metrics.csv"));
}

TEST_CASE("UDA never reads target labels while optimizing") {
  testing::TempDir dir("leak");
  const auto manifest = run_experiment(small(Scheme::UDA), {dir / "run", {}, {}});
  CHECK(manifest.target_label_reads_in_optimization == 0);
  CHECK(manifest.target_label_reads_in_evaluation > 0);
  for (const auto& e : manifest.epochs) CHECK(e.target_label_reads_in_optimization == 0);

  auto config = small(Scheme::UDA);
  backbone::ClassifierModel model = initial_model(config, 4);
  const auto data = load_datasets(config);
  CHECK_THROWS_AS(train_uda(config, model, data.source_train, data.target, {}, {dir / "x", {}, {}}), ContractError);
}

TEST_CASE("seed changes augmentation but not data") {
  auto a = small(Scheme::FT);
  auto b = a;
  b.seed = 1234;
  const auto da = load_datasets(a), db = load_datasets(b);
  CHECK(da.target.class_names() == db.target.class_names());
  for (std::size_t i = 0; i < da.target.size(); i += 5) CHECK(da.target.load(i) == db.target.load(i));
}
