#include "simuda/trainer/config.hpp"

#include <functional>
#include <map>
#include <set>

#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"

namespace simuda::trainer {

namespace {

using datakit::ShiftSpec;

template <typename E>
E parse_enum(std::string_view s, std::initializer_list<std::pair<const char*, E>> options, const char* what) {
  std::string valid;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    valid += valid.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "' (valid: " + valid + ")");
}

int as_int(const Value& v, const std::string& key) {
  const auto i = v.as_integer(key);
  if (i < INT32_MIN || i > INT32_MAX) throw ConfigError("'" + key + "' is out of range");
  return static_cast<int>(i);
}

std::uint64_t as_u64(const Value& v, const std::string& key) {
  const auto i = v.as_integer(key);
  if (i < 0) throw ConfigError("'" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(i);
}

using Setter = std::function<void(TrainConfig&, const Value&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.name", [](TrainConfig& c, const Value& v, const std::string& k) { c.name = v.as_string(k); }},
      {"run.scheme", [](TrainConfig&, const Value&, const std::string&) {}},  // handled first
      {"run.seed", [](TrainConfig& c, const Value& v, const std::string& k) { c.seed = as_u64(v, k); }},
      {"run.deterministic",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.deterministic = v.as_boolean(k); }},
      {"run.workers", [](TrainConfig& c, const Value& v, const std::string& k) { c.workers = as_int(v, k); }},

      {"data.kind", [](TrainConfig& c, const Value& v, const std::string& k) { c.data.kind = v.as_string(k); }},
      {"data.source_root",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.data.source_root = v.as_string(k); }},
      {"data.target_root",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.data.target_root = v.as_string(k); }},
      {"data.synthetic_classes",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.data.synthetic_classes = as_int(v, k); }},
      {"data.synthetic_per_class",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.data.synthetic_per_class = as_int(v, k); }},
      {"data.synthetic_seed",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.data.synthetic_seed = as_u64(v, k); }},
      {"data.holdout_every",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.data.holdout_every = as_int(v, k); }},
      {"data.shift", [](TrainConfig&, const Value&, const std::string&) {}},  // handled with data.shift.*

      {"model.source",
       [](TrainConfig& c, const Value& v, const std::string& k) {
         c.model.source = backbone::parse_backbone_source(v.as_string(k));
       }},
      {"model.hub_id", [](TrainConfig& c, const Value& v, const std::string& k) { c.model.hub_id = v.as_string(k); }},
      {"model.resolution",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.model.resolution = as_int(v, k); }},
      {"model.feature_dim",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.model.feature_dim = as_int(v, k); }},
      {"model.pooling",
       [](TrainConfig& c, const Value& v, const std::string& k) {
         c.model.pooling = backbone::parse_pooling(v.as_string(k));
       }},

      {"optim.kind",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.optim.kind = parse_optimizer(v.as_string(k)); }},
      {"optim.lr", [](TrainConfig& c, const Value& v, const std::string& k) { c.optim.lr = v.as_real(k); }},
      {"optim.momentum", [](TrainConfig& c, const Value& v, const std::string& k) { c.optim.momentum = v.as_real(k); }},
      {"optim.weight_decay",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.optim.weight_decay = v.as_real(k); }},
      {"optim.scheduler",
       [](TrainConfig& c, const Value& v, const std::string& k) {
         c.optim.scheduler = parse_scheduler(v.as_string(k));
       }},
      {"optim.warmup_epochs",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.optim.warmup_epochs = v.as_real(k); }},

      {"train.epochs", [](TrainConfig& c, const Value& v, const std::string& k) { c.epochs = as_int(v, k); }},
      {"train.batch_size", [](TrainConfig& c, const Value& v, const std::string& k) { c.batch_size = as_int(v, k); }},
      {"train.eval_batch", [](TrainConfig& c, const Value& v, const std::string& k) { c.eval_batch = as_int(v, k); }},
      {"train.augmentation",
       [](TrainConfig& c, const Value& v, const std::string& k) {
         c.augmentation = datakit::parse_augment_kind(v.as_string(k));
       }},
      {"train.selection",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.selection = parse_selection(v.as_string(k)); }},
      {"train.init_checkpoint",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.init_checkpoint = v.as_string(k); }},
      {"train.keep_all_checkpoints",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.keep_all_checkpoints = v.as_boolean(k); }},

      {"uda.method",
       [](TrainConfig& c, const Value& v, const std::string& k) {
         const auto& s = v.as_string(k);
         if (s.empty() || s == "none") c.uda.method.reset();
         else c.uda.method = adapt::parse_uda_method(s);
       }},
      {"uda.cdan_weight", [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.cdan_weight = v.as_real(k); }},
      {"uda.mcc_weight", [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.mcc_weight = v.as_real(k); }},
      {"uda.mcc_temperature",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.mcc_temperature = v.as_real(k); }},
      {"uda.entropy_conditioning",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.entropy_conditioning = v.as_boolean(k); }},
      {"uda.grl_gamma", [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.grl_gamma = v.as_real(k); }},
      {"uda.grl_lo", [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.grl_lo = v.as_real(k); }},
      {"uda.grl_hi", [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.grl_hi = v.as_real(k); }},
      {"uda.discriminator_hidden",
       [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.discriminator_hidden = as_int(v, k); }},
      {"uda.random_dim", [](TrainConfig& c, const Value& v, const std::string& k) { c.uda.random_dim = as_int(v, k); }},

      {"ch.lr", [](TrainConfig& c, const Value& v, const std::string& k) { c.ch.lr = v.as_real(k); }},
      {"ch.epochs", [](TrainConfig& c, const Value& v, const std::string& k) { c.ch.epochs = as_int(v, k); }},
  };
  return table;
}

const std::vector<std::string> kShiftFields = {"hue_rotation", "hue_degrees", "texture",
                                               "texture_strength", "noise", "noise_sigma"};

ShiftSpec resolve_shift(const KeyValueDoc& doc) {
  ShiftSpec base = ShiftSpec::benchmark();
  if (const Value* preset = doc.find("data.shift")) base = ShiftSpec::parse(preset->as_string("data.shift"));
  const ShiftSpec over = ShiftSpec::from_doc(doc, "data.shift");
  auto has = [&](const char* f) { return doc.contains(std::string("data.shift.") + f); };
  if (has("hue_rotation")) base.hue_rotation = over.hue_rotation;
  if (has("hue_degrees")) base.hue_degrees = over.hue_degrees;
  if (has("texture")) base.texture = over.texture;
  if (has("texture_strength")) base.texture_strength = over.texture_strength;
  if (has("noise")) base.noise = over.noise;
  if (has("noise_sigma")) base.noise_sigma = over.noise_sigma;
  return base;
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::CH:
      return "CH";
    case Scheme::FT:
      return "FT";
    case Scheme::CH_FT:
      return "CH_FT";
    case Scheme::UDA:
      return "UDA";
  }
  return "?";
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adamw"; }
std::string_view to_string(SchedulerKind k) { return k == SchedulerKind::none ? "none" : "warmup_cosine"; }
std::string_view to_string(SelectionMetric m) {
  return m == SelectionMetric::val_top1 ? "val_top1" : "target_macro";
}

Scheme parse_scheme(std::string_view s) {
  return parse_enum<Scheme>(s, {{"CH", Scheme::CH}, {"FT", Scheme::FT}, {"CH_FT", Scheme::CH_FT}, {"UDA", Scheme::UDA}},
                            "scheme");
}
OptimizerKind parse_optimizer(std::string_view s) {
  return parse_enum<OptimizerKind>(s, {{"sgd", OptimizerKind::sgd}, {"adamw", OptimizerKind::adamw}}, "optimizer");
}
SchedulerKind parse_scheduler(std::string_view s) {
  return parse_enum<SchedulerKind>(s, {{"none", SchedulerKind::none}, {"warmup_cosine", SchedulerKind::warmup_cosine}},
                                   "scheduler");
}
SelectionMetric parse_selection(std::string_view s) {
  return parse_enum<SelectionMetric>(
      s, {{"val_top1", SelectionMetric::val_top1}, {"target_macro", SelectionMetric::target_macro}}, "selection metric");
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    for (const auto& f : kShiftFields) k.push_back("data.shift." + f);
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

TrainConfig TrainConfig::defaults_for(Scheme scheme) {
  TrainConfig c;
  c.scheme = scheme;
  if (scheme == Scheme::CH) {
    c.optim.kind = OptimizerKind::sgd;
    c.optim.lr = 0.1;
    c.optim.momentum = 0.9;
    c.optim.weight_decay = 0.0;
    c.optim.scheduler = SchedulerKind::none;
    c.optim.warmup_epochs = 0.0;
  } else {
    c.optim.kind = OptimizerKind::adamw;
    c.optim.lr = scheme == Scheme::UDA ? 1e-5 : 1e-3;
    c.optim.weight_decay = 0.01;
    c.optim.scheduler = SchedulerKind::warmup_cosine;
    c.optim.warmup_epochs = 0.1 * c.epochs;
  }
  if (scheme == Scheme::UDA) {
    c.augmentation = datakit::AugmentKind::augmix;
    c.uda.method = adapt::UdaMethod::cdan_mcc;
  }
  return c;
}

TrainConfig TrainConfig::from_doc(const KeyValueDoc& doc) {
  const auto& table = setters();
  for (const auto& [key, _] : doc.entries()) {
    if (table.count(key)) continue;
    if (key.rfind("data.shift.", 0) == 0 &&
        std::find(kShiftFields.begin(), kShiftFields.end(), key.substr(11)) != kShiftFields.end()) {
      continue;
    }
    throw ConfigError("unknown config key '" + key + "'");
  }
  Scheme scheme = Scheme::FT;
  if (const Value* s = doc.find("run.scheme")) scheme = parse_scheme(s->as_string("run.scheme"));
  TrainConfig c = defaults_for(scheme);
  for (const auto& [key, value] : doc.entries()) {
    if (const auto it = table.find(key); it != table.end()) it->second(c, value, key);
  }
  // Warmup follows the epoch budget unless given explicitly.
  if (!doc.contains("optim.warmup_epochs") && c.optim.scheduler == SchedulerKind::warmup_cosine) {
    c.optim.warmup_epochs = 0.1 * c.epochs;
  }
  if (!doc.contains("optim.warmup_epochs") && c.optim.scheduler == SchedulerKind::none) c.optim.warmup_epochs = 0.0;
  c.data.shift = resolve_shift(doc);
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file '" + path.string() + "' not found");
  return from_doc(KeyValueDoc::load(path));
}

KeyValueDoc TrainConfig::to_doc() const {
  KeyValueDoc d;
  d.set("run.name", Value::string(name));
  d.set("run.scheme", Value::string(std::string(to_string(scheme))));
  d.set("run.seed", Value::integer(static_cast<std::int64_t>(seed)));
  d.set("run.deterministic", Value::boolean(deterministic));
  d.set("run.workers", Value::integer(workers));

  d.set("data.kind", Value::string(data.kind));
  d.set("data.source_root", Value::string(data.source_root));
  d.set("data.target_root", Value::string(data.target_root));
  d.set("data.synthetic_classes", Value::integer(data.synthetic_classes));
  d.set("data.synthetic_per_class", Value::integer(data.synthetic_per_class));
  d.set("data.synthetic_seed", Value::integer(static_cast<std::int64_t>(data.synthetic_seed)));
  d.set("data.holdout_every", Value::integer(data.holdout_every));
  d.set("data.shift", Value::string("identity"));
  data.shift.to_doc(d, "data.shift");

  d.set("model.source", Value::string(std::string(backbone::to_string(model.source))));
  d.set("model.hub_id", Value::string(model.hub_id));
  d.set("model.resolution", Value::integer(model.resolution));
  d.set("model.feature_dim", Value::integer(model.feature_dim));
  d.set("model.pooling", Value::string(std::string(backbone::to_string(model.pooling))));

  d.set("optim.kind", Value::string(std::string(to_string(optim.kind))));
  d.set("optim.lr", Value::real(optim.lr));
  d.set("optim.momentum", Value::real(optim.momentum));
  d.set("optim.weight_decay", Value::real(optim.weight_decay));
  d.set("optim.scheduler", Value::string(std::string(to_string(optim.scheduler))));
  d.set("optim.warmup_epochs", Value::real(optim.warmup_epochs));

  d.set("train.epochs", Value::integer(epochs));
  d.set("train.batch_size", Value::integer(batch_size));
  d.set("train.eval_batch", Value::integer(eval_batch));
  d.set("train.augmentation", Value::string(std::string(datakit::to_string(augmentation))));
  d.set("train.selection", Value::string(std::string(to_string(selection))));
  d.set("train.init_checkpoint", Value::string(init_checkpoint));
  d.set("train.keep_all_checkpoints", Value::boolean(keep_all_checkpoints));

  d.set("uda.method", Value::string(uda.method ? std::string(adapt::to_string(*uda.method)) : "none"));
  d.set("uda.cdan_weight", Value::real(uda.cdan_weight));
  d.set("uda.mcc_weight", Value::real(uda.mcc_weight));
  d.set("uda.mcc_temperature", Value::real(uda.mcc_temperature));
  d.set("uda.entropy_conditioning", Value::boolean(uda.entropy_conditioning));
  d.set("uda.grl_gamma", Value::real(uda.grl_gamma));
  d.set("uda.grl_lo", Value::real(uda.grl_lo));
  d.set("uda.grl_hi", Value::real(uda.grl_hi));
  d.set("uda.discriminator_hidden", Value::integer(uda.discriminator_hidden));
  d.set("uda.random_dim", Value::integer(uda.random_dim));

  d.set("ch.lr", Value::real(ch.lr));
  d.set("ch.epochs", Value::integer(ch.epochs));
  return d;
}

std::string TrainConfig::hash() const { return hex64(fnv1a64(render())); }

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (scheme == Scheme::CH && optim.scheduler != SchedulerKind::none) {
    fail("scheme CH requires optim.scheduler = none");
  }
  if ((scheme == Scheme::FT || scheme == Scheme::CH_FT || scheme == Scheme::UDA) &&
      optim.scheduler != SchedulerKind::warmup_cosine) {
    fail("scheme " + std::string(to_string(scheme)) + " requires optim.scheduler = warmup_cosine");
  }
  if (scheme == Scheme::UDA && !uda.method) fail("scheme UDA requires uda.method");
  if (scheme != Scheme::UDA && uda.method) fail("uda.method is only valid with scheme UDA");
  if (scheme == Scheme::CH_FT && init_checkpoint.empty()) {
    fail("scheme CH_FT requires train.init_checkpoint (a CH run directory or checkpoint)");
  }
  if (epochs < 1) fail("train.epochs must be >= 1");
  if (batch_size < 1) fail("train.batch_size must be >= 1");
  if (eval_batch < 1) fail("train.eval_batch must be >= 1");
  if (workers < 1) fail("run.workers must be >= 1");
  if (!(optim.lr > 0.0)) fail("optim.lr must be positive");
  if (optim.momentum < 0.0 || optim.momentum >= 1.0) fail("optim.momentum must lie in [0, 1)");
  if (optim.weight_decay < 0.0) fail("optim.weight_decay must be >= 0");
  if (optim.warmup_epochs < 0.0 || optim.warmup_epochs >= epochs) {
    fail("optim.warmup_epochs must lie in [0, train.epochs)");
  }
  if (data.kind != "synthetic" && data.kind != "folder") {
    fail("invalid data.kind '" + data.kind + "' (valid: synthetic, folder)");
  }
  if (data.kind == "folder" && (data.source_root.empty() || data.target_root.empty())) {
    fail("data.kind = folder requires data.source_root and data.target_root");
  }
  if (data.synthetic_classes < 2) fail("data.synthetic_classes must be >= 2");
  if (data.synthetic_per_class < 1) fail("data.synthetic_per_class must be >= 1");
  if (data.holdout_every < 2) fail("data.holdout_every must be >= 2");
  if (model.resolution < 16) fail("model.resolution must be >= 16");
  if (model.source == backbone::BackboneSource::compact && model.feature_dim < 1) {
    fail("model.feature_dim must be positive for the compact backbone");
  }
  if (model.source == backbone::BackboneSource::hub && model.hub_id.empty()) fail("model.source = hub needs model.hub_id");
  if (uda.cdan_weight < 0.0 || uda.mcc_weight < 0.0) fail("uda weights must be >= 0");
  if (!(uda.mcc_temperature > 0.0)) fail("uda.mcc_temperature must be positive");
  if (uda.grl_hi < uda.grl_lo) fail("uda.grl_hi must be >= uda.grl_lo");
  if (uda.discriminator_hidden < 1 || uda.random_dim < 1) fail("uda dimensions must be positive");
  if (!(ch.lr > 0.0) || ch.epochs < 1) fail("ch.lr must be positive and ch.epochs >= 1");
}

std::string TrainConfig::method_label() const {
  switch (scheme) {
    case Scheme::CH:
      return "CH";
    case Scheme::FT:
      return "FT";
    case Scheme::CH_FT:
      return "CH-FT";
    case Scheme::UDA: {
      std::string init = init_checkpoint.empty() || init_checkpoint == "hub" ? "hub" : "CH";
      return "UDA " + std::string(adapt::to_string(*uda.method)) + " (" + init + ")";
    }
  }
  return "?";
}

}  // namespace simuda::trainer
