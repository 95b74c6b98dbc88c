#include "simuda/trainer/manifest.hpp"

#include <cstdio>

#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"

namespace simuda::trainer {

namespace {

using nlohmann::json;

json confusion_to_json(const evalkit::CountMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

evalkit::CountMatrix confusion_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  evalkit::CountMatrix m = evalkit::CountMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw IntegrityError("manifest confusion matrix is not square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<std::int64_t>();
  }
  return m;
}

// JSON has no NaN; empty classes are stored as null.
json reals_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(std::isnan(x) ? json(nullptr) : json(x));
  return out;
}

std::vector<double> reals_from_json(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  return out;
}

json metrics_to_json(const std::map<std::string, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = std::isfinite(v) ? json(v) : json(nullptr);
  return out;
}

std::map<std::string, double> metrics_from_json(const json& j) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

json RunManifest::to_json() const {
  json eps = json::array();
  for (const auto& e : epochs) {
    eps.push_back({{"epoch", e.epoch},
                   {"train", metrics_to_json(e.train)},
                   {"val", metrics_to_json(e.val)},
                   {"target", metrics_to_json(e.target)},
                   {"target_per_class", reals_to_json(e.target_per_class)},
                   {"target_confusion", confusion_to_json(e.target_confusion)},
                   {"checkpoint", e.checkpoint},
                   {"target_label_reads_in_optimization", e.target_label_reads_in_optimization}});
  }
  return {{"config", config_text},
          {"config_hash", config_hash},
          {"code_revision", code_revision},
          {"seed", seed},
          {"scheme", scheme},
          {"method_label", method_label},
          {"status", status},
          {"status_detail", status_detail},
          {"init_checkpoint", init_checkpoint},
          {"epoch_offset", epoch_offset},
          {"selection_metric", selection_metric},
          {"class_names", class_names},
          {"epochs", eps},
          {"best_epoch", best_epoch ? json(*best_epoch) : json(nullptr)},
          {"best_checkpoint", best_checkpoint},
          {"target_label_reads_in_optimization", target_label_reads_in_optimization},
          {"target_label_reads_in_evaluation", target_label_reads_in_evaluation}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.config_text = j.at("config").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.code_revision = j.at("code_revision").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.scheme = j.at("scheme").get<std::string>();
    m.method_label = j.at("method_label").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.status_detail = j.value("status_detail", "");
    m.init_checkpoint = j.value("init_checkpoint", "");
    m.epoch_offset = j.value("epoch_offset", 0);
    m.selection_metric = j.at("selection_metric").get<std::string>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& e : j.at("epochs")) {
      EpochRecord r;
      r.epoch = e.at("epoch").get<int>();
      r.train = metrics_from_json(e.at("train"));
      r.val = metrics_from_json(e.at("val"));
      r.target = metrics_from_json(e.at("target"));
      r.target_per_class = reals_from_json(e.at("target_per_class"));
      r.target_confusion = confusion_from_json(e.at("target_confusion"));
      r.checkpoint = e.at("checkpoint").get<std::string>();
      r.target_label_reads_in_optimization = e.at("target_label_reads_in_optimization").get<std::uint64_t>();
      m.epochs.push_back(std::move(r));
    }
    if (!j.at("best_epoch").is_null()) m.best_epoch = j.at("best_epoch").get<int>();
    m.best_checkpoint = j.value("best_checkpoint", "");
    m.target_label_reads_in_optimization = j.at("target_label_reads_in_optimization").get<std::uint64_t>();
    m.target_label_reads_in_evaluation = j.at("target_label_reads_in_evaluation").get<std::uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed manifest: ") + e.what());
  }
}

void RunManifest::write(const std::filesystem::path& run_dir) const {
  write_text_atomic(run_dir / kManifestFile, to_json().dump(2) + "\n");
}

RunManifest RunManifest::load(const std::filesystem::path& run_dir) {
  const auto path = run_dir / kManifestFile;
  if (!std::filesystem::is_regular_file(path)) throw DataError("no manifest in '" + run_dir.string() + "'");
  try {
    return from_json(json::parse(read_text(path)));
  } catch (const json::parse_error& e) {
    throw IntegrityError("manifest '" + path.string() + "': " + e.what());
  }
}

evalkit::EvalReport RunManifest::target_report(const EpochRecord& record) const {
  auto r = evalkit::report_from_confusion(class_names, record.target_confusion);
  r.label = method_label;
  if (status != kStatusCompleted) r.status = status;
  return r;
}

std::string render_metrics_csv(const RunManifest& manifest) {
  std::string out = "epoch,split,metric,value\n";
  for (const auto& e : manifest.epochs) {
    const std::string ep = std::to_string(e.epoch);
    for (const auto& [split, metrics] : {std::pair{"train", &e.train}, {"val", &e.val}, {"target", &e.target}}) {
      for (const auto& [name, v] : *metrics) out += ep + "," + split + "," + name + "," + fmt(v) + "\n";
    }
    for (std::size_t c = 0; c < e.target_per_class.size(); ++c) {
      out += ep + ",target,top1/" + manifest.class_names.at(c) + "," + fmt(e.target_per_class[c]) + "\n";
    }
  }
  return out;
}

const EpochRecord& select_best_record(const RunManifest& manifest, SelectionMetric metric) {
  if (manifest.epochs.empty()) throw StateError("cannot select a checkpoint from an empty epoch log");
  const EpochRecord* best = nullptr;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const auto& e : manifest.epochs) {
    const auto& m = metric == SelectionMetric::val_top1 ? e.val : e.target;
    const auto it = m.find(metric == SelectionMetric::val_top1 ? "top1" : "macro");
    const double v = it == m.end() || std::isnan(it->second) ? -std::numeric_limits<double>::infinity() : it->second;
    if (!best || v > best_value) {
      best = &e;
      best_value = v;
    }
  }
  return *best;
}

std::filesystem::path select_best(const RunManifest& manifest, SelectionMetric metric,
                                  const std::filesystem::path& run_dir) {
  return run_dir / select_best_record(manifest, metric).checkpoint;
}

}  // namespace simuda::trainer
