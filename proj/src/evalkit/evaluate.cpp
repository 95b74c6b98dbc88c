#include "simuda/evalkit/evaluate.hpp"

#include <cmath>
#include <limits>

#include "simuda/core/errors.hpp"
#include "simuda/datakit/augment.hpp"
#include "simuda/datakit/loader.hpp"

namespace simuda::evalkit {

EvalReport report_from_confusion(const std::vector<std::string>& class_names, const CountMatrix& confusion) {
  const auto C = static_cast<Eigen::Index>(class_names.size());
  if (confusion.rows() != C || confusion.cols() != C) throw ShapeError("confusion matrix does not match the class list");
  std::vector<int> labels;
  std::vector<int> predictions;
  for (Eigen::Index i = 0; i < C; ++i) {
    for (Eigen::Index j = 0; j < C; ++j) {
      if (confusion(i, j) < 0) throw ContractError("negative confusion count");
      labels.insert(labels.end(), static_cast<std::size_t>(confusion(i, j)), static_cast<int>(i));
      predictions.insert(predictions.end(), static_cast<std::size_t>(confusion(i, j)), static_cast<int>(j));
    }
  }
  return report_from_predictions(class_names, labels, predictions);
}

EvalReport report_from_predictions(const std::vector<std::string>& class_names, const std::vector<int>& labels,
                                   const std::vector<int>& predictions) {
  if (labels.size() != predictions.size()) throw ShapeError("labels and predictions differ in length");
  const int C = static_cast<int>(class_names.size());
  EvalReport r;
  r.class_names = class_names;
  r.confusion = CountMatrix::Zero(C, C);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || y >= C || p < 0 || p >= C) throw ContractError("label or prediction outside [0, C)");
    ++r.confusion(y, p);
  }
  r.n_samples = labels.size();
  r.per_class_top1.assign(static_cast<std::size_t>(C), std::numeric_limits<double>::quiet_NaN());
  double macro_sum = 0.0;
  int non_empty = 0;
  std::int64_t correct = 0;
  for (int j = 0; j < C; ++j) {
    const std::int64_t row = r.confusion.row(j).sum();
    correct += r.confusion(j, j);
    if (row == 0) continue;
    const double acc = 100.0 * static_cast<double>(r.confusion(j, j)) / static_cast<double>(row);
    r.per_class_top1[static_cast<std::size_t>(j)] = acc;
    macro_sum += acc;
    ++non_empty;
  }
  r.macro_mean = non_empty > 0 ? macro_sum / non_empty : std::numeric_limits<double>::quiet_NaN();
  r.micro_accuracy = r.n_samples > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(r.n_samples)
                                     : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<int> argmax_rows(const nn::Matrix<float>& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

EvalReport evaluate(backbone::ClassifierModel& model, const datakit::DomainDataset& dataset, std::size_t batch,
                    int workers) {
  if (dataset.num_classes() != model.num_classes()) {
    throw ConfigError("dataset '" + dataset.name() + "' has " + std::to_string(dataset.num_classes()) +
                      " classes, model head has " + std::to_string(model.num_classes()));
  }
  const auto policy = datakit::AugmentationPolicy::make(datakit::AugmentKind::eval, model.spec().resolution);
  std::vector<int> labels;
  std::vector<int> predictions;
  labels.reserve(dataset.size());
  predictions.reserve(dataset.size());
  for (const auto& idx : datakit::sequential_batches(dataset.size(), batch)) {
    const auto images = datakit::make_images(dataset, idx, policy, 0, 0, workers);
    const auto out = model.forward(images, false);
    const auto pred = argmax_rows(out.logits);
    predictions.insert(predictions.end(), pred.begin(), pred.end());
    const auto y = datakit::batch_labels(dataset, idx);
    labels.insert(labels.end(), y.begin(), y.end());
  }
  return report_from_predictions(dataset.class_names(), labels, predictions);
}

NormalizedConfusion confusion_normalized(const EvalReport& report, NormalizeMode) {
  const auto C = report.confusion.rows();
  NormalizedConfusion out;
  out.values = RealMatrix::Zero(C, C);
  for (Eigen::Index i = 0; i < C; ++i) {
    const std::int64_t row = report.confusion.row(i).sum();
    if (row == 0) {
      out.values.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
      out.empty_rows.push_back(static_cast<int>(i));
      continue;
    }
    for (Eigen::Index j = 0; j < C; ++j) {
      out.values(i, j) = static_cast<double>(report.confusion(i, j)) / static_cast<double>(row);
    }
  }
  return out;
}

}  // namespace simuda::evalkit
