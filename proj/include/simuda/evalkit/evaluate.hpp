#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "simuda/backbone/model.hpp"
#include "simuda/datakit/dataset.hpp"

namespace simuda::evalkit {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Top-1 evaluation summary. Accuracies are percentages. A class with no
/// samples has NaN accuracy and is left out of the macro mean.
struct EvalReport {
  std::string label;   // method label used as the table row name
  std::string status;  // empty for completed runs
  std::vector<std::string> class_names;
  std::vector<double> per_class_top1;
  double macro_mean = 0.0;
  double micro_accuracy = 0.0;
  CountMatrix confusion;  // [true, predicted]
  std::size_t n_samples = 0;

  int num_classes() const { return static_cast<int>(class_names.size()); }
};

/// Builds the report from parallel label/prediction lists.
EvalReport report_from_predictions(const std::vector<std::string>& class_names, const std::vector<int>& labels,
                                   const std::vector<int>& predictions);

/// Rebuilds a report from stored confusion counts.
EvalReport report_from_confusion(const std::vector<std::string>& class_names, const CountMatrix& confusion);

/// Scores every sample once with the eval policy (resize + normalize).
/// Throws ConfigError when the dataset and model class counts differ.
EvalReport evaluate(backbone::ClassifierModel& model, const datakit::DomainDataset& dataset, std::size_t batch,
                    int workers = 1);

/// Argmax of each logits row; ties go to the lowest index.
std::vector<int> argmax_rows(const nn::Matrix<float>& logits);

enum class NormalizeMode { row };

/// Row-normalized confusion. Rows without samples are filled with NaN and
/// listed in `empty_rows`.
struct NormalizedConfusion {
  RealMatrix values;
  std::vector<int> empty_rows;
};

NormalizedConfusion confusion_normalized(const EvalReport& report, NormalizeMode mode = NormalizeMode::row);

}  // namespace simuda::evalkit
