#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdcif/tensor.hpp"

namespace tdcif {

/// One feature vector per column.
struct LabeledVectors {
  Matrix vectors;
  std::vector<int> labels;

  std::size_t count() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return vectors.rows(); }
  void validate() const;
};

/// Vectorizes each matrix (column-major) into one column.
LabeledVectors vectorize(std::span<const Matrix> samples, std::span<const int> labels);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<int> classes;  // ascending; indexes the confusion matrix
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<int> predictions;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<double> per_run;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Builds a single-run report from true and predicted labels.
EvalReport make_report(std::span<const int> truth, std::span<const int> predicted);

/// Pools several runs: confusion counts add up, per_run lists each run's
/// accuracy, mean and (sample) stddev are taken over the sorted run list.
EvalReport aggregate(std::span<const EvalReport> runs);

/// Euclidean k-NN majority vote. Ties between classes go to the smallest
/// summed neighbour distance, then to the lowest class id.
std::vector<int> knn_predict(const LabeledVectors& train, const Matrix& test, std::size_t k);
EvalReport knn_classify(const LabeledVectors& train, const LabeledVectors& test, std::size_t k);

/// Nearest class mean; ties go to the lowest class id.
std::vector<int> nearest_centroid_predict(const LabeledVectors& train, const Matrix& test);
EvalReport nearest_centroid(const LabeledVectors& train, const LabeledVectors& test);

}  // namespace tdcif
