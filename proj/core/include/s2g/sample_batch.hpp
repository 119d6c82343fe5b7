#pragma once

#include <string>
#include <vector>

#include "s2g/tensor.hpp"

namespace s2g {

/// Generated or ground-truth points with their class ids.
struct SampleBatch {
  Matrix points;            // n x dim
  std::vector<int> labels;  // n entries
  std::string provenance;   // manifest hash of the producing run, if any

  std::size_t size() const noexcept { return points.rows(); }
  std::size_t dim() const noexcept { return points.cols(); }

  /// Rows whose label equals `label`.
  SampleBatch with_label(int label) const;
  /// Column `d` as a vector.
  std::vector<double> column(std::size_t d) const;

  /// Checks finiteness and label < num_classes; throws ValueError.
  void validate(std::size_t num_classes) const;

  static SampleBatch concat(const std::vector<SampleBatch>& parts);
};

}  // namespace s2g
