#include "s2g/sample_batch.hpp"

#include <cmath>

#include "s2g/error.hpp"

namespace s2g {

SampleBatch SampleBatch::with_label(int label) const {
  std::vector<double> data;
  SampleBatch out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (labels[i] != label) continue;
    const auto r = points.row(i);
    data.insert(data.end(), r.begin(), r.end());
    out.labels.push_back(label);
  }
  out.points = Matrix(out.labels.size(), dim(), std::move(data));
  out.provenance = provenance;
  return out;
}

std::vector<double> SampleBatch::column(std::size_t d) const {
  if (d >= dim()) throw DimensionError("SampleBatch::column: out of range");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = points(i, d);
  return out;
}

void SampleBatch::validate(std::size_t num_classes) const {
  if (labels.size() != points.rows())
    throw DimensionError("SampleBatch: label count differs from point count");
  if (!all_finite(points.data()))
    throw ValueError("SampleBatch: non-finite point");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
      throw ValueError("SampleBatch: label " + std::to_string(l) +
                       " outside [0, " + std::to_string(num_classes) + ")");
}

SampleBatch SampleBatch::concat(const std::vector<SampleBatch>& parts) {
  SampleBatch out;
  if (parts.empty()) return out;
  const std::size_t dim = parts.front().dim();
  std::vector<double> data;
  for (const auto& p : parts) {
    if (p.dim() != dim) throw DimensionError("SampleBatch::concat: dim mismatch");
    data.insert(data.end(), p.points.data().begin(), p.points.data().end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  out.points = Matrix(out.labels.size(), dim, std::move(data));
  out.provenance = parts.front().provenance;
  return out;
}

}  // namespace s2g
