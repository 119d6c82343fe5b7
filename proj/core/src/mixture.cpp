#include "s2g/mixture.hpp"

#include <cmath>
#include <string>

#include "s2g/error.hpp"

namespace s2g {

GaussianMixture::GaussianMixture(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ValueError("GaussianMixture: no components");
  dim_ = components_.front().mean.size();
  if (dim_ != 1 && dim_ != 2)
    throw DimensionError("GaussianMixture: dim must be 1 or 2, got " +
                         std::to_string(dim_));
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const std::string where = "GaussianMixture component " + std::to_string(k);
    if (c.mean.size() != dim_ || c.variance.size() != dim_)
      throw DimensionError(where + ": inconsistent dimension");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
      throw ValueError(where + ": weight must be > 0");
    for (double v : c.variance)
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValueError(where + ": variance must be > 0");
    if (!all_finite(c.mean)) throw ValueError(where + ": non-finite mean");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValueError("GaussianMixture: weights sum to " +
                     std::to_string(total) + ", expected 1");
}

GaussianMixture GaussianMixture::conditional(std::size_t k) const {
  Component c = components_.at(k);
  c.weight = 1.0;
  return GaussianMixture({std::move(c)});
}

GaussianMixture GaussianMixture::bimodal_1d(double variance) {
  return GaussianMixture({{0.5, {-4.0}, {variance}}, {0.5, {4.0}, {variance}}});
}

GaussianMixture GaussianMixture::four_mode_2d(double variance) {
  std::vector<Component> cs;
  for (double a : {-4.0, 4.0})
    for (double b : {-4.0, 4.0}) cs.push_back({0.25, {a, b}, {variance, variance}});
  return GaussianMixture(std::move(cs));
}

GaussianMixture GaussianMixture::standard_normal(std::size_t dim) {
  return GaussianMixture({{1.0, Vector(dim, 0.0), Vector(dim, 1.0)}});
}

}  // namespace s2g
