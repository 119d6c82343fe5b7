#pragma once

#include <cstddef>
#include <vector>

#include "s2g/tensor.hpp"

namespace s2g {

/// One diagonal-covariance Gaussian of a mixture.
struct Component {
  double weight = 1.0;
  Vector mean;
  Vector variance;  // diagonal, data units squared
};

/// Diagonal Gaussian mixture in 1 or 2 dimensions. Weights sum to 1 within
/// 1e-12, every weight and variance entry is strictly positive.
///
/// Class k of the toy problems is component k; the unconditional law is the
/// whole mixture.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<Component> components);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Component>& components() const noexcept {
    return components_;
  }
  const Component& operator[](std::size_t k) const { return components_.at(k); }

  /// Class-conditional law p(x | c = k): component k alone with weight 1.
  GaussianMixture conditional(std::size_t k) const;

  /// Two equal modes at -4 and +4.
  static GaussianMixture bimodal_1d(double variance = 1.0);
  /// Four equal isotropic modes at (+-4, +-4), ordered (-4,-4), (-4,4),
  /// (4,-4), (4,4).
  static GaussianMixture four_mode_2d(double variance = 0.25);
  static GaussianMixture standard_normal(std::size_t dim = 1);

 private:
  std::vector<Component> components_;
  std::size_t dim_ = 0;
};

}  // namespace s2g
