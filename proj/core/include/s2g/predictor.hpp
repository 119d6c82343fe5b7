#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "s2g/tensor.hpp"

namespace s2g {

/// Class condition: a class id in [0, K) or the null token.
class ClassLabel {
 public:
  constexpr explicit ClassLabel(int id) noexcept : id_(id) {}
  static constexpr ClassLabel null() noexcept { return ClassLabel(-1); }

  constexpr bool is_null() const noexcept { return id_ < 0; }
  constexpr int id() const noexcept { return id_; }

  constexpr bool operator==(const ClassLabel&) const = default;

 private:
  int id_;
};

/// Binary drop pattern over residual blocks. Dropped blocks run as the
/// identity. At least one block is always kept.
class BlockMask {
 public:
  /// All-keep mask over `blocks` blocks.
  explicit BlockMask(std::size_t blocks);
  explicit BlockMask(std::vector<bool> keep_bits);
  static BlockMask dropping(std::size_t blocks,
                            const std::vector<std::size_t>& dropped);

  std::size_t size() const noexcept { return keep_.size(); }
  bool keeps(std::size_t block) const { return keep_.at(block); }
  std::size_t dropped_count() const noexcept { return dropped_; }
  const std::vector<bool>& keep_bits() const noexcept { return keep_; }
  std::vector<std::size_t> dropped_blocks() const;

  /// Bit j set when block j is dropped.
  std::uint64_t drop_code() const noexcept;

  bool operator==(const BlockMask& o) const noexcept { return keep_ == o.keep_; }

 private:
  std::vector<bool> keep_;
  std::size_t dropped_ = 0;
};

/// Anything that predicts the noise of x_t: the trained network or the
/// closed-form mixture oracle.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  /// Number of maskable blocks; 0 when the predictor has none.
  virtual std::size_t block_count() const = 0;

  /// Noise prediction for each row of `x` (n x dim) at timestep t.
  virtual Matrix predict(const Matrix& x, int t, ClassLabel c,
                         const BlockMask* mask = nullptr) const = 0;
};

}  // namespace s2g
