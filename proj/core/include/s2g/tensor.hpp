#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace s2g {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// Every reduction in this header sums left to right over the contracted
/// index, so results do not depend on vector width or build flags.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  /// Like the data constructor but rejects NaN/Inf entries.
  static Matrix checked(std::size_t rows, std::size_t cols,
                        std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  Matrix transposed() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool all_finite(std::span<const double> values) noexcept;

Vector matvec(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);

Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> a, double s);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a) noexcept;
double mean(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

namespace kernels {

/// out[n][o] = bias[o] + sum_k in[n][k] * w[k][o]; w is (in_dim x out_dim)
/// row-major. The k sum runs left to right; SIMD only spans o.
void affine_rows(std::span<const double> in, std::size_t n,
                 std::size_t in_dim, std::span<const double> w,
                 std::span<const double> bias, std::span<double> out,
                 std::size_t out_dim);

/// grad_in[n][k] = sum_o grad_out[n][o] * w[k][o], using w_t (out x in),
/// the transpose of w. Overwrites grad_in.
void affine_backward_input(std::span<const double> grad_out, std::size_t n,
                           std::size_t out_dim, std::span<const double> w_t,
                           std::span<double> grad_in, std::size_t in_dim);

/// grad_w[k][o] += sum_n in[n][k] * grad_out[n][o];
/// grad_b[o] += sum_n grad_out[n][o]. Row n accumulates in order.
void affine_backward_params(std::span<const double> in,
                            std::span<const double> grad_out, std::size_t n,
                            std::size_t in_dim, std::size_t out_dim,
                            std::span<double> grad_w,
                            std::span<double> grad_b);

/// out[i] = 1 / (1 + exp(-in[i])) with a branch-free exp (Cody-Waite
/// reduction and a degree-12 Taylor polynomial, relative error below 4e-16).
/// Every element takes the same arithmetic path, so the result of an entry
/// does not depend on its position or on vectorization.
void sigmoid(std::span<const double> in, std::span<double> out);
}  // namespace kernels

}  // namespace s2g
