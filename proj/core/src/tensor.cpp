#include "s2g/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "s2g/error.hpp"

namespace s2g {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size mismatch " +
                         std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_same(data_.size(), rows * cols, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_same(r.size(), cols_, "Matrix");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::checked(std::size_t rows, std::size_t cols,
                       std::vector<double> data) {
  if (!all_finite(data)) throw ValueError("Matrix: non-finite entry");
  return Matrix(rows, cols, std::move(data));
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  require_same(a.cols(), x.size(), "matvec");
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_same(a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  kernels::affine_rows(a.data(), a.rows(), a.cols(), b.data(), {},
                       out.data(), b.cols());
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(std::span<const double> a, double s) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(std::span<const double> a) noexcept {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

double mean(std::span<const double> a) {
  if (a.empty()) throw ValueError("mean: empty input");
  return sum(a) / static_cast<double>(a.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace kernels {

namespace {

// Eight doubles; element-wise IEEE arithmetic, lowered to whatever vector
// width the target has.
typedef double v8d __attribute__((vector_size(64)));

inline v8d load8(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, v8d v) { std::memcpy(p, &v, sizeof v); }

typedef std::uint64_t v8u __attribute__((vector_size(64)));

// 1 / (1 + exp(-a)) for a scalar or an 8-lane vector. exp uses Cody-Waite
// reduction and a degree-12 Taylor polynomial; adding the shifter rounds
// x log2(e) to the nearest integer n and leaves n in the low mantissa bits.
// Scalar and vector lanes run the same IEEE operations.
template <class V, class U>
inline V sigmoid_core(V a) {
  constexpr double log2e = 1.4426950408889634;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52
  V x = -a;
  x = x > 709.0 ? V{} + 709.0 : x;
  x = x < -708.0 ? V{} - 708.0 : x;
  const V t = x * log2e + shifter;
  const V n = t - shifter;
  const V r = (x - n * ln2_hi) - n * ln2_lo;
  V p = V{} + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const U bits = (__builtin_bit_cast(U, t) + 1023) << 52;
  const V scale = __builtin_bit_cast(V, bits);
  return 1.0 / (1.0 + p * scale);
}

}  // namespace

void sigmoid(std::span<const double> in, std::span<double> out) {
  const std::size_t n = in.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) store8(out.data() + i, sigmoid_core<v8d, v8u>(load8(in.data() + i)));
  for (; i < n; ++i) out[i] = sigmoid_core<double, std::uint64_t>(in[i]);
}

namespace {

// R rows x 16 outputs. Each output starts from its bias and adds the k terms
// in increasing k, exactly like a plain scalar loop would.
template <std::size_t R>
inline void affine_tile16(const double* in, std::size_t in_dim, const double* w,
                          const double* bias, double* out, std::size_t out_dim,
                          std::size_t o0) {
  v8d acc[R][2];
  for (std::size_t r = 0; r < R; ++r) {
    acc[r][0] = load8(bias + o0);
    acc[r][1] = load8(bias + o0 + 8);
  }
  for (std::size_t k = 0; k < in_dim; ++k) {
    const v8d w0 = load8(w + k * out_dim + o0);
    const v8d w1 = load8(w + k * out_dim + o0 + 8);
    for (std::size_t r = 0; r < R; ++r) {
      const double xk = in[r * in_dim + k];
      acc[r][0] += xk * w0;
      acc[r][1] += xk * w1;
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    store8(out + r * out_dim + o0, acc[r][0]);
    store8(out + r * out_dim + o0 + 8, acc[r][1]);
  }
}

inline void affine_scalar(const double* in, std::size_t in_dim, const double* w,
                          const double* bias, double* out, std::size_t out_dim,
                          std::size_t o) {
  double acc = bias[o];
  for (std::size_t k = 0; k < in_dim; ++k) acc += in[k] * w[k * out_dim + o];
  out[o] = acc;
}

template <std::size_t R>
void affine_row_group(const double* in, std::size_t in_dim, const double* w,
                      const double* bias, double* out, std::size_t out_dim) {
  std::size_t o0 = 0;
  for (; o0 + 16 <= out_dim; o0 += 16) affine_tile16<R>(in, in_dim, w, bias, out, out_dim, o0);
  for (; o0 < out_dim; ++o0)
    for (std::size_t r = 0; r < R; ++r)
      affine_scalar(in + r * in_dim, in_dim, w, bias, out + r * out_dim, out_dim, o0);
}

}  // namespace

void affine_rows(std::span<const double> in, std::size_t n,
                 std::size_t in_dim, std::span<const double> w,
                 std::span<const double> bias, std::span<double> out,
                 std::size_t out_dim) {
  thread_local std::vector<double> zeros;
  if (bias.empty()) zeros.assign(out_dim, 0.0);
  const double* bp = bias.empty() ? zeros.data() : bias.data();
  std::size_t r = 0;
  for (; r + 4 <= n; r += 4)
    affine_row_group<4>(in.data() + r * in_dim, in_dim, w.data(), bp, out.data() + r * out_dim, out_dim);
  for (; r < n; ++r)
    affine_row_group<1>(in.data() + r * in_dim, in_dim, w.data(), bp, out.data() + r * out_dim, out_dim);
}

void affine_backward_input(std::span<const double> grad_out, std::size_t n,
                           std::size_t out_dim, std::span<const double> w_t,
                           std::span<double> grad_in, std::size_t in_dim) {
  // Same contraction as the forward pass with w_t in place of w and no bias.
  affine_rows(grad_out, n, out_dim, w_t, {}, grad_in, in_dim);
}

namespace {

// grad_w rows [k0, k0 + K) x columns [o0, o0 + 16), rows of the batch added
// in order.
template <std::size_t K>
inline void param_tile16(const double* in, const double* gy, std::size_t n,
                         std::size_t in_dim, std::size_t out_dim, double* gw,
                         std::size_t k0, std::size_t o0) {
  v8d acc[K][2];
  for (std::size_t k = 0; k < K; ++k) {
    acc[k][0] = load8(gw + (k0 + k) * out_dim + o0);
    acc[k][1] = load8(gw + (k0 + k) * out_dim + o0 + 8);
  }
  for (std::size_t r = 0; r < n; ++r) {
    const v8d g0 = load8(gy + r * out_dim + o0);
    const v8d g1 = load8(gy + r * out_dim + o0 + 8);
    for (std::size_t k = 0; k < K; ++k) {
      const double xk = in[r * in_dim + k0 + k];
      acc[k][0] += xk * g0;
      acc[k][1] += xk * g1;
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    store8(gw + (k0 + k) * out_dim + o0, acc[k][0]);
    store8(gw + (k0 + k) * out_dim + o0 + 8, acc[k][1]);
  }
}

}  // namespace

void affine_backward_params(std::span<const double> in,
                            std::span<const double> grad_out, std::size_t n,
                            std::size_t in_dim, std::size_t out_dim,
                            std::span<double> grad_w,
                            std::span<double> grad_b) {
  const double* x = in.data();
  const double* gy = grad_out.data();
  double* gw = grad_w.data();
  std::size_t o0 = 0;
  for (; o0 + 16 <= out_dim; o0 += 16) {
    std::size_t k0 = 0;
    for (; k0 + 4 <= in_dim; k0 += 4) param_tile16<4>(x, gy, n, in_dim, out_dim, gw, k0, o0);
    for (; k0 < in_dim; ++k0) param_tile16<1>(x, gy, n, in_dim, out_dim, gw, k0, o0);
  }
  for (; o0 < out_dim; ++o0)
    for (std::size_t k = 0; k < in_dim; ++k) {
      double acc = gw[k * out_dim + o0];
      for (std::size_t r = 0; r < n; ++r) acc += x[r * in_dim + k] * gy[r * out_dim + o0];
      gw[k * out_dim + o0] = acc;
    }
  if (!grad_b.empty())
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t o = 0; o < out_dim; ++o) grad_b[o] += gy[r * out_dim + o];
}

}  // namespace kernels

}  // namespace s2g
