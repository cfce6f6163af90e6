#pragma once

// Dense real tensors with row-major storage (last index fastest) and the
// multilinear operations used by the state space machinery: outer product,
// pairwise contraction, mode-grouped contraction, vec/devec and unfolding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tssr/errors.hpp"

namespace tssr {

/// Mode sizes of a tensor. An empty shape is a scalar.
using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_to_string(std::span<const std::size_t> shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

inline Shape concat(const Shape& a, const Shape& b) {
  Shape out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Immutable dense tensor of finite doubles.
class Tensor {
 public:
  /// Scalar zero.
  Tensor() : data_{0.0} {}

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto m : shape_) {
      if (m == 0) throw ShapeError("mode sizes must be >= 1, got shape " + shape_to_string(shape_));
    }
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                       shape_to_string(shape_) + " (expected " +
                       std::to_string(shape_size(shape_)) + ")");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw ValueError("non-finite entry at flat offset " + std::to_string(i));
      }
    }
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor filled(Shape shape, double v) {
    const auto n = shape_size(shape);
    return Tensor(std::move(shape), std::vector<double>(n, v));
  }
  static Tensor zeros(Shape shape) { return filled(std::move(shape), 0.0); }

  /// Identity operator on tensors of shape `half`: an order-2k tensor with
  /// I[i.., j..] = 1 iff i.. == j...
  static Tensor identity(const Shape& half) {
    const auto n = shape_size(half);
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return Tensor(concat(half, half), std::move(d));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> data() const noexcept { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }

  /// Row-major offset of a full multi-index.
  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
      throw ArgumentError("index of length " + std::to_string(index.size()) +
                          " for tensor of order " + std::to_string(order()));
    }
    std::size_t off = 0;
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (index[k] >= shape_[k]) throw ArgumentError("index out of range in mode " + std::to_string(k));
      off = off * shape_[k] + index[k];
    }
    return off;
  }

  double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

namespace detail {

// Wraps a freshly computed buffer; overflow in the computation is reported as
// OverflowError rather than the ValueError used for bad user input.
inline Tensor computed(Shape shape, std::vector<double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw OverflowError("tensor operation produced a non-finite value");
  }
  return Tensor(std::move(shape), std::move(data));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()) + " differ");
  }
}

}  // namespace detail

/// Validating constructor; same as Tensor(shape, data).
inline Tensor make_tensor(Shape shape, std::vector<double> data) {
  return Tensor(std::move(shape), std::move(data));
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] + b[i];
  return detail::computed(a.shape(), std::move(d));
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "subtract");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return detail::computed(a.shape(), std::move(d));
}

inline Tensor operator*(double s, const Tensor& a) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = s * a[i];
  return detail::computed(a.shape(), std::move(d));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double frobenius_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

/// result[i.., j..] = a[i..] * b[j..]
inline Tensor outer_product(const Tensor& a, const Tensor& b) {
  std::vector<double> d(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) d[i * b.size() + j] = a[i] * b[j];
  }
  return detail::computed(concat(a.shape(), b.shape()), std::move(d));
}

/// Sums t over the diagonal of modes `axis_a` and `axis_b`. The remaining
/// modes keep their relative order.
inline Tensor contract_pair(const Tensor& t, std::size_t axis_a, std::size_t axis_b) {
  const auto& shape = t.shape();
  if (axis_a >= shape.size() || axis_b >= shape.size()) {
    throw ArgumentError("contract_pair: axis out of range for tensor of order " +
                        std::to_string(shape.size()));
  }
  if (axis_a == axis_b) throw ArgumentError("contract_pair: axes must differ");
  if (shape[axis_a] != shape[axis_b]) {
    throw ShapeError("contract_pair: mode sizes " + std::to_string(shape[axis_a]) + " and " +
                     std::to_string(shape[axis_b]) + " differ");
  }

  std::vector<std::size_t> strides(shape.size());
  std::size_t stride = 1;
  for (std::size_t k = shape.size(); k-- > 0;) {
    strides[k] = stride;
    stride *= shape[k];
  }

  Shape out_shape;
  std::vector<std::size_t> kept_strides;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k == axis_a || k == axis_b) continue;
    out_shape.push_back(shape[k]);
    kept_strides.push_back(strides[k]);
  }

  const std::size_t diag_stride = strides[axis_a] + strides[axis_b];
  const std::size_t n = shape[axis_a];
  std::vector<double> d(shape_size(out_shape), 0.0);
  std::vector<std::size_t> idx(out_shape.size(), 0);
  for (std::size_t flat = 0; flat < d.size(); ++flat) {
    std::size_t base = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) base += idx[k] * kept_strides[k];
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += t[base + k * diag_stride];
    d[flat] = s;
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < out_shape[k]) break;
      idx[k] = 0;
    }
  }
  return detail::computed(std::move(out_shape), std::move(d));
}

/// Mode-grouped inner product: contracts the trailing order(x) modes of `a`
/// against all modes of `x`.
inline Tensor contract_last(const Tensor& a, const Tensor& x) {
  if (x.order() > a.order()) {
    throw ArgumentError("contract_last: operand order " + std::to_string(x.order()) +
                        " exceeds operator order " + std::to_string(a.order()));
  }
  const std::size_t lead = a.order() - x.order();
  if (!std::equal(x.shape().begin(), x.shape().end(), a.shape().begin() + lead)) {
    throw ShapeError("contract_last: trailing modes of " + shape_to_string(a.shape()) +
                     " do not match " + shape_to_string(x.shape()));
  }
  Shape out_shape(a.shape().begin(), a.shape().begin() + lead);
  const std::size_t rows = shape_size(out_shape);
  const std::size_t cols = x.size();
  std::vector<double> d(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += a[i * cols + j] * x[j];
    d[i] = s;
  }
  return detail::computed(std::move(out_shape), std::move(d));
}

inline Tensor vec(const Tensor& x) {
  return Tensor({x.size()}, std::vector<double>(x.data().begin(), x.data().end()));
}

inline Tensor devec(const Tensor& v, Shape shape) {
  if (v.order() != 1) throw ShapeError("devec: expected an order-1 tensor");
  if (v.size() != shape_size(shape)) {
    throw ShapeError("devec: length " + std::to_string(v.size()) + " does not fit shape " +
                     shape_to_string(shape));
  }
  return Tensor(std::move(shape), std::vector<double>(v.data().begin(), v.data().end()));
}

/// Matricization grouping the first `row_modes` modes as rows and the rest as
/// columns, both row-major.
inline Tensor unfold(const Tensor& a, std::size_t row_modes) {
  if (row_modes > a.order()) {
    throw ArgumentError("unfold: row mode count " + std::to_string(row_modes) +
                        " exceeds order " + std::to_string(a.order()));
  }
  const auto mid = a.shape().begin() + static_cast<std::ptrdiff_t>(row_modes);
  const std::size_t rows = shape_size(std::span<const std::size_t>(a.shape().begin(), mid));
  const std::size_t cols = a.size() / rows;
  return Tensor({rows, cols}, std::vector<double>(a.data().begin(), a.data().end()));
}

}  // namespace tssr
