#pragma once

// Bridges between order-2 tensors and Eigen matrices, plus the dense matrix
// exponential used by the exact continuous-time integrator.

#include <cmath>

#include <Eigen/Dense>

#include "tssr/errors.hpp"
#include "tssr/tensor.hpp"

namespace tssr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix to_matrix(const Tensor& t) {
  if (t.order() != 2) {
    throw ShapeError("expected an order-2 tensor, got shape " + shape_to_string(t.shape()));
  }
  const auto rows = static_cast<Eigen::Index>(t.shape()[0]);
  const auto cols = static_cast<Eigen::Index>(t.shape()[1]);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = t[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

inline Tensor from_matrix(const Matrix& m) {
  std::vector<double> d(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) d[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  }
  return detail::computed({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                          std::move(d));
}

/// Row-major flattening of any tensor into an Eigen vector.
inline Vector to_vector(const Tensor& t) {
  Vector v(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) v(static_cast<Eigen::Index>(i)) = t[i];
  return v;
}

inline Tensor from_vector(const Vector& v, Shape shape) {
  return detail::computed(std::move(shape), std::vector<double>(v.data(), v.data() + v.size()));
}

/// exp(m * t) by scaling and squaring: the scaled matrix has 1-norm at most
/// 1/2 and its Taylor series is summed until terms stop changing the sum.
inline Matrix matrix_exponential(const Matrix& m, double t = 1.0) {
  if (m.rows() != m.cols()) {
    throw ShapeError("matrix_exponential: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
  }
  if (!std::isfinite(t) || !m.allFinite()) throw ValueError("matrix_exponential: non-finite input");

  const Matrix a = m * t;
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = a / std::ldexp(1.0, squarings);

  const auto n = m.rows();
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * scaled / static_cast<double>(k);
    const Matrix next = result + term;
    if (next == result) break;
    result = next;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  if (!result.allFinite()) throw OverflowError("matrix_exponential overflowed");
  return result;
}

}  // namespace tssr
