#pragma once

// Random instance generators and brute-force oracles shared by the unit and
// acceptance suites. Oracles deliberately avoid the library's contraction and
// unfolding code paths.

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "tssr/tssr.hpp"

namespace tssr::testing {

using Rng = std::mt19937_64;

inline Tensor random_tensor(Rng& rng, const Shape& shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> d(shape_size(shape));
  for (auto& v : d) v = dist(rng);
  return Tensor(shape, std::move(d));
}

inline Shape random_shape(Rng& rng, std::size_t order, std::size_t max_mode) {
  std::uniform_int_distribution<std::size_t> dist(1, max_mode);
  Shape s(order);
  for (auto& m : s) m = dist(rng);
  return s;
}

inline Tensor counting_tensor(const Shape& shape) {
  std::vector<double> d(shape_size(shape));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(i + 1);
  return Tensor(shape, std::move(d));
}

/// Naive row-by-column product of two matrices stored as order-2 tensors.
inline std::vector<std::vector<double>> naive_matmul(const Tensor& a, const Tensor& b) {
  const auto n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  std::vector<std::vector<double>> c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < k; ++l) c[i][j] += a.at({i, l}) * b.at({l, j});
  return c;
}

/// Direct multi-index summation of sum_{j..} a[i.., j..] x[j..], enumerating
/// index tuples through Tensor::at rather than flat offsets.
inline std::vector<double> direct_contract(const Tensor& a, const Tensor& x) {
  const std::size_t lead = a.order() - x.order();
  Shape lead_shape(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(lead));
  std::vector<double> out;
  std::vector<std::size_t> i(lead, 0);
  const std::size_t rows = shape_size(lead_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    std::vector<std::size_t> j(x.order(), 0);
    for (std::size_t c = 0; c < x.size(); ++c) {
      std::vector<std::size_t> full = i;
      full.insert(full.end(), j.begin(), j.end());
      s += a.at(full) * x.at(j);
      for (std::size_t k = j.size(); k-- > 0;) {
        if (++j[k] < x.shape()[k]) break;
        j[k] = 0;
      }
    }
    out.push_back(s);
    for (std::size_t k = i.size(); k-- > 0;) {
      if (++i[k] < lead_shape[k]) break;
      i[k] = 0;
    }
  }
  return out;
}

/// Dominant eigenvalue magnitude of a symmetric matrix via power iteration on
/// m^T m (returns sqrt of its dominant eigenvalue).
inline double power_iteration_radius(const Matrix& m, int iterations = 5000) {
  const Matrix g = m.transpose() * m;
  Vector v = Vector::Ones(m.cols());
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Vector w = g * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    lambda = v.dot(w) / v.dot(v);
    v = w / n;
  }
  return std::sqrt(lambda);
}

/// Dimension of the span of the states reachable from 0 within `steps` steps,
/// found by Gram-Schmidt over the responses to unit input pulses.
inline std::size_t reachable_dimension(const Matrix& A, const Matrix& B, std::size_t steps, double tol = 1e-9) {
  std::vector<Vector> basis;
  auto add = [&](Vector v) {
    const double scale = std::max(1.0, v.norm());
    for (const auto& b : basis) v -= b.dot(v) * b;
    for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > tol * scale) basis.push_back(v.normalized());
  };
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    Vector x = Vector::Zero(A.rows());
    Vector pulse = B.col(j);
    x = pulse;  // state after one step with input e_j at step 0
    for (std::size_t s = 0; s < steps; ++s) {
      add(x);
      x = A * x;
    }
  }
  return basis.size();
}

/// Random discrete system whose unfolded A has spectral radius `radius`.
inline Tensor random_scaled_operator(Rng& rng, const Shape& state_shape, double radius) {
  Tensor a = random_tensor(rng, concat(state_shape, state_shape));
  const double rho = spectral_radius(to_matrix(unfold(a, state_shape.size())));
  return (radius / rho) * a;
}

/// The r = 1 system acting on vec'd states and inputs with the unfolded
/// coefficient matrices.
inline TssrSystem unfolded_twin(const TssrSystem& s) {
  SystemDescriptor d;
  d.time = s.time_kind();
  d.state_shape = {s.state_dim()};
  if (s.has_input()) d.input_shape = Shape{s.input_dim()};
  if (s.has_output_map()) d.output_shape = Shape{s.output_dim()};
  for (const auto& seg : s.schedule()) {
    const auto u = unfold_coefficients(s, seg.coefficients);
    CoefficientSet c{from_matrix(u.A), std::nullopt, std::nullopt, std::nullopt};
    if (u.B) c.B = from_matrix(*u.B);
    if (u.C) c.C = from_matrix(*u.C);
    if (u.D) c.D = from_matrix(*u.D);
    d.schedule.push_back({seg.start, std::move(c)});
  }
  return build_system(std::move(d));
}

inline InputSignal vec_signal(const InputSignal& u) {
  if (u.kind() == InputSignal::Kind::zero) return u;
  if (u.kind() == InputSignal::Kind::constant) return InputSignal::constant(vec(u.samples().front().second));
  std::vector<std::pair<double, Tensor>> s;
  for (const auto& [k, v] : u.samples()) s.emplace_back(k, vec(v));
  return InputSignal::table(std::move(s));
}

/// Random continuous-time matrix whose eigenvalues all have real part <= -0.5.
inline Matrix random_hurwitz(Rng& rng, std::size_t q) {
  Matrix a = to_matrix(random_tensor(rng, {q, q}));
  Eigen::EigenSolver<Matrix> es(a, false);
  double re = -1e300;
  for (Eigen::Index i = 0; i < a.rows(); ++i) re = std::max(re, es.eigenvalues()(i).real());
  return a - (re + 0.5) * Matrix::Identity(a.rows(), a.cols());
}

// Multirate states over every index 0..limit, bottom-up straight from the
// definition; no recursion and no memo.
inline std::vector<std::vector<double>> brute_force(const Matrix& A, const std::optional<Matrix>& B,
                                                    const std::vector<StepIndex>& clocks,
                                                    const ProcessFunction& boundary, const ProcessFunction& input,
                                                    StepIndex limit) {
  StepIndex d = 1;
  for (auto c : clocks) d = std::lcm(d, c);
  const std::size_t M = clocks.size();
  std::vector<std::vector<double>> x(M, std::vector<double>(static_cast<std::size_t>(limit) + 1));
  for (StepIndex n = 0; n <= limit; ++n) {
    for (std::size_t i = 0; i < M; ++i) {
      double v;
      if (n > 0 && n % d == 0) {
        v = 0.0;
        for (std::size_t j = 0; j < M; ++j) v += A(i, j) * x[j][static_cast<std::size_t>(n / clocks[j])];
        if (B) {
          for (std::size_t j = 0; j < M; ++j) v += (*B)(i, j) * *input(j, n / clocks[j]);
        }
      } else {
        v = *boundary(i, n);
      }
      x[i][static_cast<std::size_t>(n)] = v;
    }
  }
  return x;
}

}  // namespace tssr::testing
