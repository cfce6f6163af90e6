#pragma once

// Validated tensor state space systems:
//   X(n+1) = A(n) X(n) + B(n) U(n)      (discrete)
//   dX/dt  = A(t) X(t) + B(t) U(t)      (continuous)
//   Y      = C X + D U
// where every product is a contract_last over the state or input modes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tssr/errors.hpp"
#include "tssr/linalg.hpp"
#include "tssr/tensor.hpp"

namespace tssr {

enum class TimeKind { discrete, continuous };

inline const char* to_string(TimeKind k) { return k == TimeKind::discrete ? "discrete" : "continuous"; }

/// Coupling tensors for one schedule segment. B is absent for systems without
/// input; C absent means the output is the state itself; D absent means no
/// feedthrough.
struct CoefficientSet {
  Tensor A;
  std::optional<Tensor> B;
  std::optional<Tensor> C;
  std::optional<Tensor> D;

  bool operator==(const CoefficientSet&) const = default;
};

/// Coefficients in force from `start` (step index or time stamp) until the
/// next segment's start.
struct Segment {
  double start = 0.0;
  CoefficientSet coefficients;

  bool operator==(const Segment&) const = default;
};

struct SystemDescriptor {
  TimeKind time = TimeKind::discrete;
  Shape state_shape;
  std::optional<Shape> input_shape;
  std::optional<Shape> output_shape;
  std::vector<Segment> schedule;
};

class TssrSystem;
TssrSystem build_system(SystemDescriptor descriptor);

class TssrSystem {
 public:
  TimeKind time_kind() const noexcept { return time_; }
  const Shape& state_shape() const noexcept { return state_shape_; }
  const std::optional<Shape>& input_shape() const noexcept { return input_shape_; }
  /// Declared output shape; equals the state shape when C is absent.
  const Shape& output_shape() const noexcept { return output_shape_ ? *output_shape_ : state_shape_; }
  bool has_input() const noexcept { return input_shape_.has_value(); }
  bool has_output_map() const noexcept { return output_shape_.has_value(); }
  std::span<const Segment> schedule() const noexcept { return schedule_; }
  bool time_invariant() const noexcept { return schedule_.size() == 1; }

  std::size_t state_dim() const { return shape_size(state_shape_); }
  std::size_t input_dim() const { return input_shape_ ? shape_size(*input_shape_) : 0; }
  std::size_t output_dim() const { return shape_size(output_shape()); }

  SystemDescriptor descriptor() const {
    return {time_, state_shape_, input_shape_, output_shape_, schedule_};
  }

  bool operator==(const TssrSystem&) const = default;

 private:
  friend TssrSystem build_system(SystemDescriptor descriptor);
  TssrSystem() = default;

  TimeKind time_ = TimeKind::discrete;
  Shape state_shape_;
  std::optional<Shape> input_shape_;
  std::optional<Shape> output_shape_;
  std::vector<Segment> schedule_;
};

namespace detail {

inline void check_coefficient(const std::optional<Tensor>& t, const std::string& name,
                              const Shape& expected) {
  if (t && t->shape() != expected) {
    throw ShapeError(name + " has shape " + shape_to_string(t->shape()) + " (order " +
                     std::to_string(t->order()) + "), expected " + shape_to_string(expected) +
                     " (order " + std::to_string(expected.size()) + ")");
  }
}

}  // namespace detail

/// Validates shapes and the schedule, returning an immutable system.
inline TssrSystem build_system(SystemDescriptor descriptor) {
  auto& d = descriptor;
  if (d.schedule.empty()) throw ArgumentError("schedule must contain at least one segment");
  for (auto m : d.state_shape) {
    if (m == 0) throw ShapeError("state_shape has a zero mode size");
  }

  for (std::size_t k = 0; k < d.schedule.size(); ++k) {
    const auto& seg = d.schedule[k];
    const std::string where = "schedule[" + std::to_string(k) + "]";
    if (!std::isfinite(seg.start)) throw ArgumentError(where + ".start is not finite");
    if (k == 0 && seg.start != 0.0) throw ArgumentError("first schedule segment must start at 0");
    if (k > 0 && !(seg.start > d.schedule[k - 1].start)) {
      throw ArgumentError(where + ".start must be strictly greater than the previous start");
    }
    if (d.time == TimeKind::discrete && seg.start != std::floor(seg.start)) {
      throw ArgumentError(where + ".start must be an integer step index for a discrete system");
    }

    const auto& c = seg.coefficients;
    detail::check_coefficient(c.A, where + ".A", concat(d.state_shape, d.state_shape));

    if (d.input_shape) {
      if (!c.B) throw ShapeError(where + ".B is required when input_shape is declared");
      detail::check_coefficient(c.B, where + ".B", concat(d.state_shape, *d.input_shape));
    } else if (c.B) {
      throw ShapeError(where + ".B given but the system declares no input_shape");
    }

    if (d.output_shape) {
      if (!c.C) throw ShapeError(where + ".C is required when output_shape is declared");
      detail::check_coefficient(c.C, where + ".C", concat(*d.output_shape, d.state_shape));
    } else if (c.C) {
      throw ShapeError(where + ".C given but the system declares no output_shape");
    }

    if (c.D) {
      if (!d.output_shape || !d.input_shape) {
        throw ShapeError(where + ".D requires both C (output_shape) and B (input_shape)");
      }
      detail::check_coefficient(c.D, where + ".D", concat(*d.output_shape, *d.input_shape));
    }
  }

  TssrSystem s;
  s.time_ = d.time;
  s.state_shape_ = std::move(d.state_shape);
  s.input_shape_ = std::move(d.input_shape);
  s.output_shape_ = std::move(d.output_shape);
  s.schedule_ = std::move(d.schedule);
  return s;
}

/// Coefficients of the last segment whose start is <= `when`.
inline const CoefficientSet& coefficients_at(const TssrSystem& system, double when) {
  if (!(when >= 0.0)) throw ArgumentError("coefficients_at: time must be >= 0");
  const auto segs = system.schedule();
  auto it = std::upper_bound(segs.begin(), segs.end(), when,
                             [](double w, const Segment& s) { return w < s.start; });
  return std::prev(it)->coefficients;
}

namespace detail {

// T[(i,a),(j,b)] = M[i,j] if a == b else 0, shape [rows, cols_m, cols, cols_m].
inline Tensor lift_block(const Tensor& m, std::size_t columns) {
  const std::size_t rows = m.shape()[0];
  const std::size_t cols = m.shape()[1];
  std::vector<double> d(rows * columns * cols * columns, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t a = 0; a < columns; ++a) {
      for (std::size_t j = 0; j < cols; ++j) {
        d[((i * columns + a) * cols + j) * columns + a] = m[i * cols + j];
      }
    }
  }
  return Tensor({rows, columns, cols, columns}, std::move(d));
}

inline void require_matrix(const Tensor& t, const char* name) {
  if (t.order() != 2) {
    throw ShapeError(std::string(name) + " must be a matrix, got shape " + shape_to_string(t.shape()));
  }
}

}  // namespace detail

/// Matrix-state system Z' = A Z + B U, W = C Z + D U with Z of shape [m, M]:
/// every column of Z is driven by the same A, B, C, D.
inline TssrSystem lift_matrix_state(const Tensor& A, const std::optional<Tensor>& B,
                                    const std::optional<Tensor>& C, const std::optional<Tensor>& D,
                                    std::size_t columns, TimeKind time = TimeKind::discrete) {
  detail::require_matrix(A, "A");
  if (A.shape()[0] != A.shape()[1]) {
    throw ShapeError("A must be square, got shape " + shape_to_string(A.shape()));
  }
  if (columns < 1) throw ArgumentError("lift_matrix_state: column count must be >= 1");
  const std::size_t m = A.shape()[0];

  SystemDescriptor d;
  d.time = time;
  d.state_shape = {m, columns};
  CoefficientSet c{detail::lift_block(A, columns), std::nullopt, std::nullopt, std::nullopt};
  if (B) {
    detail::require_matrix(*B, "B");
    if (B->shape()[0] != m) throw ShapeError("B must have " + std::to_string(m) + " rows");
    d.input_shape = Shape{B->shape()[1], columns};
    c.B = detail::lift_block(*B, columns);
  }
  if (C) {
    detail::require_matrix(*C, "C");
    if (C->shape()[1] != m) throw ShapeError("C must have " + std::to_string(m) + " columns");
    d.output_shape = Shape{C->shape()[0], columns};
    c.C = detail::lift_block(*C, columns);
  }
  if (D) {
    detail::require_matrix(*D, "D");
    if (!B || !C) throw ShapeError("D requires both B and C");
    if (D->shape() != Shape{C->shape()[0], B->shape()[1]}) {
      throw ShapeError("D must have shape " + shape_to_string(Shape{C->shape()[0], B->shape()[1]}));
    }
    c.D = detail::lift_block(*D, columns);
  }
  d.schedule.push_back({0.0, std::move(c)});
  return build_system(std::move(d));
}

/// A coefficient set with every tensor unfolded to a matrix acting on vec'd
/// states and inputs: A is q x q, B is q x p', C is s' x q, D is s' x p'.
struct UnfoldedCoefficients {
  Matrix A;
  std::optional<Matrix> B;
  std::optional<Matrix> C;
  std::optional<Matrix> D;
};

inline UnfoldedCoefficients unfold_coefficients(const TssrSystem& system, const CoefficientSet& c) {
  const std::size_t r = system.state_shape().size();
  const std::size_t s = system.output_shape().size();
  UnfoldedCoefficients u{to_matrix(unfold(c.A, r)), std::nullopt, std::nullopt, std::nullopt};
  if (c.B) u.B = to_matrix(unfold(*c.B, r));
  if (c.C) u.C = to_matrix(unfold(*c.C, s));
  if (c.D) u.D = to_matrix(unfold(*c.D, s));
  return u;
}

}  // namespace tssr
