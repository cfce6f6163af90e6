#pragma once

// Trajectory generation for tensor state space systems: discrete iteration,
// the discrete closed-form solution, and continuous-time integration with
// either classical RK4 or the exact augmented-exponential propagator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tssr/errors.hpp"
#include "tssr/linalg.hpp"
#include "tssr/system.hpp"
#include "tssr/tensor.hpp"

namespace tssr {

/// Input U(n) or U(t). Tables are zero-order held between breakpoints.
class InputSignal {
 public:
  enum class Kind { zero, constant, table };

  static InputSignal zero() { return InputSignal(); }

  static InputSignal constant(Tensor value) {
    InputSignal s;
    s.kind_ = Kind::constant;
    s.samples_.emplace_back(0.0, std::move(value));
    return s;
  }

  /// Samples keyed by step index or time stamp; keys strictly increasing,
  /// first key 0, and all samples of one shape.
  static InputSignal table(std::vector<std::pair<double, Tensor>> samples) {
    if (samples.empty()) throw ArgumentError("input table must contain at least one sample");
    if (samples.front().first != 0.0) throw ArgumentError("input table must start at 0");
    for (std::size_t k = 1; k < samples.size(); ++k) {
      if (!std::isfinite(samples[k].first) || !(samples[k].first > samples[k - 1].first)) {
        throw ArgumentError("input table keys must be finite and strictly increasing");
      }
      if (samples[k].second.shape() != samples[0].second.shape()) {
        throw ShapeError("input table samples have differing shapes");
      }
    }
    InputSignal s;
    s.kind_ = Kind::table;
    s.samples_ = std::move(samples);
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  const std::vector<std::pair<double, Tensor>>& samples() const noexcept { return samples_; }

  /// Throws unless the signal is usable with a system of this input shape.
  void check_against(const std::optional<Shape>& input_shape) const {
    if (!input_shape) {
      if (kind_ != Kind::zero) throw ArgumentError("system has no input but a non-zero input signal was given");
      return;
    }
    for (const auto& [when, value] : samples_) {
      if (value.shape() != *input_shape) {
        throw ShapeError("input sample has shape " + shape_to_string(value.shape()) +
                         ", system input_shape is " + shape_to_string(*input_shape));
      }
    }
  }

  Tensor at(double when, const Shape& input_shape) const {
    switch (kind_) {
      case Kind::zero:
        return Tensor::zeros(input_shape);
      case Kind::constant:
        return samples_.front().second;
      case Kind::table:
        break;
    }
    if (!(when >= 0.0)) throw ArgumentError("input requested at negative time");
    auto it = std::upper_bound(samples_.begin(), samples_.end(), when,
                               [](double w, const auto& s) { return w < s.first; });
    return std::prev(it)->second;
  }

  /// Table breakpoints strictly inside (t0, t1).
  std::vector<double> breakpoints_between(double t0, double t1) const {
    std::vector<double> out;
    for (const auto& s : samples_) {
      if (s.first > t0 && s.first < t1) out.push_back(s.first);
    }
    return out;
  }

 private:
  Kind kind_ = Kind::zero;
  std::vector<std::pair<double, Tensor>> samples_;
};

struct Sample {
  double when = 0.0;
  Tensor state;
  Tensor output;
};

struct Trajectory {
  std::vector<Sample> samples;
};

struct StepResult {
  Tensor next_state;
  Tensor output;
};

namespace detail {

inline void check_state(const TssrSystem& system, const Tensor& state) {
  if (state.shape() != system.state_shape()) {
    throw ShapeError("state has shape " + shape_to_string(state.shape()) + ", system state_shape is " +
                     shape_to_string(system.state_shape()));
  }
}

inline void check_input(const TssrSystem& system, const std::optional<Tensor>& input) {
  if (!system.has_input()) {
    if (input) throw ShapeError("system has no input but an input tensor was given");
    return;
  }
  if (!input) throw ShapeError("system requires an input tensor of shape " + shape_to_string(*system.input_shape()));
  if (input->shape() != *system.input_shape()) {
    throw ShapeError("input has shape " + shape_to_string(input->shape()) + ", system input_shape is " +
                     shape_to_string(*system.input_shape()));
  }
}

inline Tensor output_of(const CoefficientSet& c, const Tensor& state, const std::optional<Tensor>& input) {
  Tensor y = c.C ? contract_last(*c.C, state) : state;
  if (c.D) y = y + contract_last(*c.D, *input);
  return y;
}

inline std::optional<Tensor> input_at(const TssrSystem& system, const InputSignal& u, double when) {
  if (!system.has_input()) return std::nullopt;
  return u.at(when, *system.input_shape());
}

inline void require_finite(const Tensor& t, std::int64_t step) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw OverflowError("state became non-finite", step);
  }
}

inline std::size_t segment_index(const TssrSystem& system, double when) {
  const auto segs = system.schedule();
  auto it = std::upper_bound(segs.begin(), segs.end(), when,
                             [](double w, const Segment& s) { return w < s.start; });
  return static_cast<std::size_t>(std::distance(segs.begin(), it)) - 1;
}

}  // namespace detail

/// One discrete update with the coefficients in force at step n.
inline StepResult step_discrete(const TssrSystem& system, const Tensor& state,
                                const std::optional<Tensor>& input, std::int64_t n) {
  if (n < 0) throw ArgumentError("step index must be >= 0");
  detail::check_state(system, state);
  detail::check_input(system, input);
  const auto& c = coefficients_at(system, static_cast<double>(n));
  Tensor next = contract_last(c.A, state);
  if (c.B) next = next + contract_last(*c.B, *input);
  return {std::move(next), detail::output_of(c, state, input)};
}

/// Samples n = 0..steps; sample n holds X(n) and Y(n).
inline Trajectory simulate_discrete(const TssrSystem& system, const Tensor& x0, const InputSignal& u,
                                    std::int64_t steps) {
  if (steps < 0) throw ArgumentError("steps must be >= 0");
  if (system.time_kind() != TimeKind::discrete) throw ArgumentError("simulate_discrete requires a discrete-time system");
  detail::check_state(system, x0);
  u.check_against(system.input_shape());

  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
  Tensor x = x0;
  for (std::int64_t n = 0;; ++n) {
    const auto input = detail::input_at(system, u, static_cast<double>(n));
    try {
      if (n == steps) {
        const auto& c = coefficients_at(system, static_cast<double>(n));
        traj.samples.push_back({static_cast<double>(n), x, detail::output_of(c, x, input)});
        break;
      }
      auto step = step_discrete(system, x, input, n);
      traj.samples.push_back({static_cast<double>(n), std::move(x), std::move(step.output)});
      x = std::move(step.next_state);
    } catch (const OverflowError&) {
      throw OverflowError("simulate_discrete: state or output became non-finite", n);
    }
  }
  return traj;
}

/// X(n) = A^n x0 + sum_{k<n} A^(n-1-k) B u(k), evaluated with explicit
/// matrix powers of the unfolded coefficients.
inline Tensor solve_discrete_closed_form(const TssrSystem& system, const Tensor& x0, const InputSignal& u,
                                         std::int64_t n) {
  if (!system.time_invariant()) {
    throw UnsupportedError("closed-form solution requires a time-invariant system; use simulate_discrete");
  }
  if (system.time_kind() != TimeKind::discrete) throw UnsupportedError("closed-form discrete solution requires a discrete-time system");
  if (n < 0) throw ArgumentError("n must be >= 0");
  detail::check_state(system, x0);
  u.check_against(system.input_shape());

  const auto m = unfold_coefficients(system, system.schedule().front().coefficients);
  const auto q = m.A.rows();
  std::vector<Matrix> powers{Matrix::Identity(q, q)};
  for (std::int64_t k = 1; k <= n; ++k) powers.push_back(powers.back() * m.A);

  Vector v = powers[static_cast<std::size_t>(n)] * to_vector(x0);
  if (m.B) {
    for (std::int64_t k = 0; k < n; ++k) {
      const Vector uk = to_vector(u.at(static_cast<double>(k), *system.input_shape()));
      v += powers[static_cast<std::size_t>(n - 1 - k)] * (*m.B * uk);
    }
  }
  if (!v.allFinite()) throw OverflowError("closed-form solution overflowed", n);
  return from_vector(v, system.state_shape());
}

enum class Method { rk4, exact };

inline const char* to_string(Method m) { return m == Method::rk4 ? "rk4" : "exact"; }

/// Samples at t = 0, h, 2h, ... with a final truncated step landing on t_end.
/// When h is not given it defaults to t_end / 1000.
inline Trajectory simulate_continuous(const TssrSystem& system, const Tensor& x0, const InputSignal& u,
                                      double t_end, std::optional<double> h_opt, Method method) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ArgumentError("t_end must be a finite value > 0");
  const double h = h_opt.value_or(t_end / 1000.0);
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("step size h must be a finite value > 0");
  if (system.time_kind() != TimeKind::continuous) throw ArgumentError("simulate_continuous requires a continuous-time system");
  detail::check_state(system, x0);
  u.check_against(system.input_shape());

  std::vector<UnfoldedCoefficients> unfolded;
  for (const auto& seg : system.schedule()) unfolded.push_back(unfold_coefficients(system, seg.coefficients));

  auto input_vec = [&](double t) -> std::optional<Vector> {
    if (!system.has_input()) return std::nullopt;
    return to_vector(u.at(t, *system.input_shape()));
  };
  auto field = [&](double t, const Vector& v) -> Vector {
    const auto& m = unfolded[detail::segment_index(system, t)];
    Vector dv = m.A * v;
    if (m.B) dv += *m.B * *input_vec(t);
    return dv;
  };

  // Propagators keyed on (segment, input breakpoint, interval length).
  std::map<std::tuple<std::size_t, double, double>, Matrix> propagators;
  auto propagate = [&](double t0, double dt, const Vector& v) -> Vector {
    const std::size_t seg = detail::segment_index(system, t0);
    const auto& m = unfolded[seg];
    const auto uv = input_vec(t0);
    const bool forced = m.B && uv && !uv->isZero(0.0);
    double input_key = -1.0;
    if (forced && u.kind() == InputSignal::Kind::table) {
      auto it = std::upper_bound(u.samples().begin(), u.samples().end(), t0,
                                 [](double w, const auto& s) { return w < s.first; });
      input_key = std::prev(it)->first;
    }
    const auto key = std::make_tuple(seg, forced ? input_key : -2.0, dt);
    auto it = propagators.find(key);
    if (it == propagators.end()) {
      const auto q = m.A.rows();
      Matrix e;
      if (forced) {
        Matrix aug = Matrix::Zero(q + 1, q + 1);
        aug.topLeftCorner(q, q) = m.A;
        aug.topRightCorner(q, 1) = *m.B * *uv;
        e = matrix_exponential(aug, dt);
      } else {
        e = matrix_exponential(m.A, dt);
      }
      it = propagators.emplace(key, std::move(e)).first;
    }
    const Matrix& e = it->second;
    if (e.rows() == v.size()) return e * v;
    Vector ext(v.size() + 1);
    ext.head(v.size()) = v;
    ext(v.size()) = 1.0;
    return (e * ext).head(v.size());
  };

  auto breakpoints = [&](double t0, double t1) {
    std::vector<double> pts;
    for (const auto& seg : system.schedule()) {
      if (seg.start > t0 && seg.start < t1) pts.push_back(seg.start);
    }
    if (system.has_input()) {
      for (double b : u.breakpoints_between(t0, t1)) pts.push_back(b);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    pts.push_back(t1);
    return pts;
  };

  auto record = [&](Trajectory& traj, double t, const Vector& v) {
    Tensor x = from_vector(v, system.state_shape());
    const auto input = detail::input_at(system, u, t);
    auto y = detail::output_of(coefficients_at(system, t), x, input);
    traj.samples.push_back({t, std::move(x), std::move(y)});
  };

  auto steps = static_cast<std::int64_t>(std::ceil(t_end / h * (1.0 - 1e-12)));
  steps = std::max<std::int64_t>(steps, 1);

  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
  Vector v = to_vector(x0);
  record(traj, 0.0, v);
  double t = 0.0;
  for (std::int64_t k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? t_end : static_cast<double>(k) * h;
    try {
      if (method == Method::rk4) {
        const double dt = t_next - t;
        const Vector k1 = field(t, v);
        const Vector k2 = field(t + dt / 2, v + dt / 2 * k1);
        const Vector k3 = field(t + dt / 2, v + dt / 2 * k2);
        const Vector k4 = field(t_next, v + dt * k3);
        v += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      } else {
        double s = t;
        for (double b : breakpoints(t, t_next)) {
          v = propagate(s, b - s, v);
          s = b;
        }
      }
      if (!v.allFinite()) throw OverflowError("state became non-finite", k);
      record(traj, t_next, v);
    } catch (const OverflowError&) {
      throw OverflowError("simulate_continuous: state became non-finite", k);
    }
    t = t_next;
  }
  return traj;
}

}  // namespace tssr
