#pragma once

// Scalar processes coupled across time scales:
//   x_i(n) = sum_j a_ij x_j(n / c_j) + sum_j b_ij u_j(n / c_j)
// The update applies when n > 0 and d = lcm(c_1..c_M) divides n; every other
// index (n = 0 included) is boundary data. Evaluation is demand driven and
// memoized; each recursive index n / c_j <= n / 2, so recursion terminates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tssr/errors.hpp"
#include "tssr/linalg.hpp"

namespace tssr {

using StepIndex = std::int64_t;

/// Supplies a value for (process, index), or nullopt when it has none.
using ProcessFunction = std::function<std::optional<double>(std::size_t, StepIndex)>;

struct GlobalClock {
  StepIndex d = 1;
  /// f_i = d / c_i
  std::vector<StepIndex> factors;
};

inline GlobalClock global_clock(std::span<const StepIndex> clocks) {
  if (clocks.empty()) throw ArgumentError("at least one clock divisor is required");
  GlobalClock g;
  for (std::size_t i = 0; i < clocks.size(); ++i) {
    if (clocks[i] < 2) {
      throw ArgumentError("clock c_" + std::to_string(i) + " = " + std::to_string(clocks[i]) +
                          " violates the constraint c >= 2 (clock divisors must be integers larger than one)");
    }
    const StepIndex step = clocks[i] / std::gcd(g.d, clocks[i]);
    StepIndex next = 0;
    if (__builtin_mul_overflow(g.d, step, &next)) throw ArgumentError("lcm of clock divisors overflows");
    g.d = next;
  }
  for (auto c : clocks) g.factors.push_back(g.d / c);
  return g;
}

class MultirateSystem {
 public:
  /// A is M x M, B (optional) is M x M, clocks has M entries >= 2. The input
  /// function is required iff B is given.
  MultirateSystem(Matrix A, std::optional<Matrix> B, std::vector<StepIndex> clocks, ProcessFunction boundary,
                  ProcessFunction input = {})
      : A_(std::move(A)), B_(std::move(B)), clocks_(std::move(clocks)), boundary_(std::move(boundary)),
        input_(std::move(input)) {
    if (A_.rows() != A_.cols()) throw ShapeError("multirate A must be square");
    if (static_cast<std::size_t>(A_.rows()) != clocks_.size()) {
      throw ShapeError("multirate A is " + std::to_string(A_.rows()) + "x" + std::to_string(A_.cols()) + " but " +
                       std::to_string(clocks_.size()) + " clocks were given");
    }
    if (B_ && (B_->rows() != A_.rows() || B_->cols() != A_.cols())) {
      throw ShapeError("multirate B must have the same shape as A");
    }
    if (!A_.allFinite() || (B_ && !B_->allFinite())) throw ValueError("multirate coefficients must be finite");
    if (!boundary_) throw ArgumentError("multirate boundary function is required");
    if (B_ && !input_) throw ArgumentError("multirate B given without an input function");
    clock_ = global_clock(clocks_);
  }

  std::size_t process_count() const noexcept { return clocks_.size(); }
  const Matrix& A() const noexcept { return A_; }
  const std::optional<Matrix>& B() const noexcept { return B_; }
  const std::vector<StepIndex>& clocks() const noexcept { return clocks_; }
  const GlobalClock& clock() const noexcept { return clock_; }
  const ProcessFunction& boundary() const noexcept { return boundary_; }
  const ProcessFunction& input() const noexcept { return input_; }

  /// True where the recurrence, rather than boundary data, defines x_i(n).
  bool in_recurrence_domain(StepIndex n) const noexcept { return n > 0 && n % clock_.d == 0; }

 private:
  Matrix A_;
  std::optional<Matrix> B_;
  std::vector<StepIndex> clocks_;
  ProcessFunction boundary_;
  ProcessFunction input_;
  GlobalClock clock_;
};

/// One evaluation session. Holds the memo cache; not thread-safe, but
/// independent sessions over the same system may run concurrently.
class MultirateEvaluator {
 public:
  explicit MultirateEvaluator(const MultirateSystem& system) : system_(system) {}

  double state(std::size_t i, StepIndex n) {
    if (n < 0) throw ArgumentError("multirate index must be >= 0, got " + std::to_string(n));
    if (i >= system_.process_count()) throw ArgumentError("process index " + std::to_string(i) + " out of range");
    const auto key = std::make_pair(i, n);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    double value = 0.0;
    if (system_.in_recurrence_domain(n)) {
      const auto& A = system_.A();
      const auto& clocks = system_.clocks();
      const auto ii = static_cast<Eigen::Index>(i);
      double coupled = 0.0;
      for (std::size_t j = 0; j < clocks.size(); ++j) {
        const double a = A(ii, static_cast<Eigen::Index>(j));
        if (a != 0.0) coupled += a * state(j, n / clocks[j]);
      }
      double forced = 0.0;
      if (const auto& B = system_.B()) {
        for (std::size_t j = 0; j < clocks.size(); ++j) {
          const double b = (*B)(ii, static_cast<Eigen::Index>(j));
          if (b != 0.0) forced += b * lookup(system_.input(), j, n / clocks[j], "input");
        }
      }
      value = coupled + forced;
      if (!std::isfinite(value)) {
        throw OverflowError("multirate state x_" + std::to_string(i) + "(" + std::to_string(n) + ") is non-finite");
      }
    } else {
      value = lookup(system_.boundary(), i, n, "boundary");
    }
    memo_.emplace(key, value);
    return value;
  }

  /// Rows x(k d) for k = 0..horizon, one entry per process.
  std::vector<std::vector<double>> trajectory_on_grid(StepIndex horizon) {
    if (horizon < 0) throw ArgumentError("horizon must be >= 0");
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(horizon) + 1);
    for (StepIndex k = 0; k <= horizon; ++k) {
      StepIndex n = 0;
      if (__builtin_mul_overflow(k, system_.clock().d, &n)) throw ArgumentError("grid index overflows");
      std::vector<double> row(system_.process_count());
      for (std::size_t i = 0; i < row.size(); ++i) row[i] = state(i, n);
      rows.push_back(std::move(row));
    }
    return rows;
  }

  std::size_t memo_size() const noexcept { return memo_.size(); }

 private:
  static double lookup(const ProcessFunction& f, std::size_t i, StepIndex n, const char* what) {
    std::optional<double> v;
    try {
      v = f(i, n);
    } catch (const BoundaryError&) {
      throw;
    } catch (const std::exception& e) {
      throw BoundaryError(i, n, std::string(what) + ": " + e.what());
    }
    if (!v) throw BoundaryError(i, n, what);
    if (!std::isfinite(*v)) throw ValueError(std::string(what) + " value for process " + std::to_string(i) +
                                             " at index " + std::to_string(n) + " is not finite");
    return *v;
  }

  const MultirateSystem& system_;
  std::map<std::pair<std::size_t, StepIndex>, double> memo_;
};

inline double eval_state(const MultirateSystem& system, std::size_t i, StepIndex n) {
  return MultirateEvaluator(system).state(i, n);
}

inline std::vector<std::vector<double>> trajectory_on_grid(const MultirateSystem& system, StepIndex horizon) {
  return MultirateEvaluator(system).trajectory_on_grid(horizon);
}

}  // namespace tssr
