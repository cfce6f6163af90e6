#pragma once

// Stability, controllability and observability of tensor systems, computed on
// the unfolded matrices M_A = unfold(A, r), M_B = unfold(B, r), ...

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tssr/errors.hpp"
#include "tssr/linalg.hpp"
#include "tssr/system.hpp"

namespace tssr {

struct AnalysisOptions {
  /// Singular values below sigma_max * q * rank_tolerance count as zero.
  double rank_tolerance = 1e-12;
  /// Half-width of the band around the stability boundary reported as marginal.
  double stability_margin = 1e-9;
};

enum class Stability { stable, marginal, unstable };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::marginal:
      return "marginal";
    case Stability::unstable:
      return "unstable";
  }
  return "unknown";
}

struct StabilityResult {
  Stability verdict = Stability::unstable;
  double spectral_radius = 0.0;
  /// Largest eigenvalue real part; set for continuous-time systems only.
  std::optional<double> max_real_part;

  bool stable() const noexcept { return verdict == Stability::stable; }
};

struct AnalysisReport {
  std::size_t state_dim = 0;
  double spectral_radius = 0.0;
  std::optional<double> max_real_part;
  Stability stability = Stability::unstable;
  bool stable = false;
  std::optional<std::size_t> controllability_rank;
  std::optional<bool> controllable;
  std::optional<std::size_t> observability_rank;
  std::optional<bool> observable;

  bool operator==(const AnalysisReport&) const = default;
};

namespace detail {

inline void require_time_invariant(const TssrSystem& system, const char* op) {
  if (!system.time_invariant()) {
    throw UnsupportedError(std::string(op) + " requires a time-invariant system");
  }
}

inline void require_square(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw ShapeError(std::string(op) + ": matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
  }
}

inline Eigen::VectorXcd eigenvalues(const Matrix& m) {
  if (m.size() == 0) return {};
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue computation did not converge");
  return es.eigenvalues();
}

}  // namespace detail

/// Unfolded coefficient matrices of a time-invariant system.
inline UnfoldedCoefficients unfold_system(const TssrSystem& system) {
  detail::require_time_invariant(system, "unfold_system");
  return unfold_coefficients(system, system.schedule().front().coefficients);
}

inline double spectral_radius(const Matrix& m) {
  detail::require_square(m, "spectral_radius");
  if (!m.allFinite()) throw ValueError("spectral_radius: non-finite matrix entry");
  const auto ev = detail::eigenvalues(m);
  double r = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::max(r, std::abs(ev(i)));
  return r;
}

/// Numerical rank: singular values above sigma_max * scale * tolerance.
inline std::size_t numerical_rank(const Matrix& m, double scale, double tolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double threshold = sv(0) * scale * tolerance;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return rank;
}

/// [B | AB | ... | A^(blocks-1) B]; blocks defaults to the state dimension.
inline Matrix controllability_matrix(const Matrix& A, const Matrix& B, std::optional<Eigen::Index> blocks = {}) {
  detail::require_square(A, "controllability_matrix");
  if (B.rows() != A.rows()) throw ShapeError("controllability_matrix: B row count must match A");
  const Eigen::Index q = A.rows();
  const Eigen::Index n = blocks.value_or(q);
  Matrix K(q, B.cols() * n);
  if (n == 0) return K;
  K.leftCols(B.cols()) = B;
  for (Eigen::Index i = 1; i < n; ++i) {
    K.middleCols(B.cols() * i, B.cols()) = A * K.middleCols(B.cols() * (i - 1), B.cols());
  }
  return K;
}

inline std::size_t controllability_rank(const Matrix& A, const Matrix& B, const AnalysisOptions& opts = {}) {
  const auto K = controllability_matrix(A, B);
  return numerical_rank(K, static_cast<double>(A.rows()), opts.rank_tolerance);
}

/// Stacked [C; CA; ...; CA^(q-1)], ranked with the same threshold rule.
inline std::size_t observability_rank(const Matrix& A, const Matrix& C, const AnalysisOptions& opts = {}) {
  detail::require_square(A, "observability_rank");
  if (C.cols() != A.rows()) throw ShapeError("observability_rank: C column count must match A");
  const Eigen::Index q = A.rows();
  Matrix O(C.rows() * q, q);
  if (q > 0) {
    O.topRows(C.rows()) = C;
    for (Eigen::Index i = 1; i < q; ++i) {
      O.middleRows(C.rows() * i, C.rows()) = O.middleRows(C.rows() * (i - 1), C.rows()) * A;
    }
  }
  return numerical_rank(O, static_cast<double>(q), opts.rank_tolerance);
}

inline StabilityResult check_stability(const Matrix& A, TimeKind time, const AnalysisOptions& opts = {}) {
  detail::require_square(A, "check_stability");
  StabilityResult r;
  const auto ev = detail::eigenvalues(A);
  for (Eigen::Index i = 0; i < ev.size(); ++i) r.spectral_radius = std::max(r.spectral_radius, std::abs(ev(i)));
  const double eps = opts.stability_margin;
  if (time == TimeKind::discrete) {
    const double rho = r.spectral_radius;
    r.verdict = rho < 1.0 - eps ? Stability::stable : rho <= 1.0 + eps ? Stability::marginal : Stability::unstable;
  } else {
    double re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) re = std::max(re, ev(i).real());
    r.max_real_part = re;
    r.verdict = re < -eps ? Stability::stable : re <= eps ? Stability::marginal : Stability::unstable;
  }
  return r;
}

inline StabilityResult check_stability(const TssrSystem& system, const AnalysisOptions& opts = {}) {
  return check_stability(unfold_system(system).A, system.time_kind(), opts);
}

inline std::size_t controllability_rank(const TssrSystem& system, const AnalysisOptions& opts = {}) {
  const auto m = unfold_system(system);
  if (!m.B) throw ArgumentError("controllability_rank: system has no input");
  return controllability_rank(m.A, *m.B, opts);
}

inline std::size_t observability_rank(const TssrSystem& system, const AnalysisOptions& opts = {}) {
  const auto m = unfold_system(system);
  if (!m.C) throw ArgumentError("observability_rank: system has no output map C");
  return observability_rank(m.A, *m.C, opts);
}

inline AnalysisReport analyze(const TssrSystem& system, const AnalysisOptions& opts = {}) {
  const auto m = unfold_system(system);
  const auto q = static_cast<std::size_t>(m.A.rows());
  const auto st = check_stability(m.A, system.time_kind(), opts);

  AnalysisReport rep;
  rep.state_dim = q;
  rep.spectral_radius = st.spectral_radius;
  rep.max_real_part = st.max_real_part;
  rep.stability = st.verdict;
  rep.stable = st.stable();
  if (m.B) {
    rep.controllability_rank = controllability_rank(m.A, *m.B, opts);
    rep.controllable = *rep.controllability_rank == q;
  }
  if (m.C) {
    rep.observability_rank = observability_rank(m.A, *m.C, opts);
    rep.observable = *rep.observability_rank == q;
  }
  return rep;
}

/// One `name: value` line per field in a fixed order. Absent fields print
/// `none`; max_real_part appears only for continuous-time reports.
inline std::string render_report(const AnalysisReport& r) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "state_dim: " + std::to_string(r.state_dim) + "\n";
  out += "spectral_radius: " + num(r.spectral_radius) + "\n";
  if (r.max_real_part) out += "max_real_part: " + num(*r.max_real_part) + "\n";
  out += std::string("stability: ") + to_string(r.stability) + "\n";
  out += "controllability_rank: " +
         (r.controllability_rank ? std::to_string(*r.controllability_rank) : std::string("none")) + "\n";
  out += "observability_rank: " +
         (r.observability_rank ? std::to_string(*r.observability_rank) : std::string("none")) + "\n";
  return out;
}

}  // namespace tssr
