#pragma once

// Command implementations behind the `tssr` executable. Exit codes:
// 0 success, 1 configuration or validation error, 2 runtime numeric error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "tssr/analysis.hpp"
#include "tssr/errors.hpp"
#include "tssr/io.hpp"
#include "tssr/multirate.hpp"
#include "tssr/simulation.hpp"

namespace tssr::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kRuntimeError = 2 };

struct RunConfig {
  std::string command;
  std::string system_path;
  std::optional<std::string> out_path;
  std::optional<std::int64_t> steps;
  std::optional<double> t_end;
  std::optional<double> h;
  Method method = Method::exact;
  std::optional<std::int64_t> horizon;
  bool emit_output = false;
  AnalysisOptions analysis;
};

namespace detail {

inline void write_output(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (!config.out_path) {
    out << text;
    return;
  }
  std::ofstream f(*config.out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open output file '" + *config.out_path + "'");
  f << text;
  if (!f) throw IoError("failed writing output file '" + *config.out_path + "'");
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const BoundaryError& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace detail

/// Simulates a tensor system file and writes the trajectory CSV. Without an
/// output path the CSV goes to `out` and no summary is printed.
inline int cmd_simulate(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto file = parse_system_file(config.system_path);
    const auto* doc = std::get_if<TssrDocument>(&file);
    if (!doc) throw ArgumentError("simulate requires a tensor system file, not a multirate file");
    if (!doc->x0) throw ArgumentError("system file has no x0; simulation needs an explicit initial state");
    const auto& sys = doc->system;

    Trajectory traj;
    if (sys.time_kind() == TimeKind::discrete) {
      if (!config.steps) throw ArgumentError("--steps is required for discrete-time systems");
      traj = simulate_discrete(sys, *doc->x0, doc->input, *config.steps);
    } else {
      if (!config.t_end) throw ArgumentError("--t-end is required for continuous-time systems");
      traj = simulate_continuous(sys, *doc->x0, doc->input, *config.t_end, config.h, config.method);
    }
    detail::write_output(config, write_trajectory_csv(traj, sys.state_shape(), sys.output_shape(), config.emit_output),
                         out);
    if (config.out_path) {
      out << "steps: " << traj.samples.size() - 1 << "\n";
      out << "terminal_state_norm: " << tssr::detail::format_number(frobenius_norm(traj.samples.back().state)) << "\n";
    }
    return kSuccess;
  });
}

inline int cmd_analyze(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto file = parse_system_file(config.system_path);
    const auto* doc = std::get_if<TssrDocument>(&file);
    if (!doc) throw ArgumentError("analyze requires a tensor system file, not a multirate file");
    if (!doc->system.time_invariant()) throw UnsupportedError("analysis requires time-invariant system");
    out << render_report(analyze(doc->system, config.analysis));
    return kSuccess;
  });
}

inline int cmd_multirate(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto file = parse_system_file(config.system_path);
    const auto* doc = std::get_if<MultirateDocument>(&file);
    if (!doc) throw ArgumentError("multirate requires a multirate system file");
    if (!config.horizon) throw ArgumentError("--horizon is required for multirate runs");
    const auto system = doc->build();
    const auto rows = trajectory_on_grid(system, *config.horizon);
    detail::write_output(config, write_multirate_csv(system.clock(), rows), out);
    return kSuccess;
  });
}

inline int run(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (config.command == "simulate") return cmd_simulate(config, out, err);
  if (config.command == "analyze") return cmd_analyze(config, out, err);
  if (config.command == "multirate") return cmd_multirate(config, out, err);
  err << "error: unknown command '" << config.command << "'\n";
  return kConfigError;
}

}  // namespace tssr::cli
