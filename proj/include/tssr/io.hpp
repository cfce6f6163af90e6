#pragma once

// JSON system files and CSV trajectory output.
//
// Tensor systems:
//   {"time": "discrete"|"continuous", "state_shape": [...],
//    "input_shape": [...], "output_shape": [...],          (optional)
//    "schedule": [{"start": 0, "A": T, "B": T, "C": T, "D": T}, ...],
//    "x0": T,                                              (optional)
//    "input": {"kind": "zero"} | {"kind": "constant", "value": T}
//           | {"kind": "table", "samples": [{"at": 0, "value": T}, ...]}}
// where T = {"shape": [...], "data": [...]} in row-major order.
//
// Multirate systems:
//   {"kind": "multirate", "A": T, "B": T, "clocks": [...],
//    "boundary": P, "input": P}
// where P is one process-data spec applied to every process, or a list of
// one spec per process:
//   {"kind": "constant", "value": v} | {"kind": "index"}   (x_i(n) = n)
//   | {"kind": "table", "values": [[n, v], ...]}

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tssr/errors.hpp"
#include "tssr/linalg.hpp"
#include "tssr/multirate.hpp"
#include "tssr/simulation.hpp"
#include "tssr/system.hpp"
#include "tssr/tensor.hpp"

namespace tssr {

using Json = nlohmann::ordered_json;

struct TssrDocument {
  TssrSystem system;
  std::optional<Tensor> x0;
  InputSignal input;
};

/// Values a multirate process takes outside the recurrence domain (or its
/// input values).
struct ProcessDataSpec {
  enum class Kind { constant, index, table };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::map<StepIndex, double> table;

  std::optional<double> operator()(StepIndex n) const {
    switch (kind) {
      case Kind::constant:
        return value;
      case Kind::index:
        return static_cast<double>(n);
      case Kind::table:
        if (auto it = table.find(n); it != table.end()) return it->second;
        return std::nullopt;
    }
    return std::nullopt;
  }
};

/// Either one spec shared by every process, or one per process.
struct ProcessData {
  std::vector<ProcessDataSpec> specs;
  bool shared = true;

  ProcessFunction function() const {
    return [specs = specs, shared = shared](std::size_t i, StepIndex n) -> std::optional<double> {
      if (shared) return specs.front()(n);
      if (i >= specs.size()) return std::nullopt;
      return specs[i](n);
    };
  }
};

struct MultirateDocument {
  Matrix A;
  std::optional<Matrix> B;
  std::vector<StepIndex> clocks;
  ProcessData boundary;
  std::optional<ProcessData> input;

  MultirateSystem build() const {
    return MultirateSystem(A, B, clocks, boundary.function(), input ? input->function() : ProcessFunction{});
  }
};

using SystemFile = std::variant<TssrDocument, MultirateDocument>;

namespace detail {

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path.empty() ? key : path + "." + key, "required field is missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline Shape parse_shape(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "shape must be an array of positive integers");
  Shape s;
  for (const auto& v : j) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
      throw ParseError(path, "shape must be an array of positive integers");
    }
    s.push_back(v.get<std::size_t>());
  }
  return s;
}

inline double parse_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

inline StepIndex parse_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<StepIndex>();
}

inline Tensor parse_tensor(const Json& j, const std::string& path) {
  auto shape = parse_shape(field(j, "shape", path), join(path, "shape"));
  const auto& data = field(j, "data", path);
  if (!data.is_array()) throw ParseError(join(path, "data"), "expected an array of numbers");
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& v : data) values.push_back(parse_number(v, join(path, "data")));
  try {
    return make_tensor(std::move(shape), std::move(values));
  } catch (const Error& e) {
    throw ParseError(path, e.what());
  }
}

inline std::optional<Tensor> parse_optional_tensor(const Json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return parse_tensor(*it, join(path, key));
}

inline Matrix parse_matrix(const Json& j, const std::string& path) {
  const auto t = parse_tensor(j, path);
  if (t.order() != 2) throw ParseError(path, "expected a matrix (order-2 tensor)");
  return to_matrix(t);
}

inline std::string kind_of(const Json& j, const std::string& path) {
  const auto& k = field(j, "kind", path);
  if (!k.is_string()) throw ParseError(join(path, "kind"), "expected a string");
  return k.get<std::string>();
}

inline InputSignal parse_input(const Json& j, const std::string& path) {
  const auto kind = kind_of(j, path);
  if (kind == "zero") return InputSignal::zero();
  if (kind == "constant") return InputSignal::constant(parse_tensor(field(j, "value", path), join(path, "value")));
  if (kind == "table") {
    const auto& samples = field(j, "samples", path);
    if (!samples.is_array()) throw ParseError(join(path, "samples"), "expected an array");
    std::vector<std::pair<double, Tensor>> out;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto p = join(path, "samples[" + std::to_string(k) + "]");
      out.emplace_back(parse_number(field(samples[k], "at", p), join(p, "at")),
                       parse_tensor(field(samples[k], "value", p), join(p, "value")));
    }
    return InputSignal::table(std::move(out));
  }
  throw ParseError(join(path, "kind"), "unknown input kind '" + kind + "'");
}

inline ProcessDataSpec parse_process_spec(const Json& j, const std::string& path) {
  ProcessDataSpec s;
  const auto kind = kind_of(j, path);
  if (kind == "constant") {
    s.kind = ProcessDataSpec::Kind::constant;
    s.value = parse_number(field(j, "value", path), join(path, "value"));
  } else if (kind == "index") {
    s.kind = ProcessDataSpec::Kind::index;
  } else if (kind == "table") {
    s.kind = ProcessDataSpec::Kind::table;
    const auto& values = field(j, "values", path);
    if (!values.is_array()) throw ParseError(join(path, "values"), "expected an array of [n, value] pairs");
    for (const auto& pair : values) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError(join(path, "values"), "expected an array of [n, value] pairs");
      }
      s.table[parse_integer(pair[0], join(path, "values"))] = parse_number(pair[1], join(path, "values"));
    }
  } else {
    throw ParseError(join(path, "kind"), "unknown process data kind '" + kind + "'");
  }
  return s;
}

inline ProcessData parse_process_data(const Json& j, const std::string& path) {
  ProcessData d;
  if (j.is_array()) {
    d.shared = false;
    for (std::size_t k = 0; k < j.size(); ++k) {
      d.specs.push_back(parse_process_spec(j[k], path + "[" + std::to_string(k) + "]"));
    }
  } else {
    d.specs.push_back(parse_process_spec(j, path));
  }
  return d;
}

inline MultirateDocument parse_multirate(const Json& j) {
  MultirateDocument doc;
  doc.A = parse_matrix(field(j, "A", ""), "A");
  if (auto it = j.find("B"); it != j.end() && !it->is_null()) doc.B = parse_matrix(*it, "B");
  const auto& clocks = field(j, "clocks", "");
  if (!clocks.is_array()) throw ParseError("clocks", "expected an array of integers");
  for (const auto& c : clocks) doc.clocks.push_back(parse_integer(c, "clocks"));
  doc.boundary = parse_process_data(field(j, "boundary", ""), "boundary");
  if (auto it = j.find("input"); it != j.end() && !it->is_null()) doc.input = parse_process_data(*it, "input");
  for (const auto* pd : {&doc.boundary, doc.input ? &*doc.input : nullptr}) {
    if (pd && !pd->shared && pd->specs.size() != doc.clocks.size()) {
      throw ShapeError("per-process data lists must have one entry per clock (" + std::to_string(doc.clocks.size()) +
                       ")");
    }
  }
  doc.build();  // validates A, B, clocks
  return doc;
}

inline TssrDocument parse_tssr(const Json& j) {
  SystemDescriptor d;
  const auto& time = field(j, "time", "");
  if (time == "discrete") {
    d.time = TimeKind::discrete;
  } else if (time == "continuous") {
    d.time = TimeKind::continuous;
  } else {
    throw ParseError("time", "expected \"discrete\" or \"continuous\"");
  }
  d.state_shape = parse_shape(field(j, "state_shape", ""), "state_shape");
  if (auto it = j.find("input_shape"); it != j.end() && !it->is_null()) d.input_shape = parse_shape(*it, "input_shape");
  if (auto it = j.find("output_shape"); it != j.end() && !it->is_null()) {
    d.output_shape = parse_shape(*it, "output_shape");
  }
  const auto& schedule = field(j, "schedule", "");
  if (!schedule.is_array()) throw ParseError("schedule", "expected an array of segments");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const auto p = "schedule[" + std::to_string(k) + "]";
    const auto& seg = schedule[k];
    Segment s;
    s.start = parse_number(field(seg, "start", p), join(p, "start"));
    s.coefficients.A = parse_tensor(field(seg, "A", p), join(p, "A"));
    s.coefficients.B = parse_optional_tensor(seg, "B", p);
    s.coefficients.C = parse_optional_tensor(seg, "C", p);
    s.coefficients.D = parse_optional_tensor(seg, "D", p);
    d.schedule.push_back(std::move(s));
  }
  TssrDocument doc{build_system(std::move(d)), std::nullopt, InputSignal::zero()};
  doc.x0 = parse_optional_tensor(j, "x0", "");
  if (auto it = j.find("input"); it != j.end() && !it->is_null()) doc.input = parse_input(*it, "input");
  if (doc.x0 && doc.x0->shape() != doc.system.state_shape()) {
    throw ShapeError("x0 has shape " + shape_to_string(doc.x0->shape()) + ", expected state_shape " +
                     shape_to_string(doc.system.state_shape()));
  }
  doc.input.check_against(doc.system.input_shape());
  return doc;
}

inline Json emit_tensor(const Tensor& t) {
  Json j;
  j["shape"] = t.shape();
  j["data"] = std::vector<double>(t.data().begin(), t.data().end());
  return j;
}

inline Json emit_process_spec(const ProcessDataSpec& s) {
  Json j;
  switch (s.kind) {
    case ProcessDataSpec::Kind::constant:
      j["kind"] = "constant";
      j["value"] = s.value;
      break;
    case ProcessDataSpec::Kind::index:
      j["kind"] = "index";
      break;
    case ProcessDataSpec::Kind::table: {
      j["kind"] = "table";
      Json values = Json::array();
      for (const auto& [n, v] : s.table) values.push_back(Json::array({n, v}));
      j["values"] = std::move(values);
      break;
    }
  }
  return j;
}

inline Json emit_process_data(const ProcessData& d) {
  if (d.shared) return emit_process_spec(d.specs.front());
  Json j = Json::array();
  for (const auto& s : d.specs) j.push_back(emit_process_spec(s));
  return j;
}

}  // namespace detail

/// Parses system file text. Syntax errors carry the byte offset; field errors
/// carry the JSON path of the offending field.
inline SystemFile parse_system_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
  if (!j.is_object()) throw ParseError("(root)", "expected a JSON object");
  if (auto it = j.find("kind"); it != j.end()) {
    if (*it == "multirate") return detail::parse_multirate(j);
    if (*it != "tssr") throw ParseError("kind", "expected \"multirate\" or \"tssr\"");
  }
  return detail::parse_tssr(j);
}

inline SystemFile parse_system_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open system file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read system file '" + path + "'");
  return parse_system_text(ss.str());
}

inline std::string write_system_text(const SystemFile& file) {
  Json j;
  if (const auto* doc = std::get_if<TssrDocument>(&file)) {
    const auto& s = doc->system;
    j["time"] = to_string(s.time_kind());
    j["state_shape"] = s.state_shape();
    if (s.input_shape()) j["input_shape"] = *s.input_shape();
    if (s.has_output_map()) j["output_shape"] = s.output_shape();
    Json schedule = Json::array();
    for (const auto& seg : s.schedule()) {
      Json js;
      js["start"] = seg.start;
      js["A"] = detail::emit_tensor(seg.coefficients.A);
      if (seg.coefficients.B) js["B"] = detail::emit_tensor(*seg.coefficients.B);
      if (seg.coefficients.C) js["C"] = detail::emit_tensor(*seg.coefficients.C);
      if (seg.coefficients.D) js["D"] = detail::emit_tensor(*seg.coefficients.D);
      schedule.push_back(std::move(js));
    }
    j["schedule"] = std::move(schedule);
    if (doc->x0) j["x0"] = detail::emit_tensor(*doc->x0);
    Json input;
    switch (doc->input.kind()) {
      case InputSignal::Kind::zero:
        input["kind"] = "zero";
        break;
      case InputSignal::Kind::constant:
        input["kind"] = "constant";
        input["value"] = detail::emit_tensor(doc->input.samples().front().second);
        break;
      case InputSignal::Kind::table: {
        input["kind"] = "table";
        Json samples = Json::array();
        for (const auto& [at, value] : doc->input.samples()) {
          Json sj;
          sj["at"] = at;
          sj["value"] = detail::emit_tensor(value);
          samples.push_back(std::move(sj));
        }
        input["samples"] = std::move(samples);
        break;
      }
    }
    j["input"] = std::move(input);
  } else {
    const auto& mr = std::get<MultirateDocument>(file);
    j["kind"] = "multirate";
    j["A"] = detail::emit_tensor(from_matrix(mr.A));
    if (mr.B) j["B"] = detail::emit_tensor(from_matrix(*mr.B));
    j["clocks"] = mr.clocks;
    j["boundary"] = detail::emit_process_data(mr.boundary);
    if (mr.input) j["input"] = detail::emit_process_data(*mr.input);
  }
  return j.dump(2) + "\n";
}

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void append_columns(std::string& header, char prefix, const Shape& shape) {
  if (shape.empty()) {
    header += ",";
    header += prefix;
    return;
  }
  std::vector<std::size_t> idx(shape.size(), 0);
  for (std::size_t flat = 0; flat < shape_size(shape); ++flat) {
    header += ",";
    header += prefix;
    for (auto i : idx) header += "_" + std::to_string(i);
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
  }
}

}  // namespace detail

/// Header `t,x_<i1>_<i2>...[,y_...]`, one row per sample, 17 significant digits.
inline std::string write_trajectory_csv(const Trajectory& traj, const Shape& state_shape, const Shape& output_shape,
                                        bool emit_output) {
  std::string out = "t";
  detail::append_columns(out, 'x', state_shape);
  if (emit_output) detail::append_columns(out, 'y', output_shape);
  out += "\n";
  for (const auto& s : traj.samples) {
    out += detail::format_number(s.when);
    for (double v : s.state.data()) out += "," + detail::format_number(v);
    if (emit_output) {
      for (double v : s.output.data()) out += "," + detail::format_number(v);
    }
    out += "\n";
  }
  return out;
}

/// `# d=<d> f=<f1,...>` then `n,x_0,...` rows at n = 0, d, 2d, ...
inline std::string write_multirate_csv(const GlobalClock& clock, const std::vector<std::vector<double>>& rows) {
  std::string out = "# d=" + std::to_string(clock.d) + " f=";
  for (std::size_t i = 0; i < clock.factors.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(clock.factors[i]);
  }
  out += "\nn";
  for (std::size_t i = 0; i < clock.factors.size(); ++i) out += ",x_" + std::to_string(i);
  out += "\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += std::to_string(static_cast<StepIndex>(k) * clock.d);
    for (double v : rows[k]) out += "," + detail::format_number(v);
    out += "\n";
  }
  return out;
}

}  // namespace tssr
