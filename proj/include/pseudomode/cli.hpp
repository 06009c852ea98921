// Copyright 2026 The pseudomode authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration and output rendering for the pmsim front end. A run is a
// key=value document plus flag overrides; every emitted number is printed in
// the shortest form that parses back to the identical double, so output is
// byte-deterministic for a given config and version.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pseudomode/entanglement.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/experiments.hpp"
#include "pseudomode/model.hpp"
#include "pseudomode/propagate.hpp"
#include "pseudomode/version.hpp"

namespace pseudomode {

enum class Subcommand { kTrace, kSweep, kSteady, kDetect };

inline const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::kTrace: return "trace";
    case Subcommand::kSweep: return "sweep";
    case Subcommand::kSteady: return "steady";
    case Subcommand::kDetect: return "detect";
  }
  return "unknown";
}

enum class OutputFormat { kCsv, kJson };

inline const char* format_name(OutputFormat f) {
  return f == OutputFormat::kCsv ? "csv" : "json";
}

inline OutputFormat format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw ConfigError("format: unknown value '" + name + "' (expected csv or json)");
}

// Shortest decimal that round-trips to the same double (17 significant digits
// where needed). NaN prints as "nan", infinities as "inf"/"-inf".
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct RunConfig {
  Subcommand subcommand = Subcommand::kTrace;
  Backend backend = Backend::kCommonStructured;
  StateFamily family = StateFamily::kEntangled;
  double alpha_sq = 0.1;
  double theta = 0.0;
  double omega = std::sqrt(0.05);  // gamma0 units throughout
  double gamma = 0.2;
  int n_max = 2;
  double t_start = 0.0;
  double t_max = 50.0;
  int points = 1001;
  int alpha_points = 51;  // sweep resolution in alpha^2
  double alpha_min = 0.0;
  double alpha_max = 1.0;
  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::kCsv;
  int threads = 0;  // sweep workers; 0 means one per hardware thread
  double zero_tol = 1e-9;
  ValidationOptions validation{};

  ModelParams model() const { return {omega, gamma, n_max}; }
  TimeGrid time_grid() const { return {t_start, t_max, points}; }
  InitialStateSpec state() const { return {family, alpha_sq, theta}; }

  void validate() const {
    const auto in_unit_interval = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ConfigError(std::string(name) + " must lie in [0,1] (got " + format_double(v) +
                          ")");
    };
    const auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(std::string(name) + " must be positive (got " + format_double(v) +
                          ")");
    };
    in_unit_interval(alpha_sq, "alpha_sq");
    in_unit_interval(alpha_min, "alpha_min");
    in_unit_interval(alpha_max, "alpha_max");
    if (!(alpha_min < alpha_max))
      throw ConfigError("alpha_min must be below alpha_max (got " + format_double(alpha_min) +
                        " and " + format_double(alpha_max) + ")");
    if (!std::isfinite(theta))
      throw ConfigError("theta must be finite (got " + format_double(theta) + ")");
    positive(omega, "omega");
    positive(gamma, "gamma");
    // Two excitations can reach the mode, so anything below 2 clips physics.
    if (n_max < 2)
      throw ConfigError("n_max must be at least 2 (got " + std::to_string(n_max) + ")");
    if (!(t_start >= 0.0) || !std::isfinite(t_start))
      throw ConfigError("t_start must be >= 0 (got " + format_double(t_start) + ")");
    if (!(t_max > t_start) || !std::isfinite(t_max))
      throw ConfigError("t_max must exceed t_start (got " + format_double(t_max) + ")");
    if (points < 2)
      throw ConfigError("points must be at least 2 (got " + std::to_string(points) + ")");
    if (alpha_points < 2)
      throw ConfigError("alpha_points must be at least 2 (got " +
                        std::to_string(alpha_points) + ")");
    if (threads < 0)
      throw ConfigError("threads must be >= 0 (got " + std::to_string(threads) + ")");
    positive(zero_tol, "zero_tol");
    positive(validation.hermiticity_tol, "herm_tol");
    positive(validation.trace_tol, "trace_tol");
    positive(validation.positivity_floor, "positivity_floor");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_double_value(const std::string& key, const std::string& value,
                                 int line_no) {
  double out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                      "' expects a number (got '" + value + "')");
  return out;
}

inline int parse_int_value(const std::string& key, const std::string& value, int line_no) {
  int out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                      "' expects an integer (got '" + value + "')");
  return out;
}

}  // namespace detail

// Parses a key=value document ('#' starts a comment, blank lines ignored)
// on top of `base` and returns the validated result. Unknown keys and
// out-of-range values are rejected with the offending line and key named.
inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
  std::istringstream lines{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");

    const auto num = [&] { return detail::parse_double_value(key, value, line_no); };
    const auto integer = [&] { return detail::parse_int_value(key, value, line_no); };
    try {
      if (key == "backend") base.backend = backend_from_name(value);
      else if (key == "family") base.family = family_from_name(value);
      else if (key == "format") base.format = format_from_name(value);
      else if (key == "alpha_sq") base.alpha_sq = num();
      else if (key == "theta") base.theta = num();
      else if (key == "omega") base.omega = num();
      else if (key == "gamma") base.gamma = num();
      else if (key == "n_max") base.n_max = integer();
      else if (key == "t_start") base.t_start = num();
      else if (key == "t_max") base.t_max = num();
      else if (key == "points") base.points = integer();
      else if (key == "alpha_points") base.alpha_points = integer();
      else if (key == "alpha_min") base.alpha_min = num();
      else if (key == "alpha_max") base.alpha_max = num();
      else if (key == "out") base.out = value;
      else if (key == "threads") base.threads = integer();
      else if (key == "zero_tol") base.zero_tol = num();
      else if (key == "herm_tol") base.validation.hermiticity_tol = num();
      else if (key == "trace_tol") base.validation.trace_tol = num();
      else if (key == "positivity_floor") base.validation.positivity_floor = num();
      else
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                          "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

namespace detail {

inline std::string csv_metadata(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  std::ostringstream os;
  os << "# pmsim " << kVersion << ' ' << subcommand_name(cfg.subcommand) << '\n';
  os << "# units: rates in gamma0, times in 1/gamma0\n";
  os << "# backend=" << backend_name(cfg.backend) << " family=" << family_name(cfg.family);
  if (cfg.subcommand != Subcommand::kSweep)
    os << " alpha_sq=" << format_double(cfg.alpha_sq);
  os << " theta=" << format_double(cfg.theta) << '\n';
  os << "# omega=" << format_double(cfg.omega) << " gamma=" << format_double(cfg.gamma)
     << " gamma0=" << format_double(p.gamma0()) << " n_max=" << cfg.n_max
     << " strong_coupling=" << (p.strong_coupling() ? "true" : "false") << '\n';
  os << "# grid: t_start=" << format_double(cfg.t_start)
     << " t_max=" << format_double(cfg.t_max) << " points=" << cfg.points << '\n';
  if (cfg.subcommand == Subcommand::kSweep)
    os << "# alpha grid: alpha_min=" << format_double(cfg.alpha_min)
       << " alpha_max=" << format_double(cfg.alpha_max)
       << " alpha_points=" << cfg.alpha_points << '\n';
  os << "# tolerances: zero_tol=" << format_double(cfg.zero_tol)
     << " herm_tol=" << format_double(cfg.validation.hermiticity_tol)
     << " trace_tol=" << format_double(cfg.validation.trace_tol)
     << " positivity_floor=" << format_double(cfg.validation.positivity_floor) << '\n';
  return os.str();
}

inline nlohmann::ordered_json json_metadata(const RunConfig& cfg) {
  const ModelParams p = cfg.model();
  nlohmann::ordered_json j;
  j["tool"] = "pmsim";
  j["version"] = kVersion;
  j["subcommand"] = subcommand_name(cfg.subcommand);
  j["units"] = "rates in gamma0, times in 1/gamma0";
  nlohmann::ordered_json params;
  params["backend"] = backend_name(cfg.backend);
  params["family"] = family_name(cfg.family);
  if (cfg.subcommand != Subcommand::kSweep) params["alpha_sq"] = cfg.alpha_sq;
  params["theta"] = cfg.theta;
  params["omega"] = cfg.omega;
  params["gamma"] = cfg.gamma;
  params["gamma0"] = p.gamma0();
  params["n_max"] = cfg.n_max;
  params["strong_coupling"] = p.strong_coupling();
  j["params"] = params;
  j["grid"] = {{"t_start", cfg.t_start}, {"t_max", cfg.t_max}, {"points", cfg.points}};
  if (cfg.subcommand == Subcommand::kSweep)
    j["alpha_grid"] = {{"alpha_min", cfg.alpha_min},
                       {"alpha_max", cfg.alpha_max},
                       {"alpha_points", cfg.alpha_points}};
  j["tolerances"] = {{"zero_tol", cfg.zero_tol},
                     {"herm_tol", cfg.validation.hermiticity_tol},
                     {"trace_tol", cfg.validation.trace_tol},
                     {"positivity_floor", cfg.validation.positivity_floor}};
  return j;
}

inline nlohmann::ordered_json trace_diagnostics(const ConcurrenceTrace& trace) {
  return {{"x_form_pipeline", trace.x_form_pipeline},
          {"max_off_x", trace.max_off_x},
          {"warn_count", trace.warn_count}};
}

}  // namespace detail

inline std::string render_trace_csv(const RunConfig& cfg, const ConcurrenceTrace& trace) {
  std::ostringstream os;
  os << detail::csv_metadata(cfg);
  os << "# warn_count=" << trace.warn_count << " max_off_x=" << format_double(trace.max_off_x)
     << '\n';
  os << "t,C,C1,C2,pop_minus,trace_err\n";
  for (int k = 0; k < trace.grid.n_points; ++k) {
    const auto i = static_cast<size_t>(k);
    os << format_double(trace.grid.at(k)) << ',' << format_double(trace.c[i]) << ','
       << format_double(trace.c1[i]) << ',' << format_double(trace.c2[i]) << ','
       << format_double(trace.pop_minus[i]) << ',' << format_double(trace.trace_err[i])
       << '\n';
  }
  return os.str();
}

inline std::string render_trace_json(const RunConfig& cfg, const ConcurrenceTrace& trace) {
  nlohmann::ordered_json j = detail::json_metadata(cfg);
  j["diagnostics"] = detail::trace_diagnostics(trace);
  std::vector<double> t(static_cast<size_t>(trace.grid.n_points));
  for (int k = 0; k < trace.grid.n_points; ++k) t[static_cast<size_t>(k)] = trace.grid.at(k);
  j["columns"] = {{"t", t},           {"C", trace.c},
                  {"C1", trace.c1},   {"C2", trace.c2},
                  {"pop_minus", trace.pop_minus}, {"trace_err", trace.trace_err}};
  return j.dump(2) + "\n";
}

inline std::string render_sweep_csv(const RunConfig& cfg, const SweepSurface& surface) {
  std::ostringstream os;
  os << detail::csv_metadata(cfg);
  os << "alpha_sq,t,C\n";
  const int rows = static_cast<int>(surface.alpha_sq.size());
  for (int row = 0; row < rows; ++row) {
    const std::string alpha = format_double(surface.alpha_sq[static_cast<size_t>(row)]);
    for (int k = 0; k < surface.grid.n_points; ++k)
      os << alpha << ',' << format_double(surface.grid.at(k)) << ','
         << format_double(surface.concurrence(row, k)) << '\n';
  }
  return os.str();
}

inline std::string render_sweep_json(const RunConfig& cfg, const SweepSurface& surface,
                                     bool include_data) {
  nlohmann::ordered_json j = detail::json_metadata(cfg);
  std::vector<double> t(static_cast<size_t>(surface.grid.n_points));
  for (int k = 0; k < surface.grid.n_points; ++k)
    t[static_cast<size_t>(k)] = surface.grid.at(k);
  j["alpha_sq"] = surface.alpha_sq;
  j["t"] = t;
  if (include_data) {
    nlohmann::ordered_json data = nlohmann::ordered_json::array();
    for (Eigen::Index row = 0; row < surface.concurrence.rows(); ++row) {
      std::vector<double> line(static_cast<size_t>(surface.grid.n_points));
      for (int k = 0; k < surface.grid.n_points; ++k)
        line[static_cast<size_t>(k)] = surface.concurrence(row, k);
      data.push_back(line);
    }
    j["concurrence"] = data;
  }
  return j.dump(2) + "\n";
}

inline std::string render_steady_json(const RunConfig& cfg, const ComplexMatrix& rho_inf) {
  nlohmann::ordered_json j = detail::json_metadata(cfg);
  nlohmann::ordered_json matrix = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    nlohmann::ordered_json line = nlohmann::ordered_json::array();
    for (int c = 0; c < 4; ++c)
      line.push_back({rho_inf(r, c).real(), rho_inf(r, c).imag()});
    matrix.push_back(line);
  }
  j["state"] = {{"basis", "bare {00,10,01,11}, entries [re,im]"}, {"matrix", matrix}};
  j["concurrence"] = concurrence_general(rho_inf);
  j["pop_minus"] = to_dressed(rho_inf)(basis::kSub, basis::kSub).real();
  return j.dump(2) + "\n";
}

inline std::string render_detect_json(const RunConfig& cfg, const ConcurrenceTrace& trace,
                                      const std::vector<DeathInterval>& intervals) {
  nlohmann::ordered_json j = detail::json_metadata(cfg);
  j["diagnostics"] = detail::trace_diagnostics(trace);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& w : intervals) {
    nlohmann::ordered_json item;
    item["t_death"] = w.t_death;
    if (std::isfinite(w.t_revival)) {
      item["t_revival"] = w.t_revival;
      item["duration"] = w.t_revival - w.t_death;
    } else {
      item["t_revival"] = nullptr;  // entanglement never returns on this grid
      item["duration"] = cfg.t_max - w.t_death;
    }
    item["open_ended"] = !std::isfinite(w.t_revival);
    list.push_back(item);
  }
  j["intervals"] = list;
  j["count"] = intervals.size();
  j["total_death_duration"] = total_death_duration(intervals, cfg.t_max);
  j["horizon"] = cfg.t_max;
  return j.dump(2) + "\n";
}

// Writes to the named file, or to stdout when the path is empty.
inline void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload << std::flush;
    return;
  }
  std::ofstream file(path, std::ios::binary);  // binary keeps LF line ends everywhere
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  file << payload << std::flush;
  if (!file) throw ConfigError("failed while writing output file '" + path + "'");
}

// Executes a validated config. Throws ConfigError for unusable requests and
// ValidationError when the dynamics itself fails its checks.
inline void run(const RunConfig& cfg) {
  cfg.validate();
  const ModelParams params = cfg.model();

  switch (cfg.subcommand) {
    case Subcommand::kTrace: {
      const ConcurrenceTrace trace =
          run_trace(cfg.state(), params, cfg.backend, cfg.time_grid(), cfg.validation);
      write_output(cfg.out, cfg.format == OutputFormat::kCsv
                                ? render_trace_csv(cfg, trace)
                                : render_trace_json(cfg, trace));
      return;
    }
    case Subcommand::kSweep: {
      const SweepSurface surface =
          sweep(cfg.family, linspace(cfg.alpha_min, cfg.alpha_max, cfg.alpha_points), params,
                cfg.backend, cfg.time_grid(), cfg.theta, cfg.threads, cfg.validation);
      if (cfg.format == OutputFormat::kCsv) {
        write_output(cfg.out, render_sweep_csv(cfg, surface));
        // Grids and metadata ride along for plotting tools; stdout runs skip
        // the sidecar since there is no base name to attach it to.
        if (!cfg.out.empty())
          write_output(cfg.out + ".json", render_sweep_json(cfg, surface, false));
      } else {
        write_output(cfg.out, render_sweep_json(cfg, surface, true));
      }
      return;
    }
    case Subcommand::kSteady: {
      if (cfg.backend == Backend::kIndependent)
        throw ConfigError(
            "steady: backend=independent evolves by per-time maps, not a single generator; "
            "use trace with a large t_max instead");
      const ComplexMatrix rho_inf =
          asymptotic_bare_state(initial_state(cfg.state()), params, cfg.backend,
                                cfg.validation);
      write_output(cfg.out, render_steady_json(cfg, rho_inf));
      return;
    }
    case Subcommand::kDetect: {
      const ComplexMatrix rho0 = initial_state(cfg.state());
      const ConcurrenceTrace trace =
          run_trace_from_state(rho0, params, cfg.backend, cfg.time_grid(), cfg.validation);
      const BranchEvaluator evaluator = make_evaluator(rho0, params, cfg.backend);
      const auto intervals = detect_death_intervals(trace, cfg.zero_tol, evaluator);
      write_output(cfg.out, render_detect_json(cfg, trace, intervals));
      return;
    }
  }
  throw ConfigError("unknown subcommand");
}

}  // namespace pseudomode
