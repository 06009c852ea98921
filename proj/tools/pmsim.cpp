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

// pmsim: concurrence dynamics of two resonant qubits sharing a Lorentzian
// reservoir, modeled as one leaky pseudomode. Exit codes: 0 success, 2 config
// error, 3 numerical validation failure. Errors go to stderr as JSON.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pseudomode/cli.hpp"

namespace {

struct FlagOverrides {
  std::string config_path;
  std::optional<std::string> backend;
  std::optional<std::string> family;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<double> alpha_sq;
  std::optional<double> theta;
  std::optional<double> omega;
  std::optional<double> gamma;
  std::optional<double> t_max;
  std::optional<int> points;
  std::optional<int> alpha_points;
  std::optional<int> threads;
};

void register_options(CLI::App* cmd, FlagOverrides& o) {
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  cmd->add_option("--backend", o.backend,
                  "common_structured | common_markov | independent");
  cmd->add_option("--family", o.family, "entangled | factorized");
  cmd->add_option("--alpha-sq", o.alpha_sq, "ground weight alpha^2 in [0,1]");
  cmd->add_option("--theta", o.theta, "relative phase of the entangled family");
  cmd->add_option("--omega", o.omega, "reservoir coupling Omega (gamma0 units)");
  cmd->add_option("--gamma", o.gamma, "pseudomode width Gamma (gamma0 units)");
  cmd->add_option("--tmax", o.t_max, "end of the time grid (units 1/gamma0)");
  cmd->add_option("--points", o.points, "number of time grid points");
  cmd->add_option("--alpha-points", o.alpha_points, "alpha^2 grid points (sweep)");
  cmd->add_option("--out", o.out, "output path (default: stdout)");
  cmd->add_option("--format", o.format, "csv | json (trace and sweep)");
  cmd->add_option("--threads", o.threads, "sweep workers, 0 = one per hardware thread");
}

void emit_error(const char* kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

pseudomode::RunConfig build_config(pseudomode::Subcommand sub, const FlagOverrides& o) {
  pseudomode::RunConfig cfg;
  cfg.subcommand = sub;
  if (!o.config_path.empty()) {
    std::ifstream file(o.config_path);
    if (!file)
      throw pseudomode::ConfigError("cannot read config file '" + o.config_path + "'");
    std::ostringstream text;
    text << file.rdbuf();
    cfg = pseudomode::parse_config(text.str(), cfg);
    cfg.subcommand = sub;
  }
  if (o.backend) cfg.backend = pseudomode::backend_from_name(*o.backend);
  if (o.family) cfg.family = pseudomode::family_from_name(*o.family);
  if (o.format) cfg.format = pseudomode::format_from_name(*o.format);
  if (o.out) cfg.out = *o.out;
  if (o.alpha_sq) cfg.alpha_sq = *o.alpha_sq;
  if (o.theta) cfg.theta = *o.theta;
  if (o.omega) cfg.omega = *o.omega;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.t_max) cfg.t_max = *o.t_max;
  if (o.points) cfg.points = *o.points;
  if (o.alpha_points) cfg.alpha_points = *o.alpha_points;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-qubit concurrence dynamics in a shared pseudomode reservoir"};
  app.require_subcommand(1);
  FlagOverrides o;
  CLI::App* trace = app.add_subcommand("trace", "concurrence vs time for one initial state");
  CLI::App* sweep = app.add_subcommand("sweep", "concurrence surface over (alpha^2, t)");
  CLI::App* steady = app.add_subcommand("steady", "long-time reduced state and concurrence");
  CLI::App* detect =
      app.add_subcommand("detect", "entanglement death and revival intervals");
  for (CLI::App* cmd : {trace, sweep, steady, detect}) register_options(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    pseudomode::Subcommand sub = pseudomode::Subcommand::kTrace;
    if (sweep->parsed()) sub = pseudomode::Subcommand::kSweep;
    if (steady->parsed()) sub = pseudomode::Subcommand::kSteady;
    if (detect->parsed()) sub = pseudomode::Subcommand::kDetect;
    pseudomode::run(build_config(sub, o));
    return 0;
  } catch (const pseudomode::ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const pseudomode::ValidationError& e) {
    emit_error("validation", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("validation", e.what());
    return 3;
  }
}
