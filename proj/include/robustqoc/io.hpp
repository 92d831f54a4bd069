// Copyright 2026 The robustqoc Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "robustqoc/error.hpp"
#include "robustqoc/experiments.hpp"

namespace robustqoc {

inline constexpr const char* kVersion = "0.1.0";

/// %.17g: enough digits for every double to parse back to itself.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericalError("refusing to serialise a non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_json_value(std::ostream& os, const nlohmann::json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << nlohmann::json(it.key()).dump() << ": ";
        write_json_value(os, it.value(), indent + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_primitive(); });
      os << "[";
      bool first = true;
      for (const auto& e : j) {
        os << (first ? "" : ",") << (flat ? (first ? "" : " ") : "\n" + inner);
        first = false;
        write_json_value(os, e, indent + 1);
      }
      if (!flat) os << "\n" << pad;
      os << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Pretty-printed JSON with every float at 17 significant digits.
inline std::string to_json_text(const nlohmann::json& j) {
  std::ostringstream os;
  detail::write_json_value(os, j, 0);
  os << "\n";
  return os.str();
}

/// Machine-readable failure record.
inline nlohmann::json error_json(const std::string& kind, const std::string& message) {
  return nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}};
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  return {
      {"task", to_string(c.task)},
      {"delta", c.delta},
      {"beta", c.beta_value()},
      {"omega_c", c.omega_c_value()},
      {"tau", c.tau},
      {"n_steps", c.n_steps},
      {"c_weight", c.c_weight},
      {"lambda_max", c.lambda_max},
      {"lambda_points", c.lambda_points},
      {"ensemble_size", c.ensemble_size},
      {"seed", c.seed},
      {"n_restarts", c.n_restarts},
      {"max_iterations", c.max_iterations},
      {"init_amplitude_factor", c.init_amplitude_factor},
      {"gradient_step", c.gradient_step},
      {"convergence_tol", c.convergence_tol},
      {"bloch_lambda", c.bloch_lambda_value()},
  };
}

namespace detail {

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json strategy_json(const StrategyRun& r) {
  const OptimizationResult& o = r.optimization;
  const auto coeffs = o.pulses.coefficients();
  return {
      {"strategy", to_string(r.strategy)},
      {"c_weight", r.c_weight},
      {"objective", o.objective.j},
      {"infidelity", o.objective.j0},
      {"d_eff", o.objective.d_eff},
      {"noise_free_fidelity", r.noise_free_fidelity},
      {"best_restart", o.restart},
      {"seed", o.seed},
      {"evaluations", o.evaluations},
      {"iterations", o.trace.empty() ? 0 : o.trace.size() - 1},
      {"trace", o.trace},
      {"start_values", o.start_values},
      {"restart_values", o.restart_values},
      {"diagnostics", o.diagnostics},
      {"harmonics", o.pulses.harmonics()},
      {"coefficients", std::vector<double>(coeffs.begin(), coeffs.end())},
      {"max_amplitudes", r.max_amplitudes},
      {"fidelity_specific", r.curves.specific},
      {"fidelity_random_mean", r.curves.random_mean},
      {"fidelity_random_stddev", r.curves.random_stddev},
  };
}

}  // namespace detail

/// The run report; wall-clock timing is deliberately absent so reruns are byte-identical.
inline nlohmann::json report_json(const RunReport& rep) {
  nlohmann::json j;
  j["version"] = {{"robustqoc", kVersion},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  j["config"] = config_json(rep.config);
  j["seeds"] = {{"optimizer_base", rep.config.seed},
                {"optimizer_restart_rule", "mt19937_64(seed + restart)"},
                {"ensemble", rep.config.seed}};
  j["lambda"] = rep.lambdas;
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& r : rep.runs) strategies.push_back(detail::strategy_json(r));
  j["strategies"] = strategies;
  nlohmann::json couplings = nlohmann::json::array();
  for (const auto& c : rep.couplings) couplings.push_back(c.coefficients);
  j["random_couplings"] = couplings;

  const StrategyRun* t = rep.find(Strategy::target_only);
  const StrategyRun* r = rep.find(Strategy::robust);
  nlohmann::json cmp = nlohmann::json::object();
  if (t != nullptr && r != nullptr && !rep.lambdas.empty()) {
    const std::size_t last = rep.lambdas.size() - 1;
    cmp["lambda"] = rep.lambdas[last];
    cmp["infidelity_ratio_specific"] =
        detail::optional_number(infidelity_ratio(t->curves.specific[last], r->curves.specific[last]));
    if (!rep.couplings.empty())
      cmp["infidelity_ratio_random_mean"] =
          detail::optional_number(infidelity_ratio(t->curves.random_mean[last], r->curves.random_mean[last]));
    cmp["d_eff_target_only"] = t->optimization.objective.d_eff;
    cmp["d_eff_robust"] = r->optimization.objective.d_eff;
  }
  j["comparison"] = cmp;
  j["warnings"] = rep.warnings;
  return j;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + p.string() + "' for writing");
  return f;
}

inline void finish(std::ofstream& f, const std::filesystem::path& p) {
  f.flush();
  if (!f) throw IoError("write to '" + p.string() + "' failed");
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  auto f = open_output(p);
  f << text;
  finish(f, p);
}

inline void write_fidelity_csv(const std::filesystem::path& p, const std::vector<FidelityRow>& rows) {
  auto f = open_output(p);
  f << "lambda,strategy,noise_kind,realization,fidelity\n";
  for (const auto& r : rows)
    f << format_double(r.lambda) << ',' << to_string(r.strategy) << ',' << r.noise_kind << ',' << r.realization << ','
      << format_double(r.fidelity) << '\n';
  finish(f, p);
}

}  // namespace detail

/// Names of every file emit_outputs writes, in manifest order.
struct OutputFiles {
  std::vector<std::string> names;
};

/// Writes report.json, fidelity CSVs, per-strategy pulse CSVs, bloch.csv (qubit tasks) and manifest.json.
inline OutputFiles emit_outputs(const RunReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  OutputFiles out;
  nlohmann::json files = nlohmann::json::array();
  auto add = [&](const std::string& name, const std::string& kind, const std::string& figure,
                 const std::string& description) {
    out.names.push_back(name);
    files.push_back({{"file", name}, {"kind", kind}, {"figure_analog", figure}, {"description", description}});
  };

  detail::write_text(dir / "report.json", to_json_text(report_json(rep)));
  add("report.json", "json", "all", "configuration echo, optimisation results, D_eff, summary curves");

  detail::write_fidelity_csv(dir / "fidelity_specific.csv", rep.specific_rows);
  add("fidelity_specific.csv", "csv", "a",
      "fidelity vs lambda for the specific coupling; columns lambda,strategy,noise_kind,realization,fidelity");
  detail::write_fidelity_csv(dir / "fidelity_random.csv", rep.random_rows);
  add("fidelity_random.csv", "csv", "b",
      "fidelity vs lambda for each random coupling; average over realization per (lambda, strategy)");

  const TimeGrid grid = rep.config.grid();
  for (const auto& r : rep.runs) {
    const std::string name = "pulses_" + to_string(r.strategy) + ".csv";
    const auto path = dir / name;
    auto f = detail::open_output(path);
    f << 't';
    for (std::size_t i = 0; i < r.optimization.pulses.n_lines(); ++i) f << ",u_" << i + 1;
    f << '\n';
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
      const double t = grid.time(k);
      f << format_double(t);
      for (std::size_t i = 0; i < r.optimization.pulses.n_lines(); ++i)
        f << ',' << format_double(r.optimization.pulses.value(i, t));
      f << '\n';
    }
    detail::finish(f, path);
    add(name, "csv", "c", "control amplitudes u_i(t_k) of the " + to_string(r.strategy) + " pulses");
  }

  if (!rep.bloch.empty()) {
    const auto path = dir / "bloch.csv";
    auto f = detail::open_output(path);
    f << "t,rx,ry,rz,strategy\n";
    for (const auto& b : rep.bloch)
      f << format_double(b.t) << ',' << format_double(b.r[0]) << ',' << format_double(b.r[1]) << ','
        << format_double(b.r[2]) << ',' << to_string(b.strategy) << '\n';
    detail::finish(f, path);
    add("bloch.csv", "csv", "d", "Bloch vector along the trajectory under the specific coupling at bloch_lambda");
  }

  nlohmann::json manifest = {{"task", to_string(rep.config.task)}, {"files", files}};
  detail::write_text(dir / "manifest.json", to_json_text(manifest));
  out.names.push_back("manifest.json");
  return out;
}

}  // namespace robustqoc
