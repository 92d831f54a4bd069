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

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "robustqoc/bath.hpp"
#include "robustqoc/crab.hpp"
#include "robustqoc/dynamics.hpp"
#include "robustqoc/error.hpp"
#include "robustqoc/lindblad.hpp"
#include "robustqoc/linalg.hpp"
#include "robustqoc/objectives.hpp"
#include "robustqoc/pulse.hpp"

namespace robustqoc {

enum class Benchmark { transfer2, hadamard, cz };
enum class Strategy { target_only, robust };
enum class StrategySelection { target_only, robust, both };

inline std::string to_string(Benchmark b) {
  switch (b) {
    case Benchmark::transfer2: return "transfer2";
    case Benchmark::hadamard: return "hadamard";
    case Benchmark::cz: return "cz";
  }
  return "?";
}

inline std::string to_string(Strategy s) { return s == Strategy::robust ? "robust" : "target-only"; }

inline Benchmark parse_benchmark(const std::string& s) {
  if (s == "transfer2") return Benchmark::transfer2;
  if (s == "hadamard") return Benchmark::hadamard;
  if (s == "cz") return Benchmark::cz;
  throw ConfigError("unknown task '" + s + "' (expected transfer2, hadamard or cz)");
}

inline StrategySelection parse_strategy_selection(const std::string& s) {
  if (s == "target-only") return StrategySelection::target_only;
  if (s == "robust") return StrategySelection::robust;
  if (s == "both") return StrategySelection::both;
  throw ConfigError("unknown strategy '" + s + "' (expected target-only, robust or both)");
}

/// Everything one benchmark run depends on. All physical quantities in atomic units.
///
/// beta and omega_c default to values derived from delta, so they stay unset until resolved.
struct ExperimentConfig {
  Benchmark task = Benchmark::transfer2;
  double delta = 3e-3;
  std::optional<double> beta;     ///< default 1 / delta
  std::optional<double> omega_c;  ///< default 10x the typical Bohr frequency
  double tau = 1000.0;
  std::size_t n_steps = TimeGrid::kDefaultSteps;
  double c_weight = 1e-2;
  double lambda_max = 0.1;
  std::size_t lambda_points = 21;
  std::size_t ensemble_size = 20;
  std::uint64_t seed = 0;
  std::size_t n_restarts = 4;
  std::size_t max_iterations = 150;
  double init_amplitude_factor = 5.0;  ///< initial coefficients drawn from U(-a, a), a = factor * pi / tau
  double gradient_step = 0.0;          ///< 0 selects 1e-4 * a
  double convergence_tol = 1e-8;
  std::optional<double> bloch_lambda;  ///< coupling used for the Bloch trajectories; default lambda_max

  /// Per-task defaults.
  static ExperimentConfig defaults(Benchmark task) {
    ExperimentConfig c;
    c.task = task;
    if (task == Benchmark::cz) {
      c.c_weight = 2e-3;
      c.n_restarts = 3;
      c.max_iterations = 130;
      c.init_amplitude_factor = 3.0;
    }
    return c;
  }

  Index dim() const { return task == Benchmark::cz ? 4 : 2; }
  double typical_bohr_frequency() const { return task == Benchmark::cz ? 2.0 * delta : delta; }
  double beta_value() const { return beta.value_or(1.0 / delta); }
  double omega_c_value() const { return omega_c.value_or(10.0 * typical_bohr_frequency()); }
  double bloch_lambda_value() const { return bloch_lambda.value_or(lambda_max); }
  double init_amplitude() const { return init_amplitude_factor * std::numbers::pi / tau; }

  BathSpec bath() const { return BathSpec(omega_c_value(), beta_value(), 1e-6 * typical_bohr_frequency()); }
  TimeGrid grid() const { return TimeGrid(tau, n_steps); }

  std::vector<double> lambda_grid() const {
    std::vector<double> out(lambda_points);
    for (std::size_t i = 0; i < lambda_points; ++i)
      out[i] = lambda_points == 1 ? lambda_max : lambda_max * static_cast<double>(i) / static_cast<double>(lambda_points - 1);
    return out;
  }

  OptimizerConfig optimizer(std::size_t jobs) const {
    OptimizerConfig o;
    o.n_restarts = n_restarts;
    o.init_amplitude = init_amplitude();
    o.max_iterations = max_iterations;
    o.gradient_step = gradient_step;
    o.convergence_tol = convergence_tol;
    o.seed = seed;
    o.jobs = jobs;
    return o;
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
    };
    positive(delta, "delta");
    positive(beta_value(), "beta");
    positive(omega_c_value(), "omega_c");
    positive(tau, "tau");
    positive(init_amplitude_factor, "init_amplitude_factor");
    positive(convergence_tol, "convergence_tol");
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) throw ConfigError("lambda_max must be nonnegative");
    if (!(bloch_lambda_value() >= 0.0)) throw ConfigError("bloch_lambda must be nonnegative");
    if (!(c_weight > 0.0)) throw ConfigError("c_weight must be positive (it is the robust strategy's weight)");
    if (!(gradient_step >= 0.0)) throw ConfigError("gradient_step must be nonnegative");
    if (n_steps == 0) throw ConfigError("n_steps must be at least 1");
    if (lambda_points == 0) throw ConfigError("lambda_points must be at least 1");
    if (n_restarts == 0) throw ConfigError("n_restarts must be at least 1");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  return out;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty())
    throw ConfigError("key '" + key + "': '" + v + "' is not a nonnegative integer");
  return out;
}

}  // namespace detail

/// Parses flat `key = value` text. '#' starts a comment; unknown or repeated keys are errors.
///
/// Values not given keep the defaults of `task`. A `task` key, if present, must agree with it.
inline ExperimentConfig parse_config(const std::string& text, Benchmark task) {
  ExperimentConfig c = ExperimentConfig::defaults(task);
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = detail::parse_double(k, v); };
  };
  auto opt_real = [](std::optional<double>& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = detail::parse_double(k, v); };
  };
  auto count = [](std::size_t& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) {
      field = static_cast<std::size_t>(detail::parse_unsigned(k, v));
    };
  };
  const std::map<std::string, Setter> setters = {
      {"task",
       [&](const std::string&, const std::string& v) {
         if (parse_benchmark(v) != task)
           throw ConfigError("config task '" + v + "' disagrees with --task " + to_string(task));
       }},
      {"delta", real(c.delta)},
      {"beta", opt_real(c.beta)},
      {"omega_c", opt_real(c.omega_c)},
      {"tau", real(c.tau)},
      {"n_steps", count(c.n_steps)},
      {"c_weight", real(c.c_weight)},
      {"lambda_max", real(c.lambda_max)},
      {"lambda_points", count(c.lambda_points)},
      {"ensemble_size", count(c.ensemble_size)},
      {"seed", [&](const std::string& k, const std::string& v) { c.seed = detail::parse_unsigned(k, v); }},
      {"n_restarts", count(c.n_restarts)},
      {"max_iterations", count(c.max_iterations)},
      {"init_amplitude_factor", real(c.init_amplitude_factor)},
      {"gradient_step", real(c.gradient_step)},
      {"convergence_tol", real(c.convergence_tol)},
      {"bloch_lambda", opt_real(c.bloch_lambda)},
  };

  std::istringstream in(text);
  std::string line;
  std::map<std::string, int> seen;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (seen.count(key) != 0)
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' repeats line " +
                        std::to_string(seen[key]));
    seen[key] = lineno;
    it->second(key, value);
  }
  c.validate();
  return c;
}

/// (<sigma_x>, <sigma_y>, <sigma_z>) of a qubit state.
inline std::array<double, 3> bloch_vector(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DimensionError("Bloch vector needs a two-level state");
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) r[i] = (rho.op() * pauli::by_index(i + 1)).trace().real();
  return r;
}

/// sigma_mu (x) sigma_nu.
inline Operator pauli_pair(int mu, int nu) { return kron(pauli::by_index(mu), pauli::by_index(nu)); }

/// The physical set-up of one benchmark.
struct BenchmarkProblem {
  ControlSystem system;
  Operator u_target;
  std::optional<DensityMatrix> rho_initial;  ///< state transfer only
  Operator specific_coupling;
  std::optional<DensityMatrix> bloch_initial;  ///< two-level tasks only

  ObjectiveSpec objective(double c) const {
    return rho_initial ? ObjectiveSpec::state_transfer(*rho_initial, u_target, c) : ObjectiveSpec::gate(u_target, c);
  }
};

inline BenchmarkProblem make_problem(const ExperimentConfig& cfg) {
  BenchmarkProblem p;
  const double d = cfg.delta;
  if (cfg.task == Benchmark::cz) {
    p.system = ControlSystem(d * pauli_pair(3, 3), {pauli_pair(2, 0), pauli_pair(0, 2), pauli_pair(3, 0), pauli_pair(0, 3)});
    p.u_target = Operator::Identity(4, 4);
    p.u_target(3, 3) = -1.0;
    p.specific_coupling = pauli_pair(2, 0);
    return p;
  }
  p.system = ControlSystem(0.5 * d * pauli::z(), {0.5 * pauli::x(), 0.5 * pauli::y()});
  p.specific_coupling = pauli::z();
  if (cfg.task == Benchmark::transfer2) {
    ComplexVector minus_x(2);
    minus_x << 1.0, -1.0;
    p.rho_initial = DensityMatrix::pure(minus_x);
    p.bloch_initial = p.rho_initial;
    p.u_target = pauli::z();  // maps rho_{-x} to rho_{+x}
  } else {
    p.u_target = (pauli::x() + pauli::z()) / std::sqrt(2.0);
    p.bloch_initial = DensityMatrix::pure(ComplexVector::Unit(2, 1));  // -z
  }
  return p;
}

/// Seeded random couplings: n . sigma with n uniform on the sphere (qubit), or
/// sum a_{mu nu} sigma_mu (x) sigma_nu with Gaussian a normalised to sum a^2 = 1 (two qubits).
struct RandomCoupling {
  std::vector<double> coefficients;
  Operator op;
};

inline std::vector<RandomCoupling> random_couplings(Benchmark task, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5deece66dULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<RandomCoupling> out;
  out.reserve(count);
  const std::size_t n_coeff = task == Benchmark::cz ? 16 : 3;
  for (std::size_t r = 0; r < count; ++r) {
    RandomCoupling rc;
    double norm2 = 0.0;
    do {
      rc.coefficients.assign(n_coeff, 0.0);
      norm2 = 0.0;
      for (auto& a : rc.coefficients) {
        a = normal(rng);
        norm2 += a * a;
      }
    } while (norm2 < 1e-24);
    for (auto& a : rc.coefficients) a /= std::sqrt(norm2);
    if (task == Benchmark::cz) {
      rc.op = Operator::Zero(4, 4);
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) rc.op += rc.coefficients[static_cast<std::size_t>(4 * mu + nu)] * pauli_pair(mu, nu);
    } else {
      rc.op = rc.coefficients[0] * pauli::x() + rc.coefficients[1] * pauli::y() + rc.coefficients[2] * pauli::z();
    }
    out.push_back(std::move(rc));
  }
  return out;
}

struct FidelityRow {
  double lambda = 0.0;
  Strategy strategy = Strategy::target_only;
  std::string noise_kind;  ///< "specific" or "random"
  std::size_t realization = 0;
  double fidelity = 0.0;
};

struct BlochSample {
  double t = 0.0;
  std::array<double, 3> r{};
  Strategy strategy = Strategy::target_only;
};

/// Summary statistics of one strategy's fidelity curves.
struct CurveSummary {
  std::vector<double> specific;       ///< per lambda
  std::vector<double> random_mean;    ///< per lambda
  std::vector<double> random_stddev;  ///< per lambda (population)
};

struct StrategyRun {
  Strategy strategy = Strategy::target_only;
  double c_weight = 0.0;
  OptimizationResult optimization;
  double noise_free_fidelity = 0.0;  ///< from the final propagator alone
  std::vector<double> max_amplitudes;
  CurveSummary curves;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<double> lambdas;
  std::vector<StrategyRun> runs;
  std::vector<RandomCoupling> couplings;
  std::vector<FidelityRow> specific_rows;
  std::vector<FidelityRow> random_rows;
  std::vector<BlochSample> bloch;
  std::vector<std::string> warnings;
  double wall_time = 0.0;

  const StrategyRun* find(Strategy s) const {
    for (const auto& r : runs)
      if (r.strategy == s) return &r;
    return nullptr;
  }
};

/// (1 - F_target_only) / (1 - F_robust); empty when either strategy is missing or the robust infidelity is zero.
inline std::optional<double> infidelity_ratio(double f_target_only, double f_robust) {
  const double den = 1.0 - f_robust;
  if (!(den > 0.0)) return std::nullopt;
  return (1.0 - f_target_only) / den;
}

using ProgressSink = std::function<void(const std::string&)>;

namespace detail {

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace detail

/// Optimises the selected strategies, then sweeps lambda for the specific coupling and for
/// the random ensemble. Each strategy's pulses are optimised once and reused unchanged for
/// every coupling.
inline RunReport run_benchmark(const ExperimentConfig& cfg, StrategySelection selection, std::size_t jobs = 1,
                               const ProgressSink& progress = {}) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const BenchmarkProblem problem = make_problem(cfg);
  const BathSpec bath = cfg.bath();
  const TimeGrid grid = cfg.grid();

  RunReport report;
  report.config = cfg;
  report.lambdas = cfg.lambda_grid();
  report.couplings = random_couplings(cfg.task, cfg.ensemble_size, cfg.seed);

  std::vector<Strategy> strategies;
  if (selection != StrategySelection::robust) strategies.push_back(Strategy::target_only);
  if (selection != StrategySelection::target_only) strategies.push_back(Strategy::robust);

  for (Strategy s : strategies) {
    StrategyRun run;
    run.strategy = s;
    run.c_weight = s == Strategy::robust ? cfg.c_weight : 0.0;
    const ObjectiveSpec obj = problem.objective(run.c_weight);
    say("optimizing " + to_string(s) + " (" + std::to_string(cfg.n_restarts) + " restarts)");
    OptimizerConfig ocfg = cfg.optimizer(jobs);
    run.optimization = optimize(problem.system, obj, bath, grid, ocfg);
    for (const auto& d : run.optimization.diagnostics) report.warnings.push_back(to_string(s) + ": " + d);
    const ControlPulseSet& pulses = run.optimization.pulses;
    run.max_amplitudes = max_amplitudes(pulses, grid);

    say("evaluating " + to_string(s) + " over " + std::to_string(report.lambdas.size()) + " couplings x " +
        std::to_string(1 + report.couplings.size()) + " channels");
    const PulseDynamics dyn(problem.system, pulses, grid);
    run.noise_free_fidelity = unitary_task_fidelity(dyn.track().unitaries.back(), obj);
    for (const auto& w : dyn.track().warnings) report.warnings.push_back(to_string(s) + ": " + w);
    for (double lam : report.lambdas) {
      const double f = dyn.task_fidelity(obj, NoiseChannel(problem.specific_coupling, lam), bath);
      report.specific_rows.push_back({lam, s, "specific", 0, f});
      run.curves.specific.push_back(f);
      std::vector<double> ensemble;
      ensemble.reserve(report.couplings.size());
      for (std::size_t r = 0; r < report.couplings.size(); ++r) {
        const double fr = dyn.task_fidelity(obj, NoiseChannel(report.couplings[r].op, lam), bath);
        report.random_rows.push_back({lam, s, "random", r, fr});
        ensemble.push_back(fr);
      }
      run.curves.random_mean.push_back(detail::mean(ensemble));
      run.curves.random_stddev.push_back(detail::stddev(ensemble));
    }

    if (problem.bloch_initial) {
      const auto states =
          dyn.trajectory(*problem.bloch_initial, NoiseChannel(problem.specific_coupling, cfg.bloch_lambda_value()), bath);
      for (std::size_t k = 0; k < states.size(); ++k) report.bloch.push_back({grid.time(k), bloch_vector(states[k]), s});
    }
    report.runs.push_back(std::move(run));
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

inline RunReport run_state_transfer(const ExperimentConfig& cfg, StrategySelection sel = StrategySelection::both,
                                    std::size_t jobs = 1, const ProgressSink& progress = {}) {
  if (cfg.task != Benchmark::transfer2) throw ConfigError("run_state_transfer needs task transfer2");
  return run_benchmark(cfg, sel, jobs, progress);
}

inline RunReport run_hadamard(const ExperimentConfig& cfg, StrategySelection sel = StrategySelection::both,
                              std::size_t jobs = 1, const ProgressSink& progress = {}) {
  if (cfg.task != Benchmark::hadamard) throw ConfigError("run_hadamard needs task hadamard");
  return run_benchmark(cfg, sel, jobs, progress);
}

inline RunReport run_cz(const ExperimentConfig& cfg, StrategySelection sel = StrategySelection::both,
                        std::size_t jobs = 1, const ProgressSink& progress = {}) {
  if (cfg.task != Benchmark::cz) throw ConfigError("run_cz needs task cz");
  return run_benchmark(cfg, sel, jobs, progress);
}

}  // namespace robustqoc
