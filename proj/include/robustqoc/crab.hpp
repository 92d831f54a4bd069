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
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "robustqoc/bath.hpp"
#include "robustqoc/dynamics.hpp"
#include "robustqoc/error.hpp"
#include "robustqoc/objectives.hpp"
#include "robustqoc/pulse.hpp"
#include "robustqoc/sensitivity.hpp"

namespace robustqoc {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences, one coordinate at a time.
inline std::vector<double> finite_difference_gradient(const ScalarFunction& f, std::span<const double> x,
                                                      double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericalError("non-finite objective in finite-difference gradient (coordinate " + std::to_string(i) + ")");
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

struct QuasiNewtonOptions {
  std::size_t max_iterations = 500;
  double gradient_step = 1e-4;
  double convergence_tol = 1e-8;  ///< on |J_k - J_{k+1}|
  double gradient_tol = 1e-12;
};

struct QuasiNewtonResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> trace;  ///< best-so-far value after each iteration, trace[0] at the start point
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// BFGS on the inverse Hessian with an Armijo backtracking line search and finite-difference gradients.
///
/// Falls back to steepest descent (inverse Hessian reset) once when the line search fails.
inline QuasiNewtonResult minimize_quasi_newton(const ScalarFunction& f, std::vector<double> x0,
                                               const QuasiNewtonOptions& opts) {
  using Vec = Eigen::VectorXd;
  const auto n = static_cast<Eigen::Index>(x0.size());
  QuasiNewtonResult res;
  std::size_t evals = 0;
  auto value = [&](const Vec& x) {
    ++evals;
    const double v = f(std::span<const double>(x.data(), x.size()));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  auto gradient = [&](const Vec& x) {
    evals += 2 * x.size();
    const auto g = finite_difference_gradient(f, std::span<const double>(x.data(), x.size()), opts.gradient_step);
    return Vec(Eigen::Map<const Vec>(g.data(), n));
  };

  Vec x = Eigen::Map<const Vec>(x0.data(), n);
  double fx = value(x);
  if (!std::isfinite(fx)) throw NumericalError("objective is not finite at the start point");
  res.trace.push_back(fx);
  Vec g = gradient(x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  std::size_t small_changes = 0;

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    if (g.norm() < opts.gradient_tol) {
      res.converged = true;
      break;
    }
    Vec p = -h_inv * g;
    if (g.dot(p) >= 0.0) {
      h_inv.setIdentity();
      fresh = true;
      p = -g;
    }
    constexpr double armijo = 1e-4;
    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Vec x_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + alpha * p;
      f_new = value(x_new);
      if (f_new <= fx + armijo * alpha * g.dot(p)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (fresh) {
        res.converged = true;
        break;
      }
      h_inv.setIdentity();
      fresh = true;
      continue;
    }
    const Vec g_new = gradient(x_new);
    const Vec s = x_new - x;
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) h_inv *= sy / y.dot(y);
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      h_inv = (id - rho * s * y.transpose()) * h_inv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
      fresh = false;
    }
    const double change = fx - f_new;
    x = x_new;
    fx = f_new;
    g = g_new;
    res.trace.push_back(fx);
    res.iterations = it + 1;
    small_changes = change < opts.convergence_tol ? small_changes + 1 : 0;
    if (small_changes >= 2) {
      res.converged = true;
      break;
    }
  }
  res.x.assign(x.data(), x.data() + n);
  res.value = fx;
  res.evaluations = evals;
  return res;
}

/// Optimizer settings; every field is exposed to configuration.
struct OptimizerConfig {
  std::size_t n_restarts = 10;
  double init_amplitude = 0.0;  ///< c_{i,k} ~ U(-a, a); 0 selects pi / tau
  std::size_t max_iterations = 500;
  double gradient_step = 0.0;  ///< 0 selects 1e-4 * init_amplitude
  double convergence_tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  double amplitude(double tau) const { return init_amplitude > 0.0 ? init_amplitude : std::numbers::pi / tau; }
  double step(double tau) const { return gradient_step > 0.0 ? gradient_step : 1e-4 * amplitude(tau); }
};

struct ObjectiveBreakdown {
  double j = 0.0;
  double j0 = 0.0;
  double d_eff = 0.0;
};

/// propagate -> fidelity (and, when needed, eigen-tracking -> channels -> D_eff).
inline ObjectiveBreakdown evaluate_objective(const ControlSystem& sys, const ObjectiveSpec& obj, const BathSpec& bath,
                                             const TimeGrid& grid, const ControlPulseSet& pulses,
                                             bool always_d_eff = true) {
  PropagatorTrack track = propagate_unitary(sys, pulses, grid);
  ObjectiveBreakdown b;
  b.j0 = 1.0 - unitary_task_fidelity(track.unitaries.back(), obj);
  if (obj.c_weight > 0.0 || always_d_eff) {
    track = track_eigensystem(std::move(track));
    const JumpChannelTable table = build_jump_channels(track, grid);
    b.d_eff = compute_d_eff(table, track, bath, grid).d_eff;
  }
  b.j = total_objective(b.j0, b.d_eff, obj.c_weight);
  return b;
}

struct RestartOutcome {
  std::size_t restart = 0;
  bool ok = false;
  std::string diagnostic;
  double start_value = 0.0;
  QuasiNewtonResult run;
};

struct OptimizationResult {
  ControlPulseSet pulses;
  ObjectiveBreakdown objective;
  std::vector<double> trace;  ///< best-so-far J per iteration of the winning restart
  std::size_t restart = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> start_values;       ///< J at every start point (discarded ones excluded)
  std::vector<double> restart_values;     ///< final J per surviving restart
  std::vector<std::string> diagnostics;   ///< discarded restarts
};

/// Independent, deterministic start points: restart r draws from mt19937_64(seed + r).
inline std::vector<double> restart_start_point(std::uint64_t seed, std::size_t restart, std::size_t n_params,
                                               double amplitude) {
  std::mt19937_64 rng(seed + restart);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  std::vector<double> c(n_params);
  for (auto& v : c) v = dist(rng);
  return c;
}

/// Multi-start quasi-Newton minimisation of J = J0 + c D_eff over the CRAB coefficients.
inline OptimizationResult optimize(const ControlSystem& sys, const ObjectiveSpec& obj, const BathSpec& bath,
                                   const TimeGrid& grid, const OptimizerConfig& cfg) {
  if (cfg.n_restarts == 0) throw DomainError("optimizer needs at least one restart");
  obj.validate();
  bath.validate();
  const auto started = std::chrono::steady_clock::now();
  const double scale = cfg.amplitude(grid.tau);
  const ControlPulseSet prototype(sys.n_controls(), grid.tau);
  const std::size_t n_params = prototype.n_params();

  // Work in coefficients divided by the initial amplitude so the problem is O(1)-scaled.
  auto make_objective = [&](ControlPulseSet& scratch) -> ScalarFunction {
    return [&, scale](std::span<const double> x) {
      std::vector<double> c(x.begin(), x.end());
      for (auto& v : c) v *= scale;
      scratch.set_coefficients(c);
      try {
        return evaluate_objective(sys, obj, bath, grid, scratch, false).j;
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
  };

  QuasiNewtonOptions qn;
  qn.max_iterations = cfg.max_iterations;
  qn.gradient_step = cfg.step(grid.tau) / scale;
  qn.convergence_tol = cfg.convergence_tol;

  std::vector<RestartOutcome> outcomes(cfg.n_restarts);
  auto run_restart = [&](std::size_t r) {
    RestartOutcome& out = outcomes[r];
    out.restart = r;
    ControlPulseSet scratch = prototype;
    const ScalarFunction f = make_objective(scratch);
    std::vector<double> x0 = restart_start_point(cfg.seed, r, n_params, scale);
    for (auto& v : x0) v /= scale;
    try {
      out.start_value = f(x0);
      if (!std::isfinite(out.start_value)) throw NumericalError("objective not finite at start point");
      out.run = minimize_quasi_newton(f, x0, qn);
      out.ok = std::isfinite(out.run.value);
      if (!out.ok) out.diagnostic = "restart " + std::to_string(r) + ": non-finite objective";
    } catch (const Error& e) {
      out.ok = false;
      out.diagnostic = "restart " + std::to_string(r) + ": " + e.what();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.n_restarts));
  if (jobs == 1) {
    for (std::size_t r = 0; r < cfg.n_restarts; ++r) run_restart(r);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t r = w; r < cfg.n_restarts; r += jobs) run_restart(r);
      });
    }
    for (auto& t : workers) t.join();
  }

  OptimizationResult result;
  result.seed = cfg.seed;
  result.pulses = prototype;
  const RestartOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      result.diagnostics.push_back(o.diagnostic);
      continue;
    }
    result.start_values.push_back(o.start_value);
    result.restart_values.push_back(o.run.value);
    result.evaluations += o.run.evaluations;
    if (best == nullptr || o.run.value < best->run.value) best = &o;  // ties keep the lower index
  }
  if (best == nullptr) throw OptimizationError("every restart failed");

  std::vector<double> c = best->run.x;
  for (auto& v : c) v *= scale;
  result.pulses.set_coefficients(c);
  result.objective = evaluate_objective(sys, obj, bath, grid, result.pulses, true);
  result.trace = best->run.trace;
  result.restart = best->restart;
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

/// max_t |u_i(t)| over the grid midpoints, per control line.
inline std::vector<double> max_amplitudes(const ControlPulseSet& pulses, const TimeGrid& grid) {
  std::vector<double> out(pulses.n_lines(), 0.0);
  for (std::size_t k = 0; k <= grid.n_steps; ++k)
    for (std::size_t i = 0; i < pulses.n_lines(); ++i)
      out[i] = std::max(out[i], std::abs(pulses.value(i, grid.time(k))));
  return out;
}

}  // namespace robustqoc
