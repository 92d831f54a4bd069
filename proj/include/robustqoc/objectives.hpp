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

#include <cmath>
#include <cstddef>
#include <vector>

#include "robustqoc/bath.hpp"
#include "robustqoc/dynamics.hpp"
#include "robustqoc/error.hpp"
#include "robustqoc/lindblad.hpp"
#include "robustqoc/linalg.hpp"
#include "robustqoc/pulse.hpp"

namespace robustqoc {

enum class TaskKind { state_transfer, gate };

/// What the optimizer is asked to do, and how hard to push robustness.
struct ObjectiveSpec {
  TaskKind task = TaskKind::gate;
  DensityMatrix rho_initial;  ///< state transfer only
  Operator u_target;          ///< rho_target = U_tar rho_initial U_tar^dagger for state transfer
  double c_weight = 0.0;

  static ObjectiveSpec state_transfer(DensityMatrix rho_i, Operator u_tar, double c) {
    ObjectiveSpec s;
    s.task = TaskKind::state_transfer;
    s.rho_initial = std::move(rho_i);
    s.u_target = std::move(u_tar);
    s.c_weight = c;
    s.validate();
    return s;
  }
  static ObjectiveSpec gate(Operator u_tar, double c) {
    ObjectiveSpec s;
    s.task = TaskKind::gate;
    s.u_target = std::move(u_tar);
    s.c_weight = c;
    s.validate();
    return s;
  }

  void validate() const {
    if (unitarity_defect(u_target) > 1e-10) throw DomainError("target must be unitary");
    if (!(c_weight >= 0.0)) throw DomainError("robustness weight c must be nonnegative");
    if (task == TaskKind::state_transfer && rho_initial.dim() != u_target.rows())
      throw DimensionError("initial state and target dimensions differ");
  }

  DensityMatrix rho_target() const {
    return DensityMatrix::unchecked(u_target * rho_initial.op() * u_target.adjoint());
  }
};

struct StateFidelity {
  double value = 0.0;
  bool target_pure = true;
};

/// Tr[rho_f rho_tar] with a purity flag on the target (trace overlap is a fidelity only for pure targets).
inline StateFidelity state_fidelity_checked(const DensityMatrix& rho_f, const DensityMatrix& rho_tar) {
  if (rho_f.dim() != rho_tar.dim()) throw DimensionError("state dimensions differ");
  const Complex tr = rho_f.op().cwiseProduct(rho_tar.op().transpose()).sum();
  if (std::abs(tr.imag()) > 1e-10) throw NumericalError("trace overlap has a non-negligible imaginary part");
  return {tr.real(), std::abs(rho_tar.purity() - 1.0) < 1e-8};
}

inline double state_fidelity(const DensityMatrix& rho_f, const DensityMatrix& rho_tar) {
  return state_fidelity_checked(rho_f, rho_tar).value;
}

/// N^2 - 1 pure states: |j><j| for j < N-1, and (|j> + |k>)/sqrt2, (|j> + i|k>)/sqrt2 for j < k.
inline std::vector<DensityMatrix> initial_state_basis(Index n) {
  if (n < 2) throw DomainError("initial state basis needs dimension >= 2");
  std::vector<DensityMatrix> out;
  out.reserve(static_cast<std::size_t>(n * n - 1));
  for (Index j = 0; j + 1 < n; ++j) out.push_back(DensityMatrix::pure(ComplexVector::Unit(n, j)));
  for (Index j = 0; j < n; ++j) {
    for (Index k = j + 1; k < n; ++k) {
      ComplexVector plus = ComplexVector::Unit(n, j) + ComplexVector::Unit(n, k);
      ComplexVector plus_i = ComplexVector::Unit(n, j) + kI * ComplexVector::Unit(n, k);
      out.push_back(DensityMatrix::pure(plus));
      out.push_back(DensityMatrix::pure(plus_i));
    }
  }
  return out;
}

/// Mean of Tr[U rho U^dag U_tar rho U_tar^dag] over initial_state_basis.
inline double gate_fidelity(const Operator& u_real, const Operator& u_target) {
  if (u_real.rows() != u_target.rows() || u_real.cols() != u_target.cols())
    throw DimensionError("gate dimensions differ");
  const auto basis = initial_state_basis(u_real.rows());
  double sum = 0.0;
  for (const auto& rho : basis) {
    const Operator f = u_real * rho.op() * u_real.adjoint();
    const Operator t = u_target * rho.op() * u_target.adjoint();
    sum += f.cwiseProduct(t.transpose()).sum().real();
  }
  return sum / static_cast<double>(basis.size());
}

/// Noise-free task fidelity of a final propagator.
inline double unitary_task_fidelity(const Operator& u_final, const ObjectiveSpec& obj) {
  if (obj.task == TaskKind::gate) return gate_fidelity(u_final, obj.u_target);
  const DensityMatrix rho_f = DensityMatrix::unchecked(u_final * obj.rho_initial.op() * u_final.adjoint());
  return state_fidelity(rho_f, obj.rho_target());
}

/// J = J0 + c D_eff.
inline double total_objective(double j0, double d_eff, double c) { return j0 + c * d_eff; }

/// Noise-free dynamics of one fixed pulse set, reused across many (coupling, lambda) evaluations.
class PulseDynamics {
 public:
  PulseDynamics(const ControlSystem& sys, const ControlPulseSet& pulses, const TimeGrid& grid)
      : grid_(grid),
        track_(track_eigensystem(propagate_unitary(sys, pulses, grid))),
        table_(build_jump_channels(track_, grid)) {}

  const PropagatorTrack& track() const { return track_; }
  const JumpChannelTable& table() const { return table_; }
  const TimeGrid& grid() const { return grid_; }

  std::vector<Operator> step_propagators(const NoiseChannel& noise, const BathSpec& bath) const {
    return robustqoc::step_propagators(build_liouvillian(track_, table_, noise, bath));
  }

  /// Every state rho(t_k) of one initial state under the given noise.
  std::vector<DensityMatrix> trajectory(const DensityMatrix& rho0, const NoiseChannel& noise,
                                        const BathSpec& bath) const {
    return evolve_with(rho0, step_propagators(noise, bath));
  }

  double task_fidelity(const ObjectiveSpec& obj, const NoiseChannel& noise, const BathSpec& bath) const {
    const std::vector<Operator> steps = step_propagators(noise, bath);
    std::vector<DensityMatrix> starts;
    if (obj.task == TaskKind::gate) {
      starts = initial_state_basis(track_.dim());
    } else {
      starts.push_back(obj.rho_initial);
    }
    double sum = 0.0;
    for (const auto& rho0 : starts) {
      const DensityMatrix rho_f = evolve_with(rho0, steps).back();
      const DensityMatrix rho_t = DensityMatrix::unchecked(obj.u_target * rho0.op() * obj.u_target.adjoint());
      sum += state_fidelity(rho_f, rho_t);
    }
    return sum / static_cast<double>(starts.size());
  }

 private:
  TimeGrid grid_;
  PropagatorTrack track_;
  JumpChannelTable table_;
};

/// Task fidelity with every initial state integrated through the full master equation.
inline double noisy_task_fidelity(const ControlPulseSet& pulses, const ControlSystem& sys, const ObjectiveSpec& obj,
                                  const NoiseChannel& noise, const BathSpec& bath, const TimeGrid& grid) {
  return PulseDynamics(sys, pulses, grid).task_fidelity(obj, noise, bath);
}

}  // namespace robustqoc
