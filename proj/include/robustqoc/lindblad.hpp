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

#include <cstddef>
#include <string>
#include <vector>

#include "robustqoc/bath.hpp"
#include "robustqoc/dynamics.hpp"
#include "robustqoc/error.hpp"
#include "robustqoc/linalg.hpp"

namespace robustqoc {

/// System side of H_I = g A (x) B, with lambda = g^2.
struct NoiseChannel {
  Operator a_op;
  double lambda = 0.0;

  NoiseChannel() = default;
  NoiseChannel(Operator a, double lam) : a_op(std::move(a)), lambda(lam) { validate(); }

  void validate() const {
    if (!is_hermitian(a_op)) throw DomainError("coupling operator must be Hermitian");
    if (!(lambda >= 0.0)) throw DomainError("coupling strength lambda must be nonnegative");
  }
};

/// eta = |Tr(F^dagger A)|.
inline double channel_overlap(const Operator& f, const Operator& a) {
  if (f.rows() != a.rows() || f.cols() != a.cols()) throw DimensionError("channel and coupling dimensions differ");
  return std::abs(f.cwiseProduct(a.conjugate()).sum());
}

/// Sum over all N^2 ordered channels at grid point k of eta_j^2 gamma(omega_j) D[F_j].
///
/// Every conjugate pair appears as two distinct ordered channels and every diagonal channel
/// once, which is the same bookkeeping as splitting into +/- partners with the zero-frequency
/// half weight.
inline SuperOperator channel_dissipator(const JumpChannelTable& table, std::size_t k, const Operator& a_op,
                                        const BathSpec& bath) {
  const Operator& v = table.basis.at(k);
  // eta(n, m) = |Tr(F_(n,m)^dagger A)| = |<u_n|A|u_m>|
  const Eigen::MatrixXd eta = (v.adjoint() * a_op * v).cwiseAbs();
  Eigen::MatrixXd w(table.dim, table.dim);
  for (Index n = 0; n < table.dim; ++n)
    for (Index m = 0; m < table.dim; ++m) w(n, m) = eta(n, m) * eta(n, m) * rate_gamma(table.omega[k](n, m), bath);
  return SuperOperator(weighted_channel_sum(v, w));
}

/// Vectorized generators of the control-dressed master equation.
///
/// dissipators[k] is lambda * sum_j eta_j^2 gamma(omega_j) D[F_j] at grid point t_k. The generator
/// that advances [t_k, t_{k+1}] uses the same midpoint Hamiltonian as the noise-free propagator
/// and the mean of the two endpoint dissipators.
struct LiouvillianTrack {
  Index dim = 0;
  double dt = 0.0;
  std::vector<SuperOperator> coherent;     ///< -i[H (x) 1 - 1 (x) H^T], one per interval
  std::vector<SuperOperator> dissipators;  ///< one per grid point

  std::size_t n_steps() const { return coherent.size(); }

  SuperOperator interval_generator(std::size_t k) const {
    SuperOperator l = coherent.at(k);
    l.matrix() += 0.5 * (dissipators.at(k).matrix() + dissipators.at(k + 1).matrix());
    return l;
  }

  /// L(t_k) with the given instantaneous Hamiltonian.
  SuperOperator point_generator(std::size_t k, const Operator& h) const {
    SuperOperator l = commutator_superoperator(h);
    l += dissipators.at(k);
    return l;
  }
};

inline LiouvillianTrack build_liouvillian(const PropagatorTrack& track, const JumpChannelTable& table,
                                          const NoiseChannel& noise, const BathSpec& bath) {
  noise.validate();
  if (table.n_points() != track.unitaries.size() || track.hamiltonians.size() + 1 != track.unitaries.size())
    throw DimensionError("channel table and propagator are on different grids");
  if (noise.a_op.rows() != track.dim()) throw DimensionError("coupling operator dimension differs from system");

  LiouvillianTrack lt;
  lt.dim = track.dim();
  lt.dt = table.dt;
  lt.coherent.reserve(track.hamiltonians.size());
  for (const Operator& h : track.hamiltonians) lt.coherent.push_back(commutator_superoperator(h));
  lt.dissipators.reserve(table.n_points());
  for (std::size_t k = 0; k < table.n_points(); ++k) {
    if (noise.lambda == 0.0) {
      lt.dissipators.push_back(SuperOperator::zero(lt.dim));
      continue;
    }
    SuperOperator d = channel_dissipator(table, k, noise.a_op, bath);
    d.matrix() *= noise.lambda;
    lt.dissipators.push_back(std::move(d));
  }
  return lt;
}

/// Tolerances checked on every integrated state.
inline constexpr DensityTolerance kEvolutionTolerance{1e-9, 1e-9, -1e-7};

/// exp(L_k dt) for every interval.
inline std::vector<Operator> step_propagators(const LiouvillianTrack& lt) {
  std::vector<Operator> steps;
  steps.reserve(lt.n_steps());
  for (std::size_t k = 0; k < lt.n_steps(); ++k) steps.push_back(expm(Operator(lt.interval_generator(k).matrix() * lt.dt)));
  return steps;
}

namespace detail {
inline void check_evolved(const Operator& rho, std::size_t k) {
  const DensityDefects d = density_defects(rho);
  if (!d.within(kEvolutionTolerance)) {
    throw IntegrationError("density matrix invariants violated at step " + std::to_string(k) + " (hermiticity " +
                           std::to_string(d.hermiticity) + ", trace " + std::to_string(d.trace) + ", min eig " +
                           std::to_string(d.min_eigenvalue) + "); reduce dt");
  }
}
}  // namespace detail

/// Propagates a state through precomputed step propagators, returning rho(t_k) for k = 0..n.
inline std::vector<DensityMatrix> evolve_with(const DensityMatrix& rho0, const std::vector<Operator>& steps) {
  std::vector<DensityMatrix> out;
  out.reserve(steps.size() + 1);
  out.push_back(rho0);
  ComplexVector v = vectorize(rho0.op()).data();
  const Index n = rho0.dim();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].rows() != v.size()) throw DimensionError("state and generator dimensions differ");
    v = steps[k] * v;
    Operator rho = devectorize(VectorizedState(n, v));
    detail::check_evolved(rho, k + 1);
    out.push_back(DensityMatrix::unchecked(std::move(rho)));
  }
  return out;
}

/// |rho(t_{k+1})>> = exp(L_k dt) |rho(t_k)>>.
inline std::vector<DensityMatrix> evolve_master(const DensityMatrix& rho0, const LiouvillianTrack& lt,
                                                const TimeGrid& grid) {
  if (lt.n_steps() != grid.n_steps) throw DimensionError("Liouvillian track and grid differ in length");
  if (rho0.dim() != lt.dim) throw DimensionError("initial state dimension differs from system");
  return evolve_with(rho0, step_propagators(lt));
}

}  // namespace robustqoc
