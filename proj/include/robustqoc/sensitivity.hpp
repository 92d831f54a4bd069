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
#include <functional>
#include <vector>

#include "robustqoc/bath.hpp"
#include "robustqoc/dynamics.hpp"
#include "robustqoc/error.hpp"
#include "robustqoc/lindblad.hpp"
#include "robustqoc/linalg.hpp"

namespace robustqoc {

/// Control-dependent, coupling-independent first-order noise sensitivity.
struct SensitivityReport {
  double d_eff = 0.0;
  /// Accumulated integral of sum_j gamma(omega_j) F~^j, one entry per bath correlation function.
  std::vector<SuperOperator> f_matrices;
  /// || sum_j gamma(omega_j(t_k)) F~^j(t_k) || per grid point.
  std::vector<double> integrand_norms;

  const SuperOperator& f_matrix() const { return f_matrices.front(); }
};

/// F~ = U^dagger F U for the vectorized propagator U = U_S (x) U_S*.
inline SuperOperator interaction_frame_channel(const SuperOperator& u_super, const SuperOperator& f_super) {
  if (u_super.dim() != f_super.dim()) throw DimensionError("interaction-frame transform dimension mismatch");
  return SuperOperator(u_super.matrix().adjoint() * f_super.matrix() * u_super.matrix());
}

namespace detail {

// sum_j gamma(omega_j) F~^j(t_k). Since (U (x) U*)^dag D[F] (U (x) U*) = D[U^dag F U] and
// U^dag |u_n><u_m| U = |U^dag u_n><U^dag u_m|, the interaction-frame sum is the channel sum over
// the rotated basis U^dag |u_n>.
template <class Rate>
Operator frame_integrand(const JumpChannelTable& table, std::size_t k, const Operator& u, const Rate& gamma) {
  Eigen::MatrixXd w(table.dim, table.dim);
  for (Index n = 0; n < table.dim; ++n)
    for (Index m = 0; m < table.dim; ++m) w(n, m) = gamma(table.omega[k](n, m));
  return weighted_channel_sum(u.adjoint() * table.basis[k], w);
}

}  // namespace detail

/// Rate as a function of channel frequency.
using RateFunction = std::function<double(double)>;

/// D_eff = || integral_0^tau sum_j gamma(omega_j(t)) F~^j(t) dt ||_F by the trapezoidal rule on
/// the propagation grid, for an arbitrary rate function.
inline SensitivityReport compute_d_eff(const JumpChannelTable& table, const PropagatorTrack& track,
                                       const RateFunction& gamma, const TimeGrid& grid) {
  if (table.n_points() != grid.n_points() || track.unitaries.size() != grid.n_points())
    throw DimensionError("channel table, propagator and grid lengths differ");
  const Index n = table.dim;
  const double dt = grid.dt();
  SensitivityReport report;
  report.integrand_norms.reserve(grid.n_points());
  Operator acc = Operator::Zero(n * n, n * n);
  for (std::size_t k = 0; k < grid.n_points(); ++k) {
    const Operator integrand = detail::frame_integrand(table, k, track.unitaries[k], gamma);
    report.integrand_norms.push_back(integrand.norm());
    const double w = (k == 0 || k + 1 == grid.n_points()) ? 0.5 * dt : dt;
    acc += w * integrand;
  }
  report.d_eff = acc.norm();
  report.f_matrices.emplace_back(std::move(acc));
  return report;
}

/// D_eff with the thermal bath rates. No coupling operator enters; the control-independent
/// prefactor from the coupling operator's norm is left out.
inline SensitivityReport compute_d_eff(const JumpChannelTable& table, const PropagatorTrack& track,
                                       const BathSpec& bath, const TimeGrid& grid) {
  return compute_d_eff(table, track, [&bath](double w) { return rate_gamma(w, bath); }, grid);
}

/// Both sides of the first-order bound || dU_err/dlambda || <= Tr[A^dag A] * D_eff.
struct BoundCheck {
  double lhs = 0.0;        ///< finite-difference || dU_err/dlambda at lambda = 0 ||_F
  double rhs = 0.0;        ///< Tr[A^dag A] * D_eff
  double d_eff = 0.0;
  double coupling_norm = 0.0;  ///< Tr[A^dag A]
  double slack_ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
  bool holds(double rel_tol = 0.05) const { return lhs <= rhs * (1.0 + rel_tol) + 1e-300; }
};

namespace detail {
inline Operator full_superpropagator(const LiouvillianTrack& lt) {
  const Index m = lt.dim * lt.dim;
  Operator v = Operator::Identity(m, m);
  for (std::size_t k = 0; k < lt.n_steps(); ++k) v = expm(Operator(lt.interval_generator(k).matrix() * lt.dt)) * v;
  return v;
}
}  // namespace detail

/// Finite-difference check of the first-order error bound.
///
/// U_err(tau) = U^dagger(tau) V(tau) is evaluated at lambda = d and 2d and differentiated with
/// the second-order one-sided stencil (-3 U_err(0) + 4 U_err(d) - U_err(2d)) / (2d), U_err(0) = 1.
inline BoundCheck verify_first_order_bound(const ControlSystem& sys, const ControlPulseSet& pulses,
                                           const Operator& a_op, const BathSpec& bath, const TimeGrid& grid,
                                           double delta_lambda) {
  if (!(delta_lambda > 0.0) || delta_lambda > 1e-3) throw DomainError("delta_lambda must lie in (0, 1e-3]");
  const PropagatorTrack track = track_eigensystem(propagate_unitary(sys, pulses, grid));
  const JumpChannelTable table = build_jump_channels(track, grid);
  const SensitivityReport sens = compute_d_eff(table, track, bath, grid);

  const Operator u_super = kron(track.unitaries.back(), track.unitaries.back().conjugate());
  const Index m = u_super.rows();
  const Operator id = Operator::Identity(m, m);
  auto error_operator = [&](double lam) {
    const LiouvillianTrack lt = build_liouvillian(track, table, NoiseChannel(a_op, lam), bath);
    return Operator(u_super.adjoint() * detail::full_superpropagator(lt));
  };
  const Operator e1 = error_operator(delta_lambda);
  const Operator e2 = error_operator(2.0 * delta_lambda);

  BoundCheck out;
  out.d_eff = sens.d_eff;
  out.coupling_norm = (a_op.adjoint() * a_op).trace().real();
  out.rhs = out.coupling_norm * sens.d_eff;
  const double signal = (e1 - id).norm();
  if (out.rhs > 0.0 && signal < 1e-11)
    throw NumericalError("finite-difference signal below rounding level; increase delta_lambda");
  out.lhs = ((4.0 * (e1 - id) - (e2 - id)) / (2.0 * delta_lambda)).norm();
  return out;
}

}  // namespace robustqoc
