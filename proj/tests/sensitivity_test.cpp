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

#include <cmath>
#include <iostream>

#include <gtest/gtest.h>

#include "robustqoc/sensitivity.hpp"
#include "support.hpp"

namespace robustqoc {
namespace {

using testing::kDelta;
using testing::Random;

struct Instance {
  TimeGrid grid;
  PropagatorTrack track;
  JumpChannelTable table;
};

Instance make_instance(const ControlSystem& sys, const ControlPulseSet& p, std::size_t steps) {
  Instance in{TimeGrid(p.tau(), steps), {}, {}};
  in.track = track_eigensystem(propagate_unitary(sys, p, in.grid));
  in.table = build_jump_channels(in.track, in.grid);
  return in;
}

Operator ket_bra(Index a, Index b) {
  Operator m = Operator::Zero(2, 2);
  m(a, b) = 1.0;
  return m;
}

TEST(InteractionFrame, IdentityPropagatorLeavesChannel) {
  Random r(101);
  const SuperOperator f(r.matrix(4));
  const SuperOperator ft = interaction_frame_channel(SuperOperator::identity(2), f);
  EXPECT_EQ(ft.matrix(), f.matrix());
}

TEST(InteractionFrame, PreservesNorm) {
  Random r(103);
  const SuperOperator u = unitary_superoperator(r.unitary(3));
  const SuperOperator f = dissipator_superoperator(r.matrix(3));
  EXPECT_NEAR(frobenius_norm(interaction_frame_channel(u, f)), frobenius_norm(f), 1e-12 * frobenius_norm(f));
  EXPECT_THROW(interaction_frame_channel(SuperOperator::identity(2), f), DimensionError);
}

TEST(InteractionFrame, FreeQubitRaisingChannelPicksUpPhase) {
  const double t = 321.0;
  Operator u = Operator::Zero(2, 2);
  u(0, 0) = std::exp(Complex(0.0, -kDelta * t / 2.0));
  u(1, 1) = std::exp(Complex(0.0, kDelta * t / 2.0));
  const SuperOperator us = unitary_superoperator(u);
  const Operator sp = ket_bra(0, 1);
  const Operator id = Operator::Identity(2, 2);
  // Left multiplication by F: U^+ F U = e^{i Delta t} F.
  const SuperOperator left(kron(sp, id));
  const Operator rotated = kron(Operator(std::exp(Complex(0.0, kDelta * t)) * sp), id);
  EXPECT_LT((interaction_frame_channel(us, left).matrix() - rotated).norm(), 1e-13);
  // The dissipator is phase-blind: D[e^{i a} F] = D[F].
  const SuperOperator d = dissipator_superoperator(sp);
  EXPECT_LT((interaction_frame_channel(us, d).matrix() - d.matrix()).norm(), 1e-13);
}

TEST(DEff, FreeQubitMatchesDenseOracle) {
  const double tau = 1000.0;
  const BathSpec bath = testing::thermal_bath();
  const Instance in = make_instance(testing::qubit_system(), ControlPulseSet(2, tau), 200);
  const double d_eff = compute_d_eff(in.table, in.track, bath, in.grid).d_eff;

  // Oracle: dense superoperators on a grid twice as fine, analytic propagator, hand-picked rates.
  // |0><1| raises the energy (omega = +Delta, absorption); |1><0| lowers it (omega = -Delta, emission).
  const std::size_t n = 400;
  const double dt = tau / static_cast<double>(n);
  Operator acc = Operator::Zero(4, 4);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = dt * static_cast<double>(k);
    Operator u = Operator::Zero(2, 2);
    u(0, 0) = std::exp(Complex(0.0, -kDelta * t / 2.0));
    u(1, 1) = std::exp(Complex(0.0, kDelta * t / 2.0));
    const Operator us = kron(u, u.conjugate());
    const Operator integrand = rate_gamma(kDelta, bath) * dissipator_superoperator(ket_bra(0, 1)).matrix() +
                               rate_gamma(-kDelta, bath) * dissipator_superoperator(ket_bra(1, 0)).matrix();
    const double w = (k == 0 || k == n) ? 0.5 * dt : dt;
    acc += w * (us.adjoint() * integrand * us);
  }
  EXPECT_NEAR(d_eff, acc.norm(), 1e-10 * acc.norm());
}

TEST(DEff, DrivenInstanceMatchesChannelByChannelOracle) {
  const double tau = 1000.0;
  const BathSpec bath = testing::thermal_bath();
  const Instance in = make_instance(testing::qubit_system(), testing::driven_pulses(tau), 300);
  const SensitivityReport rep = compute_d_eff(in.table, in.track, bath, in.grid);
  Operator acc = Operator::Zero(4, 4);
  for (std::size_t k = 0; k < in.grid.n_points(); ++k) {
    const SuperOperator us = unitary_superoperator(in.track.unitaries[k]);
    Operator integrand = Operator::Zero(4, 4);
    for (const JumpChannel& ch : in.table.channels_at(k))
      integrand +=
          rate_gamma(ch.omega, bath) * interaction_frame_channel(us, dissipator_superoperator(ch.op)).matrix();
    EXPECT_NEAR(rep.integrand_norms[k], integrand.norm(), 1e-10 * (1.0 + integrand.norm()));
    acc += ((k == 0 || k + 1 == in.grid.n_points()) ? 0.5 : 1.0) * in.grid.dt() * integrand;
  }
  EXPECT_NEAR(rep.d_eff, acc.norm(), 1e-10 * acc.norm());
  EXPECT_LT((rep.f_matrix().matrix() - acc).norm(), 1e-10 * acc.norm());
}

TEST(DEff, ScalesLinearlyWithRates) {
  const double tau = 1000.0;
  const BathSpec bath = testing::thermal_bath();
  const Instance in = make_instance(testing::qubit_system(), testing::driven_pulses(tau), 200);
  const double base = compute_d_eff(in.table, in.track, bath, in.grid).d_eff;
  const double doubled =
      compute_d_eff(in.table, in.track, [&](double w) { return 2.0 * rate_gamma(w, bath); }, in.grid).d_eff;
  EXPECT_GT(base, 0.0);
  EXPECT_NEAR(doubled, 2.0 * base, 1e-14 * base);
}

TEST(DEff, VanishesForVanishingDuration) {
  const BathSpec bath = testing::thermal_bath();
  const Instance in = make_instance(testing::qubit_system(), ControlPulseSet(2, 1e-6), 1);
  EXPECT_LT(compute_d_eff(in.table, in.track, bath, in.grid).d_eff, 1e-9);
}

TEST(DEff, GridMismatchIsRejected) {
  const Instance in = make_instance(testing::qubit_system(), ControlPulseSet(2, 1000.0), 10);
  EXPECT_THROW(compute_d_eff(in.table, in.track, testing::thermal_bath(), TimeGrid(1000.0, 11)), DimensionError);
}

TEST(FirstOrderBound, RateFreeGeneratorGivesZeroOnBothSides) {
  // No drift and no drive: every frequency is zero, so every rate vanishes.
  const ControlSystem sys(Operator::Zero(2, 2), {0.5 * pauli::x()});
  const BoundCheck b =
      verify_first_order_bound(sys, ControlPulseSet(1, 100.0), pauli::x(), testing::thermal_bath(), TimeGrid(100.0, 50), 1e-4);
  EXPECT_EQ(b.rhs, 0.0);
  EXPECT_LT(b.lhs, 1e-12);
  EXPECT_TRUE(b.holds());
}

TEST(FirstOrderBound, FreeQubitTransverseCoupling) {
  const BoundCheck b = verify_first_order_bound(testing::qubit_system(), ControlPulseSet(2, 1000.0), pauli::x(),
                                                testing::thermal_bath(), TimeGrid(1000.0, 200), 1e-4);
  std::cout << "slack ratio (free qubit, sigma_x): " << b.slack_ratio() << "\n";
  EXPECT_GT(b.lhs, 0.0);
  EXPECT_TRUE(b.holds(0.05));
  EXPECT_NEAR(b.coupling_norm, 2.0, 1e-14);
}

TEST(FirstOrderBound, HoldsForRandomCouplingsWithOneDEff) {
  Random r(107);
  const double tau = 1000.0;
  const ControlPulseSet p = testing::driven_pulses(tau);
  const TimeGrid g(tau, 300);
  const BathSpec bath = testing::thermal_bath();
  double d_eff = -1.0;
  for (int trial = 0; trial < 5; ++trial) {
    const BoundCheck b = verify_first_order_bound(testing::qubit_system(), p, r.hermitian(2), bath, g, 1e-4);
    if (d_eff < 0.0) d_eff = b.d_eff;
    EXPECT_EQ(b.d_eff, d_eff);
    EXPECT_TRUE(b.holds(0.05)) << "lhs " << b.lhs << " rhs " << b.rhs;
  }
}

TEST(FirstOrderBound, RejectsBadStep) {
  const ControlSystem sys = testing::qubit_system();
  const ControlPulseSet p(2, 1000.0);
  EXPECT_THROW(verify_first_order_bound(sys, p, pauli::x(), testing::thermal_bath(), TimeGrid(1000.0, 10), 0.0),
               DomainError);
  EXPECT_THROW(verify_first_order_bound(sys, p, pauli::x(), testing::thermal_bath(), TimeGrid(1000.0, 10), 1e-2),
               DomainError);
}

}  // namespace
}  // namespace robustqoc
