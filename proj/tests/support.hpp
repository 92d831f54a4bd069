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

// Seeded random inputs and small physics fixtures shared by the test binaries.

#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "robustqoc/bath.hpp"
#include "robustqoc/dynamics.hpp"
#include "robustqoc/linalg.hpp"
#include "robustqoc/pulse.hpp"

namespace robustqoc::testing {

inline constexpr double kDelta = 3e-3;

class Random {
 public:
  explicit Random(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Operator matrix(Index rows, Index cols) {
    Operator m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(), normal());
    return m;
  }
  Operator matrix(Index n) { return matrix(n, n); }
  Operator hermitian(Index n) {
    const Operator a = matrix(n);
    return 0.5 * (a + a.adjoint());
  }
  Operator unitary(Index n) {
    Eigen::HouseholderQR<Operator> qr(matrix(n));
    return qr.householderQ() * Operator::Identity(n, n);
  }
  /// Full-rank mixed state.
  Operator density(Index n) {
    const Operator a = matrix(n);
    Operator rho = a * a.adjoint();
    return rho / rho.trace();
  }
  ComplexVector vector(Index n) {
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = Complex(normal(), normal());
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

/// H = (Delta/2) sigma_z + (u_x/2) sigma_x + (u_y/2) sigma_y.
inline ControlSystem qubit_system(double delta = kDelta) {
  return ControlSystem(0.5 * delta * pauli::z(), {0.5 * pauli::x(), 0.5 * pauli::y()});
}

inline BathSpec thermal_bath(double delta = kDelta) { return BathSpec(10.0 * delta, 1.0 / delta, 1e-6 * delta); }

/// A smooth, non-degenerate drive of the qubit used wherever a "driven instance" is needed.
inline ControlPulseSet driven_pulses(double tau, std::uint64_t seed = 7) {
  ControlPulseSet p(2, tau);
  Random r(seed);
  std::vector<double> c(p.n_params());
  for (auto& v : c) v = r.uniform(-1.0, 1.0) * 3.0 * std::numbers::pi / tau;
  p.set_coefficients(c);
  return p;
}

}  // namespace robustqoc::testing
