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
#include <numbers>

#include "robustqoc/error.hpp"

namespace robustqoc {

/// Thermal bosonic bath with super-Ohmic spectral density J(w) = w^3 / wc^2 * exp(-w / wc).
struct BathSpec {
  double omega_c = 0.0;  ///< cutoff frequency (a.u.)
  double beta = 0.0;     ///< inverse temperature (a.u., k_B = 1)
  /// |w| at or below this is treated as a zero-frequency (dephasing) channel.
  double zero_frequency_tol = 0.0;

  BathSpec() = default;
  BathSpec(double wc, double b, double zero_tol = 0.0) : omega_c(wc), beta(b), zero_frequency_tol(zero_tol) {
    validate();
  }

  void validate() const {
    if (!(omega_c > 0.0) || !(beta > 0.0)) throw DomainError("bath requires omega_c > 0 and beta > 0");
    if (!(zero_frequency_tol >= 0.0)) throw DomainError("zero-frequency tolerance must be nonnegative");
  }
};

inline double spectral_density(double omega, const BathSpec& bath) {
  if (omega < 0.0) throw DomainError("spectral density is defined for omega >= 0");
  return omega * omega * omega / (bath.omega_c * bath.omega_c) * std::exp(-omega / bath.omega_c);
}

/// Bose-Einstein occupation 1 / (exp(beta w) - 1).
inline double occupation(double omega, const BathSpec& bath) {
  if (!(omega > 0.0)) throw DomainError("occupation is defined for omega > 0");
  return 1.0 / std::expm1(bath.beta * omega);
}

/// One-sided bath rate at frequency omega.
///
/// Negative frequencies carry emission, 2 pi J(|w|)(N(|w|) + 1); positive frequencies carry
/// absorption, 2 pi J(w) N(w). Frequencies within the zero tolerance give 0, which is the
/// limit of the super-Ohmic density at w -> 0. Zero-frequency half-weighting of conjugate jump
/// pairs is not applied here: the dissipator enumerates every ordered channel exactly once.
inline double rate_gamma(double omega, const BathSpec& bath) {
  const double w = std::abs(omega);
  if (w <= bath.zero_frequency_tol || w == 0.0) return 0.0;
  const double j = spectral_density(w, bath);
  const double n = occupation(w, bath);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return omega < 0.0 ? two_pi * j * (n + 1.0) : two_pi * j * n;
}

}  // namespace robustqoc
