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
#include <numbers>
#include <span>
#include <vector>

#include "robustqoc/error.hpp"

namespace robustqoc {

/// CRAB pulses sharing one envelope:
///   u_i(t) = exp(-[(t - tau/2) / (2 sigma)]^2) * sum_k c_{i,k} sin(k pi t / tau),  k = 1..M.
///
/// Coefficients are stored line-major: coefficient k (0-based) of line i is coeffs[i * M + k].
/// Every sine vanishes at t = 0 and t = tau, so u_i(0) = u_i(tau) = 0 for any coefficients.
class ControlPulseSet {
 public:
  static constexpr std::size_t kDefaultHarmonics = 10;

  ControlPulseSet() = default;
  ControlPulseSet(std::size_t n_lines, double tau, std::size_t harmonics = kDefaultHarmonics)
      : ControlPulseSet(n_lines, tau, tau / 4.0, harmonics) {}
  ControlPulseSet(std::size_t n_lines, double tau, double sigma, std::size_t harmonics)
      : n_lines_(n_lines), harmonics_(harmonics), tau_(tau), sigma_(sigma), coeffs_(n_lines * harmonics, 0.0) {
    if (!(tau > 0.0) || !(sigma > 0.0)) throw DomainError("pulse tau and sigma must be positive");
    if (harmonics == 0) throw DomainError("pulse needs at least one harmonic");
  }

  std::size_t n_lines() const { return n_lines_; }
  std::size_t harmonics() const { return harmonics_; }
  std::size_t n_params() const { return coeffs_.size(); }
  double tau() const { return tau_; }
  double sigma() const { return sigma_; }

  std::span<const double> coefficients() const { return coeffs_; }
  std::span<const double> line(std::size_t i) const {
    return std::span<const double>(coeffs_).subspan(i * harmonics_, harmonics_);
  }
  double& coefficient(std::size_t i, std::size_t k) { return coeffs_.at(i * harmonics_ + k); }
  double coefficient(std::size_t i, std::size_t k) const { return coeffs_.at(i * harmonics_ + k); }

  void set_coefficients(std::span<const double> c) {
    if (c.size() != coeffs_.size()) throw DimensionError("coefficient vector has the wrong length");
    coeffs_.assign(c.begin(), c.end());
  }

  double envelope(double t) const {
    const double x = (t - 0.5 * tau_) / (2.0 * sigma_);
    return std::exp(-x * x);
  }

  /// nu_k = k pi / tau for 1-based k.
  double frequency(std::size_t k1) const { return static_cast<double>(k1) * std::numbers::pi / tau_; }

  double value(std::size_t line_index, double t) const {
    if (line_index >= n_lines_) throw DimensionError("pulse line index out of range");
    if (t < 0.0 || t > tau_) throw DomainError("pulse time outside [0, tau]");
    const auto c = line(line_index);
    double sum = 0.0;
    for (std::size_t k = 0; k < harmonics_; ++k) sum += c[k] * std::sin(frequency(k + 1) * t);
    return envelope(t) * sum;
  }

 private:
  std::size_t n_lines_ = 0;
  std::size_t harmonics_ = kDefaultHarmonics;
  double tau_ = 1.0;
  double sigma_ = 0.25;
  std::vector<double> coeffs_;
};

/// Free-function form of ControlPulseSet::value for a single line's coefficients.
inline double pulse_value(std::span<const double> coeffs, double t, double tau, double sigma) {
  if (t < 0.0 || t > tau) throw DomainError("pulse time outside [0, tau]");
  const double x = (t - 0.5 * tau) / (2.0 * sigma);
  double sum = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    sum += coeffs[k] * std::sin(static_cast<double>(k + 1) * std::numbers::pi * t / tau);
  return std::exp(-x * x) * sum;
}

}  // namespace robustqoc
