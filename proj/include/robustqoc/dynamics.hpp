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
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "robustqoc/error.hpp"
#include "robustqoc/linalg.hpp"
#include "robustqoc/pulse.hpp"

namespace robustqoc {

/// Uniform grid t_k = k * tau / n_steps, k = 0..n_steps.
struct TimeGrid {
  double tau = 0.0;
  std::size_t n_steps = 0;

  static constexpr std::size_t kDefaultSteps = 500;

  TimeGrid() = default;
  TimeGrid(double total_time, std::size_t steps) : tau(total_time), n_steps(steps) {
    if (!(tau > 0.0)) throw DomainError("time grid needs tau > 0");
    if (n_steps == 0) throw DomainError("time grid needs at least one step");
  }

  double dt() const { return tau / static_cast<double>(n_steps); }
  double time(std::size_t k) const { return tau * static_cast<double>(k) / static_cast<double>(n_steps); }
  double midpoint(std::size_t k) const { return tau * (static_cast<double>(k) + 0.5) / static_cast<double>(n_steps); }
  std::size_t n_points() const { return n_steps + 1; }
};

/// H_S(t) = H_0 + sum_i u_i(t) H_i.
class ControlSystem {
 public:
  ControlSystem() = default;
  ControlSystem(Operator drift, std::vector<Operator> controls)
      : drift_(std::move(drift)), controls_(std::move(controls)) {
    if (!is_hermitian(drift_)) throw DomainError("drift Hamiltonian must be Hermitian");
    for (const auto& c : controls_) {
      if (c.rows() != drift_.rows() || c.cols() != drift_.cols())
        throw DimensionError("control Hamiltonian dimension differs from drift");
      if (!is_hermitian(c)) throw DomainError("control Hamiltonian must be Hermitian");
    }
  }

  Index dim() const { return drift_.rows(); }
  std::size_t n_controls() const { return controls_.size(); }
  const Operator& drift() const { return drift_; }
  const Operator& control(std::size_t i) const { return controls_.at(i); }

  template <class Amplitudes>
  Operator hamiltonian(const Amplitudes& u) const {
    Operator h = drift_;
    for (std::size_t i = 0; i < controls_.size(); ++i) h += u[i] * controls_[i];
    return h;
  }

 private:
  Operator drift_;
  std::vector<Operator> controls_;
};

/// Amplitude of control line i at time t.
using PulseFunction = std::function<double(std::size_t line, double t)>;

inline PulseFunction as_pulse_function(const ControlPulseSet& pulses) {
  return [&pulses](std::size_t i, double t) { return pulses.value(i, t); };
}

/// Noise-free propagator on the grid with its continuously labelled eigensystem.
///
/// U_k |u_n(t_k)> = exp(-i eps_n(t_k)) |u_n(t_k)>, with eps unwrapped along k.
struct PropagatorTrack {
  std::vector<Operator> unitaries;        ///< U_k, k = 0..n_steps
  std::vector<Operator> hamiltonians;     ///< H_S at the midpoint of step k, k = 0..n_steps-1
  std::vector<Eigen::VectorXd> phases;    ///< eps_n(t_k), filled by track_eigensystem
  std::vector<Operator> eigenvectors;     ///< columns |u_n(t_k)>, filled by track_eigensystem
  std::vector<std::string> warnings;      ///< first few degeneracy diagnostics
  std::size_t ambiguous_matches = 0;

  Index dim() const { return unitaries.empty() ? 0 : unitaries.front().rows(); }
  bool tracked() const { return !phases.empty(); }
};

/// Piecewise-constant propagation with midpoint-sampled controls:
/// U_0 = 1, U_{k+1} = exp(-i H_S(t_{k+1/2}) dt) U_k.
///
/// Throws GridAccuracyError when dt * ||H_S|| >= 0.5 at any midpoint (spectral norm).
inline PropagatorTrack propagate_unitary(const ControlSystem& sys, const PulseFunction& pulse, const TimeGrid& grid) {
  const Index n = sys.dim();
  const double dt = grid.dt();
  PropagatorTrack track;
  track.unitaries.reserve(grid.n_points());
  track.hamiltonians.reserve(grid.n_steps);
  track.unitaries.push_back(Operator::Identity(n, n));
  std::vector<double> u(sys.n_controls());
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double t = grid.midpoint(k);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = pulse(i, t);
    Operator h = sys.hamiltonian(u);
    if (!h.allFinite()) throw NumericalError("non-finite Hamiltonian at t = " + std::to_string(t));
    Eigen::SelfAdjointEigenSolver<Operator> es(h);
    const Eigen::VectorXd& e = es.eigenvalues();
    const double norm = e.cwiseAbs().maxCoeff();
    if (dt * norm >= 0.5) {
      throw GridAccuracyError("dt * ||H_S|| = " + std::to_string(dt * norm) + " >= 0.5 at t = " +
                              std::to_string(t) + "; increase n_steps");
    }
    ComplexVector ph(n);
    for (Index i = 0; i < n; ++i) ph(i) = std::exp(Complex(0.0, -e(i) * dt));
    const Operator step = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    track.unitaries.push_back(step * track.unitaries.back());
    track.hamiltonians.push_back(std::move(h));
  }
  return track;
}

inline PropagatorTrack propagate_unitary(const ControlSystem& sys, const ControlPulseSet& pulses,
                                         const TimeGrid& grid) {
  if (pulses.n_lines() != sys.n_controls())
    throw DimensionError("pulse set has " + std::to_string(pulses.n_lines()) + " lines for " +
                         std::to_string(sys.n_controls()) + " controls");
  return propagate_unitary(sys, as_pulse_function(pulses), grid);
}

namespace detail {

struct Eigensystem {
  ComplexVector values;
  Operator vectors;  // orthonormal columns
};

// Complex Schur form of a normal matrix is diagonal, so Q gives an orthonormal eigenbasis even
// inside degenerate eigenspaces.
inline Eigensystem unitary_eigensystem(const Operator& u) {
  Eigen::ComplexSchur<Operator> schur(u);
  return {schur.matrixT().diagonal(), schur.matrixU()};
}

inline double wrap_to_pi(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

}  // namespace detail

/// Continuous eigen-labelling of an already propagated track.
///
/// Step k+1 is matched to step k by greedy maximal |<u_n(t_k)|u_m(t_{k+1})>|; each new vector's
/// phase is fixed so that overlap is real and nonnegative; eigenphases are unwrapped so each
/// step changes them by less than pi. Step 0 (U = 1, fully degenerate) inherits the basis of
/// step 1, ordered by the position of each vector's largest component.
inline PropagatorTrack track_eigensystem(PropagatorTrack track) {
  const std::size_t n_points = track.unitaries.size();
  if (n_points == 0) throw DomainError("empty propagator track");
  for (std::size_t k = 0; k < n_points; ++k) {
    if (unitarity_defect(track.unitaries[k]) > 1e-10)
      throw NumericalError("propagator not unitary at step " + std::to_string(k));
  }
  const Index n = track.dim();
  track.phases.assign(n_points, Eigen::VectorXd::Zero(n));
  track.eigenvectors.assign(n_points, Operator::Identity(n, n));
  track.warnings.clear();
  track.ambiguous_matches = 0;

  if (n_points > 1) {
    detail::Eigensystem seed = detail::unitary_eigensystem(track.unitaries[1]);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::vector<Index> lead(static_cast<std::size_t>(n));
    for (Index m = 0; m < n; ++m) {
      order[m] = m;
      seed.vectors.col(m).cwiseAbs().maxCoeff(&lead[m]);
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return lead[a] < lead[b]; });
    Operator basis(n, n);
    for (Index m = 0; m < n; ++m) {
      ComplexVector v = seed.vectors.col(order[m]);
      const Complex lead_entry = v(lead[order[m]]);
      if (std::abs(lead_entry) > 0.0) v *= std::conj(lead_entry) / std::abs(lead_entry);
      basis.col(m) = v;
    }
    track.eigenvectors[0] = basis;
  }

  std::vector<char> taken(static_cast<std::size_t>(n));
  std::vector<Index> assigned(static_cast<std::size_t>(n));
  struct Candidate {
    double overlap;
    Index prev;
    Index next;
  };
  std::vector<Candidate> candidates;
  for (std::size_t k = 1; k < n_points; ++k) {
    const detail::Eigensystem es = detail::unitary_eigensystem(track.unitaries[k]);
    const Operator& prev = track.eigenvectors[k - 1];
    const Operator overlaps = prev.adjoint() * es.vectors;  // (n_prev, m_new)

    candidates.clear();
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) candidates.push_back({std::abs(overlaps(a, b)), a, b});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) { return x.overlap > y.overlap; });
    std::fill(taken.begin(), taken.end(), 0);
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    for (const Candidate& c : candidates) {
      if (done[c.prev] || taken[c.next]) continue;
      for (Index b = 0; b < n; ++b) {
        if (b != c.next && !taken[b] && std::abs(std::abs(overlaps(c.prev, b)) - c.overlap) < 1e-6) {
          if (track.warnings.size() < 16)
            track.warnings.push_back("ambiguous eigenvector match at step " + std::to_string(k) + " (label " +
                                     std::to_string(c.prev) + ")");
          ++track.ambiguous_matches;
          break;
        }
      }
      assigned[c.prev] = c.next;
      done[c.prev] = 1;
      taken[c.next] = 1;
    }

    Operator vecs(n, n);
    Eigen::VectorXd eps(n);
    for (Index a = 0; a < n; ++a) {
      const Index b = assigned[a];
      ComplexVector v = es.vectors.col(b);
      const Complex ov = overlaps(a, b);
      if (std::abs(ov) > 0.0) v *= std::conj(ov) / std::abs(ov);
      vecs.col(a) = v;
      const double raw = -std::arg(es.values(b));
      const double before = track.phases[k - 1](a);
      eps(a) = before + detail::wrap_to_pi(raw - before);
    }
    track.eigenvectors[k] = std::move(vecs);
    track.phases[k] = std::move(eps);
  }
  return track;
}

/// One dissipation channel F = |u_n><u_m| at one grid point.
struct JumpChannel {
  Index n = 0;
  Index m = 0;
  Operator op;         ///< F_j, unit Frobenius norm
  double phi = 0.0;    ///< eps_n - eps_m
  double omega = 0.0;  ///< d phi / dt
};

/// All N^2 ordered channels (n, m) on every grid point, stored through the eigenbasis:
/// F_(n,m)(t_k) = |u_n(t_k)><u_m(t_k)|, phi = eps_n - eps_m, omega = d phi / dt.
struct JumpChannelTable {
  Index dim = 0;
  double dt = 0.0;
  std::vector<Operator> basis;         ///< eigenvectors as columns, per grid point
  std::vector<Eigen::MatrixXd> phi;    ///< phi(n, m) per grid point
  std::vector<Eigen::MatrixXd> omega;  ///< omega(n, m) per grid point

  std::size_t n_points() const { return basis.size(); }
  std::size_t n_channels() const { return static_cast<std::size_t>(dim * dim); }

  JumpChannel channel(std::size_t k, Index n, Index m) const {
    const Operator& v = basis.at(k);
    return {n, m, v.col(n) * v.col(m).adjoint(), phi[k](n, m), omega[k](n, m)};
  }

  /// Channels at grid point k in the order j = n * N + m.
  std::vector<JumpChannel> channels_at(std::size_t k) const {
    std::vector<JumpChannel> out;
    out.reserve(n_channels());
    for (Index n = 0; n < dim; ++n)
      for (Index m = 0; m < dim; ++m) out.push_back(channel(k, n, m));
    return out;
  }
};

/// d/dt of a uniformly sampled series: central differences inside, second-order one-sided at
/// the ends (plain forward/backward difference when only two samples exist).
inline std::vector<double> grid_derivative(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / dt;
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return d;
}

inline JumpChannelTable build_jump_channels(const PropagatorTrack& track, const TimeGrid& grid) {
  if (!track.tracked()) throw DomainError("build_jump_channels needs a tracked eigensystem");
  const std::size_t n_points = track.unitaries.size();
  if (n_points != grid.n_points()) throw DimensionError("track and grid lengths differ");
  const Index n = track.dim();

  JumpChannelTable table;
  table.dim = n;
  table.dt = grid.dt();
  table.basis = track.eigenvectors;
  table.phi.assign(n_points, Eigen::MatrixXd::Zero(n, n));
  table.omega.assign(n_points, Eigen::MatrixXd::Zero(n, n));

  // Each eigenphase is differentiated once; omega(n, m) = d eps_n/dt - d eps_m/dt is the same
  // linear stencil applied to phi(n, m), and the diagonal is exactly zero.
  std::vector<double> series(n_points);
  std::vector<std::vector<double>> rates(static_cast<std::size_t>(n));
  for (Index a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < n_points; ++k) series[k] = track.phases[k](a);
    rates[a] = grid_derivative(series, grid.dt());
  }
  for (std::size_t k = 0; k < n_points; ++k) {
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        if (a == b) continue;
        table.phi[k](a, b) = track.phases[k](a) - track.phases[k](b);
        table.omega[k](a, b) = rates[a][k] - rates[b][k];
      }
    }
  }
  return table;
}

/// sum_{n,m} w(n, m) D[|v_n><v_m|] for orthonormal columns v, assembled as
/// W w W^dagger - 1/2 (K (x) 1 + 1 (x) K^T) with columns W_n = v_n (x) v_n* and
/// K = sum_{n,m} w(n, m) |v_m><v_m|. Equal to summing dissipator_superoperator channel by channel.
inline Operator weighted_channel_sum(const Operator& v, const Eigen::MatrixXd& w) {
  const Index n = v.rows();
  Operator big_w(n * n, n);
  for (Index c = 0; c < n; ++c)
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) big_w(a * n + b, c) = v(a, c) * std::conj(v(b, c));
  Operator out = big_w * w.cast<Complex>() * big_w.adjoint();
  const Eigen::VectorXd col = w.colwise().sum().transpose();
  const Operator k = v * col.cast<Complex>().asDiagonal() * v.adjoint();
  const Operator kt = k.transpose();
  // -1/2 (K (x) 1 + 1 (x) K^T)
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      for (Index i = 0; i < n; ++i) {
        out(a * n + i, b * n + i) -= 0.5 * k(a, b);
        out(i * n + a, i * n + b) -= 0.5 * kt(a, b);
      }
  return out;
}

}  // namespace robustqoc
