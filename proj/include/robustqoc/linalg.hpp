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
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "robustqoc/error.hpp"

namespace robustqoc {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Dense complex square matrix on the system Hilbert space (atomic units, hbar = 1).
using Operator = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Operator acting on row-stacked vectorized operators (dimension N^2 x N^2).
class SuperOperator {
 public:
  SuperOperator() = default;
  explicit SuperOperator(Operator m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("superoperator must be square");
    dim_ = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(m_.rows()))));
    if (dim_ * dim_ != m_.rows()) throw DimensionError("superoperator size is not a perfect square");
  }
  static SuperOperator zero(Index dim) { return SuperOperator(Operator::Zero(dim * dim, dim * dim)); }
  static SuperOperator identity(Index dim) {
    return SuperOperator(Operator::Identity(dim * dim, dim * dim));
  }

  Index dim() const { return dim_; }
  const Operator& matrix() const { return m_; }
  Operator& matrix() { return m_; }

  SuperOperator& operator+=(const SuperOperator& o) {
    if (o.m_.rows() != m_.rows()) throw DimensionError("superoperator sum of mismatched dimensions");
    m_ += o.m_;
    return *this;
  }

 private:
  Operator m_;
  Index dim_ = 0;
};

/// Row-stacked image of an N x N operator: data[i*N + j] = rho(i, j).
class VectorizedState {
 public:
  VectorizedState() = default;
  VectorizedState(Index dim, ComplexVector data) : dim_(dim), data_(std::move(data)) {
    if (data_.size() != dim_ * dim_) throw DimensionError("vectorized state must hold N^2 entries");
  }
  Index dim() const { return dim_; }
  const ComplexVector& data() const { return data_; }

 private:
  Index dim_ = 0;
  ComplexVector data_;
};

inline bool is_square(const Operator& m) { return m.rows() == m.cols(); }

inline double hermiticity_defect(const Operator& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Operator& m, double tol = 1e-12) {
  return is_square(m) && hermiticity_defect(m) < tol;
}

inline double unitarity_defect(const Operator& u) {
  return (u.adjoint() * u - Operator::Identity(u.rows(), u.cols())).norm();
}

inline double frobenius_norm(const Operator& m) { return m.norm(); }
inline double frobenius_norm(const SuperOperator& s) { return s.matrix().norm(); }

inline Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline VectorizedState vectorize(const Operator& rho) {
  if (!is_square(rho)) throw DimensionError("vectorize expects a square operator");
  const Index n = rho.rows();
  ComplexVector v(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) v(i * n + j) = rho(i, j);
  return {n, std::move(v)};
}

inline Operator devectorize(const VectorizedState& v) {
  const Index n = v.dim();
  Operator rho(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) rho(i, j) = v.data()(i * n + j);
  return rho;
}

inline VectorizedState apply(const SuperOperator& s, const VectorizedState& v) {
  if (s.dim() != v.dim()) throw DimensionError("superoperator and state dimensions differ");
  return {v.dim(), s.matrix() * v.data()};
}

/// Left/right multiplication superoperators: vec(A rho B) = (A (x) B^T) vec(rho).
inline SuperOperator sandwich(const Operator& left, const Operator& right) {
  return SuperOperator(kron(left, right.transpose()));
}

/// Superoperator of rho -> U rho U^dagger.
inline SuperOperator unitary_superoperator(const Operator& u) { return SuperOperator(kron(u, u.conjugate())); }

/// -i[H (x) 1 - 1 (x) H^T].
inline SuperOperator commutator_superoperator(const Operator& h) {
  const Operator id = Operator::Identity(h.rows(), h.cols());
  return SuperOperator(Complex(0.0, -1.0) * (kron(h, id) - kron(id, h.transpose())));
}

/// GKLS dissipator of a single jump F: F (x) F* - 1/2 [F^dag F (x) 1 + 1 (x) (F^dag F)^T].
inline SuperOperator dissipator_superoperator(const Operator& f) {
  const Operator id = Operator::Identity(f.rows(), f.cols());
  const Operator ff = f.adjoint() * f;
  return SuperOperator(kron(f, f.conjugate()) - 0.5 * (kron(ff, id) + kron(id, ff.transpose())));
}

namespace detail {
inline void require_finite(const Operator& m) {
  if (!m.allFinite()) throw NumericalError("expm: non-finite input");
}
}  // namespace detail

/// Matrix exponential (Pade scaling-and-squaring).
inline Operator expm(const Operator& m) {
  if (!is_square(m)) throw DimensionError("expm expects a square matrix");
  detail::require_finite(m);
  return m.exp();
}

inline SuperOperator expm(const SuperOperator& s) { return SuperOperator(expm(s.matrix())); }

/// exp(-i h t) for Hermitian h via its eigendecomposition; exactly unitary to rounding.
inline Operator unitary_exponential(const Operator& h, double t) {
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  const Eigen::VectorXd& e = es.eigenvalues();
  ComplexVector phases(e.size());
  for (Index i = 0; i < e.size(); ++i) phases(i) = std::exp(Complex(0.0, -e(i) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Tolerances a density matrix is checked against.
struct DensityTolerance {
  double hermiticity = 1e-12;
  double trace = 1e-10;
  double min_eigenvalue = -1e-8;
};

struct DensityDefects {
  double hermiticity = 0.0;
  double trace = 0.0;
  double min_eigenvalue = 0.0;

  bool within(const DensityTolerance& tol) const {
    return hermiticity < tol.hermiticity && trace < tol.trace && min_eigenvalue > tol.min_eigenvalue;
  }
};

inline DensityDefects density_defects(const Operator& rho) {
  DensityDefects d;
  d.hermiticity = hermiticity_defect(rho);
  d.trace = std::abs(rho.trace() - Complex(1.0, 0.0));
  const Operator herm = 0.5 * (rho + rho.adjoint());
  d.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Operator>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return d;
}

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Operator rho, const DensityTolerance& tol = {}) : op_(std::move(rho)) {
    if (!is_square(op_)) throw DimensionError("density matrix must be square");
    const DensityDefects d = density_defects(op_);
    if (!d.within(tol)) {
      throw DomainError("not a valid density matrix (hermiticity " + std::to_string(d.hermiticity) +
                        ", trace error " + std::to_string(d.trace) + ", min eigenvalue " +
                        std::to_string(d.min_eigenvalue) + ")");
    }
  }

  /// Projector onto a (normalised internally) pure state.
  static DensityMatrix pure(const ComplexVector& psi) {
    const ComplexVector v = psi.normalized();
    return DensityMatrix(v * v.adjoint());
  }

  /// Skips validation; for states already produced by a checked integrator.
  static DensityMatrix unchecked(Operator rho) {
    DensityMatrix d;
    d.op_ = std::move(rho);
    return d;
  }

  Index dim() const { return op_.rows(); }
  const Operator& op() const { return op_; }
  double purity() const { return (op_ * op_).trace().real(); }

 private:
  Operator op_;
};

inline VectorizedState vectorize(const DensityMatrix& rho) { return vectorize(rho.op()); }

/// Pauli matrices in the basis {|0>, |1>}, sigma_z = diag(1, -1).
namespace pauli {
inline Operator identity() { return Operator::Identity(2, 2); }
inline Operator x() {
  Operator m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline Operator y() {
  Operator m(2, 2);
  m << Complex(0.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0), Complex(0.0, 0.0);
  return m;
}
inline Operator z() {
  Operator m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
/// sigma_mu for mu = 0 (identity), 1 (x), 2 (y), 3 (z).
inline Operator by_index(int mu) {
  switch (mu) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw std::invalid_argument("pauli index must be in 0..3");
  }
}
}  // namespace pauli

}  // namespace robustqoc
