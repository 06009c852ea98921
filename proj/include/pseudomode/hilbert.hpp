// Copyright 2026 The pseudomode authors
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

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "pseudomode/errors.hpp"

// Dense Hilbert-space bookkeeping shared by every module.
//
// Conventions, fixed once and used everywhere:
//  - Two-atom bare basis order {|00>, |10>, |01>, |11>}; the first label is
//    atom A, so atom A is the fast index: idx(a,b) = a + 2*b.
//  - Dressed basis order {|0>, |+>, |->, |2>}.
//  - Composite atomic (x) mode spaces are kron(atomic, mode): the mode Fock
//    index n is fast, idx = atomic*fock_dim + n.
//  - Vectorization is column-stacking, so vec(A rho B) = kron(B^T, A) vec(rho).
//    Eigen matrices are column-major, which makes vec/unvec plain Maps.

namespace pseudomode {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace basis {

// Bare two-atom indices.
inline constexpr int kGG = 0;   // |00>
inline constexpr int kEG = 1;   // |10>
inline constexpr int kGE = 2;   // |01>
inline constexpr int kEE = 3;   // |11>

// Dressed indices.
inline constexpr int kGround = 0;      // |0>
inline constexpr int kSuper = 1;       // |+>
inline constexpr int kSub = 2;         // |->
inline constexpr int kDouble = 3;      // |2>

}  // namespace basis

inline ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

// Elementary matrix |i><j| of dimension dim.
inline ComplexMatrix ket_bra(int dim, int i, int j) {
  ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
  e(i, j) = 1.0;
  return e;
}

// Kronecker product, first factor slow: kron(A,B)[i*rB+k, j*cB+l] = A(i,j) B(k,l).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Two-atom operator O_A (x) O_B in the bare basis above. Atom A is the fast
// index, so this is kron(op_b, op_a).
inline ComplexMatrix two_qubit_op(const ComplexMatrix& op_a, const ComplexMatrix& op_b) {
  return kron(op_b, op_a);
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// |0><1| in the single-qubit basis {|0>, |1>}, |1> excited.
inline ComplexMatrix sigma_minus() { return ket_bra(2, 0, 1); }
inline ComplexMatrix sigma_plus() { return ket_bra(2, 1, 0); }

// Unitary mapping bare {|00>,|10>,|01>,|11>} coordinates to dressed
// {|0>,|+>,|->,|2>} coordinates, |+-> = (|10> +- |01>)/sqrt(2).
// Real and involutory: T = T^T = T^-1.
inline ComplexMatrix dressed_transform() {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix t = ComplexMatrix::Zero(4, 4);
  t(basis::kGround, basis::kGG) = 1.0;
  t(basis::kSuper, basis::kEG) = s;
  t(basis::kSuper, basis::kGE) = s;
  t(basis::kSub, basis::kEG) = s;
  t(basis::kSub, basis::kGE) = -s;
  t(basis::kDouble, basis::kEE) = 1.0;
  return t;
}

inline ComplexMatrix to_dressed(const ComplexMatrix& rho_bare) {
  const ComplexMatrix t = dressed_transform();
  return t * rho_bare * t.adjoint();
}

inline ComplexMatrix to_bare(const ComplexMatrix& rho_dressed) {
  const ComplexMatrix t = dressed_transform();
  return t.adjoint() * rho_dressed * t;
}

// Column-stacking vectorization and its inverse.
inline ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0)
    throw std::invalid_argument("unvec: size " + std::to_string(v.size()) +
                                " not divisible by rows " + std::to_string(rows));
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, v.size() / rows);
}

// Superoperators for left/right multiplication under column stacking:
// vec(A rho) = spre(A) vec(rho), vec(rho B) = spost(B) vec(rho).
inline ComplexMatrix spre(const ComplexMatrix& a) {
  return kron(ComplexMatrix::Identity(a.rows(), a.cols()), a);
}

inline ComplexMatrix spost(const ComplexMatrix& b) {
  return kron(b.transpose(), ComplexMatrix::Identity(b.rows(), b.cols()));
}

// Trace over the mode factor of a state on atomic (x) mode, mode index fast.
// Returns the atomic_dim x atomic_dim reduced state.
inline ComplexMatrix partial_trace_pseudomode(const ComplexMatrix& rho_full, int fock_dim) {
  if (rho_full.rows() != rho_full.cols())
    throw std::invalid_argument("partial_trace_pseudomode: state must be square");
  if (fock_dim <= 0 || rho_full.rows() % fock_dim != 0)
    throw std::invalid_argument("partial_trace_pseudomode: dimension " +
                                std::to_string(rho_full.rows()) +
                                " not divisible by fock_dim " + std::to_string(fock_dim));
  const Eigen::Index atomic_dim = rho_full.rows() / fock_dim;
  ComplexMatrix out = ComplexMatrix::Zero(atomic_dim, atomic_dim);
  for (Eigen::Index i = 0; i < atomic_dim; ++i)
    for (Eigen::Index j = 0; j < atomic_dim; ++j)
      for (Eigen::Index n = 0; n < fock_dim; ++n)
        out(i, j) += rho_full(i * fock_dim + n, j * fock_dim + n);
  return out;
}

// Dense matrix exponential (Pade scaling-and-squaring).
inline ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("expm: matrix must be square");
  return a.exp();
}

// --- density-matrix validation -------------------------------------------

struct ValidationOptions {
  double hermiticity_tol = 1e-10;  // max |rho - rho^dag| entry
  double trace_tol = 1e-10;        // |tr(rho) - 1|
  double positivity_floor = 1e-8;  // eigenvalues allowed down to -positivity_floor
  // Drift past tol*warn_factor is reported, past tol*abort_factor it throws.
  double warn_factor = 10.0;
  double abort_factor = 1000.0;
};

struct StateDiagnostics {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double cutoff_population = 0.0;  // top Fock level occupation, 0 when no mode factor
};

enum class ValidationLevel { kOk, kWarn, kAbort };

// Population of the highest Fock level, summed over atomic labels.
inline double cutoff_population(const ComplexMatrix& rho_full, int fock_dim) {
  const Eigen::Index atomic_dim = rho_full.rows() / fock_dim;
  double p = 0.0;
  for (Eigen::Index i = 0; i < atomic_dim; ++i)
    p += rho_full(i * fock_dim + fock_dim - 1, i * fock_dim + fock_dim - 1).real();
  return p;
}

// fock_dim > 0 additionally records the cutoff population diagnostic.
inline StateDiagnostics inspect_state(const ComplexMatrix& rho, int fock_dim = 0) {
  StateDiagnostics d;
  d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es;
  es.compute(((rho + rho.adjoint()) / 2.0), Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  if (fock_dim > 0) d.cutoff_population = cutoff_population(rho, fock_dim);
  return d;
}

inline ValidationLevel classify(const StateDiagnostics& d, const ValidationOptions& opt) {
  const auto level = [](double err, double tol, const ValidationOptions& o) {
    if (err > tol * o.abort_factor) return ValidationLevel::kAbort;
    if (err > tol * o.warn_factor) return ValidationLevel::kWarn;
    return ValidationLevel::kOk;
  };
  ValidationLevel worst = level(d.trace_error, opt.trace_tol, opt);
  const ValidationLevel herm = level(d.hermiticity_error, opt.hermiticity_tol, opt);
  if (herm > worst) worst = herm;
  const double neg = d.min_eigenvalue < 0.0 ? -d.min_eigenvalue : 0.0;
  const ValidationLevel pos = level(neg, opt.positivity_floor, opt);
  if (pos > worst) worst = pos;
  return worst;
}

// Throws ValidationError past the abort threshold; returns diagnostics otherwise.
inline StateDiagnostics validate_density_matrix(const ComplexMatrix& rho,
                                                const ValidationOptions& opt = {},
                                                int fock_dim = 0,
                                                const std::string& where = {}) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("validate_density_matrix: state must be square");
  const StateDiagnostics d = inspect_state(rho, fock_dim);
  if (classify(d, opt) == ValidationLevel::kAbort) {
    throw ValidationError(
        (where.empty() ? std::string("state validation failed") : where + ": state validation failed") +
        " (trace_err=" + std::to_string(d.trace_error) +
        ", herm_err=" + std::to_string(d.hermiticity_error) +
        ", min_eig=" + std::to_string(d.min_eigenvalue) + ")");
  }
  return d;
}

}  // namespace pseudomode
