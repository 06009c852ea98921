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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "pseudomode/errors.hpp"
#include "pseudomode/hilbert.hpp"

// Wootters concurrence of two-atom states in the bare basis, both the general
// spin-flip eigenvalue form and the closed form for X-shaped states. The
// evolutions in this model preserve the X shape, so the closed form carries
// the pipeline and the general form cross-checks it.

namespace pseudomode {

// X-shaped state, bare basis {|00>,|10>,|01>,|11>}:
//   diag(a, b, c, d), outer coherence w = <00|rho|11>, inner z = <10|rho|01>.
struct XState {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  Complex w{0.0, 0.0};
  Complex z{0.0, 0.0};
};

inline XState x_state_from_matrix(const ComplexMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("x_state_from_matrix: expected a 4x4 state");
  XState x;
  x.a = rho(basis::kGG, basis::kGG).real();
  x.b = rho(basis::kEG, basis::kEG).real();
  x.c = rho(basis::kGE, basis::kGE).real();
  x.d = rho(basis::kEE, basis::kEE).real();
  x.w = rho(basis::kGG, basis::kEE);
  x.z = rho(basis::kEG, basis::kGE);
  return x;
}

inline ComplexMatrix x_state_to_matrix(const XState& x) {
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(basis::kGG, basis::kGG) = x.a;
  rho(basis::kEG, basis::kEG) = x.b;
  rho(basis::kGE, basis::kGE) = x.c;
  rho(basis::kEE, basis::kEE) = x.d;
  rho(basis::kGG, basis::kEE) = x.w;
  rho(basis::kEE, basis::kGG) = std::conj(x.w);
  rho(basis::kEG, basis::kGE) = x.z;
  rho(basis::kGE, basis::kEG) = std::conj(x.z);
  return rho;
}

// Throws unless populations are non-negative and normalized and the
// coherences obey the positivity bounds |w|^2 <= ad, |z|^2 <= bc (up to tol).
inline void validate_x_state(const XState& x, double tol = 1e-8) {
  const double pops[4] = {x.a, x.b, x.c, x.d};
  for (const double p : pops)
    if (p < -tol)
      throw std::invalid_argument("XState: negative population " + std::to_string(p));
  const double sum = x.a + x.b + x.c + x.d;
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("XState: populations sum to " + std::to_string(sum));
  if (std::norm(x.w) > x.a * x.d + tol)
    throw std::invalid_argument("XState: |w|^2 exceeds a*d");
  if (std::norm(x.z) > x.b * x.c + tol)
    throw std::invalid_argument("XState: |z|^2 exceeds b*c");
}

struct XFormCheck {
  bool is_x_form = false;
  double max_off_x = 0.0;  // largest magnitude outside the X pattern
};

inline XFormCheck is_x_form(const ComplexMatrix& rho, double tol = 1e-10) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("is_x_form: expected a 4x4 state");
  XFormCheck out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const bool on_pattern = (i == j) || (i + j == 3);
      if (!on_pattern) out.max_off_x = std::max(out.max_off_x, std::abs(rho(i, j)));
    }
  out.is_x_form = out.max_off_x <= tol;
  return out;
}

// The two competing branches of the X-state closed form:
//   C1 = 2(|w| - sqrt(bc)) driven by the outer coherence,
//   C2 = 2(|z| - sqrt(ad)) driven by the one-excitation coherence,
// concurrence = max(0, C1, C2). Keeping the signed branches makes
// disentanglement intervals detectable as max(C1,C2) < 0.
struct XConcurrence {
  double c1 = 0.0;
  double c2 = 0.0;
  double value = 0.0;
};

inline XConcurrence concurrence_x_branches(const XState& x, double tol = 1e-8) {
  validate_x_state(x, tol);
  XConcurrence out;
  out.c1 = 2.0 * (std::abs(x.w) - std::sqrt(std::max(0.0, x.b) * std::max(0.0, x.c)));
  out.c2 = 2.0 * (std::abs(x.z) - std::sqrt(std::max(0.0, x.a) * std::max(0.0, x.d)));
  out.value = std::clamp(std::max({0.0, out.c1, out.c2}), 0.0, 1.0);
  return out;
}

inline double concurrence_x(const XState& x, double tol = 1e-8) {
  return concurrence_x_branches(x, tol).value;
}

// General Wootters form: eigenvalues of rho (sigma_y x sigma_y) rho^*
// (sigma_y x sigma_y) in decreasing order, C = sqrt(l1)-sqrt(l2)-sqrt(l3)-sqrt(l4).
// The eigenvalues are non-negative up to roundoff; anything below -1e-10 means
// the input was not a state and is an error.
inline double concurrence_general(const ComplexMatrix& rho, const ValidationOptions& opt = {}) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("concurrence_general: expected a 4x4 state");
  validate_density_matrix(rho, opt, 0, "concurrence_general");
  const ComplexMatrix yy = two_qubit_op(pauli_y(), pauli_y());
  const ComplexMatrix r = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<ComplexMatrix> es(r, false);
  if (es.info() != Eigen::Success)
    throw ValidationError("concurrence_general: eigensolver did not converge");
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re < -1e-10)
      throw ValidationError("concurrence_general: spin-flip spectrum has eigenvalue " +
                            std::to_string(re));
    lam[i] = std::sqrt(std::max(0.0, re));
  }
  std::sort(lam.begin(), lam.end(), std::greater<double>());
  const double c = lam[0] - lam[1] - lam[2] - lam[3];
  return std::clamp(c, 0.0, 1.0);
}

}  // namespace pseudomode
