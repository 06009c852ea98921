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

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pseudomode/errors.hpp"
#include "pseudomode/hilbert.hpp"
#include "pseudomode/model.hpp"

// Time evolution under a vectorized generator, two independent routes:
// a dense step propagator expm(L dt) applied repeatedly, and an adaptive
// embedded Dormand-Prince 5(4) integrator. The two share no numerics, so
// their agreement is a real cross-check.

namespace pseudomode {

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 50.0;
  int n_points = 1001;

  void validate() const {
    if (!(t_start >= 0.0)) throw std::invalid_argument("TimeGrid: t_start must be >= 0");
    if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
    if (n_points < 2) throw std::invalid_argument("TimeGrid: n_points must be at least 2");
  }
  double dt() const { return (t_end - t_start) / (n_points - 1); }
  double at(int k) const {
    return t_start + (t_end - t_start) * (static_cast<double>(k) / (n_points - 1));
  }
};

struct Trajectory {
  TimeGrid grid;
  std::vector<ComplexMatrix> states;
  std::vector<StateDiagnostics> diagnostics;
  int warn_count = 0;  // grid points past the 10x warn threshold
};

namespace detail {

inline void check_state_dims(const Liouvillian& l, const ComplexMatrix& rho0, const char* where) {
  if (rho0.rows() != l.dim || rho0.cols() != l.dim)
    throw std::invalid_argument(std::string(where) + ": initial state dimension " +
                                std::to_string(rho0.rows()) + " does not match generator dim " +
                                std::to_string(l.dim));
  if (l.matrix.rows() != l.dim * l.dim || l.matrix.rows() != l.matrix.cols())
    throw std::invalid_argument(std::string(where) + ": generator matrix shape is inconsistent");
}

inline void note_warnings(const char* where, int warn_count) {
  if (warn_count > 0)
    std::cerr << where << ": " << warn_count
              << " grid point(s) exceeded 10x the state tolerances\n";
}

// Dormand-Prince 5(4) tableau (FSAL: stage 7 of an accepted step is stage 1
// of the next).
inline constexpr double kDpC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kDpA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double kDpB5[7] = {35.0 / 384,    0.0,      500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double kDpB4[7] = {5179.0 / 57600,    0.0,        7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// Advance y' = m y from t0 to t1. The step size h and the FSAL stage k1
// persist across calls so consecutive segments cost nothing extra. h_max
// bounds the step so every eigenmode of m stays inside the 5(4) stability
// region: near a flat solution the error estimate sees only the smooth part
// and would otherwise grow h until parasitic fast modes are amplified.
inline void dopri5_advance(const ComplexMatrix& m, ComplexVector& y, double t0, double t1,
                           double rtol, double atol, double h_max, double& h, ComplexVector& k1,
                           bool& k1_valid) {
  if (t1 <= t0) return;
  double t = t0;
  std::vector<ComplexVector> k(7);
  while (true) {
    double h_try = std::min(h, h_max);
    bool last = false;
    if (h_try >= t1 - t) {
      h_try = t1 - t;
      last = true;
    }
    if (h_try < 1e-14 * std::max(1.0, std::abs(t)))
      throw ValidationError("propagate_rk: step size underflow");

    if (!k1_valid) {
      k1 = m * y;
      k1_valid = true;
    }
    k[0] = k1;
    for (int s = 1; s < 7; ++s) {
      ComplexVector ys = y;
      for (int j = 0; j < s; ++j)
        if (kDpA[s][j] != 0.0) ys += (h_try * kDpA[s][j]) * k[j];
      k[s] = m * ys;
    }
    // Stage 7 was evaluated at the 5th-order solution point.
    ComplexVector y_new = y;
    for (int s = 0; s < 6; ++s)
      if (kDpB5[s] != 0.0) y_new += (h_try * kDpB5[s]) * k[s];
    ComplexVector err_vec = ComplexVector::Zero(y.size());
    for (int s = 0; s < 7; ++s) {
      const double d = kDpB5[s] - kDpB4[s];
      if (d != 0.0) err_vec += (h_try * d) * k[s];
    }
    double err_sq = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
      const double e = scale > 0.0 ? std::abs(err_vec(i)) / scale
                                   : std::numeric_limits<double>::infinity();
      err_sq += e * e;
    }
    const double err = std::sqrt(err_sq / static_cast<double>(y.size()));

    if (err <= 1.0) {
      t += h_try;
      y = y_new;
      k1 = k[6];
      if (last) return;
      const double grow =
          err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
      h = std::min(h_try * grow, h_max);
    } else {
      h = h_try * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
}

}  // namespace detail

// Evolve by repeated application of the dense step propagator expm(L dt).
// Every recorded state is validated (warn past 10x tolerance, throw past
// 1000x); a positive t_start is reached with one extra exponential.
inline Trajectory propagate_expm(const Liouvillian& l, const ComplexMatrix& rho0,
                                 const TimeGrid& grid, const ValidationOptions& opt = {}) {
  grid.validate();
  detail::check_state_dims(l, rho0, "propagate_expm");
  Trajectory out;
  out.grid = grid;
  out.states.reserve(grid.n_points);
  out.diagnostics.reserve(grid.n_points);
  const ComplexMatrix step = expm(l.matrix * grid.dt());
  ComplexVector v = vec(rho0);
  if (grid.t_start > 0.0) v = expm(l.matrix * grid.t_start) * v;
  for (int kpt = 0; kpt < grid.n_points; ++kpt) {
    const ComplexMatrix rho = unvec(v, l.dim);
    const StateDiagnostics d = validate_density_matrix(rho, opt, l.fock_dim, "propagate_expm");
    if (classify(d, opt) == ValidationLevel::kWarn) ++out.warn_count;
    out.states.push_back(rho);
    out.diagnostics.push_back(d);
    if (kpt + 1 < grid.n_points) v = step * v;
  }
  detail::note_warnings("propagate_expm", out.warn_count);
  return out;
}

// Adaptive embedded 5(4) integration sampled on the same grid. Errors with
// ValidationError on step-size underflow.
inline Trajectory propagate_rk(const Liouvillian& l, const ComplexMatrix& rho0,
                               const TimeGrid& grid, double rtol = 1e-10, double atol = 1e-12,
                               const ValidationOptions& opt = {}) {
  grid.validate();
  detail::check_state_dims(l, rho0, "propagate_rk");
  if (!(rtol >= 0.0) || !(atol >= 0.0))
    throw std::invalid_argument("propagate_rk: tolerances must be non-negative");
  Trajectory out;
  out.grid = grid;
  out.states.reserve(grid.n_points);
  out.diagnostics.reserve(grid.n_points);

  ComplexVector y = vec(rho0);
  // rho(L) <= ||L||_1 bounds every eigenvalue, so capping h keeps each mode
  // inside the stability region regardless of how flat the solution gets.
  const double norm1 = l.matrix.cwiseAbs().colwise().sum().maxCoeff();
  const double h_max =
      norm1 > 0.0 ? 1.5 / norm1 : std::numeric_limits<double>::infinity();
  double h = std::min(grid.dt() / 4.0, h_max);
  ComplexVector k1;
  bool k1_valid = false;
  if (grid.t_start > 0.0)
    detail::dopri5_advance(l.matrix, y, 0.0, grid.t_start, rtol, atol, h_max, h, k1, k1_valid);
  for (int kpt = 0; kpt < grid.n_points; ++kpt) {
    if (kpt > 0)
      detail::dopri5_advance(l.matrix, y, grid.at(kpt - 1), grid.at(kpt), rtol, atol, h_max, h,
                             k1, k1_valid);
    const ComplexMatrix rho = unvec(y, l.dim);
    const StateDiagnostics d = validate_density_matrix(rho, opt, l.fock_dim, "propagate_rk");
    if (classify(d, opt) == ValidationLevel::kWarn) ++out.warn_count;
    out.states.push_back(rho);
    out.diagnostics.push_back(d);
  }
  detail::note_warnings("propagate_rk", out.warn_count);
  return out;
}

// Long-time limit of exp(L t) rho0. The spectrum classifies the generator:
// any eigenvalue with positive real part is an error, and an undamped
// oscillatory mode (purely imaginary eigenvalue) is an error if rho0 puts
// weight on it, because no limit exists then. The limit itself is computed
// by repeated squaring of a step propagator until every decaying mode is
// below machine precision; the kernel may be multi-dimensional (dark states
// and the coherences among them all persist) and squaring preserves it
// without relying on eigenvector conditioning.
inline ComplexMatrix asymptotic_state(const Liouvillian& l, const ComplexMatrix& rho0,
                                      const ValidationOptions& opt = {}) {
  detail::check_state_dims(l, rho0, "asymptotic_state");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(l.matrix, true);
  if (es.info() != Eigen::Success)
    throw ValidationError("asymptotic_state: eigendecomposition did not converge");
  const double spectral_tol = 1e-10;
  const double projection_tol = 1e-8;
  const auto& lam = es.eigenvalues();
  double slowest_decay = std::numeric_limits<double>::infinity();
  bool has_rotating = false;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i).real() > spectral_tol)
      throw ValidationError("asymptotic_state: generator has a growing mode (Re lambda = " +
                            std::to_string(lam(i).real()) + ")");
    if (lam(i).real() < -spectral_tol)
      slowest_decay = std::min(slowest_decay, -lam(i).real());
    else if (std::abs(lam(i).imag()) > spectral_tol)
      has_rotating = true;
  }

  const ComplexVector v0 = vec(rho0);
  if (has_rotating) {
    // Weight check needs the eigenbasis; tolerable conditioning is enforced
    // through the expansion residual.
    const ComplexMatrix& basis_mat = es.eigenvectors();
    Eigen::FullPivLU<ComplexMatrix> lu(basis_mat);
    if (!lu.isInvertible())
      throw ValidationError("asymptotic_state: generator eigenbasis is singular (defective L)");
    const ComplexVector w = lu.solve(v0);
    if ((basis_mat * w - v0).cwiseAbs().maxCoeff() > 1e-8)
      throw ValidationError("asymptotic_state: eigenbasis expansion lost precision");
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const bool undamped = std::abs(lam(i).real()) <= spectral_tol &&
                            std::abs(lam(i).imag()) > spectral_tol;
      if (undamped && std::abs(w(i)) > projection_tol)
        throw ValidationError(
            "asymptotic_state: undamped oscillatory mode carries weight; no long-time limit");
    }
  }

  // 2^k squarings put the slowest decaying mode at exp(-60) of its weight.
  const int squarings = 10;
  const double horizon =
      std::isfinite(slowest_decay) ? 60.0 / slowest_decay : 1.0;
  ComplexMatrix prop = expm(l.matrix * (horizon / std::pow(2.0, squarings)));
  for (int s = 0; s < squarings; ++s) prop = prop * prop;
  const ComplexMatrix rho_inf = unvec(prop * v0, l.dim);
  validate_density_matrix(rho_inf, opt, l.fock_dim, "asymptotic_state");
  return rho_inf;
}

}  // namespace pseudomode
