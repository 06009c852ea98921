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

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pseudomode/errors.hpp"
#include "pseudomode/hilbert.hpp"

// Model layer: two resonant atoms sharing a Lorentzian reservoir, treated
// exactly by coupling the dressed atomic ladder {|0>,|+>,|2>} to one leaky
// pseudomode at rate Gamma. Everything is written in the frame rotating at
// the common resonance frequency, so no bare-energy term appears anywhere,
// and rates are quoted in units of the Markovian collective rate gamma0.

namespace pseudomode {

// Markovian decay rate of the Lorentzian reservoir: gamma0 = 4 Omega^2 / Gamma.
inline double markov_rate(double omega_coupling, double gamma_pseudo) {
  if (!(gamma_pseudo > 0.0))
    throw std::invalid_argument("markov_rate: gamma_pseudo must be positive");
  return 4.0 * omega_coupling * omega_coupling / gamma_pseudo;
}

struct ModelParams {
  double omega_coupling = std::sqrt(0.05);  // Omega, reservoir coupling strength
  double gamma_pseudo = 0.2;                // Gamma, Lorentzian FWHM = pseudomode leak rate
  int fock_cutoff = 2;                      // highest pseudomode Fock level kept

  double gamma0() const { return markov_rate(omega_coupling, gamma_pseudo); }
  // Gamma/Omega < 4 puts the reservoir in the non-Markovian (oscillatory) regime.
  bool strong_coupling() const { return gamma_pseudo < 4.0 * omega_coupling; }
  int fock_dim() const { return fock_cutoff + 1; }

  void validate() const {
    if (!(omega_coupling > 0.0))
      throw std::invalid_argument("ModelParams: omega_coupling must be positive");
    if (!(gamma_pseudo > 0.0))
      throw std::invalid_argument("ModelParams: gamma_pseudo must be positive");
    // Two excitations can enter the mode, so anything below 2 truncates physics.
    if (fock_cutoff < 2)
      throw std::invalid_argument("ModelParams: fock_cutoff must be at least 2");
  }
};

enum class Backend { kCommonStructured, kCommonMarkov, kIndependent };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kCommonStructured: return "common_structured";
    case Backend::kCommonMarkov: return "common_markov";
    case Backend::kIndependent: return "independent";
  }
  return "unknown";
}

inline Backend backend_from_name(const std::string& name) {
  if (name == "common_structured") return Backend::kCommonStructured;
  if (name == "common_markov") return Backend::kCommonMarkov;
  if (name == "independent") return Backend::kIndependent;
  throw ConfigError("backend: unknown value '" + name +
                    "' (expected common_structured, common_markov, or independent)");
}

// Lorentzian reservoir line shape. The peak height is gamma0/pi and the total
// weight is 2 Omega^2.
struct SpectralDensity {
  double omega_coupling = std::sqrt(0.05);
  double gamma_pseudo = 0.2;
  double omega0 = 0.0;  // line center (the common atomic resonance)
};

inline SpectralDensity spectral_density(const ModelParams& p, double omega0 = 0.0) {
  return {p.omega_coupling, p.gamma_pseudo, omega0};
}

inline double spectral_density_value(const SpectralDensity& j, double omega) {
  if (!(j.gamma_pseudo > 0.0))
    throw std::invalid_argument("spectral_density_value: gamma_pseudo must be positive");
  const double d = omega - j.omega0;
  const double half = 0.5 * j.gamma_pseudo;
  return (j.omega_coupling * j.omega_coupling / M_PI) * j.gamma_pseudo / (d * d + half * half);
}

// Vectorized generator: d vec(rho)/dt = matrix * vec(rho), column stacking.
struct Liouvillian {
  ComplexMatrix matrix;
  Backend backend = Backend::kCommonStructured;
  Eigen::Index dim = 0;  // state-space dimension, matrix is dim^2 x dim^2
  int fock_dim = 0;      // mode factor size, 0 when the state has no mode factor
};

inline ComplexMatrix lowering_operator(int fock_dim) {
  if (fock_dim < 1) throw std::invalid_argument("lowering_operator: fock_dim must be positive");
  ComplexMatrix a = ComplexMatrix::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Excitation-conserving coupling between the dressed ladder and the mode,
// with the collective sqrt(2)*Omega enhancement on both rungs:
//   V = sqrt(2) Omega (a|+><0| + a^dag|0><+| + a|2><+| + a^dag|+><2|).
// The subradiant |-> does not appear: it is exactly decoupled.
inline ComplexMatrix coupling_V(const ModelParams& p) {
  p.validate();
  const ComplexMatrix a = lowering_operator(p.fock_dim());
  const double g = std::sqrt(2.0) * p.omega_coupling;
  const ComplexMatrix up = g * (kron(ket_bra(4, basis::kSuper, basis::kGround), a) +
                                kron(ket_bra(4, basis::kDouble, basis::kSuper), a));
  return up + up.adjoint();
}

// rate * (J rho J^dag - {J^dag J, rho}/2), vectorized.
inline ComplexMatrix lindblad_dissipator(const ComplexMatrix& jump, double rate) {
  const ComplexMatrix jdj = jump.adjoint() * jump;
  return rate * (kron(jump.conjugate(), jump) - 0.5 * (spre(jdj) + spost(jdj)));
}

// Common-reservoir generator on dressed atoms (x) mode, dimension 4*fock_dim.
inline Liouvillian liouvillian_common_structured(const ModelParams& p) {
  p.validate();
  const int nf = p.fock_dim();
  const ComplexMatrix v = coupling_V(p);
  const ComplexMatrix mode_jump = kron(ComplexMatrix::Identity(4, 4), lowering_operator(nf));
  const Complex i(0.0, 1.0);
  Liouvillian l;
  l.matrix = -i * (spre(v) - spost(v)) + lindblad_dissipator(mode_jump, p.gamma_pseudo);
  l.backend = Backend::kCommonStructured;
  l.dim = 4 * nf;
  l.fock_dim = nf;
  return l;
}

// Flat-reservoir limit: single collective jump sigma-_A + sigma-_B at gamma0,
// acting on the bare two-atom state directly.
inline Liouvillian liouvillian_common_markov(double gamma0) {
  if (!(gamma0 > 0.0))
    throw std::invalid_argument("liouvillian_common_markov: gamma0 must be positive");
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix collective =
      two_qubit_op(sigma_minus(), id2) + two_qubit_op(id2, sigma_minus());
  Liouvillian l;
  l.matrix = lindblad_dissipator(collective, gamma0);
  l.backend = Backend::kCommonMarkov;
  l.dim = 4;
  l.fock_dim = 0;
  return l;
}

// One atom alone in its own Lorentzian reservoir: same J(omega), so the
// coupling is Omega without the collective sqrt(2). State space qubit (x) mode.
inline Liouvillian liouvillian_single_qubit_structured(const ModelParams& p) {
  p.validate();
  const int nf = p.fock_dim();
  const ComplexMatrix a = lowering_operator(nf);
  const ComplexMatrix v =
      p.omega_coupling * (kron(sigma_plus(), a) + kron(sigma_minus(), a.adjoint()));
  const ComplexMatrix mode_jump = kron(ComplexMatrix::Identity(2, 2), a);
  const Complex i(0.0, 1.0);
  Liouvillian l;
  l.matrix = -i * (spre(v) - spost(v)) + lindblad_dissipator(mode_jump, p.gamma_pseudo);
  l.backend = Backend::kIndependent;
  l.dim = 2 * nf;
  l.fock_dim = nf;
  return l;
}

// Vectorized qubit basis dyads |r><c| embedded with the mode in vacuum, in
// column-stacking order (index r + 2c). Propagating these four states spans
// the full single-qubit dynamical map.
inline std::array<ComplexVector, 4> single_qubit_basis_states(int fock_dim) {
  const ComplexMatrix vac = ket_bra(fock_dim, 0, 0);
  std::array<ComplexVector, 4> states;
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r) states[r + 2 * c] = vec(kron(ket_bra(2, r, c), vac));
  return states;
}

// Reduce four propagated dyad states to the 4x4 map on vec'd qubit states.
inline ComplexMatrix single_qubit_map_from_states(const std::array<ComplexVector, 4>& evolved,
                                                  int fock_dim) {
  ComplexMatrix lambda(4, 4);
  for (int idx = 0; idx < 4; ++idx) {
    const ComplexMatrix full = unvec(evolved[idx], 2 * fock_dim);
    lambda.col(idx) = vec(partial_trace_pseudomode(full, fock_dim));
  }
  return lambda;
}

// Reduced qubit map Lambda(t) for one atom in its own reservoir (mode starts
// in vacuum). Completely positive and trace preserving for all t >= 0.
inline ComplexMatrix dynamical_map_single_qubit(const ModelParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("dynamical_map_single_qubit: t must be non-negative");
  const Liouvillian l = liouvillian_single_qubit_structured(p);
  const ComplexMatrix prop = expm(l.matrix * t);
  std::array<ComplexVector, 4> states = single_qubit_basis_states(p.fock_dim());
  for (auto& s : states) s = prop * s;
  return single_qubit_map_from_states(states, p.fock_dim());
}

// Lambda (x) Lambda on the bare two-atom space (atom A fast), as a 16x16
// matrix on vec'd 4x4 states.
inline ComplexMatrix pair_map_from_single(const ComplexMatrix& lambda) {
  if (lambda.rows() != 4 || lambda.cols() != 4)
    throw std::invalid_argument("pair_map_from_single: expected a 4x4 single-qubit map");
  ComplexMatrix out(16, 16);
  for (int cb = 0; cb < 2; ++cb)
    for (int ca = 0; ca < 2; ++ca)
      for (int rb = 0; rb < 2; ++rb)
        for (int ra = 0; ra < 2; ++ra) {
          const ComplexMatrix ma = unvec(lambda * vec(ket_bra(2, ra, ca)), 2);
          const ComplexMatrix mb = unvec(lambda * vec(ket_bra(2, rb, cb)), 2);
          const int col = (ra + 2 * rb) + 4 * (ca + 2 * cb);
          out.col(col) = vec(two_qubit_op(ma, mb));
        }
  return out;
}

// Two-atom map for independent identical reservoirs at time t.
inline ComplexMatrix dynamical_map_independent(const ModelParams& p, double t) {
  return pair_map_from_single(dynamical_map_single_qubit(p, t));
}

}  // namespace pseudomode
