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

// Shared test utilities and reference oracles. The oracles here are written
// against the mathematical definitions, independent of the library code paths
// they check (the Taylor exponential never touches Eigen's MatrixFunctions,
// the RK comparison in the propagation tests never touches expm, and the
// generic concurrence checks build rho directly).

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

namespace testutil {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline Matrix random_matrix(int rows, int cols, std::mt19937& gen, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * Complex(dist(gen), dist(gen));
  return m;
}

inline Matrix random_hermitian(int n, std::mt19937& gen) {
  const Matrix g = random_matrix(n, n, gen);
  return (g + g.adjoint()) / 2.0;
}

// Full-rank random density matrix, G G^dag normalized.
inline Matrix random_density_matrix(int n, std::mt19937& gen) {
  const Matrix g = random_matrix(n, n, gen);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

inline Matrix random_unitary(int n, std::mt19937& gen) {
  const Matrix g = random_matrix(n, n, gen);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

// Random single-qubit unitary.
inline Matrix random_su2(std::mt19937& gen) { return random_unitary(2, gen); }

// Reference matrix exponential: scale until the max-norm is small, sum the
// Taylor series to machine saturation, square back up.
inline Matrix taylor_expm(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  const double norm = a.cwiseAbs().maxCoeff() * n;
  int squarings = 0;
  double s = norm;
  while (s > 0.25) {
    s /= 2.0;
    ++squarings;
  }
  const Matrix scaled = a / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(n, n);
  Matrix sum = term;
  for (int k = 1; k <= 80; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

// Random X-form two-qubit state in the bare basis {|00>,|10>,|01>,|11>}:
// populations on the diagonal, coherences only at (0,3) and (1,2), with
// |w| <= sqrt(ad) and |z| <= sqrt(bc) so the matrix is positive.
inline Matrix random_x_density_matrix(std::mt19937& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 4> p{};
  double tot = 0.0;
  for (auto& v : p) {
    v = u(gen) + 1e-6;
    tot += v;
  }
  for (auto& v : p) v /= tot;
  const double wmag = u(gen) * std::sqrt(p[0] * p[3]);
  const double zmag = u(gen) * std::sqrt(p[1] * p[2]);
  const double wphase = 2.0 * M_PI * u(gen);
  const double zphase = 2.0 * M_PI * u(gen);
  Matrix rho = Matrix::Zero(4, 4);
  rho(0, 0) = p[0];
  rho(1, 1) = p[1];
  rho(2, 2) = p[2];
  rho(3, 3) = p[3];
  rho(0, 3) = std::polar(wmag, wphase);
  rho(3, 0) = std::conj(rho(0, 3));
  rho(1, 2) = std::polar(zmag, zphase);
  rho(2, 1) = std::conj(rho(1, 2));
  return rho;
}

// Wootters concurrence straight from the definition, using the square root
// of rho and a Hermitian eigenproblem. Independent of the library routine.
inline double concurrence_reference(const Matrix& rho) {
  Matrix yy = Matrix::Zero(4, 4);
  // sigma_y (x) sigma_y on both atoms in the bare basis, atom A fast.
  const Complex i(0.0, 1.0);
  Matrix sy(2, 2);
  sy << Complex(0, 0), -i, i, Complex(0, 0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp)
          yy(ap + 2 * bp, a + 2 * b) = sy(ap, a) * sy(bp, b);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  Matrix sqrt_rho = Matrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) {
    const double lam = std::max(0.0, es.eigenvalues()(k));
    sqrt_rho += std::sqrt(lam) * es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
  }
  const Matrix m = sqrt_rho * yy * rho.conjugate() * yy * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Matrix> es2((m + m.adjoint()) / 2.0);
  std::array<double, 4> lam{};
  for (int k = 0; k < 4; ++k) lam[k] = std::sqrt(std::max(0.0, es2.eigenvalues()(k)));
  // Ascending from Eigen; concurrence is the top root minus the rest.
  const double c = lam[3] - lam[2] - lam[1] - lam[0];
  return std::max(0.0, c);
}

}  // namespace testutil
