// Copyright 2026 The qlaser-thermo Authors
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

#include <string>
#include <vector>

#include "linops.hpp"
#include "params.hpp"
#include "states.hpp"

namespace qlt {

// Qubit basis: index 0 = |a> (ground), 1 = |b> (excited).
// Dressed-qubit basis: index 0 = |1> (lower), 1 = |2> (upper).
namespace qubit {
inline Mat sz() { Mat m = Mat::Zero(2, 2); m(0, 0) = -1; m(1, 1) = 1; return m; }
inline Mat sp() { Mat m = Mat::Zero(2, 2); m(1, 0) = 1; return m; }
inline Mat sm() { Mat m = Mat::Zero(2, 2); m(0, 1) = 1; return m; }
inline Mat id() { return Mat::Identity(2, 2); }
inline Mat proj(int k) { Mat m = Mat::Zero(2, 2); m(k, k) = 1; return m; }
}  // namespace qubit

struct HamiltonianOptions {
  bool rwa_laser = false;
  bool rwa_bath = false;
  bool constant_coupling = false;  // g0 sqrt(N+1) -> g in the laser coupling
  bool with_bath = true;
};

struct Hamiltonians {
  HilbertSpace space;
  Operator H_A, H_L, H_B, V_AL, V_AB, H_X, H;
};

inline std::string bath_label(int k) { return "B" + std::to_string(k); }

inline HilbertSpace model_space(const ModelParams& p, bool with_bath = true) {
  std::vector<Factor> f{{"A", 2}, {"L", p.laser_nmax + 1}};
  if (with_bath)
    for (int k = 0; k < p.bath.n_modes; ++k) f.push_back({bath_label(k), p.bath.mode_levels});
  return HilbertSpace(f);
}

/// Lowering operator of E = sum |N><N+1|: the unit-modulus part of the annihilation operator.
inline Mat ladder_shift(int n_max) {
  Mat e = Mat::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) e(n - 1, n) = 1.0;
  return e;
}

/// Collective bath operator sum_k (g_k/2) b_k on the full space.
inline Operator bath_collective(const ModelParams& p, const HilbertSpace& s) {
  Operator b = Operator::zero(s);
  Mat bk = annihilation(p.bath.mode_levels - 1);
  for (int k = 0; k < p.bath.n_modes; ++k) b = b + embed(s, bath_label(k), bk) * cplx(p.bath.g_bath / 2);
  return b;
}

inline Hamiltonians build_hamiltonians(const ModelParams& p, const HamiltonianOptions& o = {}) {
  p.validate(false);
  Hamiltonians h;
  h.space = model_space(p, o.with_bath);
  const auto& s = h.space;
  const int nl = p.laser_nmax;
  Mat a = o.constant_coupling ? Mat(p.alpha_abs * ladder_shift(nl)) : annihilation(nl);

  h.H_A = embed(s, "A", 0.5 * p.omega_a * qubit::sz());
  h.H_L = embed(s, "L", p.omega_l * (number_op(nl) + 0.5 * Mat::Identity(nl + 1, nl + 1)));
  const double c = p.g0 / 2;
  Operator sp = embed(s, "A", qubit::sp()), sm = embed(s, "A", qubit::sm());
  Operator al = embed(s, "L", a), ad = embed(s, "L", Mat(a.adjoint()));
  if (o.rwa_laser) h.V_AL = (sp * al + sm * ad) * cplx(c);
  else h.V_AL = ((sp + sm) * (al + ad)) * cplx(c);

  h.H_B = Operator::zero(s);
  h.V_AB = Operator::zero(s);
  if (o.with_bath) {
    const auto w = p.bath_frequencies();
    const int lv = p.bath.mode_levels;
    for (int k = 0; k < p.bath.n_modes; ++k)
      h.H_B = h.H_B + embed(s, bath_label(k), w[k] * (number_op(lv - 1) + 0.5 * Mat::Identity(lv, lv)));
    Operator b = bath_collective(p, s);
    if (o.rwa_bath) h.V_AB = sp * b + sm * b.adjoint();
    else h.V_AB = (sp + sm) * (b + b.adjoint());
  }
  h.H_X = h.H_A + h.V_AL + h.H_L;
  h.H = h.H_X + h.V_AB + h.H_B;
  return h;
}

struct RwaReport {
  double norm_ratio;  // |V_counter psi| / |V_co psi| on |+> x |alpha>
  double admixture;   // |V_counter psi| / (omega_A + omega_L): first-order weight of the dropped terms
};

/// Size of the counter-rotating laser coupling on the initial qubit-laser state.
inline RwaReport rwa_error_bound(const ModelParams& p) {
  Mat a = annihilation(p.laser_nmax);
  Mat co = Eigen::kroneckerProduct(qubit::sp(), a).eval() + Eigen::kroneckerProduct(qubit::sm(), Mat(a.adjoint())).eval();
  Mat ctr = Eigen::kroneckerProduct(qubit::sp(), Mat(a.adjoint())).eval() + Eigen::kroneckerProduct(qubit::sm(), a).eval();
  Vec v = Eigen::kroneckerProduct(Vec::Ones(2).normalized(), coherent_vector({p.alpha_abs, p.alpha_phase, p.laser_nmax, 1.0})).eval();
  const double c = (ctr * v).norm() * p.g0 / 2;
  return {(ctr * v).norm() / std::max((co * v).norm(), 1e-300), c / (p.omega_a + p.omega_l)};
}

/// Dressed-basis change: columns |1>, |2> expressed on (|a>, |b>) for drive phase phi.
/// Equal to diag(e^{-i phi/2}, e^{i phi/2}) times the phi = 0 matrix, so the dressed-frame
/// jump operators of the qubit lowering operator do not depend on phi.
inline Mat dressed_columns(const ModelParams& p, double phi = 0.0) {
  const double cp = p.c_plus(), cm = p.c_minus();
  const cplx lo = std::polar(1.0, -phi / 2), hi = std::polar(1.0, phi / 2);
  Mat m(2, 2);
  m(0, 0) = cp * lo;    // <a|1>
  m(1, 0) = -cm * hi;   // <b|1>
  m(0, 1) = cm * lo;    // <a|2>
  m(1, 1) = cp * hi;    // <b|2>
  return m;
}

/// Rotating-frame qubit Hamiltonian (delta/2) sz + (g/2)(e^{i phi} s+ + h.c.).
inline Mat drive_hamiltonian_rot(const ModelParams& p, double phi) {
  return 0.5 * p.delta() * qubit::sz() + 0.5 * p.g() * (std::polar(1.0, phi) * qubit::sp() + std::polar(1.0, -phi) * qubit::sm());
}

/// Semiclassical drive V(t) = (g/2)(e^{i phi} e^{-i wL t} s+ + h.c.).
inline Mat drive_v(const ModelParams& p, double t) {
  const cplx e = std::polar(1.0, p.alpha_phase - p.omega_l * t);
  return 0.5 * p.g() * (e * qubit::sp() + std::conj(e) * qubit::sm());
}

inline Mat qubit_drive_hamiltonian(const ModelParams& p, double t) { return 0.5 * p.omega_a * qubit::sz() + drive_v(p, t); }

struct DressedBasis {
  double c_plus = 0, c_minus = 0;
  int n_dl = 0;     // number of complete blocks {|b,n>, |a,n+1>}, n = 0..n_dl-1
  Mat isometry;     // product basis (A x L) -> (DA x DL), columns |j> x |n>, DA index major
};

/// Block-diagonalizing isometry for the RWA qubit-laser Hamiltonian with constant coupling g.
inline DressedBasis dressed_transform(const ModelParams& p) {
  DressedBasis d;
  d.c_plus = p.c_plus();
  d.c_minus = p.c_minus();
  const int nl = p.laser_nmax, ndl = nl;
  d.n_dl = ndl;
  const int dimx = 2 * (nl + 1);
  d.isometry = Mat::Zero(dimx, 2 * ndl);
  auto ix = [&](int q, int n) { return q * (nl + 1) + n; };
  for (int n = 0; n < ndl; ++n) {
    d.isometry(ix(1, n), 1 * ndl + n) = d.c_plus;      // |2(n)>
    d.isometry(ix(0, n + 1), 1 * ndl + n) = d.c_minus;
    d.isometry(ix(1, n), 0 * ndl + n) = -d.c_minus;    // |1(n)>
    d.isometry(ix(0, n + 1), 0 * ndl + n) = d.c_plus;
  }
  return d;
}

inline HilbertSpace dressed_space(int n_dl) { return HilbertSpace{{"DA", 2}, {"DL", n_dl}}; }

/// Dressed-qubit Hamiltonian on the product space A x L (assumption-2 coupling, RWA blocks).
inline Mat dressed_qubit_hamiltonian_product(const ModelParams& p) {
  const int nl = p.laser_nmax;
  Mat e = ladder_shift(nl);
  Mat h = 0.5 * p.delta() * Eigen::kroneckerProduct(qubit::sz(), Mat::Identity(nl + 1, nl + 1)).eval();
  h += 0.5 * p.g() * (Eigen::kroneckerProduct(qubit::sp(), e).eval() + Eigen::kroneckerProduct(qubit::sm(), Mat(e.adjoint())).eval());
  return h;
}

struct DressedLaserHamiltonian {
  Mat spectral;  // sum_n wL (n+1) |n><n| on DL
  Mat product;   // I_A x H_L + (wL/2) sz x I_L on A x L
};

inline DressedLaserHamiltonian dressed_laser_hamiltonian(const ModelParams& p) {
  const int nl = p.laser_nmax;
  DressedLaserHamiltonian d;
  d.spectral = Mat::Zero(nl, nl);
  for (int n = 0; n < nl; ++n) d.spectral(n, n) = p.omega_l * (n + 1);
  Mat hl = p.omega_l * (number_op(nl) + 0.5 * Mat::Identity(nl + 1, nl + 1));
  d.product = Eigen::kroneckerProduct(qubit::id(), hl).eval() +
              0.5 * p.omega_l * Eigen::kroneckerProduct(qubit::sz(), Mat::Identity(nl + 1, nl + 1)).eval();
  return d;
}

/// D^dagger[a e^{-i wL t}] rho D[a e^{-i wL t}] on the laser factor.
inline Operator mollow_transform(const Operator& rho, const ModelParams& p, double t, const std::string& laser = "L") {
  const int nl = rho.space().dim_of(laser) - 1;
  Mat d = displacement_operator(p.alpha() * std::polar(1.0, -p.omega_l * t), nl);
  Operator D = embed(rho.space(), laser, d);
  return D.adjoint() * rho * D;
}

struct FloquetStates {
  Vec u1, u2;
  double eps1, eps2;
};

/// |u_j(t)> = e^{-i wL sz t/2}|j>. These are anti-periodic over 2 pi / wL; projectors are periodic.
inline FloquetStates floquet_states(const ModelParams& p, double t) {
  Mat m = dressed_columns(p, p.alpha_phase);
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = std::polar(1.0, p.omega_l * t / 2);
  r(1, 1) = std::polar(1.0, -p.omega_l * t / 2);
  return {r * m.col(0), r * m.col(1), -p.rabi() / 2, p.rabi() / 2};
}

/// Conjugation by e^{i wL sz t/2} on the qubit factor.
inline Operator rotating_frame(const Operator& rho, const ModelParams& p, double t, const std::string& q = "A") {
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = std::polar(1.0, -p.omega_l * t / 2);
  r(1, 1) = std::polar(1.0, p.omega_l * t / 2);
  Operator R = embed(rho.space(), q, r);
  return R * rho * R.adjoint();
}

inline Operator rotating_frame_inverse(const Operator& rho, const ModelParams& p, double t, const std::string& q = "A") {
  return rotating_frame(rho, p, -t, q);
}

/// Map a rotating-frame qubit density matrix into the dressed basis.
inline Mat qubit_to_dressed(const Mat& rho_q, const ModelParams& p) {
  Mat m = dressed_columns(p, p.alpha_phase);
  return m.adjoint() * rho_q * m;
}
inline Mat dressed_to_qubit(const Mat& rho_d, const ModelParams& p) {
  Mat m = dressed_columns(p, p.alpha_phase);
  return m * rho_d * m.adjoint();
}

}  // namespace qlt
