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

#include <cmath>
#include <functional>
#include <vector>

#include "bathrates.hpp"
#include "generators.hpp"
#include "states.hpp"

namespace qlt {

/// Instantaneous thermodynamic rates of the dressed qubit and its qubit-frame view.
struct FlowReport {
  double t = 0;
  double w_dl = 0, w_l = 0, q = 0, e_da = 0, e_a = 0;
  double sigma = 0;
  double first_law_residual = 0;
  double p1 = 0, p2 = 0;
  cplx p21{0.0};
  double pa = 0, pb = 0;
  cplx pba{0.0};
};

inline void fill_populations(FlowReport& f, const Mat& rho_da, const ModelParams& p) {
  f.p1 = rho_da(0, 0).real();
  f.p2 = rho_da(1, 1).real();
  f.p21 = rho_da(1, 0);
  Mat m = dressed_columns(p, 0.0);
  Mat q = m * rho_da * m.adjoint();
  f.pa = q(0, 0).real();
  f.pb = q(1, 1).real();
  f.pba = q(1, 0);
}

/// Closed-form rates of the generalized Bloch equation (weak or intermediate regime).
inline FlowReport flows_generalized_bloch(const Mat& rho_da, const ModelParams& p, const RateTable& r,
                                          bool coherent = true) {
  FlowReport f;
  fill_populations(f, rho_da, p);
  const double wl = p.omega_l, om = p.rabi();
  const double P1 = f.p1, P2 = f.p2, re = coherent ? f.p21.real() : 0.0;
  const double s0d = std::sqrt(r.g0_down), s0u = std::sqrt(r.g0_up), s1d = std::sqrt(r.g1_down),
               s1u = std::sqrt(r.g1_up), s2d = std::sqrt(r.g2_down), s2u = std::sqrt(r.g2_up);
  f.w_dl = wl * (r.g0_down - r.g0_up) + wl * ((r.g2_up - r.g1_up) * P1 + (r.g1_down - r.g2_down) * P2) -
           2 * wl * (s0u * (s2d + s1u) + s0d * (s2u + s1d)) * re;
  f.q = wl * (r.g0_up - r.g0_down) + ((wl + om) * r.g1_up - (wl - om) * r.g2_up) * P1 +
        ((wl - om) * r.g2_down - (wl + om) * r.g1_down) * P2 +
        2 * s0d * (s2u * (wl - om / 2) + s1d * (wl + om / 2)) * re +
        2 * s0u * (s2d * (wl - om / 2) + s1u * (wl + om / 2)) * re;
  f.e_da = om * (r.g2_up + r.g1_up) * P1 - om * (r.g1_down + r.g2_down) * P2 +
           om * (-s0d * s2u + s0d * s1d - s0u * s2d + s0u * s1u) * re;
  f.first_law_residual = f.e_da - f.q - f.w_dl;
  return f;
}

/// Floquet rates: the generalized-Bloch expressions without coherent terms.
inline FlowReport flows_floquet(const Mat& rho_da, const ModelParams& p, const RateTable& r) {
  return flows_generalized_bloch(rho_da, p, r, false);
}

/// Bloch-equation rates with the common thermal pair G+-(omega_A).
inline FlowReport flows_bloch(const Mat& rho_da, const ModelParams& p) {
  FlowReport f;
  fill_populations(f, rho_da, p);
  const double gp = g_plus(p, p.omega_a), gm = g_minus(p, p.omega_a), g = p.g();
  const double emit = gp * f.pb - gm * f.pa;
  const double re_ab = std::conj(f.pba).real();
  f.q = -p.omega_a * emit - 0.5 * g * (gp + gm) * re_ab;
  f.w_dl = p.omega_l * emit;
  f.e_da = -p.delta() * emit - 0.5 * g * (gp + gm) * re_ab;
  f.w_l = -g * p.omega_l * f.pba.imag();
  f.first_law_residual = f.e_da - f.q - f.w_dl;
  return f;
}

/// sigma_z of the qubit expressed in the dressed basis.
inline Mat dressed_sz(const ModelParams& p) {
  Mat m = dressed_columns(p, p.alpha_phase);
  return m.adjoint() * qubit::sz() * m;
}

/// Lab-frame laser work rate from the dressed one: W_L = W_DL + (wL/2) Tr[sz L(rho)].
inline double lab_work_rate(const Superop& L0, const Mat& rho_da, const ModelParams& p, double w_dl) {
  return w_dl + 0.5 * p.omega_l * (dressed_sz(p) * apply_to(L0, rho_da)).trace().real();
}

/// Rates as derivatives of Tr[L_lambda(rho)] at lambda = 0, central differences with step h.
inline FlowReport derivative_flows(const PairModel& m, const Mat& rho_da, const ModelParams& p, double h = 1e-6) {
  auto tr = [&](const CountingFields& l) { return apply_to(generator(m, l), rho_da).trace(); };
  auto d = [&](CountingFields a, CountingFields b) { return (tr(a) - tr(b)) / cplx(2 * h) / I; };
  FlowReport f;
  fill_populations(f, rho_da, p);
  f.w_dl = -d({0, h, 0}, {0, -h, 0}).real();
  f.q = -d({0, 0, h}, {0, 0, -h}).real();
  f.e_da = d({h, 0, 0}, {-h, 0, 0}).real();
  f.first_law_residual = f.e_da - f.q - f.w_dl;
  return f;
}

/// Lab-frame W_L as -(1/i) d/d l_L Tr[L(t; l_L)(rho)].
inline double lab_work_derivative(const LabGenerator& g, double t, const Mat& rho_lab, double h = 1e-6) {
  cplx a = apply_to(g(t, h, 0.0), rho_lab).trace(), b = apply_to(g(t, -h, 0.0), rho_lab).trace();
  return -((a - b) / cplx(2 * h) / I).real();
}

struct EntropyRate {
  double ds = 0;
  double sigma = 0;
  bool one_sided = false;  // backward state left the positive cone
};

/// Sigma-dot = dS/dt - beta Q-dot, entropy derivative by finite differences along e^{tL}.
inline EntropyRate second_law_rate(const Superop& L, const Mat& rho, double q_dot, double beta, double gamma_max) {
  const double h = 1e-5 / gamma_max;
  Mat fwd = apply_to(expm(h * L), rho), bwd = apply_to(expm(-h * L), rho);
  auto herm = [](const Mat& m) { return Mat(0.5 * (m + m.adjoint())); };
  EntropyRate e;
  if (min_hermitian_eigenvalue(herm(bwd)) < 0) {
    e.one_sided = true;
    e.ds = (von_neumann_entropy(herm(fwd)) - von_neumann_entropy(herm(rho))) / h;
  } else {
    e.ds = (von_neumann_entropy(herm(fwd)) - von_neumann_entropy(herm(bwd))) / (2 * h);
  }
  e.sigma = e.ds - beta * q_dot;
  return e;
}

// ---- closed-form steady states

struct FloquetSteady {
  double p1, p2, q_dot, sigma_dot;
};

inline FloquetSteady floquet_steady_closed(const ModelParams& p, const RateTable& r) {
  const double s = r.g1_down + r.g2_down + r.g1_up + r.g2_up;
  FloquetSteady f;
  f.p1 = (r.g1_down + r.g2_down) / s;
  f.p2 = 1 - f.p1;
  f.q_dot = -p.omega_l * (r.g0_down - r.g0_up) - 2 * p.omega_l * (r.g1_down * r.g2_up - r.g1_up * r.g2_down) / s;
  f.sigma_dot = -p.beta_b * f.q_dot;
  return f;
}

struct BlochSteady {
  double pb;
  cplx pba;
};

inline BlochSteady bloch_steady_closed(const ModelParams& p) {
  const double gp = g_plus(p, p.omega_a), gm = g_minus(p, p.omega_a), g = p.g(), d = p.delta();
  const double den = 1 + 2 * d * d / (g * g) + (gp + gm) * (gp + gm) / (2 * g * g);
  BlochSteady b;
  b.pb = (gm + 0.5 * (gp - gm) / den) / (gp + gm);
  b.pba = -cplx(d * (gp - gm) / (g * (gp + gm)), (gp - gm) / (2 * g)) / den;
  return b;
}

// ---- Floquet vs Bloch steady-state comparison

struct SsComparison {
  double g;
  double dq_numeric, dw_numeric;      // normalized by Gamma-bar omega_L
  double dq_closed, dw_closed;
  double dq_closed_printed;           // heat difference in the printed arrangement
  double gamma_max;
};

inline SsComparison ss_compare(const ModelParams& p) {
  GeneratorSpec fs{Family::floquet};
  fs.smooth_rates = true;
  const RateTable rt = smooth_rate_table(p);
  SteadyState sf = steady_state(generator(fs, p));
  SteadyState sb = steady_state(bloch_maps(p, {}, Thermal::smoothed));
  FlowReport ff = flows_floquet(sf.rho, p, rt), fb = flows_bloch(sb.rho, p);
  const double nbar = bose(p.beta_b, p.omega_l);
  const double gam = rt.gp_bar / (nbar + 1);
  const double norm = gam * p.omega_l;
  SsComparison c;
  c.g = p.g();
  c.gamma_max = rt.gamma_max;
  c.dq_numeric = (ff.q - fb.q) / norm;
  c.dw_numeric = (ff.w_dl - fb.w_l) / norm;
  const double g2 = p.g() * p.g(), d2 = p.delta() * p.delta(), x = gam * gam * (2 * nbar + 1) * (2 * nbar + 1);
  c.dw_closed = (d2 / g2 + x / (4 * g2)) / (1 + 2 * d2 / g2 + x / (2 * g2));
  c.dq_closed = -c.dw_closed;
  const double om2 = p.rabi() * p.rabi();
  c.dq_closed_printed = -0.5 / ((d2 + om2) / g2 * (1 + 2 * (d2 + om2) / x));
  return c;
}

/// Least-squares slope of log|y| against log x.
inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    const double a = std::log(x[k]), b = std::log(std::abs(y[k]));
    sx += a; sy += b; sxx += a * a; sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qlt
