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

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bathrates.hpp"
#include "linops.hpp"
#include "model.hpp"
#include "params.hpp"

namespace qlt {

/// Counting fields conjugate to (H_DA, H_DL, H_B). Complex values are allowed.
struct CountingFields {
  cplx da{0.0}, dl{0.0}, b{0.0};
  CountingFields shifted(cplx chi) const { return {da + chi, dl + chi, b + chi}; }
};

enum class Family { gen_bloch, floquet, bloch_maps, bloch_redfield };
/// Thermal weights of the Bloch families: exact Bose factors per channel, or one common pair G+-(omega_A).
enum class Thermal { channel, smoothed };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::gen_bloch: return "gen_bloch";
    case Family::floquet: return "floquet";
    case Family::bloch_maps: return "bloch_maps";
    default: return "bloch_redfield";
  }
}

struct GeneratorSpec {
  Family family = Family::floquet;
  Regime regime = Regime::weak;         // gen_bloch: weak | intermediate | common | strong
  Thermal thermal = Thermal::channel;   // bloch_maps, bloch_redfield
  bool secular = false;                 // bloch_redfield: keep diagonal pairs only
  bool smooth_rates = false;            // gen_bloch, floquet: every channel at G+-(omega_A)
};

// Dressed-qubit operators, index 0 = |1>, 1 = |2>.
namespace dressed {
inline Mat sz() { return qubit::sz(); }
inline Mat sp() { return qubit::sp(); }  // |2><1|
inline Mat sm() { return qubit::sm(); }
inline Mat hamiltonian(const ModelParams& p) { return 0.5 * p.rabi() * sz(); }
}  // namespace dressed

/// The three Mollow channels z, +, -: reduced jump operators, Bohr frequencies and the
/// energy each emission deposits in (DA, DL, B).
struct JumpSet {
  std::array<Mat, 3> s;
  std::array<double, 3> weight;  // s_k = weight_k * Sigma_k
  std::array<double, 3> freq;
  std::array<std::array<double, 3>, 3> energy;
};

inline JumpSet jump_set(const ModelParams& p) {
  const double om = p.rabi(), d = p.delta(), wl = p.omega_l;
  JumpSet j;
  j.weight = {p.g() / (2 * om), -(om - d) / (2 * om), (om + d) / (2 * om)};
  j.s = {j.weight[0] * dressed::sz(), j.weight[1] * dressed::sp(), j.weight[2] * dressed::sm()};
  j.freq = {wl, wl - om, wl + om};
  j.energy = {{{0.0, -wl, wl}, {om, -wl, wl - om}, {-om, -wl, wl + om}}};
  return j;
}

/// s_k carrying its counting phase e^{i lambda.e_k / 2}.
inline Mat tilted_jump(const JumpSet& j, int k, const CountingFields& l) {
  const auto& e = j.energy[k];
  return std::exp(I * (l.da * e[0] + l.dl * e[1] + l.b * e[2]) / 2.0) * j.s[k];
}

enum class BathPhase { midpoint, split };

/// Pairwise dissipator data: jump operators A_k, deposited energies, coefficient matrices.
struct PairModel {
  std::array<Mat, 3> up_ops, down_ops;   // emission (s_k) and absorption (s_k^dagger)
  std::array<std::array<double, 3>, 3> energy;
  RMat c_emit = RMat::Zero(3, 3), c_absorb = RMat::Zero(3, 3);
  BathPhase rule = BathPhase::midpoint;
  Mat h;  // dressed Hamiltonian
};

namespace detail {

inline std::array<double, 3> flat_thermal(const ModelParams& p, const std::array<double, 3>& w, bool emit) {
  const double gam = spectral_density(p.bath, p.omega_a, p.omega_a);
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    if (w[k] <= 0) continue;
    const double n = bose(p.beta_b, w[k]);
    out[k] = gam * (emit ? n + 1.0 : n);
  }
  return out;
}

inline RMat root_pairs(const std::array<double, 3>& g) {
  RMat c(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) c(a, b) = std::sqrt(g[a] * g[b]);
  return c;
}

inline RMat diagonal_pairs(const std::array<double, 3>& g) {
  RMat c = RMat::Zero(3, 3);
  for (int a = 0; a < 3; ++a) c(a, a) = g[a];
  return c;
}

}  // namespace detail

inline PairModel pair_model(const GeneratorSpec& spec, const ModelParams& p) {
  p.validate();
  const JumpSet j = jump_set(p);
  PairModel m;
  m.h = dressed::hamiltonian(p);
  for (int k = 0; k < 3; ++k) {
    m.up_ops[k] = j.s[k];
    m.down_ops[k] = j.s[k].adjoint();
  }
  m.energy = j.energy;

  const RateTable rt = spec.smooth_rates ? smooth_rate_table(p) : rate_table(p);
  switch (spec.family) {
    case Family::floquet:
      m.c_emit = detail::diagonal_pairs(rt.gp);
      m.c_absorb = detail::diagonal_pairs(rt.gm);
      break;
    case Family::gen_bloch:
      if (spec.regime == Regime::strong || spec.regime == Regime::common) {
        m.c_emit = detail::diagonal_pairs(rt.gp);
        m.c_absorb = detail::diagonal_pairs(rt.gm);
        break;
      }
      if (spec.regime == Regime::out_of_model) throw Error("generalized Bloch generator needs a regime");
      m.c_emit = detail::root_pairs(rt.gp);
      m.c_absorb = detail::root_pairs(rt.gm);
      if (spec.regime == Regime::intermediate) {
        // channels + and - are 2 Omega apart: their cross terms average out
        m.c_emit(1, 2) = m.c_emit(2, 1) = 0;
        m.c_absorb(1, 2) = m.c_absorb(2, 1) = 0;
      }
      break;
    case Family::bloch_maps:
    case Family::bloch_redfield: {
      if (spec.thermal == Thermal::smoothed) {
        m.c_emit = RMat::Constant(3, 3, g_plus(p, p.omega_a));
        m.c_absorb = RMat::Constant(3, 3, g_minus(p, p.omega_a));
      } else {
        m.c_emit = detail::root_pairs(detail::flat_thermal(p, j.freq, true));
        m.c_absorb = detail::root_pairs(detail::flat_thermal(p, j.freq, false));
      }
      if (spec.family == Family::bloch_redfield) {
        m.rule = BathPhase::split;
        if (spec.secular) {
          m.c_emit = RMat(m.c_emit.diagonal().asDiagonal());
          m.c_absorb = RMat(m.c_absorb.diagonal().asDiagonal());
        }
      }
      break;
    }
  }
  return m;
}

namespace detail {

inline cplx sandwich_phase(const std::array<double, 3>& e1, const std::array<double, 3>& e2, const CountingFields& l,
                           BathPhase rule) {
  cplx ph = std::exp(I * (l.da * (e1[0] + e2[0]) + l.dl * (e1[1] + e2[1])) / 2.0);
  if (rule == BathPhase::midpoint) return ph * std::exp(I * l.b * (e1[2] + e2[2]) / 2.0);
  return ph * 0.5 * (std::exp(I * l.b * e1[2]) + std::exp(I * l.b * e2[2]));
}

// Phase of A_b^dagger A_a on the left; the right-hand term takes the opposite difference.
inline cplx left_phase(const std::array<double, 3>& ea, const std::array<double, 3>& eb, const CountingFields& l) {
  return std::exp(I * (l.da * (ea[0] - eb[0]) + l.dl * (ea[1] - eb[1])) / 2.0);
}

inline std::array<double, 3> negated(const std::array<double, 3>& e) { return {-e[0], -e[1], -e[2]}; }

template <class Emit>
void for_each_pair(const PairModel& m, Emit&& f) {
  for (int dir = 0; dir < 2; ++dir) {
    const auto& ops = dir == 0 ? m.up_ops : m.down_ops;
    const RMat& c = dir == 0 ? m.c_emit : m.c_absorb;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (c(a, b) == 0.0) continue;
        const auto ea = dir == 0 ? m.energy[a] : negated(m.energy[a]);
        const auto eb = dir == 0 ? m.energy[b] : negated(m.energy[b]);
        f(ops[a], ops[b], ea, eb, c(a, b));
      }
  }
}

}  // namespace detail

/// Tilted dissipator: sum_ab C_ab [phi A_a rho A_b^dagger - 1/2 {A_b^dagger A_a, rho}_lambda].
inline Superop dissipator(const PairModel& m, const CountingFields& l) {
  Superop d = Superop::Zero(4, 4);
  detail::for_each_pair(m, [&](const Mat& A, const Mat& B, const auto& ea, const auto& eb, double c) {
    Mat bd = B.adjoint();
    Mat ba = bd * A;
    d += c * detail::sandwich_phase(ea, eb, l, m.rule) * sprepost(A, bd);
    d -= 0.5 * c * detail::left_phase(ea, eb, l) * spre(ba);
    d -= 0.5 * c * detail::left_phase(eb, ea, l) * spost(ba);
  });
  return d;
}

inline Superop generator(const PairModel& m, const CountingFields& l) {
  return Superop(-I * commutator(m.h)) + dissipator(m, l);
}

inline Superop generator(const GeneratorSpec& s, const ModelParams& p, const CountingFields& l = {}) {
  return generator(pair_model(s, p), l);
}

inline Superop generalized_bloch(const ModelParams& p, const CountingFields& l, Regime r) {
  return generator(GeneratorSpec{Family::gen_bloch, r}, p, l);
}
inline Superop floquet(const ModelParams& p, const CountingFields& l = {}) {
  return generator(GeneratorSpec{Family::floquet}, p, l);
}
inline Superop bloch_maps(const ModelParams& p, const CountingFields& l = {}, Thermal t = Thermal::channel) {
  GeneratorSpec s{Family::bloch_maps};
  s.thermal = t;
  return generator(s, p, l);
}
inline Superop bloch_redfield(const ModelParams& p, const CountingFields& l = {}, Thermal t = Thermal::smoothed,
                              bool secular = false) {
  GeneratorSpec s{Family::bloch_redfield};
  s.thermal = t;
  s.secular = secular;
  return generator(s, p, l);
}

/// Generator of the time-reversed process, assembled map-by-map: the Hamiltonian part
/// changes sign, the jump structure is kept.
inline Superop reversed_generator(const PairModel& m, const CountingFields& l) {
  auto apply_map = [&](const Mat& x) {
    Mat out = I * (m.h * x - x * m.h);
    detail::for_each_pair(m, [&](const Mat& A, const Mat& B, const auto& ea, const auto& eb, double c) {
      Mat ba = B.adjoint() * A;
      out += c * detail::sandwich_phase(ea, eb, l, m.rule) * (A * x * B.adjoint());
      out -= 0.5 * c * (detail::left_phase(ea, eb, l) * (ba * x) + detail::left_phase(eb, ea, l) * (x * ba));
    });
    return out;
  };
  return superop_from(apply_map, 2);
}

/// max |L^R(0, -l_DL, -l_B + i beta) - L(0, -l_DL, -l_B)^dagger|.
inline double ft_residual(const PairModel& m, double beta, cplx l_dl, cplx l_b) {
  Superop rev = reversed_generator(m, {0.0, -l_dl, -l_b + I * beta});
  Superop fwd = generator(m, {0.0, -l_dl, -l_b});
  return max_abs(rev - fwd.adjoint());
}

inline double ft_residual_grid(const GeneratorSpec& s, const ModelParams& p, int n = 5) {
  const PairModel m = pair_model(s, p);
  double worst = 0;
  const double span = 3.0 / p.omega_l;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double a = -span + 2 * span * i / (n - 1), b = -span + 2 * span * k / (n - 1);
      worst = std::max(worst, ft_residual(m, p.beta_b, a, b));
    }
  return worst;
}

/// max |L(lambda + chi 1) - L(lambda)|.
inline double shift_residual(const PairModel& m, const CountingFields& l, cplx chi) {
  return max_abs(generator(m, l.shifted(chi)) - generator(m, l));
}

// ---- lab frame

/// X(tau) = R(-tau) X R(tau), R(tau) = diag(e^{-i wL tau/2}, e^{i wL tau/2}); entire in tau.
inline Mat lab_shift(const Mat& x, double wl, cplx tau) {
  Mat r = Mat::Zero(2, 2), ri = Mat::Zero(2, 2);
  r(0, 0) = std::exp(-I * wl * tau / 2.0);
  r(1, 1) = std::exp(I * wl * tau / 2.0);
  ri(0, 0) = 1.0 / r(0, 0);
  ri(1, 1) = 1.0 / r(1, 1);
  return ri * x * r;
}

/// H_A(tau) = wA sz/2 + (g/2)(e^{i phi} e^{-i wL tau} s+ + e^{-i phi} e^{i wL tau} s-), continued to complex tau.
inline Mat qubit_hamiltonian_at(const ModelParams& p, cplx tau) {
  const cplx e = std::exp(I * (p.alpha_phase - p.omega_l * tau));
  const cplx f = std::exp(I * (-p.alpha_phase + p.omega_l * tau));
  return 0.5 * p.omega_a * qubit::sz() + 0.5 * p.g() * (e * qubit::sp() + f * qubit::sm());
}

/// Lab-frame generator of the qubit at time t, counting H_L with l_l and H_B with l_b.
class LabGenerator {
public:
  LabGenerator(const GeneratorSpec& s, const ModelParams& p) : p_(p), m_(pair_model(s, p)) {
    Mat u = dressed_columns(p, p.alpha_phase);
    for (int k = 0; k < 3; ++k) {
      m_.up_ops[k] = u * m_.up_ops[k] * u.adjoint();
      m_.down_ops[k] = u * m_.down_ops[k] * u.adjoint();
    }
  }

  Superop operator()(double t, cplx l_l = 0.0, cplx l_b = 0.0) const {
    const cplx tp = t + l_l / 2.0, tm = t - l_l / 2.0;
    return -I * (spre(qubit_hamiltonian_at(p_, tp)) - spost(qubit_hamiltonian_at(p_, tm))) + dissipator(t, l_l, l_b);
  }

  Superop dissipator(double t, cplx l_l = 0.0, cplx l_b = 0.0) const {
    const double wl = p_.omega_l;
    const cplx tp = t + l_l / 2.0, tm = t - l_l / 2.0;
    Superop out = Superop::Zero(4, 4);
    const CountingFields field{0.0, l_l, l_b};
    detail::for_each_pair(m_, [&](const Mat& A, const Mat& B, const auto& ea, const auto& eb, double c) {
      Mat bd = B.adjoint(), ba = bd * A;
      out += c * detail::sandwich_phase(ea, eb, field, m_.rule) * sprepost(lab_shift(A, wl, tp), lab_shift(bd, wl, tm));
      out -= 0.5 * c * spre(lab_shift(ba, wl, tp));
      out -= 0.5 * c * spost(lab_shift(ba, wl, tm));
    });
    return out;
  }

  const ModelParams& params() const { return p_; }
  double period() const { return 2 * M_PI / p_.omega_l; }

private:
  ModelParams p_;
  PairModel m_;
};

// ---- evolution

struct TiltedTrajectory {
  std::vector<double> t;
  std::vector<Mat> rho;
  std::vector<cplx> mgf;
};

/// e^{tL} on a grid for a time-independent generator.
inline TiltedTrajectory evolve(const Superop& L, const Mat& rho0, const std::vector<double>& times) {
  TiltedTrajectory out;
  Vec v0 = vec(rho0);
  for (double t : times) {
    Mat r = unvec(expm(t * L) * v0);
    out.t.push_back(t);
    out.mgf.push_back(r.trace());
    out.rho.push_back(std::move(r));
  }
  return out;
}

/// Counting field on H_DA applied as boundary factors around the untilted-DA dynamics:
/// rho(t) = E e^{tL}[E^{-1} rho0 E^{-1}] E with E = e^{i l_da H / 2}.
inline TiltedTrajectory evolve_with_boundary(const Superop& L, const Mat& h, cplx l_da, const Mat& rho0,
                                             const std::vector<double>& times) {
  Mat e = expm(I * l_da * h / 2.0), ei = expm(-I * l_da * h / 2.0);
  TiltedTrajectory tr = evolve(L, ei * rho0 * ei, times);
  for (std::size_t k = 0; k < tr.rho.size(); ++k) {
    tr.rho[k] = e * tr.rho[k] * e;
    tr.mgf[k] = tr.rho[k].trace();
  }
  return tr;
}

struct StepControl {
  double tol = 1e-9;
  double h0 = 1e-3;
  double h_min = 1e-12;
};

namespace detail {
template <class Gen>
Mat rk4_step(const Gen& L, double t, double h, const Mat& y) {
  Mat k1 = L(t) * y;
  Mat k2 = L(t + h / 2) * (y + h / 2 * k1);
  Mat k3 = L(t + h / 2) * (y + h / 2 * k2);
  Mat k4 = L(t + h) * (y + h * k3);
  return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}
}  // namespace detail

/// Adaptive RK4 with step doubling for y' = L(t) y; y may hold several columns.
template <class Gen>
Mat integrate(const Gen& L, double t0, double t1, Mat y, StepControl c = {}) {
  double t = t0, h = std::min(c.h0, t1 - t0);
  int guard = 0;
  while (t < t1 - 1e-15 * std::max(1.0, std::abs(t1))) {
    if (++guard > 50000000) throw Error("time-dependent integration did not finish");
    h = std::min(h, t1 - t);
    Mat full = detail::rk4_step(L, t, h, y);
    Mat half = detail::rk4_step(L, t + h / 2, h / 2, detail::rk4_step(L, t, h / 2, y));
    const double err = max_abs(full - half) / 15.0;
    if (err > c.tol && h > c.h_min) {
      h *= std::max(0.2, 0.9 * std::pow(c.tol / err, 0.2));
      continue;
    }
    y = half + (half - full) / 15.0;
    t += h;
    h *= std::min(4.0, err > 0 ? 0.9 * std::pow(c.tol / err, 0.2) : 4.0);
  }
  return y;
}

/// Tilted qubit state under a lab-frame generator on a time grid.
inline TiltedTrajectory evolve_lab(const LabGenerator& g, cplx l_l, cplx l_b, const Mat& rho0,
                                   const std::vector<double>& times, StepControl c = {}) {
  TiltedTrajectory out;
  auto L = [&](double t) { return g(t, l_l, l_b); };
  Mat y = vec(rho0);
  double t = 0;
  for (double tk : times) {
    if (tk > t) y = integrate(L, t, tk, y, c);
    t = tk;
    Mat r = unvec(y);
    out.t.push_back(tk);
    out.mgf.push_back(r.trace());
    out.rho.push_back(r);
  }
  return out;
}

namespace detail {
// Leading eigenvalue among modes with a nonzero trace; traceless modes never reach Tr[rho].
inline cplx trace_visible_leading(const Mat& s, bool by_modulus) {
  Eigen::ComplexEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  const int d = static_cast<int>(std::lround(std::sqrt(double(s.rows()))));
  int best = -1;
  auto key = [&](int k) { return by_modulus ? std::abs(es.eigenvalues()(k)) : es.eigenvalues()(k).real(); };
  for (int k = 0; k < s.rows(); ++k) {
    const Vec v = es.eigenvectors().col(k);
    if (std::abs(unvec(v).trace()) < 1e-8 * v.norm() * std::sqrt(double(d))) continue;
    if (best < 0 || key(k) > key(best)) best = k;
  }
  if (best < 0) throw Error("no trace-carrying eigenmode");
  return es.eigenvalues()(best);
}
}  // namespace detail

/// One-period propagator of the lab-frame generator; log of its largest multiplier over the period.
/// The boundary twist of the lab frame lets every mode reach the trace, so no mode is filtered out.
inline cplx lab_scaled_cgf(const LabGenerator& g, cplx l_l, cplx l_b, StepControl c = {}) {
  auto L = [&](double t) { return g(t, l_l, l_b); };
  const double T = g.period();
  Mat u = integrate(L, 0.0, T, Mat(Mat::Identity(4, 4)), c);
  const Vec mu = spectrum(u);
  int best = 0;
  for (int k = 1; k < mu.size(); ++k)
    if (std::abs(mu(k)) > std::abs(mu(best))) best = k;
  return std::log(mu(best)) / T;
}

// ---- steady state and cumulant generating function

struct SteadyState {
  Mat rho;
  double residual = 0;
  bool degenerate = false;
};

inline SteadyState steady_state(const Superop& L, double degeneracy_tol = 1e-9) {
  Eigen::ComplexEigenSolver<Mat> es(L);
  const auto& ev = es.eigenvalues();
  int best = 0;
  for (int k = 1; k < ev.size(); ++k)
    if (std::abs(ev(k)) < std::abs(ev(best))) best = k;
  SteadyState s;
  for (int k = 0; k < ev.size(); ++k)
    if (k != best && std::abs(ev(k)) < degeneracy_tol * std::max(1.0, max_abs(L))) s.degenerate = true;
  // refine the null vector by a least-squares solve with the trace constraint appended
  const int n = static_cast<int>(L.rows());
  const int d = static_cast<int>(std::lround(std::sqrt(double(n))));
  Mat a(n + 1, n);
  a.topRows(n) = L;
  a.row(n) = vec(Mat::Identity(d, d)).adjoint();
  Vec rhs = Vec::Zero(n + 1);
  rhs(n) = 1.0;
  Vec x = a.colPivHouseholderQr().solve(rhs);
  Mat r = unvec(x);
  r = 0.5 * (r + r.adjoint());
  r /= r.trace();
  s.rho = r;
  s.residual = (L * vec(r)).norm();
  return s;
}

/// Scaled cumulant generating function: leading trace-carrying eigenvalue of the tilted generator.
inline cplx ss_scaled_cgf(const Superop& L) { return detail::trace_visible_leading(L, false); }

}  // namespace qlt
