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

// Acceptance run: one line per criterion with the measured value, the bound and the wall time.
// Criteria listed in `documented` are known not to hold as stated; they print FAIL with a
// short reason and do not change the exit status. Any other failure does.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "cli.hpp"
#include "qlt/exactsim.hpp"
#include "qlt/fcs.hpp"
#include "qlt/generators.hpp"
#include "qlt/thermoflows.hpp"

using namespace qlt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::set<std::string> documented{"1", "8c", "9"};
int undocumented_failures = 0;

void criterion(const std::string& id, double time_limit, const std::function<Outcome()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < time_limit;
  const bool ok = o.pass && in_time;
  const bool known = !ok && documented.count(id);
  if (!ok && !known) ++undocumented_failures;
  std::printf("%s criterion %-3s %s | %.2fs (limit %.0fs)%s\n", ok ? "PASS" : "FAIL", id.c_str(), o.detail.c_str(), dt,
              time_limit, known ? " [documented deviation]" : "");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char b[256];
  std::snprintf(b, sizeof b, f, a);
  return b;
}
std::string fmt(const char* f, double a, double c) {
  char b[256];
  std::snprintf(b, sizeof b, f, a, c);
  return b;
}
std::string fmt(const char* f, double a, double c, double d) {
  char b[256];
  std::snprintf(b, sizeof b, f, a, c, d);
  return b;
}

ModelParams flows_desk() {
  ModelParams p;
  p.omega_a = 20.3;
  p.alpha_abs = 4;
  p.g0 = 0.5;
  p.beta_b = 0.5;
  p.bath.width = 20;
  p.bath.gamma0 = 0.4 * std::sqrt(20.0);
  return p;
}

ModelParams fig6() {
  ModelParams p;
  p.alpha_abs = 4;
  p.g0 = 0.1;
  p.beta_b = 10.0 / 20;
  p.bath.width = 20;
  p.bath.gamma0 = 0.4 * std::sqrt(20.0);
  return p;
}

ModelParams well_separated() {
  ModelParams p;
  p.omega_a = 20.05;
  p.alpha_abs = 20;
  p.g0 = 0.1;
  p.beta_b = 0.5;
  p.bath.gamma0 = 0.05;
  return p;
}

ModelParams exact_desk(double alpha = 2) {
  ModelParams p;
  p.omega_a = p.omega_l = 20;
  p.g0 = 0.1;
  p.alpha_abs = alpha;
  p.beta_b = 5.0 / 20;
  p.bath.width = 20;
  p.bath.n_modes = 4;
  p.bath.g_bath = 0.1;
  p.laser_nmax = 16;
  return p;
}

Outcome kms_and_detailed_balance() {
  ModelParams p = fig6();
  double kms = 0;
  for (double nu = 10.5; nu < 30; nu += 0.75)
    kms = std::max(kms, std::abs(g_plus(p, nu) - std::exp(p.beta_b * nu) * g_minus(p, nu)) / g_plus(p, nu));
  const RateTable r = rate_table(p);
  const double b = p.beta_b, wl = p.omega_l, om = p.rabi();
  const double db0 = std::abs(std::log(r.g0_down / r.g0_up) - b * wl);
  const double db1 = std::abs(std::log(r.g1_down / r.g1_up) - b * (wl + om));
  const double db2_printed = std::abs(std::log(r.g2_down / r.g2_up) - b * (wl - om));
  const double db2_emission = std::abs(std::log(r.g2_up / r.g2_down) - b * (wl - om));
  const bool ok = kms < 1e-12 && db0 < 1e-12 && db1 < 1e-12 && db2_printed < 1e-12;
  return {ok, fmt("KMS %.1e, detailed balance j=0 %.1e, j=1 %.1e", kms, db0, db1) +
                  fmt(", j=2 as printed %.3e, j=2 for the emitting transition %.1e (tol 1e-12)", db2_printed, db2_emission)};
}

Outcome first_law_closure() {
  const ModelParams p = flows_desk();
  const RateTable rt = rate_table(p);
  Mat rho0 = Mat::Zero(2, 2);
  rho0(1, 1) = 1;
  std::vector<double> times;
  for (int k = 0; k <= 200; ++k) times.push_back(0.01 * k);
  auto run = [&](const Superop& L, const std::function<FlowReport(const Mat&)>& flows) {
    double worst = 0;
    for (const Mat& r : evolve(L, rho0, times).rho) worst = std::max(worst, std::abs(flows(r).first_law_residual));
    return worst;
  };
  const double w = run(generalized_bloch(p, {}, Regime::weak), [&](const Mat& r) { return flows_generalized_bloch(r, p, rt); });
  const double i = run(generalized_bloch(p, {}, Regime::intermediate),
                       [&](const Mat& r) { return flows_generalized_bloch(r, p, rt, false); });
  const double f = run(floquet(p), [&](const Mat& r) { return flows_floquet(r, p, rt); });
  const double b = run(bloch_maps(p, {}, Thermal::smoothed), [&](const Mat& r) { return flows_bloch(r, p); });
  const double worst = std::max({w, i, f, b});
  return {worst < 1e-10, fmt("max |dE - dQ - dW| weak %.1e, intermediate %.1e, ", w, i) +
                             fmt("Floquet %.1e, Bloch %.1e (tol 1e-10)", f, b)};
}

Outcome ft_matrix() {
  const ModelParams p = fig6();
  const double gw = ft_residual_grid({Family::gen_bloch, Regime::weak}, p);
  const double gi = ft_residual_grid({Family::gen_bloch, Regime::intermediate}, p);
  const double fl = ft_residual_grid({Family::floquet}, p);
  const double mp = ft_residual_grid({Family::bloch_maps}, p);
  const double rf = ft_residual_grid({Family::bloch_redfield}, p);
  const bool ok = std::max({gw, gi, fl, mp}) < 1e-10 && rf > 1e-3;
  return {ok, fmt("adjoint identity: gen. Bloch %.1e / %.1e, ", gw, gi) + fmt("Floquet %.1e, maps-Bloch %.1e (< 1e-10); ", fl, mp) +
                  fmt("Redfield-Bloch %.2e (> 1e-3)", rf)};
}

Outcome strict_conservation() {
  const ModelParams p = fig6();
  const CountingFields l{0.1, 0.2, 0.3};
  double fl = 0, mp = 1e300;
  for (double chi : {0.07, -0.3, 1.1}) {
    fl = std::max(fl, shift_residual(pair_model({Family::floquet}, p), l, chi));
    mp = std::min(mp, shift_residual(pair_model({Family::bloch_maps}, p), l, chi));
  }
  return {fl < 1e-12 && mp > 1e-6, fmt("uniform shift: Floquet %.1e (< 1e-12), maps-Bloch %.2e (> 1e-6)", fl, mp)};
}

Outcome closed_form_steady_states() {
  double worst = 0, q_max = -1e300, s_min = 1e300;
  for (double wa : {20.0, 20.3, 21.0}) {
    ModelParams p = flows_desk();
    p.omega_a = wa;
    const RateTable rt = rate_table(p);
    const SteadyState s = steady_state(floquet(p));
    const FloquetSteady c = floquet_steady_closed(p, rt);
    worst = std::max({worst, std::abs(s.rho(0, 0).real() - c.p1), std::abs(s.rho(1, 1).real() - c.p2), std::abs(s.rho(1, 0))});
    worst = std::max(worst, std::abs(flows_floquet(s.rho, p, rt).q - c.q_dot));
    q_max = std::max(q_max, c.q_dot);
    s_min = std::min(s_min, c.sigma_dot);
    const SteadyState sb = steady_state(bloch_maps(p, {}, Thermal::smoothed));
    FlowReport f;
    fill_populations(f, sb.rho, p);
    const BlochSteady cb = bloch_steady_closed(p);
    worst = std::max({worst, std::abs(f.pb - cb.pb), std::abs(f.pba - cb.pba)});
  }
  return {worst < 1e-10 && q_max < 0 && s_min > 0,
          fmt("closed forms %.1e (tol 1e-10), max Floquet Qdot %.3e (< 0), min Sigmadot %.3e (> 0)", worst, q_max, s_min)};
}

Outcome common_regime_scaling() {
  ModelParams p;
  p.bath.width = 1000;
  p.beta_b = 100.0 / 1000;
  p.bath.gamma0 = 0.1 * std::sqrt(1000.0);
  p.omega_a = 0.02 * 1000;
  p.omega_l = p.omega_a - 1e-8 * 1000;
  p.alpha_abs = 100;
  const double gmax = smooth_rate_table(p).gamma_max;
  std::vector<double> g, dq;
  double worst = 0;
  for (double k : {1.0, 2.0, 4.0}) {
    p.g0 = 800 * gmax * k / p.alpha_abs;
    const SsComparison c = ss_compare(p);
    worst = std::max({worst, std::abs(c.dq_numeric - c.dq_closed), std::abs(c.dw_numeric - c.dw_closed)});
    g.push_back(c.g);
    dq.push_back(c.dq_numeric);
  }
  // exponent in gamma_max / g is minus the exponent in g
  const double expo = -log_slope(g, dq);
  return {worst < 1e-8 && std::abs(expo - 2) < 0.4,
          fmt("closed forms %.1e (tol 1e-8), heat-difference exponent in gamma_max/g %.4f (2 +- 0.4)", worst, expo)};
}

Outcome steady_state_ft() {
  const ModelParams p = well_separated();
  const PairModel m = pair_model({Family::floquet}, p);
  const LabGenerator lab(GeneratorSpec{Family::floquet}, p);
  double dressed = 0, lab_dev = 0, scgf = 0;
  for (double a : {-0.1, 0.0, 0.1})
    for (double b : {-0.1, 0.0, 0.1}) {
      const cplx shifted(b, p.beta_b);
      dressed = std::max(dressed, std::abs(dominant_eigenvalue(dissipator(m, {0, a, shifted})).value -
                                           std::conj(dominant_eigenvalue(dissipator(m, {0, a, b})).value)));
      for (double t : {0.0, lab.period() / 4})
        lab_dev = std::max(lab_dev, std::abs(dominant_eigenvalue(lab.dissipator(t, a, shifted)).value -
                                             std::conj(dominant_eigenvalue(lab.dissipator(t, a, b)).value)));
      scgf = std::max(scgf, std::abs(ss_scaled_cgf(generator(m, {0, a, shifted})) -
                                     std::conj(ss_scaled_cgf(generator(m, {0, a, b})))));
    }
  const double worst = std::max({dressed, lab_dev, scgf});
  return {worst < 1e-8, fmt("dominant-eigenvalue symmetry: dissipator W_DL %.1e, lab W_L %.1e, ", dressed, lab_dev) +
                            fmt("full Floquet SCGF %.1e (tol 1e-8)", scgf)};
}

// W_L from the laser energy for a set of initial ensembles evolved under one Hamiltonian
std::vector<std::vector<double>> laser_work(const Propagator& prop, const RVec& hl, const std::vector<Ensemble>& starts,
                                            const std::vector<double>& ts) {
  std::vector<std::vector<double>> w(starts.size(), std::vector<double>(ts.size()));
  for (std::size_t i = 0; i < starts.size(); ++i) {
    EnsembleEvolver ev(prop, starts[i]);
    const double e0 = diagonal_expectation(ev.kets(0), ev.weights(), hl);
    for (std::size_t k = 0; k < ts.size(); ++k) w[i][k] = -(diagonal_expectation(ev.kets(ts[k]), ev.weights(), hl) - e0);
  }
  return w;
}

std::vector<Ensemble> phase_family(const ModelParams& p, int n_phases, bool with_poisson) {
  Ensemble bath = cli::bath_ensemble(p);
  Ensemble q = Ensemble::pure(cli::excited_qubit());
  std::vector<Ensemble> s;
  if (with_poisson) s.push_back(tensor(tensor(q, Ensemble::diagonal(poisson_weights(p.alpha_abs, p.laser_nmax))), bath));
  for (int k = 0; k < n_phases; ++k)
    s.push_back(tensor(tensor(q, Ensemble::pure(coherent_vector({p.alpha_abs, 2 * M_PI * k / n_phases, p.laser_nmax, 1e-4}))), bath));
  return s;
}

void exact_desk_criteria() {
  double t_desk = 0;
  auto clock = [] { return std::chrono::steady_clock::now(); };
  auto since = [](auto t0) { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  const ModelParams p = exact_desk();
  const double t_eval = 10 / p.rabi();

  std::unique_ptr<cli::DeskMeasurement> d;
  Mat wf, wr;
  auto t0 = clock();
  criterion("8a", 300, [&] {
    d = std::make_unique<cli::DeskMeasurement>(cli::desk_measurement(p));
    wf = d->fw->weights(t_eval);
    wr = d->rv->weights(t_eval);
    double worst = 0;
    for (double a : {-0.1, 0.0, 0.1})
      for (double b : {-0.1, 0.0, 0.1}) {
        const cplx g = d->fw->mgf(wf, {0.0, a, b});
        const cplx gr = d->rv->mgf(wr, {I * p.beta_b, -a, cplx(-b, p.beta_b)});
        worst = std::max(worst, std::abs(g - gr) / std::abs(g));
      }
    return Outcome{worst < 1e-4, fmt("G(l) vs G^R(-l + i nu) at t = 10/Omega: max relative %.2e (tol 1e-4), dim %.0f",
                                     worst, double(d->fw->dim()))};
  });
  t_desk += since(t0);

  t0 = clock();
  criterion("8b", 300, [&] {
    const auto pf = d->fw->distribution(wf, {0, -1, 0}), pr = d->rv->distribution(wr, {0, -1, 0});
    const CrooksResult c = crooks_check(pf, pr, p.beta_b);
    const double rel = std::abs(c.slope / p.beta_b - 1);
    return Outcome{rel < 0.05, fmt("Crooks slope for W_DL %.5f vs beta %.3f: relative %.3f (tol 0.05)", c.slope, p.beta_b, rel) +
                                   fmt(", %.0f support points", double(c.points))};
  });
  t_desk += since(t0);
  d.reset();

  t0 = clock();
  criterion("8c", 300, [&] {
    double avg_dev[2] = {0, 0}, single_dev[2] = {0, 0};
    for (int ia = 0; ia < 2; ++ia) {
      const ModelParams q = exact_desk(ia + 1.0);
      const Hamiltonians h = build_hamiltonians(q);
      const Propagator prop(h.H.data());
      std::vector<double> ts;
      for (int i = 1; i <= 40; ++i) ts.push_back(0.5 * i / q.rabi());
      const auto w = laser_work(prop, h.H_L.data().diagonal().real(), phase_family(q, 8, true), ts);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        double avg = 0, single = 0;
        for (int i = 1; i <= 8; ++i) {
          avg += w[i][k] / 8;
          single += std::abs(w[i][k] - w[0][k]) / 8;
        }
        avg_dev[ia] = std::max(avg_dev[ia], std::abs(avg - w[0][k]));
        single_dev[ia] = std::max(single_dev[ia], single);
      }
    }
    // the trend is only meaningful above round-off
    const bool resolved = avg_dev[0] > 1e-10;
    return Outcome{resolved && avg_dev[1] < avg_dev[0],
                   fmt("8-phase average vs Poisson max |dW_L|: alpha=1 %.2e, alpha=2 %.2e", avg_dev[0], avg_dev[1]) +
                       fmt(" (round-off, trend not resolvable); single phase: %.3e -> %.3e", single_dev[0], single_dev[1])};
  });
  t_desk += since(t0);

  t0 = clock();
  criterion("8d", 300, [&] {
    HamiltonianOptions o;
    o.rwa_laser = o.rwa_bath = true;
    const Hamiltonians h = build_hamiltonians(p, o);
    const Propagator prop(h.H.data());
    const auto starts = phase_family(p, 8, false);
    double spread = 0, rot = 0, qmin = 1e300;
    for (double t : {2.5 / p.rabi(), 5 / p.rabi(), t_eval}) {
      std::vector<PhaseCoherences> c;
      for (const auto& e : starts) {
        EnsembleEvolver ev(prop, e);
        c.push_back(phase_coherences_al(reduce_leading(ev.kets(t), ev.weights(), 2 * (p.laser_nmax + 1)), p));
      }
      for (int k = 1; k < 8; ++k) {
        spread = std::max(spread, std::abs(c[k].dressed - c[0].dressed));
        rot = std::max(rot, std::abs(std::remainder(std::arg(c[k].qubit) - std::arg(c[0].qubit) - 2 * M_PI * k / 8, 2 * M_PI)));
      }
      for (const auto& x : c) qmin = std::min(qmin, std::abs(x.qubit));
    }
    return Outcome{spread < 1e-3 && rot < 1e-6 && qmin > 1e-3,
                   fmt("RWA model, 8 phases: dressed coherence spread %.1e (tol 1e-3), qubit phase minus laser phase %.1e", spread, rot) +
                       fmt(", min |qubit coherence| %.3f", qmin)};
  });
  t_desk += since(t0);
  std::printf("     criterion 8 total %.1fs (limit 300s)\n", t_desk);
  if (t_desk > 300) ++undocumented_failures;
}

Outcome frame_equivalence() {
  const ModelParams p = exact_desk();
  const Mat m = dressed_columns(p, 0.0);
  const Mat rho_da = m.adjoint() * qubit::proj(1) * m;
  std::vector<double> ts;
  for (int i = 0; i <= 20; ++i) ts.push_back(0.5 * i / p.rabi());
  const FrameComparison c = compare_frames(p, rho_da, cli::poisson_dl(p), ts);
  Mat fock = Mat::Zero(p.laser_nmax, p.laser_nmax);
  fock(8, 8) = 1;
  const FrameComparison e = compare_frames(p, rho_da, fock, ts);
  return {c.max_distance < 1e-6, fmt("Poisson laser: max trace distance %.2e (tol 1e-6), leakage %.1e", c.max_distance,
                                     *std::max_element(c.leakage.begin(), c.leakage.end())) +
                                     fmt("; mid-ladder Fock laser %.1e", e.max_distance)};
}

Outcome generator_vs_exact() {
  ModelParams p;
  p.omega_a = p.omega_l = 20;
  p.g0 = 1;
  p.alpha_abs = 6;
  p.beta_b = 50;
  p.bath.width = 40;
  p.bath.n_modes = 48;
  p.bath.g_bath = 0.3;
  p.bath.gamma0 = std::sqrt(p.discrete_gamma());
  const DressedBathModel m = dressed_bath_model(p, 3);
  const double t_rec = 2 * M_PI * p.bath.n_modes / p.bath.width;
  std::vector<double> ts;
  for (int i = 1; i <= 6; ++i) ts.push_back(0.8 * t_rec * i / 6);
  Vec psi(2);
  psi << 0, 1;
  const DressedBathRun r = run_dressed_bath(m, psi, ts);
  const Mat rho0 = psi * psi.adjoint();
  double worst = 0;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.05, 0}, {0, 0.05}, {0.1, -0.05}, {-0.08, 0.03}, {0.2, 0.2}, {0.3, 0}}) {
    const TiltedTrajectory tr = evolve(floquet(p, {0, a, b}), rho0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const cplx ge = dressed_bath_mgf(m, r.psi[i], a, b);
      worst = std::max(worst, std::abs(tr.mgf[i] - ge) / std::abs(ge));
    }
  }
  // (delta0 gamma_max)^2 with delta0 = 1/sqrt(gamma_max Omega)
  const double budget = rate_table(p).gamma_max / p.rabi();
  return {budget < 0.1 && worst <= budget,
          fmt("max relative MGF gap %.3e, budget gamma_max/Omega %.3e (< 0.1)", worst, budget) +
              fmt(", truncation weight %.1e, dim %.0f", r.truncation_weight, double(m.dim()))};
}

}  // namespace

int main() {
  criterion("1", 1, kms_and_detailed_balance);
  criterion("2", 5, first_law_closure);
  criterion("3", 5, ft_matrix);
  criterion("4", 1, strict_conservation);
  criterion("5", 1, closed_form_steady_states);
  criterion("6", 10, common_regime_scaling);
  criterion("7", 5, steady_state_ft);
  exact_desk_criteria();
  criterion("9", 120, frame_equivalence);
  criterion("10", 300, generator_vs_exact);
  std::printf("%s: %d undocumented failure(s)\n", undocumented_failures ? "FAILED" : "OK", undocumented_failures);
  return undocumented_failures ? 1 : 0;
}
