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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qlt/exactsim.hpp"
#include "qlt/fcs.hpp"
#include "qlt/thermoflows.hpp"

namespace qlt::cli {

inline constexpr const char* kVersion = "qlaser-thermo 0.1.0";

/// Bad input: usage or config problems (exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---- configuration

using Config = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> k{
      "omega_a",        "omega_l",      "g0",          "alpha_abs",      "alpha_phase",   "beta_b",
      "bath.width",     "bath.gamma0",  "bath.n_modes", "bath.g_bath",   "trunc.laser",   "trunc.bath_mode",
      "t_max",          "n_steps",      "lambda_max",  "n_lambda",       "n_phases",      "phase_shift",
      "model.rwa",      "laser.state",  "fock.level",  "g_factors",      "tol.symmetry",  "tol.crooks",
      "tol.frame",      "tol.closed_form", "tol.slope"};
  return k;
}

inline void set_key(Config& c, const std::string& key, const std::string& value, const std::string& where) {
  if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
    throw ConfigError(where + ": unknown key '" + key + "'");
  if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
  c[key] = value;
}

/// Flat "key = value" text; '#' starts a comment.
inline Config parse_config(std::istream& in, const std::string& name = "config") {
  Config c;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = name + ":" + std::to_string(n);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    set_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  return c;
}

inline void apply_override(Config& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("--set " + kv + ": expected key=value");
  set_key(c, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), "--set");
}

inline double num(const Config& c, const std::string& k) {
  const std::string& s = c.at(k);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("key '" + k + "': '" + s + "' is not a number");
  return v;
}

inline int integer(const Config& c, const std::string& k) {
  const double v = num(c, k);
  if (v != std::floor(v)) throw ConfigError("key '" + k + "': expected an integer");
  return static_cast<int>(v);
}

inline std::vector<double> list(const Config& c, const std::string& k) {
  std::vector<double> out;
  std::stringstream ss(c.at(k));
  std::string item;
  while (std::getline(ss, item, ',')) {
    Config one{{k, trim(item)}};
    out.push_back(num(one, k));
  }
  return out;
}

inline ModelParams model_params(const Config& c) {
  ModelParams p;
  p.omega_a = num(c, "omega_a");
  p.omega_l = num(c, "omega_l");
  p.g0 = num(c, "g0");
  p.alpha_abs = num(c, "alpha_abs");
  p.alpha_phase = num(c, "alpha_phase");
  p.beta_b = num(c, "beta_b");
  p.bath.width = num(c, "bath.width");
  p.bath.gamma0 = num(c, "bath.gamma0");
  p.bath.n_modes = integer(c, "bath.n_modes");
  p.bath.g_bath = num(c, "bath.g_bath");
  p.laser_nmax = integer(c, "trunc.laser");
  p.bath.mode_levels = integer(c, "trunc.bath_mode");
  if (p.laser_nmax < 1) throw ConfigError("trunc.laser must be at least 1");
  if (p.bath.n_modes < 0 || p.bath.mode_levels < 2) throw ConfigError("bath.n_modes >= 0 and trunc.bath_mode >= 2 required");
  if (integer(c, "n_steps") < 1 || num(c, "t_max") <= 0) throw ConfigError("t_max > 0 and n_steps >= 1 required");
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return p;
}

/// Scenario defaults; a config file and --set entries override them.
inline Config defaults(const std::string& scenario) {
  Config c{{"omega_a", "20"},      {"omega_l", "20"},          {"g0", "0.1"},          {"alpha_abs", "2"},
           {"alpha_phase", "0"},   {"beta_b", "0.25"},         {"bath.width", "20"},    {"bath.gamma0", "0.5"},
           {"bath.n_modes", "4"},  {"bath.g_bath", "0.1"},     {"trunc.laser", "16"},   {"trunc.bath_mode", "2"},
           {"t_max", "20"},        {"n_steps", "80"},          {"lambda_max", "0.15"},  {"n_lambda", "31"},
           {"n_phases", "8"},      {"phase_shift", "1.0471975511965976"},               {"model.rwa", "0"},
           {"laser.state", "poisson"}, {"fock.level", "8"},    {"g_factors", "1,2,4"},  {"tol.symmetry", "1e-8"},
           {"tol.crooks", "0.05"}, {"tol.frame", "1e-6"},      {"tol.closed_form", "1e-8"}, {"tol.slope", "0.4"}};
  if (scenario == "fig6-mgf-wdl" || scenario == "ft-matrix") {
    c["alpha_abs"] = "4";
    c["beta_b"] = "0.5";
    c["bath.gamma0"] = std::to_string(0.4 * std::sqrt(20.0));
    c["t_max"] = "2";
    c["n_steps"] = "1";
    c["lambda_max"] = "0.3";
  }
  if (scenario == "fig7-ss-mgf" || scenario == "ss-compare") {
    c["bath.width"] = "1000";
    c["beta_b"] = "0.1";
    c["bath.gamma0"] = std::to_string(0.1 * std::sqrt(1000.0));
    c["omega_a"] = "20";
    c["omega_l"] = "19.99999";
    c["alpha_abs"] = "100";
    c["lambda_max"] = "0.05";
  }
  if (scenario == "fig1-worksource") {
    c["alpha_abs"] = "1";
    c["trunc.laser"] = "12";
    c["bath.n_modes"] = "0";
  }
  if (scenario == "crooks-desk") {
    c["t_max"] = "10";
    c["n_steps"] = "1";
  }
  if (scenario == "frame-equivalence") {
    c["t_max"] = "10";
    c["n_steps"] = "20";
  }
  return c;
}

// ---- parallel fan-out and output

inline int thread_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* s = std::getenv("QLT_THREADS")) {
    const int v = std::atoi(s);
    if (v >= 1) n = std::min(n, v);
  }
  return n;
}

/// Calls f(i) for i in [0, n); results must be written to slot i only.
inline void parallel_for(int n, const std::function<void(int)>& f) {
  const int nt = std::min(thread_count(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += nt) f(i);
    });
  for (auto& th : pool) th.join();
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> notes;  // scenario results for the header
  std::string failure;                                       // physics or tolerance check that did not hold
  void note(const std::string& k, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    notes.emplace_back(k, buf);
  }
  void note(const std::string& k, const std::string& v) { notes.emplace_back(k, v); }
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::string& scenario, const Config& c, const Table& t) {
  os << "# scenario: " << scenario << "\n# version: " << kVersion << "\n";
  for (const auto& [k, v] : c) os << "# config " << k << " = " << v << "\n";
  const ModelParams p = model_params(c);
  if (p.g() > 0 && p.bath.gamma0 > 0) {
    const RegimeReport r = classify_regime(p);
    const RateTable rt = rate_table(p);
    os << "# regime: " << regime_name(r.regime) << "\n";
    os << "# rabi: " << format_number(p.rabi()) << "\n";
    os << "# gamma_max: " << format_number(rt.gamma_max) << "\n";
    os << "# g_over_gamma_max: " << format_number(r.g_over_gamma_max) << "\n";
    os << "# delta0: " << format_number(r.inv_delta0 > 0 ? 1.0 / r.inv_delta0 : 0.0) << "\n";
  }
  os << "# near_resonance: " << (p.near_resonance() ? "yes" : "no") << "\n";
  os << "# macroscopic_laser: " << (p.macroscopic_laser() ? "yes" : "no") << "\n";
  for (const auto& [k, v] : t.notes) os << "# result " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
}

// ---- shared builders

inline std::vector<double> rabi_times(const Config& c, const ModelParams& p) {
  const int n = integer(c, "n_steps");
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(num(c, "t_max") * k / n / p.rabi());
  return t;
}

inline HamiltonianOptions options(const Config& c) {
  HamiltonianOptions o;
  o.rwa_laser = o.rwa_bath = integer(c, "model.rwa") != 0;
  return o;
}

inline LaserSpec laser(const ModelParams& p, double phase) { return {p.alpha_abs, phase, p.laser_nmax, 1e-3}; }

inline Ensemble bath_ensemble(const ModelParams& p) {
  if (p.bath.n_modes == 0) return Ensemble::pure(Vec::Ones(1));
  return Ensemble::diagonal(bath_gibbs(p).diagonal().real());
}

inline Vec excited_qubit() {
  Vec b = Vec::Zero(2);
  b(1) = 1;
  return b;
}

inline Mat poisson_dl(const ModelParams& p) {
  RVec w = poisson_weights(p.alpha_abs, p.laser_nmax - 1);
  w /= w.sum();
  return w.cast<cplx>().asDiagonal();
}

// ---- scenarios

inline Table fig1_worksource(const Config& c) {
  ModelParams p = model_params(c);
  HamiltonianOptions o;
  o.with_bath = false;
  Hamiltonians h = build_hamiltonians(p, o);
  Propagator prop(h.H.data());
  const auto ts = rabi_times(c, p);
  Mat hl = p.omega_l * (number_op(p.laser_nmax) + 0.5 * Mat::Identity(p.laser_nmax + 1, p.laser_nmax + 1));
  Mat qb = qubit::proj(1);
  auto run = [&](const Mat& rho_l) {
    Operator rho0(h.space, Eigen::kroneckerProduct(qb, rho_l).eval());
    std::vector<std::pair<double, Mat>> traj;
    for (double t : ts) {
      Mat u = prop.unitary(t);
      traj.emplace_back(t, partial_trace(Operator(h.space, u * rho0.data() * u.adjoint()), {"L"}).data());
    }
    return traj;
  };
  auto coh = run(coherent_state(laser(p, p.alpha_phase)).data());
  auto poi = run(poisson_state(p.alpha_abs, p.laser_nmax, "L", 1e-3).data());
  auto rc = work_source_ratio(coh, hl, 1e-3), rp = work_source_ratio(poi, hl, 1e-3);
  Table t;
  t.columns = {"t_rabi", "de_l_coherent", "ratio_coherent", "de_l_poisson", "ratio_poisson"};
  for (std::size_t k = 0; k < ts.size(); ++k) {
    auto de = [&](const auto& tr) { return (hl * (tr[k].second - tr[0].second)).trace().real(); };
    t.rows.push_back({ts[k] * p.rabi(), de(coh), rc[k].skipped ? NAN : rc[k].ratio, de(poi),
                      rp[k].skipped ? NAN : rp[k].ratio});
  }
  return t;
}

inline Table fig2_work(const Config& c) {
  ModelParams p = model_params(c);
  Hamiltonians h = build_hamiltonians(p, options(c));
  Propagator prop(h.H.data());
  const auto ts = rabi_times(c, p);
  const RVec hl = h.H_L.data().diagonal().real();
  Ensemble bath = bath_ensemble(p);
  Ensemble q = Ensemble::pure(excited_qubit());
  const int np = integer(c, "n_phases");
  std::vector<Ensemble> starts;
  starts.push_back(tensor(tensor(q, Ensemble::diagonal(poisson_weights(p.alpha_abs, p.laser_nmax))), bath));
  for (int k = 0; k < np; ++k)
    starts.push_back(tensor(tensor(q, Ensemble::pure(coherent_vector(laser(p, p.alpha_phase + 2 * M_PI * k / np)))), bath));
  std::vector<std::vector<double>> w(starts.size(), std::vector<double>(ts.size()));
  parallel_for(static_cast<int>(starts.size()), [&](int i) {
    EnsembleEvolver ev(prop, starts[i]);
    const double e0 = diagonal_expectation(ev.kets(0), ev.weights(), hl);
    for (std::size_t k = 0; k < ts.size(); ++k) w[i][k] = -(diagonal_expectation(ev.kets(ts[k]), ev.weights(), hl) - e0);
  });
  Table t;
  t.columns = {"t_rabi", "w_l_poisson", "w_l_coherent", "w_l_phase_average"};
  double dev = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double avg = 0;
    for (int i = 1; i <= np; ++i) avg += w[i][k] / np;
    dev = std::max(dev, std::abs(w[1][k] - w[0][k]));
    t.rows.push_back({ts[k] * p.rabi(), w[0][k], w[1][k], avg});
  }
  t.note("max_abs_coherent_minus_poisson", dev);
  return t;
}

inline Table fig3_coherences(const Config& c) {
  ModelParams p = model_params(c);
  Hamiltonians h = build_hamiltonians(p, options(c));
  Propagator prop(h.H.data());
  const auto ts = rabi_times(c, p);
  Ensemble bath = bath_ensemble(p);
  const double shift = num(c, "phase_shift");
  std::vector<std::vector<PhaseCoherences>> out(2, std::vector<PhaseCoherences>(ts.size()));
  parallel_for(2, [&](int i) {
    Ensemble e = tensor(tensor(Ensemble::pure(excited_qubit()), Ensemble::pure(coherent_vector(laser(p, p.alpha_phase + i * shift)))), bath);
    EnsembleEvolver ev(prop, e);
    for (std::size_t k = 0; k < ts.size(); ++k)
      out[i][k] = phase_coherences_al(reduce_leading(ev.kets(ts[k]), ev.weights(), 2 * (p.laser_nmax + 1)), p);
  });
  Table t;
  t.columns = {"t_rabi", "dressed_re", "dressed_im", "qubit_re", "qubit_im",
               "shifted_dressed_re", "shifted_dressed_im", "shifted_qubit_re", "shifted_qubit_im"};
  double spread = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto& a = out[0][k];
    const auto& b = out[1][k];
    spread = std::max(spread, std::abs(a.dressed - b.dressed));
    t.rows.push_back({ts[k] * p.rabi(), a.dressed.real(), a.dressed.imag(), a.qubit.real(), a.qubit.imag(),
                      b.dressed.real(), b.dressed.imag(), b.qubit.real(), b.qubit.imag()});
  }
  t.note("max_dressed_coherence_change", spread);
  return t;
}

inline std::vector<GeneratorSpec> families() {
  return {GeneratorSpec{Family::floquet}, GeneratorSpec{Family::gen_bloch, Regime::intermediate},
          GeneratorSpec{Family::bloch_maps}, GeneratorSpec{Family::bloch_redfield}};
}

inline std::string spec_label(const GeneratorSpec& s) {
  std::string n = family_name(s.family);
  if (s.family == Family::gen_bloch) n += std::string("_") + regime_name(s.regime);
  return n;
}

inline std::vector<double> lambda_grid(const Config& c) {
  const int n = integer(c, "n_lambda");
  const double m = num(c, "lambda_max");
  if (n < 2) throw ConfigError("n_lambda must be at least 2");
  std::vector<double> l;
  for (int k = 0; k < n; ++k) l.push_back(-m + 2 * m * k / (n - 1));
  return l;
}

inline Table fig6_mgf_wdl(const Config& c) {
  ModelParams p = model_params(c);
  const double t_eval = num(c, "t_max");
  const auto ls = lambda_grid(c);
  const Mat h = dressed::hamiltonian(p);
  const Mat rho0 = gibbs_matrix(h, p.beta_b);
  const auto fam = families();
  Table t;
  t.columns = {"lambda_dl"};
  for (const auto& s : fam) {
    t.columns.push_back(spec_label(s) + "_re");
    t.columns.push_back(spec_label(s) + "_reverse_re");
  }
  t.rows.assign(ls.size(), std::vector<double>(1 + 2 * fam.size()));
  // forward G(0, l, 0) against the reverse partner G^R(i beta, -l, i beta)
  std::vector<PairModel> models;
  for (const auto& s : fam) models.push_back(pair_model(s, p));
  parallel_for(static_cast<int>(ls.size()), [&](int i) {
    t.rows[i][0] = ls[i];
    for (std::size_t f = 0; f < fam.size(); ++f) {
      const cplx g = evolve(generator(models[f], {0.0, ls[i], 0.0}), rho0, {t_eval}).mgf[0];
      const cplx gr = evolve_with_boundary(reversed_generator(models[f], {0.0, -ls[i], I * p.beta_b}), h, I * p.beta_b,
                                           rho0, {t_eval}).mgf[0];
      t.rows[i][1 + 2 * f] = g.real();
      t.rows[i][2 + 2 * f] = gr.real();
    }
  });
  for (const auto& s : fam) t.note("symmetry_" + spec_label(s), symmetry_violation(s, p, t_eval, cube_grid(0.1)));
  return t;
}

/// Drive with g / gamma_max = x, gamma_max taken from the rates at the qubit splitting (independent of g).
inline ModelParams with_drive_ratio(ModelParams p, double x) {
  p.g0 = x * smooth_rate_table(p).gamma_max / p.alpha_abs;
  return p;
}

inline Table fig7_ss_mgf(const Config& c) {
  const ModelParams base = model_params(c);
  const auto ls = lambda_grid(c);
  const std::vector<std::pair<double, GeneratorSpec>> cases{
      {0.8, GeneratorSpec{Family::gen_bloch, Regime::weak}},
      {8.0, GeneratorSpec{Family::gen_bloch, Regime::intermediate}},
      {800.0, GeneratorSpec{Family::floquet}},
      {2000.0, GeneratorSpec{Family::floquet}}};
  Table t;
  t.columns = {"lambda"};
  for (const auto& [x, s] : cases) {
    const std::string tag = "x" + std::to_string(static_cast<int>(x * 10)) + "_" + spec_label(s);
    t.columns.push_back(tag + "_work_re");
    t.columns.push_back(tag + "_work_im");
    t.columns.push_back(tag + "_heat_re");
    t.columns.push_back(tag + "_heat_im");
  }
  t.rows.assign(ls.size(), std::vector<double>(1 + 4 * cases.size()));
  std::vector<PairModel> models;
  for (const auto& [x, s] : cases) {
    const ModelParams p = with_drive_ratio(base, x);
    t.note("g_over_gamma_max_" + std::to_string(static_cast<int>(x * 10)), p.g() / smooth_rate_table(p).gamma_max);
    t.note("regime_" + std::to_string(static_cast<int>(x * 10)), regime_name(classify_regime(p, smooth_rate_table(p)).regime));
    models.push_back(pair_model(s, p));
  }
  parallel_for(static_cast<int>(ls.size()), [&](int i) {
    t.rows[i][0] = ls[i];
    for (std::size_t k = 0; k < models.size(); ++k) {
      const cplx w = ss_scaled_cgf(generator(models[k], {0.0, ls[i], 0.0}));
      // heat into the system is minus the bath energy change
      const cplx q = ss_scaled_cgf(generator(models[k], {0.0, 0.0, -ls[i]}));
      t.rows[i][1 + 4 * k] = w.real();
      t.rows[i][2 + 4 * k] = w.imag();
      t.rows[i][3 + 4 * k] = q.real();
      t.rows[i][4 + 4 * k] = q.imag();
    }
  });
  return t;
}

inline Table ss_compare_table(const Config& c) {
  ModelParams p = model_params(c);
  const double gmax = smooth_rate_table(p).gamma_max;
  Table t;
  t.columns = {"g", "gamma_max_over_g", "dq_numeric", "dq_closed", "dw_numeric", "dw_closed"};
  std::vector<double> g, dq;
  double worst = 0;
  for (double k : list(c, "g_factors")) {
    p.g0 = 800 * gmax * k / p.alpha_abs;
    const SsComparison s = ss_compare(p);
    worst = std::max({worst, std::abs(s.dq_numeric - s.dq_closed), std::abs(s.dw_numeric - s.dw_closed)});
    g.push_back(s.g);
    dq.push_back(s.dq_numeric);
    t.rows.push_back({s.g, s.gamma_max / s.g, s.dq_numeric, s.dq_closed, s.dw_numeric, s.dw_closed});
  }
  const double slope = g.size() >= 2 ? log_slope(g, dq) : NAN;
  t.note("closed_form_max_deviation", worst);
  t.note("log_slope_dq_vs_g", slope);
  if (worst > num(c, "tol.closed_form")) t.failure = ("ss-compare: closed forms deviate by " + format_number(worst));
  if (g.size() >= 2 && std::abs(slope + 2) > num(c, "tol.slope"))
    t.failure = ("ss-compare: scaling exponent " + format_number(slope) + " is not -2");
  return t;
}

inline Table ft_matrix(const Config& c) {
  ModelParams p = model_params(c);
  const double tol = num(c, "tol.symmetry");
  Table t;
  t.columns = {"family", "ft_residual", "shift_residual", "mgf_symmetry", "expected_to_hold", "holds"};
  const auto fam = families();
  bool ok = true;
  for (std::size_t f = 0; f < fam.size(); ++f) {
    const PairModel m = pair_model(fam[f], p);
    const double ft = ft_residual_grid(fam[f], p);
    const double sh = shift_residual(m, {0.1, -0.05, 0.07}, 0.2);
    const double sym = symmetry_violation(fam[f], p, num(c, "t_max"), cube_grid(0.1));
    const bool expected = fam[f].family != Family::bloch_redfield;
    const bool holds = ft < tol && sym < tol;
    ok = ok && (expected == holds);
    t.rows.push_back({double(f), ft, sh, sym, double(expected), double(holds)});
    t.note("family_" + std::to_string(f), spec_label(fam[f]));
  }
  if (!ok) t.failure = ("ft-matrix: fluctuation-theorem split differs from expectation");
  return t;
}

/// Forward and reverse two-point measurements of (H_DA, H_DL, H_B) on the autonomous desk model.
struct DeskMeasurement {
  Hamiltonians h;
  std::unique_ptr<TwoPointMeasurement> fw, rv;
};

inline DeskMeasurement desk_measurement(const ModelParams& p) {
  HamiltonianOptions o;
  o.rwa_laser = o.rwa_bath = o.constant_coupling = true;
  DeskMeasurement d{build_hamiltonians(p, o), nullptr, nullptr};
  const DressedSplit s = dressed_split(d.h, p);
  const Mat gda = gibbs_matrix(dressed::hamiltonian(p), p.beta_b);
  const Mat rho0 = Eigen::kroneckerProduct(dressed_product_state(p, gda, poisson_dl(p)), bath_gibbs(p)).eval();
  const std::vector<Mat> counted{s.h_da, s.h_dl, s.h_b};
  d.fw = std::make_unique<TwoPointMeasurement>(d.h.H.data(), counted, rho0);
  d.rv = std::make_unique<TwoPointMeasurement>(reverse_measurement(d.h.H.data(), counted, rho0));
  return d;
}

inline Table crooks_desk(const Config& c) {
  ModelParams p = model_params(c);
  const double t_eval = num(c, "t_max") / p.rabi();
  DeskMeasurement d = desk_measurement(p);
  const Mat wf = d.fw->weights(t_eval), wr = d.rv->weights(t_eval);
  double sym = 0;
  for (double a : {-0.1, 0.0, 0.1})
    for (double b : {-0.1, 0.0, 0.1}) {
      const cplx g = d.fw->mgf(wf, {0.0, a, b});
      const cplx gr = d.rv->mgf(wr, {I * p.beta_b, -a, cplx(-b, p.beta_b)});
      sym = std::max(sym, std::abs(g - gr) / std::abs(g));
    }
  // W_DL = -(H_DL(final) - H_DL(initial))
  const WorkDistribution pf = d.fw->distribution(wf, {0, -1, 0}), pr = d.rv->distribution(wr, {0, -1, 0});
  const CrooksResult cr = crooks_check(pf, pr, p.beta_b);
  Table t;
  t.columns = {"w_dl", "p_forward", "p_reverse_at_minus_w", "log_ratio"};
  for (std::size_t k = 0; k < pf.x.size(); ++k) {
    const double q = pr.at(-pf.x[k]);
    t.rows.push_back({pf.x[k], pf.p[k], q, (pf.p[k] > 0 && q > 0) ? std::log(pf.p[k] / q) : NAN});
  }
  t.note("mgf_symmetry_relative", sym);
  t.note("crooks_slope", cr.slope);
  t.note("crooks_intercept", cr.intercept);
  t.note("dephasing_change", d.fw->dephasing_change());
  if (sym > 1e-4) t.failure = ("crooks-desk: MGF symmetry violated by " + format_number(sym));
  if (std::abs(cr.slope / p.beta_b - 1) > num(c, "tol.crooks"))
    t.failure = ("crooks-desk: slope " + format_number(cr.slope) + " is off beta");
  return t;
}

inline Table frame_equivalence(const Config& c) {
  ModelParams p = model_params(c);
  const Mat m = dressed_columns(p, 0.0);
  const Mat rho_da = m.adjoint() * qubit::proj(1) * m;
  Mat rho_dl;
  const std::string kind = c.at("laser.state");
  if (kind == "poisson") {
    rho_dl = poisson_dl(p);
  } else if (kind == "fock") {
    const int n = integer(c, "fock.level");
    if (n < 0 || n >= p.laser_nmax) throw ConfigError("fock.level must lie in [0, trunc.laser)");
    rho_dl = Mat::Zero(p.laser_nmax, p.laser_nmax);
    rho_dl(n, n) = 1;
  } else {
    throw ConfigError("laser.state must be poisson or fock");
  }
  const auto ts = rabi_times(c, p);
  const FrameComparison f = compare_frames(p, rho_da, rho_dl, ts);
  Table t;
  t.columns = {"t_rabi", "trace_distance", "leakage"};
  for (std::size_t k = 0; k < ts.size(); ++k) t.rows.push_back({ts[k] * p.rabi(), f.distance[k], f.leakage[k]});
  t.note("max_trace_distance", f.max_distance);
  if (f.max_distance > num(c, "tol.frame"))
    t.failure = ("frame-equivalence: trace distance " + format_number(f.max_distance) + " exceeds tolerance");
  return t;
}

using Scenario = std::function<Table(const Config&)>;

inline const std::map<std::string, Scenario>& scenarios() {
  static const std::map<std::string, Scenario> s{
      {"fig1-worksource", fig1_worksource}, {"fig2-work", fig2_work},       {"fig3-coherences", fig3_coherences},
      {"fig6-mgf-wdl", fig6_mgf_wdl},       {"fig7-ss-mgf", fig7_ss_mgf},   {"ss-compare", ss_compare_table},
      {"ft-matrix", ft_matrix},             {"crooks-desk", crooks_desk},   {"frame-equivalence", frame_equivalence}};
  return s;
}

inline std::string usage() {
  std::string u = "usage: qlaser-thermo <scenario> [--config <path>] [--out <dir>] [--set key=value ...]\nscenarios:";
  for (const auto& [name, f] : scenarios()) u += " " + name;
  return u + "\n";
}

/// Runs a scenario and writes <out>/<scenario>.csv, also when one of its checks fails.
inline int run(const std::string& scenario, Config cfg, const std::string& out_dir, std::ostream& err) {
  const auto it = scenarios().find(scenario);
  if (it == scenarios().end()) {
    err << "unknown scenario '" << scenario << "'\n" << usage();
    return 2;
  }
  Config c = defaults(scenario);
  for (const auto& [k, v] : cfg) c[k] = v;
  Table t;
  try {
    model_params(c);
    t = it->second(c);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream os(std::filesystem::path(out_dir) / (scenario + ".csv"));
  write_csv(os, scenario, c, t);
  if (!t.failure.empty()) {
    err << t.failure << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qlt::cli
