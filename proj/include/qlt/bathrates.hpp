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
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "params.hpp"

namespace qlt {

/// Zero-temperature spectral function Gamma(nu); zero for nu <= 0.
inline double spectral_density(const BathSpec& b, double omega_a, double nu) {
  if (nu <= 0) return 0.0;
  const double lo = omega_a - b.width / 2, hi = omega_a + b.width / 2;
  const double s = b.gamma0 * b.gamma0;
  switch (b.model) {
    case Spectrum::flat:
      return (nu >= lo && nu <= hi) ? s : 0.0;
    case Spectrum::smooth_window: {
      const double w = b.edge > 0 ? b.edge : b.width / 50;
      return s * 0.5 * (std::tanh((nu - lo) / w) - std::tanh((nu - hi) / w));
    }
    case Spectrum::tabulated: {
      const auto& t = b.table;
      if (t.empty() || nu < t.front().first || nu > t.back().first) return 0.0;
      auto it = std::lower_bound(t.begin(), t.end(), nu, [](const auto& e, double x) { return e.first < x; });
      if (it == t.begin()) return it->second;
      auto jt = it - 1;
      const double f = (nu - jt->first) / (it->first - jt->first);
      return std::max(0.0, jt->second + f * (it->second - jt->second));
    }
  }
  return 0.0;
}

/// Two-column (nu, Gamma) text table; '#' starts a comment.
inline std::vector<std::pair<double, double>> read_spectral_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spectral table '" + path + "'");
  std::vector<std::pair<double, double>> t;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    double nu, g;
    if (ss >> nu >> g) t.emplace_back(nu, g);
  }
  std::sort(t.begin(), t.end());
  return t;
}

inline double bose(double beta, double nu) {
  if (std::isinf(beta)) return 0.0;
  return 1.0 / std::expm1(beta * nu);
}

struct Correlation {
  double value;
  bool pole = false;  // nu = 0 evaluated by its limit
};

inline Correlation g_plus_eval(const ModelParams& p, double nu) {
  // Gamma vanishes on nu <= 0, so the n_B pole at nu = 0 has a zero limit.
  if (nu == 0.0) return {0.0, true};
  const double gam = spectral_density(p.bath, p.omega_a, nu);
  return {gam == 0.0 ? 0.0 : gam * (bose(p.beta_b, nu) + 1.0), false};
}

inline double g_plus(const ModelParams& p, double nu) { return g_plus_eval(p, nu).value; }

inline double g_minus(const ModelParams& p, double nu) {
  if (nu <= 0.0) return 0.0;
  const double gam = spectral_density(p.bath, p.omega_a, nu);
  return gam == 0.0 ? 0.0 : gam * bose(p.beta_b, nu);
}

struct RateTable {
  double g0_down = 0, g0_up = 0, g1_down = 0, g1_up = 0, g2_down = 0, g2_up = 0;
  double gp_bar = 0, gm_bar = 0, gamma_max = 0;
  std::array<double, 3> gp{}, gm{};  // G+/- at (wL, wL - Omega, wL + Omega)
  std::vector<std::string> warnings;
};

/// Channel frequencies of the Mollow triplet in the order (z, +, -).
inline std::array<double, 3> channel_frequencies(const ModelParams& p) {
  return {p.omega_l, p.omega_l - p.rabi(), p.omega_l + p.rabi()};
}

inline RateTable rate_table_from(const ModelParams& p, const std::array<double, 3>& gp, const std::array<double, 3>& gm) {
  const double om = p.rabi(), d = p.delta(), g = p.g();
  const double kz = g * g / (4 * om * om), k1 = (om + d) * (om + d) / (4 * om * om), k2 = (om - d) * (om - d) / (4 * om * om);
  RateTable r;
  r.gp = gp;
  r.gm = gm;
  r.g0_down = kz * gp[0];
  r.g0_up = kz * gm[0];
  r.g1_down = k1 * gp[2];
  r.g1_up = k1 * gm[2];
  r.g2_down = k2 * gm[1];
  r.g2_up = k2 * gp[1];
  r.gp_bar = g_plus(p, p.omega_a);
  r.gm_bar = g_minus(p, p.omega_a);
  r.gamma_max = 0;
  for (int k = 0; k < 3; ++k) r.gamma_max = std::max({r.gamma_max, gp[k], gm[k]});
  return r;
}

inline RateTable rate_table(const ModelParams& p) {
  const auto w = channel_frequencies(p);
  std::array<double, 3> gp{}, gm{};
  for (int k = 0; k < 3; ++k) {
    gp[k] = g_plus(p, w[k]);
    gm[k] = g_minus(p, w[k]);
  }
  RateTable r = rate_table_from(p, gp, gm);
  const char* names[3] = {"wL", "wL-Omega", "wL+Omega"};
  for (int k = 0; k < 3; ++k)
    if (spectral_density(p.bath, p.omega_a, w[k]) == 0.0)
      r.warnings.push_back(std::string("channel ") + names[k] + " lies outside the bath band; rate set to 0");
  return r;
}

/// Rates with G+/-(wL), G+/-(wL +- Omega) replaced by their value at the qubit splitting.
inline RateTable smooth_rate_table(const ModelParams& p) {
  const double a = g_plus(p, p.omega_a), b = g_minus(p, p.omega_a);
  RateTable r = rate_table_from(p, {a, a, a}, {b, b, b});
  return r;
}

enum class Regime { weak, intermediate, common, strong, out_of_model };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::weak: return "weak";
    case Regime::intermediate: return "intermediate";
    case Regime::common: return "common";
    case Regime::strong: return "strong";
    default: return "out-of-model";
  }
}

struct RegimeReport {
  Regime regime = Regime::out_of_model;
  double g_over_gamma_max = 0;
  double omega_l_over_rabi = 0;
  double rabi_over_gamma_max = 0;
  double inv_delta0 = 0;
  double inv_delta0_over_rabi = 0;
  double inv_delta0_over_gamma_max = 0;
  double omega_a_over_inv_delta0 = 0;
};

/// Coarse-graining rate 1/delta0 for a regime.
inline double coarse_grain_rate(const ModelParams& p, Regime r, double gamma_max) {
  if (r == Regime::strong || r == Regime::common) return std::sqrt(gamma_max * p.rabi());
  return std::sqrt(p.omega_a * std::max(p.rabi(), gamma_max));
}

inline double coarse_grain_time(const ModelParams& p, Regime r, double gamma_max) {
  return 1.0 / coarse_grain_rate(p, r, gamma_max);
}

/// Thresholds on g / gamma_max: weak < 1 <= intermediate < 100 <= common < 1000 <= strong.
inline RegimeReport classify_regime(const ModelParams& p, const RateTable& rt) {
  RegimeReport rep;
  const double gm = rt.gamma_max;
  if (!(gm > 0) || !(p.rabi() > 0)) return rep;
  const double x = p.g() / gm;
  rep.g_over_gamma_max = x;
  rep.regime = x < 1 ? Regime::weak : x < 100 ? Regime::intermediate : x < 1000 ? Regime::common : Regime::strong;
  rep.omega_l_over_rabi = p.omega_l / p.rabi();
  rep.rabi_over_gamma_max = p.rabi() / gm;
  rep.inv_delta0 = coarse_grain_rate(p, rep.regime, gm);
  rep.inv_delta0_over_rabi = rep.inv_delta0 / p.rabi();
  rep.inv_delta0_over_gamma_max = rep.inv_delta0 / gm;
  rep.omega_a_over_inv_delta0 = p.omega_a / rep.inv_delta0;
  return rep;
}

inline RegimeReport classify_regime(const ModelParams& p) { return classify_regime(p, rate_table(p)); }

}  // namespace qlt
