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
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "linops.hpp"

namespace qlt {

enum class Spectrum { flat, tabulated, smooth_window };

/// Bath description shared by the rate evaluators and the exact multi-mode twin.
struct BathSpec {
  Spectrum model = Spectrum::flat;
  double width = 20.0;   // band width D, centred on the qubit splitting
  double gamma0 = 0.1;   // amplitude: Gamma = gamma0^2 inside the band
  double edge = 0.0;     // smooth_window only: tanh edge width (0 -> D/50)
  std::vector<std::pair<double, double>> table;  // (nu, Gamma), sorted by nu
  int n_modes = 8;
  double g_bath = 0.1;
  int mode_levels = 2;
};

struct ModelParams {
  double omega_a = 20.0;
  double omega_l = 20.0;
  double g0 = 0.1;
  double alpha_abs = 2.0;
  double alpha_phase = 0.0;
  double beta_b = 0.25;
  BathSpec bath;
  int laser_nmax = 44;

  double delta() const { return omega_a - omega_l; }
  double g() const { return g0 * alpha_abs; }
  double rabi() const { return std::hypot(delta(), g()); }
  cplx alpha() const { return std::polar(alpha_abs, alpha_phase); }
  /// sqrt((Omega + delta) / 2 Omega) and sqrt((Omega - delta) / 2 Omega).
  double c_plus() const { return std::sqrt((rabi() + delta()) / (2 * rabi())); }
  double c_minus() const { return std::sqrt((rabi() - delta()) / (2 * rabi())); }

  bool near_resonance() const { return std::abs(delta()) <= 0.1 * omega_l; }
  bool macroscopic_laser() const { return alpha_abs >= 10.0; }

  void validate(bool dressed = true) const {
    if (!(omega_l > 0)) throw Error("omega_l must be positive");
    if (!(omega_a > 0)) throw Error("omega_a must be positive");
    if (g0 < 0 || alpha_abs < 0) throw Error("g0 and |alpha| must be nonnegative");
    if (dressed && rabi() == 0.0) throw Error("delta = g = 0 is outside the model");
    if (beta_b < 0) throw Error("beta_b must be nonnegative");
    if (bath.width <= 0) throw Error("bath width must be positive");
  }

  /// Mode frequencies of the discretized bath: cell midpoints on [omega_a - D/2, omega_a + D/2].
  std::vector<double> bath_frequencies() const {
    std::vector<double> w(bath.n_modes);
    const double h = bath.width / bath.n_modes;
    for (int k = 0; k < bath.n_modes; ++k) w[k] = omega_a - bath.width / 2 + (k + 0.5) * h;
    return w;
  }
  /// Flat-band strength implied by the discrete modes: Gamma = 2 pi (g_k/2)^2 N_B / D.
  double discrete_gamma() const {
    return 2 * M_PI * std::pow(bath.g_bath / 2, 2) * bath.n_modes / bath.width;
  }
};

}  // namespace qlt
