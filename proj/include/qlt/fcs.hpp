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
#include <functional>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "exactsim.hpp"
#include "generators.hpp"

namespace qlt {

/// MGF samples over one period of a counting field, plus off-grid samples used to detect aliasing.
struct MgfGrid {
  double quantum = 1.0;           // lattice spacing of the counted change
  std::vector<double> lambda;     // lambda_j = 2 pi j / (n quantum)
  std::vector<cplx> g;
  std::vector<double> check_lambda;
  std::vector<cplx> check_g;
  std::string source;
};

inline MgfGrid sample_mgf(const std::function<cplx(double)>& f, double quantum, int n, int n_check = 16,
                          std::string source = {}) {
  if (!(quantum > 0) || n < 2) throw Error("MGF grid needs a positive quantum and at least two points");
  MgfGrid grid;
  grid.quantum = quantum;
  grid.source = std::move(source);
  const double step = 2 * M_PI / (n * quantum);
  for (int j = 0; j < n; ++j) {
    grid.lambda.push_back(j * step);
    grid.g.push_back(f(j * step));
  }
  // off-grid points at irrational fractions of a cell
  for (int c = 0; c < n_check; ++c) {
    const double l = (c * (n / double(std::max(1, n_check))) + 0.5 * (std::sqrt(5.0) - 1)) * step;
    grid.check_lambda.push_back(l);
    grid.check_g.push_back(f(l));
  }
  return grid;
}

struct Inversion {
  WorkDistribution dist;
  double reconstruction_error = 0;  // max over check points
  double imaginary_residual = 0;    // largest |Im p_k|
};

/// Distribution on the lattice k * quantum, k in [-n/2, n/2), from one period of G.
inline Inversion invert_mgf(const MgfGrid& grid, double tol = 1e-8) {
  const int n = static_cast<int>(grid.g.size());
  if (n < 2 || grid.lambda.size() != grid.g.size()) throw Error("MGF grid is empty or inconsistent");
  const double step = 2 * M_PI / (n * grid.quantum);
  for (int j = 0; j < n; ++j)
    if (std::abs(grid.lambda[j] - j * step) > 1e-12 * std::max(1.0, j * step))
      throw Error("aliasing: lambda grid does not span one period of the energy lattice");
  std::vector<cplx> in(grid.g.begin(), grid.g.end()), out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  Inversion r;
  std::vector<cplx> pk(n);
  for (int k = 0; k < n; ++k) pk[k] = out[k] / double(n);
  auto signed_index = [n](int k) { return k < (n + 1) / 2 ? k : k - n; };
  std::vector<std::pair<int, double>> pts;
  for (int k = 0; k < n; ++k) {
    r.imaginary_residual = std::max(r.imaginary_residual, std::abs(pk[k].imag()));
    pts.emplace_back(signed_index(k), pk[k].real());
  }
  std::sort(pts.begin(), pts.end());
  for (const auto& [k, pr] : pts) {
    r.dist.x.push_back(k * grid.quantum);
    r.dist.p.push_back(pr);
  }
  for (std::size_t c = 0; c < grid.check_lambda.size(); ++c) {
    cplx g = 0;
    for (int k = 0; k < n; ++k) g += pk[k] * std::exp(I * grid.check_lambda[c] * (signed_index(k) * grid.quantum));
    r.reconstruction_error = std::max(r.reconstruction_error, std::abs(g - grid.check_g[c]));
  }
  if (r.reconstruction_error > tol)
    throw Error("aliasing: MGF off the grid is not reproduced (error " + std::to_string(r.reconstruction_error) + ")");
  return r;
}

struct CrooksResult {
  double slope = 0, intercept = 0;
  double max_residual = 0;  // largest |log ratio - beta W| over the used points
  int points = 0;
};

/// Least-squares fit of log[p_fwd(W) / p_rev(-W)] against W over outcomes with both probabilities above floor.
inline CrooksResult crooks_check(const WorkDistribution& fwd, const WorkDistribution& rev, double beta,
                                 double floor = 1e-10, double tol = 1e-9) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < fwd.x.size(); ++k) {
    const double q = rev.at(-fwd.x[k], tol);
    if (fwd.p[k] > floor && q > floor) {
      xs.push_back(fwd.x[k]);
      ys.push_back(std::log(fwd.p[k] / q));
    }
  }
  const int n = static_cast<int>(xs.size());
  CrooksResult r;
  r.points = n;
  if (n < 2) throw Error("insufficient support overlap between forward and reverse distributions");
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw Error("insufficient support overlap between forward and reverse distributions");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  for (int i = 0; i < n; ++i) r.max_residual = std::max(r.max_residual, std::abs(ys[i] - beta * xs[i]));
  return r;
}

/// max |G(l) - G^R(-l + i nu)| / |G(l)| over a grid of counting-field vectors.
inline double symmetry_violation(const std::function<cplx(const std::vector<cplx>&)>& fwd,
                                 const std::function<cplx(const std::vector<cplx>&)>& rev,
                                 const std::vector<std::vector<cplx>>& grid, const std::vector<double>& nu) {
  double worst = 0;
  for (const auto& l : grid) {
    if (l.size() != nu.size()) throw Error("counting-field vector and nu have different lengths");
    std::vector<cplx> lr(l.size());
    for (std::size_t k = 0; k < l.size(); ++k) lr[k] = -l[k] + I * nu[k];
    const cplx g = fwd(l);
    worst = std::max(worst, std::abs(g - rev(lr)) / std::abs(g));
  }
  return worst;
}

/// Symmetry score of a master-equation family: dressed Gibbs start for both processes,
/// fields (l_DA, l_DL, l_B) with the DA field applied at the boundaries.
inline double symmetry_violation(const GeneratorSpec& spec, const ModelParams& p, double t,
                                 const std::vector<std::vector<cplx>>& grid) {
  const PairModel m = pair_model(spec, p);
  const Mat h = dressed::hamiltonian(p);
  const Mat rho0 = gibbs_matrix(h, p.beta_b);
  auto fwd = [&](const std::vector<cplx>& l) {
    return evolve_with_boundary(generator(m, {0.0, l[1], l[2]}), h, l[0], rho0, {t}).mgf[0];
  };
  auto rev = [&](const std::vector<cplx>& l) {
    return evolve_with_boundary(reversed_generator(m, {0.0, l[1], l[2]}), h, l[0], rho0, {t}).mgf[0];
  };
  return symmetry_violation(fwd, rev, grid, {p.beta_b, 0.0, p.beta_b});
}

/// 3 x 3 x 3 grid of fields with entries in {-s, 0, s}.
inline std::vector<std::vector<cplx>> cube_grid(double s) {
  std::vector<std::vector<cplx>> g;
  for (double a : {-s, 0.0, s})
    for (double b : {-s, 0.0, s})
      for (double c : {-s, 0.0, s}) g.push_back({a, b, c});
  return g;
}

/// <e^{-Sigma}> for a two-point measurement of (H_S, H_B) started from Gibbs states at beta_s and beta_b,
/// with Sigma = beta_s Delta E_S - beta_b Q and Q = -Delta E_B; this is the MGF at l = (i beta_s, i beta_b).
inline double integral_ft(const TwoPointMeasurement& tpm, double t, double beta_s, double beta_b) {
  return std::real(tpm.mgf(t, {I * beta_s, I * beta_b}));
}

/// Mean entropy production Delta S - beta Q along a master-equation trajectory (Q = heat into the system).
inline std::vector<double> entropy_production(const std::vector<Mat>& rho, const std::vector<double>& q, double beta) {
  if (rho.size() != q.size()) throw Error("state and heat series differ in length");
  std::vector<double> out;
  const double s0 = rho.empty() ? 0.0 : von_neumann_entropy(rho.front());
  for (std::size_t k = 0; k < rho.size(); ++k) out.push_back(von_neumann_entropy(rho[k]) - s0 - beta * q[k]);
  return out;
}

}  // namespace qlt
