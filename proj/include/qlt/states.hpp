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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "linops.hpp"

namespace qlt {

struct LaserSpec {
  double amplitude = 0.0;
  double phase = 0.0;
  int n_max = 20;
  /// If positive, accept any n_max whose Poisson tail is below this mass instead of the default rule.
  double tail_tolerance = -1.0;

  static int default_nmax(double a) { return static_cast<int>(std::ceil(a * a + 10 * a + 20)); }
  static LaserSpec with_default_truncation(double a, double phase = 0.0) { return {a, phase, default_nmax(a)}; }
};

/// Poisson weights e^{-|a|^2}|a|^{2N}/N!, N = 0..n_max, evaluated in log space.
inline RVec poisson_weights(double a, int n_max) {
  RVec p(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    p(n) = a == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::exp(-a * a + 2 * n * std::log(a) - std::lgamma(n + 1.0));
  return p;
}

inline double poisson_tail(double a, int n_max) { return std::max(0.0, 1.0 - poisson_weights(a, n_max).sum()); }

inline void check_truncation(const LaserSpec& s) {
  if (s.amplitude < 0) throw Error("negative laser amplitude");
  if (s.tail_tolerance > 0) {
    if (poisson_tail(s.amplitude, s.n_max) > s.tail_tolerance)
      throw Error("Fock truncation too small: tail mass exceeds the requested tolerance");
  } else if (s.n_max < LaserSpec::default_nmax(s.amplitude)) {
    throw Error("Fock truncation too small: n_max must be >= ceil(|a|^2 + 10|a| + 20)");
  }
}

inline Vec coherent_vector(const LaserSpec& s) {
  check_truncation(s);
  Vec v(s.n_max + 1);
  RVec p = poisson_weights(s.amplitude, s.n_max);
  for (int n = 0; n <= s.n_max; ++n) v(n) = std::sqrt(p(n)) * std::polar(1.0, n * s.phase);
  return v;
}

inline Operator coherent_state(const LaserSpec& s, const std::string& label = "L") {
  Vec v = coherent_vector(s);
  return {HilbertSpace::single(label, s.n_max + 1), v * v.adjoint()};
}

inline Operator poisson_state(double a, int n_max, const std::string& label = "L", double tail_tolerance = -1.0) {
  check_truncation({a, 0.0, n_max, tail_tolerance});
  RVec p = poisson_weights(a, n_max);
  return {HilbertSpace::single(label, n_max + 1), p.cast<cplx>().asDiagonal()};
}

inline Mat annihilation(int n_max) {
  Mat a = Mat::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

inline Mat number_op(int n_max) {
  Mat n = Mat::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) n(k, k) = k;
  return n;
}

/// exp(a b^dagger - a^* b) on the truncated Fock space.
inline Mat displacement_operator(cplx alpha, int n_max) {
  Mat b = annihilation(n_max);
  return expm(alpha * b.adjoint() - std::conj(alpha) * b);
}

inline Mat gibbs_matrix(const Mat& h, double beta) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  const RVec& e = es.eigenvalues();
  RVec w = (-beta * (e.array() - e.minCoeff())).exp();
  w /= w.sum();
  return es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

inline Operator gibbs_state(const Operator& h, double beta) {
  if (!h.is_hermitian(1e-10 * std::max(1.0, max_abs(h.data())))) throw Error("Gibbs state needs a Hermitian H");
  if (beta < 0) throw Error("negative inverse temperature");
  return {h.space(), gibbs_matrix(h.data(), beta)};
}

inline double von_neumann_entropy(const Mat& rho, double tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    const double p = es.eigenvalues()(k);
    if (p < -tol) throw Error("density matrix has a negative eigenvalue");
    if (p > 0) s -= p * std::log(p);
  }
  return s;
}

inline double von_neumann_entropy(const Operator& rho, double tol = 1e-10) { return von_neumann_entropy(rho.data(), tol); }

struct RelativeEntropy {
  double value = 0.0;
  bool infinite = false;
};

/// Tr[r1 log r1] - Tr[r1 log r2]; eigenvalues of r2 below 1e-12 count as zero.
inline RelativeEntropy relative_entropy(const Mat& r1, const Mat& r2, double cutoff = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Mat> e1(0.5 * (r1 + r1.adjoint())), e2(0.5 * (r2 + r2.adjoint()));
  const RVec& p = e1.eigenvalues();
  const RVec& q = e2.eigenvalues();
  Mat overlap = (e1.eigenvectors().adjoint() * e2.eigenvectors()).cwiseAbs2();
  RelativeEntropy r;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) <= cutoff) continue;
    s1 += p(i) * std::log(p(i));
    for (int j = 0; j < q.size(); ++j) {
      const double w = overlap(i, j).real();
      if (w * p(i) <= cutoff * cutoff) continue;
      if (q(j) <= cutoff) { r.infinite = true; r.value = std::numeric_limits<double>::infinity(); return r; }
      s2 += p(i) * w * std::log(q(j));
    }
  }
  r.value = std::max(0.0, s1 - s2);
  return r;
}

struct RatioPoint {
  double t;
  double ratio;
  bool skipped;
};

/// Pointwise Delta S_L / Delta E_L along a trajectory of reduced laser states.
inline std::vector<RatioPoint> work_source_ratio(const std::vector<std::pair<double, Mat>>& traj, const Mat& h_l,
                                                 double tol = 1e-12) {
  std::vector<RatioPoint> out;
  if (traj.empty()) return out;
  const double s0 = von_neumann_entropy(traj.front().second);
  const double e0 = (h_l * traj.front().second).trace().real();
  for (const auto& [t, rho] : traj) {
    const double de = (h_l * rho).trace().real() - e0;
    if (std::abs(de) < tol) { out.push_back({t, 0.0, true}); continue; }
    out.push_back({t, (von_neumann_entropy(rho) - s0) / de, false});
  }
  return out;
}

}  // namespace qlt
