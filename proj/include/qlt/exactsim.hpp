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

// Exact unitary dynamics of qubit, laser and bath with two-point-measurement counting.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/SparseCore>

#include "bathrates.hpp"
#include "generators.hpp"
#include "model.hpp"
#include "states.hpp"

namespace qlt {

/// Common eigenbasis of a commuting set of observables.
struct JointBasis {
  Mat vectors;
  std::vector<RVec> values;              // values[m](j): eigenvalue of observable m on column j
  std::vector<std::vector<int>> blocks;  // columns sharing every eigenvalue
};

/// Sequential refinement: diagonalize the first observable, then each later one inside the
/// degenerate blocks of the previous ones. Commutation is checked on the result.
inline JointBasis joint_eigenbasis(const std::vector<Mat>& obs, double tol = 1e-10) {
  if (obs.empty()) throw Error("no counted observables");
  const int d = static_cast<int>(obs[0].rows());
  for (const auto& o : obs) {
    if (o.rows() != d || o.cols() != d) throw Error("counted observables have different shapes");
    if (max_abs(o - o.adjoint()) > tol * std::max(1.0, max_abs(o))) throw Error("counted observable is not Hermitian");
  }
  JointBasis jb;
  jb.vectors = Mat::Identity(d, d);
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  jb.blocks = {all};
  for (const auto& o : obs) {
    const double gap = 1e-8 * std::max(1.0, max_abs(o));
    std::vector<std::vector<int>> next;
    for (const auto& blk : jb.blocks) {
      const int n = static_cast<int>(blk.size());
      Mat vb(d, n);
      for (int k = 0; k < n; ++k) vb.col(k) = jb.vectors.col(blk[k]);
      Mat r = vb.adjoint() * o * vb;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (r + r.adjoint()));
      Mat nv = vb * es.eigenvectors();
      std::vector<int> cur{blk[0]};
      for (int k = 0; k < n; ++k) {
        jb.vectors.col(blk[k]) = nv.col(k);
        if (k > 0) {
          if (es.eigenvalues()(k) - es.eigenvalues()(k - 1) > gap) {
            next.push_back(cur);
            cur.clear();
          }
          cur.push_back(blk[k]);
        }
      }
      next.push_back(cur);
    }
    jb.blocks = std::move(next);
  }
  for (const auto& o : obs) {
    Mat r = jb.vectors.adjoint() * o * jb.vectors;
    RVec v = r.diagonal().real();
    // a common eigenbasis exists only for a commuting set
    if (max_abs(r - Mat(v.cast<cplx>().asDiagonal())) > std::sqrt(tol) * std::max(1.0, max_abs(o)))
      throw Error("counted observables do not commute");
    jb.values.push_back(v);
  }
  return jb;
}

/// Projection of rho onto the block-diagonal part in a joint eigenbasis, in that basis.
inline Mat dephase_in(const JointBasis& jb, const Mat& rho) {
  const int d = static_cast<int>(rho.rows());
  Mat r = jb.vectors.adjoint() * rho * jb.vectors;
  std::vector<int> label(d);
  for (std::size_t b = 0; b < jb.blocks.size(); ++b)
    for (int k : jb.blocks[b]) label[k] = static_cast<int>(b);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (label[i] != label[j]) r(i, j) = 0;
  return r;
}

/// Discrete distribution of a counted energy change.
struct WorkDistribution {
  std::vector<double> x;
  std::vector<double> p;
  double total() const { return std::accumulate(p.begin(), p.end(), 0.0); }
  double at(double w, double tol = 1e-9) const {
    for (std::size_t k = 0; k < x.size(); ++k)
      if (std::abs(x[k] - w) <= tol * std::max(1.0, std::abs(w))) return p[k];
    return 0.0;
  }
};

/// Two-point measurement of a commuting observable set around a unitary evolution.
class TwoPointMeasurement {
public:
  TwoPointMeasurement(const Mat& h, const std::vector<Mat>& counted, const Mat& rho0, double tol = 1e-10)
      : prop_(h), jb_(joint_eigenbasis(counted, tol)) {
    rho_hat_ = dephase_in(jb_, rho0);
    change_ = max_abs(jb_.vectors * rho_hat_ * jb_.vectors.adjoint() - rho0);
    // propagator in the counted eigenbasis: W^dag V e^{-iEt} V^dag W
    vw_ = prop_.vectors().adjoint() * jb_.vectors;
  }

  const JointBasis& basis() const { return jb_; }
  double dephasing_change() const { return change_; }
  bool dephasing_changed(double tol = 1e-10) const { return change_ > tol; }
  int dim() const { return static_cast<int>(rho_hat_.rows()); }

  /// Weights T_jk = U_jk (rho U^dag)_kj in the counted basis; sum over a block pair is the joint
  /// probability of outcome k first and j second.
  Mat weights(double t) const {
    Mat u = unitary_hat(t);
    Mat x = rho_hat_ * u.adjoint();
    return u.cwiseProduct(x.transpose());
  }

  /// Tr[e^{i k.A} U e^{-i k.A} rho U^dag] with k.A = sum_m lambda_m A_m.
  cplx mgf(const Mat& w, const std::vector<cplx>& lambda) const {
    Vec ph = phases(lambda, 1.0), pm = phases(lambda, -1.0);
    return (ph.asDiagonal() * w * pm.asDiagonal()).sum();
  }
  cplx mgf(double t, const std::vector<cplx>& lambda) const { return mgf(weights(t), lambda); }

  /// U_l rho U_{-l}^dag with U_l = e^{i l.A/2} U e^{-i l.A/2}, continued analytically in l.
  Mat tilted_state(double t, const std::vector<cplx>& lambda) const {
    Vec hp = phases(lambda, 0.5), hm = phases(lambda, -0.5);
    Mat u = unitary_hat(t);
    Mat ul = hp.asDiagonal() * u * hm.asDiagonal();
    Mat uml_dag = hp.asDiagonal() * u.adjoint() * hm.asDiagonal();  // analytic continuation of (U_{-l})^dag
    return jb_.vectors * (ul * rho_hat_ * uml_dag) * jb_.vectors.adjoint();
  }

  /// Evolved (dephased) state in the original basis.
  Mat state(double t) const {
    Mat u = unitary_hat(t);
    return jb_.vectors * (u * rho_hat_ * u.adjoint()) * jb_.vectors.adjoint();
  }

  /// Distribution of sum_m c_m (A_m(final) - A_m(initial)); outcomes closer than merge are pooled.
  WorkDistribution distribution(const Mat& w, const std::vector<double>& c, double merge = 1e-8) const {
    const int d = dim();
    RVec a = RVec::Zero(d);
    for (std::size_t m = 0; m < c.size(); ++m) a += c[m] * jb_.values[m];
    std::vector<std::pair<double, double>> pts;
    pts.reserve(std::size_t(d) * d);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const double pr = w(j, k).real();
        if (pr != 0.0) pts.emplace_back(a(j) - a(k), pr);
      }
    std::sort(pts.begin(), pts.end());
    WorkDistribution out;
    for (const auto& [x, pr] : pts) {
      if (!out.x.empty() && x - out.x.back() <= merge * std::max(1.0, std::abs(x))) {
        out.p.back() += pr;
      } else {
        out.x.push_back(x);
        out.p.push_back(pr);
      }
    }
    return out;
  }

private:
  Mat unitary_hat(double t) const {
    Vec ph = (prop_.energies().cast<cplx>() * cplx(0, -t)).array().exp();
    return vw_.adjoint() * ph.asDiagonal() * vw_;
  }
  Vec phases(const std::vector<cplx>& lambda, double s) const {
    Vec k = Vec::Zero(dim());
    for (std::size_t m = 0; m < lambda.size() && m < jb_.values.size(); ++m)
      k += lambda[m] * jb_.values[m].cast<cplx>();
    return (I * s * k).array().exp();
  }

  Propagator prop_;
  JointBasis jb_;
  Mat rho_hat_;
  Mat vw_;
  double change_ = 0;
};

/// Reverse process: the same measurement around U(t)^dag = U(-t).
inline TwoPointMeasurement reverse_measurement(const Mat& h, const std::vector<Mat>& counted, const Mat& rho_rev) {
  return TwoPointMeasurement(Mat(-h), counted, rho_rev);
}

// ---- pure-state ensembles

/// Mixed state as a weighted set of kets: rho = sum_m w_m |v_m><v_m|.
struct Ensemble {
  std::vector<double> w;
  Mat kets;  // one column per member

  static Ensemble pure(const Vec& v) { return {{1.0}, Mat(v)}; }
  /// Diagonal state in the computational basis; weights below cut are dropped.
  static Ensemble diagonal(const RVec& p, double cut = 0.0) {
    Ensemble e;
    std::vector<int> keep;
    for (int k = 0; k < p.size(); ++k)
      if (p(k) > cut) keep.push_back(k);
    e.kets = Mat::Zero(p.size(), static_cast<int>(keep.size()));
    for (std::size_t m = 0; m < keep.size(); ++m) {
      e.w.push_back(p(keep[m]));
      e.kets(keep[m], static_cast<int>(m)) = 1.0;
    }
    return e;
  }
  /// Spectral decomposition of a density matrix.
  static Ensemble from_density(const Mat& rho, double cut = 1e-15) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()));
    Ensemble e;
    std::vector<int> keep;
    for (int k = 0; k < rho.rows(); ++k)
      if (es.eigenvalues()(k) > cut) keep.push_back(k);
    e.kets = Mat(rho.rows(), static_cast<int>(keep.size()));
    for (std::size_t m = 0; m < keep.size(); ++m) {
      e.w.push_back(es.eigenvalues()(keep[m]));
      e.kets.col(static_cast<int>(m)) = es.eigenvectors().col(keep[m]);
    }
    return e;
  }
  Mat density() const {
    Mat r = Mat::Zero(kets.rows(), kets.rows());
    for (int m = 0; m < kets.cols(); ++m) r += w[m] * kets.col(m) * kets.col(m).adjoint();
    return r;
  }
  int dim() const { return static_cast<int>(kets.rows()); }
};

/// Tensor product of ensembles, factor order as given.
inline Ensemble tensor(const Ensemble& a, const Ensemble& b) {
  Ensemble e;
  e.kets = Mat(a.dim() * b.dim(), a.kets.cols() * b.kets.cols());
  int c = 0;
  for (int i = 0; i < a.kets.cols(); ++i)
    for (int j = 0; j < b.kets.cols(); ++j, ++c) {
      e.w.push_back(a.w[i] * b.w[j]);
      e.kets.col(c) = Eigen::kroneckerProduct(a.kets.col(i), b.kets.col(j)).eval();
    }
  return e;
}

/// Members evolved in the eigenbasis of a time-independent Hamiltonian.
class EnsembleEvolver {
public:
  EnsembleEvolver(const Propagator& u, const Ensemble& e) : u_(&u), w_(e.w), c_(u.vectors().adjoint() * e.kets) {}
  Mat kets(double t) const {
    Vec ph = (u_->energies().cast<cplx>() * cplx(0, -t)).array().exp();
    return u_->vectors() * (ph.asDiagonal() * c_);
  }
  const std::vector<double>& weights() const { return w_; }

private:
  const Propagator* u_;
  std::vector<double> w_;
  Mat c_;
};

/// sum_m w_m <v_m|A|v_m> for a diagonal observable given by its diagonal.
inline double diagonal_expectation(const Mat& kets, const std::vector<double>& w, const RVec& a) {
  double s = 0;
  for (int m = 0; m < kets.cols(); ++m) s += w[m] * (kets.col(m).cwiseAbs2().cwiseProduct(a)).sum();
  return s;
}

/// Reduced state on the leading factor of dimension d_keep from kets on (keep x rest).
inline Mat reduce_leading(const Mat& kets, const std::vector<double>& w, int d_keep) {
  const int rest = static_cast<int>(kets.rows()) / d_keep;
  Mat r = Mat::Zero(d_keep, d_keep);
  for (int m = 0; m < kets.cols(); ++m) {
    // row-major split: index = i * rest + j
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(kets.col(m).data(), d_keep,
                                                                                               rest);
    r += w[m] * psi * psi.adjoint();
  }
  return r;
}

// ---- desk model: qubit, laser and a few bath modes

/// Dressed reduction of a qubit-laser(-bath) state onto the dressed qubit, with the weight that
/// falls outside the complete blocks.
struct DressedReduction {
  Mat rho_da;
  double leakage = 0;
};

/// From the qubit-laser state (A x L ordering).
inline DressedReduction dressed_reduce_al(const Mat& rho_al, const ModelParams& p) {
  const DressedBasis db = dressed_transform(p);
  Mat r = db.isometry.adjoint() * rho_al * db.isometry;
  const int n = db.n_dl;
  DressedReduction out;
  out.rho_da = Mat::Zero(2, 2);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < n; ++m) out.rho_da(j, k) += r(j * n + m, k * n + m);
  out.leakage = 1.0 - out.rho_da.trace().real();
  return out;
}

inline DressedReduction dressed_reduce(const Operator& rho, const ModelParams& p) {
  return dressed_reduce_al(partial_trace(rho, {"A", "L"}).data(), p);
}

/// Dressed coherence <2|rho_DA|1> and qubit coherence <b|rho_A|a> of a qubit-laser state.
struct PhaseCoherences {
  cplx dressed, qubit;
};

inline PhaseCoherences phase_coherences_al(const Mat& rho_al, const ModelParams& p) {
  const int nl = static_cast<int>(rho_al.rows()) / 2;
  cplx q = 0;
  for (int n = 0; n < nl; ++n) q += rho_al(nl + n, n);
  return {dressed_reduce_al(rho_al, p).rho_da(1, 0), q};
}

inline PhaseCoherences phase_coherence_probe(const Operator& rho, const ModelParams& p) {
  return phase_coherences_al(partial_trace(rho, {"A", "L"}).data(), p);
}

/// Product-space image W (rho_DA x rho_DL) W^dag of a dressed-factorized state.
inline Mat dressed_product_state(const ModelParams& p, const Mat& rho_da, const Mat& rho_dl) {
  const DressedBasis db = dressed_transform(p);
  if (rho_dl.rows() != db.n_dl) throw Error("dressed-laser state has the wrong dimension");
  Mat k = Eigen::kroneckerProduct(rho_da, rho_dl).eval();
  return db.isometry * k * db.isometry.adjoint();
}

/// Gibbs state of the discrete bath modes, as a matrix on the bath factors.
inline Mat bath_gibbs(const ModelParams& p) {
  const auto w = p.bath_frequencies();
  const int lv = p.bath.mode_levels;
  Mat g = Mat::Identity(1, 1);
  for (int k = 0; k < p.bath.n_modes; ++k) {
    Mat hk = w[k] * (number_op(lv - 1) + 0.5 * Mat::Identity(lv, lv));
    g = Eigen::kroneckerProduct(g, gibbs_matrix(hk, p.beta_b)).eval();
  }
  return g;
}

/// Full-space operators for the dressed split H_X = H_DA + H_DL.
struct DressedSplit {
  Mat h_da, h_dl, h_b;
};

inline DressedSplit dressed_split(const Hamiltonians& h, const ModelParams& p) {
  const int nb = h.space.dim() / (2 * (p.laser_nmax + 1));
  const Mat ib = Mat::Identity(nb, nb);
  DressedSplit s;
  s.h_da = Eigen::kroneckerProduct(dressed_qubit_hamiltonian_product(p), ib).eval();
  s.h_dl = Eigen::kroneckerProduct(dressed_laser_hamiltonian(p).product, ib).eval();
  s.h_b = h.H_B.data();
  return s;
}

/// Energy bookkeeping of an exact state relative to the initial one.
struct EnergyLedger {
  double q = 0, w_l = 0, w_dl = 0;
  double de_a = 0, de_da = 0;
  double ds_a = 0, ds_da = 0;
  double first_law_a = 0;    // Delta E_A - Q - W_L
  double first_law_da = 0;   // Delta E_DA - Q - W_DL
  double splitting = 0;      // W_DL - (W_L - Tr[(wL/2) sz (rho - rho0)])
  double leakage = 0;
};

inline EnergyLedger thermo_observables(const Operator& rho, const Operator& rho0, const Hamiltonians& h,
                                       const ModelParams& p) {
  const DressedSplit s = dressed_split(h, p);
  const Mat dr = rho.data() - rho0.data();
  auto tr = [&](const Mat& a) { return (a * dr).trace().real(); };
  EnergyLedger e;
  e.q = -tr(h.H_B.data());
  e.w_l = -tr(h.H_L.data());
  e.w_dl = -tr(s.h_dl);
  e.de_a = tr((h.H_A + h.V_AL + h.V_AB).data());
  e.de_da = tr(s.h_da + h.V_AB.data());
  e.first_law_a = e.de_a - e.q - e.w_l;
  e.first_law_da = e.de_da - e.q - e.w_dl;
  e.splitting = e.w_dl - (e.w_l - tr(embed(h.space, "A", 0.5 * p.omega_l * qubit::sz()).data()));
  auto sa = [&](const Operator& r) { return von_neumann_entropy(partial_trace(r, {"A"}), 1e-8); };
  e.ds_a = sa(rho) - sa(rho0);
  DressedReduction d1 = dressed_reduce(rho, p), d0 = dressed_reduce(rho0, p);
  auto sd = [](const Mat& r) { return von_neumann_entropy(Mat(r / r.trace()), 1e-8); };
  e.ds_da = sd(d1.rho_da) - sd(d0.rho_da);
  e.leakage = d1.leakage;
  return e;
}

/// Laser work rate by central differences of Tr[H_L rho] against -wL g Im <2|rho_DA|1>.
struct CoherenceWorkCheck {
  double finite_difference = 0;
  double from_coherence = 0;
  double relative_deviation = 0;
};

inline CoherenceWorkCheck work_rate_from_coherences(const Operator& before, const Operator& now, const Operator& after,
                                                    double h, const Hamiltonians& ham, const ModelParams& p) {
  CoherenceWorkCheck c;
  const Mat& hl = ham.H_L.data();
  c.finite_difference = -((hl * after.data()).trace() - (hl * before.data()).trace()).real() / (2 * h);
  c.from_coherence = -p.omega_l * p.g() * dressed_reduce(now, p).rho_da(1, 0).imag();
  const double scale = std::max(std::abs(c.finite_difference), std::abs(c.from_coherence));
  c.relative_deviation = scale > 0 ? std::abs(c.finite_difference - c.from_coherence) / scale : 0.0;
  return c;
}

/// Qubit plus discrete bath in the frame rotating at wL (drive phase 0, RWA bath coupling):
/// the non-autonomous counterpart of the dressed qubit.
struct RotatingFrameModel {
  HilbertSpace space;
  Mat h;
};

inline RotatingFrameModel rotating_frame_model(const ModelParams& p) {
  std::vector<Factor> f{{"A", 2}};
  for (int k = 0; k < p.bath.n_modes; ++k) f.push_back({bath_label(k), p.bath.mode_levels});
  RotatingFrameModel m{HilbertSpace(f), Mat()};
  const auto w = p.bath_frequencies();
  Operator h = embed(m.space, "A", drive_hamiltonian_rot(p, 0.0));
  const int lv = p.bath.mode_levels;
  for (int k = 0; k < p.bath.n_modes; ++k)
    h = h + embed(m.space, bath_label(k), (w[k] - p.omega_l) * number_op(lv - 1));
  Operator b = bath_collective(p, m.space);
  Operator sp = embed(m.space, "A", qubit::sp()), sm = embed(m.space, "A", qubit::sm());
  h = h + sp * b + sm * b.adjoint();
  m.h = h.data();
  return m;
}

inline double trace_distance(const Mat& a, const Mat& b) {
  Mat d = a - b;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Autonomous dressed qubit against the rotating-frame qubit, both started from rho_da and the
/// bath Gibbs state; the autonomous run uses the RWA, constant-coupling qubit-laser blocks.
struct FrameComparison {
  std::vector<double> t, distance, leakage;
  double max_distance = 0;
};

inline FrameComparison compare_frames(const ModelParams& p, const Mat& rho_da, const Mat& rho_dl,
                                      const std::vector<double>& times) {
  HamiltonianOptions o;
  o.rwa_laser = o.rwa_bath = o.constant_coupling = true;
  const Hamiltonians h = build_hamiltonians(p, o);
  const Mat rb = bath_gibbs(p);
  Operator rho0(h.space, Eigen::kroneckerProduct(dressed_product_state(p, rho_da, rho_dl), rb).eval());
  const Propagator ua(h.H.data());
  const RotatingFrameModel rf = rotating_frame_model(p);
  const Propagator ur(rf.h);
  const Mat m = dressed_columns(p, 0.0);
  Operator q0(rf.space, Eigen::kroneckerProduct(Mat(m * rho_da * m.adjoint()), rb).eval());
  FrameComparison out;
  for (double t : times) {
    Mat u = ua.unitary(t);
    DressedReduction d = dressed_reduce(Operator(h.space, u * rho0.data() * u.adjoint()), p);
    Mat v = ur.unitary(t);
    Mat qa = partial_trace(Operator(rf.space, v * q0.data() * v.adjoint()), {"A"}).data();
    const double dist = trace_distance(d.rho_da, m.adjoint() * qa * m);
    out.t.push_back(t);
    out.distance.push_back(dist);
    out.leakage.push_back(d.leakage);
    out.max_distance = std::max(out.max_distance, dist);
  }
  return out;
}

// ---- dressed qubit with a many-mode bath, truncated in the bath excitation number

/// Dressed qubit (rotating frame) coupled in the RWA to N bath modes with at most K quanta in total.
/// Every counted observable is diagonal in the product Fock basis.
struct DressedBathModel {
  int n_modes = 0, max_quanta = 0;
  std::vector<std::vector<int>> occupations;  // bath Fock configurations
  Eigen::SparseMatrix<cplx> h;                // basis index = dressed * n_configs + config
  RVec n_bath, h_bath_rot, h_da;              // diagonal observables
  double omega_l = 0;
  int dim() const { return static_cast<int>(h.rows()); }
};

inline DressedBathModel dressed_bath_model(const ModelParams& p, int max_quanta) {
  DressedBathModel m;
  m.n_modes = p.bath.n_modes;
  m.max_quanta = max_quanta;
  m.omega_l = p.omega_l;
  const int nm = p.bath.n_modes;
  std::vector<int> occ(nm, 0);
  std::map<std::vector<int>, int> index;
  // enumerate configurations with total quanta <= K
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == nm) {
      index[occ] = static_cast<int>(m.occupations.size());
      m.occupations.push_back(occ);
      return;
    }
    for (int n = 0; n <= left; ++n) {
      occ[k] = n;
      rec(k + 1, left - n);
    }
    occ[k] = 0;
  };
  rec(0, max_quanta);
  const int nc = static_cast<int>(m.occupations.size());
  const int d = 2 * nc;
  const auto w = p.bath_frequencies();
  const Mat s = [&] { Mat c = dressed_columns(p, 0.0); return Mat(c.adjoint() * qubit::sm() * c); }();
  m.n_bath = RVec(d);
  m.h_bath_rot = RVec(d);
  m.h_da = RVec(d);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int q = 0; q < 2; ++q)
    for (int c = 0; c < nc; ++c) {
      const int i = q * nc + c;
      double nb = 0, hb = 0;
      for (int k = 0; k < nm; ++k) {
        nb += m.occupations[c][k];
        hb += (w[k] - p.omega_l) * m.occupations[c][k];
      }
      m.n_bath(i) = nb;
      m.h_bath_rot(i) = hb;
      m.h_da(i) = (q == 0 ? -0.5 : 0.5) * p.rabi();
      trip.emplace_back(i, i, m.h_da(i) + hb);
    }
  // s x B^dag + s^dag x B with B = sum_k (g_k/2) b_k
  const double gk = p.bath.g_bath / 2;
  for (int c = 0; c < nc; ++c) {
    if (int(std::accumulate(m.occupations[c].begin(), m.occupations[c].end(), 0)) >= max_quanta) continue;
    for (int k = 0; k < nm; ++k) {
      std::vector<int> up = m.occupations[c];
      up[k] += 1;
      const int c2 = index.at(up);
      const double amp = gk * std::sqrt(double(up[k]));
      for (int q1 = 0; q1 < 2; ++q1)
        for (int q2 = 0; q2 < 2; ++q2) {
          const cplx sv = s(q2, q1);  // <q2|s|q1>
          if (sv == cplx(0)) continue;
          trip.emplace_back(q2 * nc + c2, q1 * nc + c, amp * sv);
          trip.emplace_back(q1 * nc + c, q2 * nc + c2, amp * std::conj(sv));
        }
    }
  }
  m.h.resize(d, d);
  m.h.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// exp(-i H t) v by Taylor steps with ||H|| dt <= 1/2.
inline Vec sparse_evolve(const Eigen::SparseMatrix<cplx>& h, double t, Vec v, double tol = 1e-14) {
  double norm = 0;
  for (int k = 0; k < h.outerSize(); ++k) {
    double col = 0;
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(h, k); it; ++it) col += std::abs(it.value());
    norm = std::max(norm, col);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(2 * norm * std::abs(t))));
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    Vec term = v, acc = v;
    for (int n = 1; n < 60; ++n) {
      term = (h * term).eval() * cplx(0, -dt / n);
      acc += term;
      if (term.norm() < tol * acc.norm()) break;
    }
    v = acc;
  }
  return v;
}

/// Exact MGF of (W_DL, bath energy) for a pure dressed initial state and the bath vacuum.
/// Each emitted quantum takes wL from the dressed laser: Delta E_DL = -wL Delta N_B.
struct DressedBathRun {
  std::vector<double> t;
  std::vector<Vec> psi;
  double truncation_weight = 0;  // largest population found at the truncation edge
};

inline DressedBathRun run_dressed_bath(const DressedBathModel& m, const Vec& psi_da, const std::vector<double>& times) {
  const int nc = static_cast<int>(m.occupations.size());
  Vec v = Vec::Zero(m.dim());
  v(0) = psi_da(0);
  v(nc) = psi_da(1);
  DressedBathRun r;
  double t0 = 0;
  for (double t : times) {
    v = sparse_evolve(m.h, t - t0, v);
    t0 = t;
    r.t.push_back(t);
    r.psi.push_back(v);
    double edge = 0;
    for (int i = 0; i < m.dim(); ++i)
      if (m.n_bath(i) == m.max_quanta) edge += std::norm(v(i));
    r.truncation_weight = std::max(r.truncation_weight, edge);
  }
  return r;
}

inline cplx dressed_bath_mgf(const DressedBathModel& m, const Vec& psi, cplx l_dl, cplx l_b) {
  cplx g = 0;
  for (int i = 0; i < m.dim(); ++i) {
    const double dn = m.n_bath(i);
    g += std::norm(psi(i)) * std::exp(I * (l_dl * (-m.omega_l * dn) + l_b * (m.h_bath_rot(i) + m.omega_l * dn)));
  }
  return g;
}

}  // namespace qlt
