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
#include <complex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qlt {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

struct Tolerances {
  double structural = 1e-10;
};

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Factor {
  std::string label;
  int dim;
};

/// Ordered list of labeled tensor factors.
class HilbertSpace {
public:
  HilbertSpace() = default;
  HilbertSpace(std::initializer_list<Factor> f) : factors_(f) { check(); }
  explicit HilbertSpace(std::vector<Factor> f) : factors_(std::move(f)) { check(); }

  static HilbertSpace single(std::string label, int dim) { return HilbertSpace{{std::move(label), dim}}; }

  const std::vector<Factor>& factors() const { return factors_; }
  int dim() const {
    int d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
  }
  bool has(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
  }
  std::size_t index_of(const std::string& label) const {
    for (std::size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].label == label) return k;
    throw Error("unknown label '" + label + "'");
  }
  int dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }

  HilbertSpace operator*(const HilbertSpace& o) const {
    std::vector<Factor> f = factors_;
    for (const auto& g : o.factors_) {
      if (has(g.label)) throw Error("label collision '" + g.label + "'");
      f.push_back(g);
    }
    return HilbertSpace(std::move(f));
  }
  bool operator==(const HilbertSpace& o) const {
    if (factors_.size() != o.factors_.size()) return false;
    for (std::size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].label != o.factors_[k].label || factors_[k].dim != o.factors_[k].dim) return false;
    return true;
  }

private:
  void check() const {
    std::set<std::string> seen;
    for (const auto& f : factors_) {
      if (f.dim < 1) throw Error("factor '" + f.label + "' has dim < 1");
      if (!seen.insert(f.label).second) throw Error("duplicate label '" + f.label + "'");
    }
  }
  std::vector<Factor> factors_;
};

/// Dense operator on a labeled space.
class Operator {
public:
  Operator() = default;
  Operator(HilbertSpace s, Mat m) : space_(std::move(s)), data_(std::move(m)) {
    if (data_.rows() != data_.cols() || data_.rows() != space_.dim())
      throw Error("operator shape does not match its space");
  }
  static Operator identity(const HilbertSpace& s) { return {s, Mat::Identity(s.dim(), s.dim())}; }
  static Operator zero(const HilbertSpace& s) { return {s, Mat::Zero(s.dim(), s.dim())}; }

  const HilbertSpace& space() const { return space_; }
  const Mat& data() const { return data_; }
  Mat& data() { return data_; }
  int dim() const { return static_cast<int>(data_.rows()); }

  cplx trace() const { return data_.trace(); }
  Operator adjoint() const { return {space_, data_.adjoint()}; }
  bool is_hermitian(double tol = 1e-10) const { return (data_ - data_.adjoint()).cwiseAbs().maxCoeff() <= tol; }
  bool is_unitary(double tol = 1e-10) const {
    return (data_.adjoint() * data_ - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= tol;
  }

  Operator operator*(const Operator& o) const { same(o); return {space_, data_ * o.data_}; }
  Operator operator+(const Operator& o) const { same(o); return {space_, data_ + o.data_}; }
  Operator operator-(const Operator& o) const { same(o); return {space_, data_ - o.data_}; }
  Operator operator*(cplx c) const { return {space_, data_ * c}; }
  friend Operator operator*(cplx c, const Operator& o) { return o * c; }

private:
  void same(const Operator& o) const {
    if (!(space_ == o.space_)) throw Error("operators live on different spaces");
  }
  HilbertSpace space_;
  Mat data_;
};

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline Operator tensor(const Operator& a, const Operator& b) {
  HilbertSpace s = a.space() * b.space();
  Mat k = Eigen::kroneckerProduct(a.data(), b.data()).eval();
  return {s, k};
}

inline Operator tensor(std::initializer_list<Operator> ops) {
  auto it = ops.begin();
  Operator r = *it++;
  for (; it != ops.end(); ++it) r = tensor(r, *it);
  return r;
}

/// Embed a local operator acting on one factor into the full space.
inline Operator embed(const HilbertSpace& s, const std::string& label, const Mat& local) {
  const std::size_t k = s.index_of(label);
  Mat out = Mat::Identity(1, 1);
  for (std::size_t j = 0; j < s.factors().size(); ++j) {
    const int d = s.factors()[j].dim;
    Mat f = j == k ? local : Mat(Mat::Identity(d, d));
    if (j == k && (local.rows() != d)) throw Error("local operator dimension mismatch for '" + label + "'");
    out = Eigen::kroneckerProduct(out, f).eval();
  }
  return {s, out};
}

/// Trace out every factor not listed in keep; kept factors retain their order.
inline Operator partial_trace(const Operator& op, const std::set<std::string>& keep) {
  const auto& f = op.space().factors();
  for (const auto& l : keep)
    if (!op.space().has(l)) throw Error("unknown label '" + l + "'");
  const std::size_t n = f.size();
  std::vector<int> dims(n), strides(n);
  for (std::size_t k = 0; k < n; ++k) dims[k] = f[k].dim;
  strides[n - 1] = 1;
  for (std::size_t k = n - 1; k > 0; --k) strides[k - 1] = strides[k] * dims[k];

  std::vector<Factor> kept;
  std::vector<std::size_t> ki, ti;
  for (std::size_t k = 0; k < n; ++k) {
    if (keep.count(f[k].label)) { kept.push_back(f[k]); ki.push_back(k); }
    else ti.push_back(k);
  }
  HilbertSpace ks(kept);
  int dk = ks.dim(), dt = 1;
  for (auto k : ti) dt *= dims[k];

  auto compose = [&](int kidx, int tidx) {
    int idx = 0;
    for (std::size_t j = ki.size(); j-- > 0;) { idx += (kidx % dims[ki[j]]) * strides[ki[j]]; kidx /= dims[ki[j]]; }
    for (std::size_t j = ti.size(); j-- > 0;) { idx += (tidx % dims[ti[j]]) * strides[ti[j]]; tidx /= dims[ti[j]]; }
    return idx;
  };
  Mat out = Mat::Zero(dk, dk);
  const Mat& m = op.data();
  for (int t = 0; t < dt; ++t)
    for (int c = 0; c < dk; ++c) {
      const int cc = compose(c, t);
      for (int r = 0; r < dk; ++r) out(r, c) += m(compose(r, t), cc);
    }
  return {ks, out};
}

/// Matrix exponential by scaling and squaring with Pade approximants.
inline Mat expm(const Mat& a) { return a.exp(); }

/// Hermitian generator diagonalized once, propagated to any time.
class Propagator {
public:
  explicit Propagator(const Mat& h, double tol = 1e-10) {
    if (max_abs(h - h.adjoint()) > tol * std::max(1.0, max_abs(h))) throw Error("propagator generator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
    e_ = es.eigenvalues();
    v_ = es.eigenvectors();
  }
  Mat unitary(double t) const {
    Vec ph = (e_.cast<cplx>() * cplx(0, -t)).array().exp();
    return v_ * ph.asDiagonal() * v_.adjoint();
  }
  const RVec& energies() const { return e_; }
  const Mat& vectors() const { return v_; }

private:
  RVec e_;
  Mat v_;
};

namespace detail {

// Arnoldi approximation of exp(tau*A) v, with substeps until the error estimate is met.
inline Vec krylov_expv(const Mat& a, double t, Vec v, double tol, int m = 30) {
  const int n = static_cast<int>(a.rows());
  m = std::min(m, n);
  double done = 0.0;
  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  double tau = anorm > 0 ? std::min(t, 10.0 / anorm) : t;
  int guard = 0;
  while (done < t) {
    if (++guard > 100000) throw Error("Krylov propagation did not converge");
    tau = std::min(tau, t - done);
    const double beta = v.norm();
    if (beta == 0.0) return v;
    Mat vk = Mat::Zero(n, m + 1);
    Mat hk = Mat::Zero(m + 2, m + 2);
    vk.col(0) = v / beta;
    int mm = m;
    bool happy = false;
    for (int j = 0; j < m; ++j) {
      Vec w = a * vk.col(j);
      for (int i = 0; i <= j; ++i) {
        hk(i, j) = vk.col(i).dot(w);
        w -= hk(i, j) * vk.col(i);
      }
      const double hn = w.norm();
      if (hn < 1e-14 * std::max(1.0, anorm)) { mm = j + 1; happy = true; break; }
      hk(j + 1, j) = hn;
      vk.col(j + 1) = w / hn;
    }
    const int sz = happy ? mm : m + 2;
    Mat hs = hk.topLeftCorner(sz, sz);
    if (!happy) hs(m + 1, m) = 1.0;
    Mat f = (tau * hs).exp();
    double err = happy ? 0.0 : beta * std::abs(f(m, 0)) + beta * std::abs(f(m + 1, 0)) * vk.col(m).norm();
    if (err > tol * tau / t && tau > 1e-14 * t) { tau *= 0.5; continue; }
    const int keep = happy ? mm : m + 1;
    v = beta * vk.leftCols(keep) * f.col(0).head(keep);
    done += tau;
    if (err < 0.1 * tol * tau / t) tau *= 1.5;
  }
  return v;
}

}  // namespace detail

/// e^{-iHt} applied to a vector. Dense exponential up to dim 512, Krylov beyond.
inline Vec expm_apply(const Mat& h, double t, const Vec& v, double tol = 1e-12) {
  if (h.rows() <= 512) return expm(cplx(0, -t) * h) * v;
  return detail::krylov_expv(cplx(0, -1) * h, t, v, tol);
}

/// e^{-iHt} rho e^{iHt}.
inline Mat expm_apply(const Mat& h, double t, const Mat& rho, double tol = 1e-12) {
  if (max_abs(h - h.adjoint()) > 1e-10 * std::max(1.0, max_abs(h))) throw Error("propagator generator is not Hermitian");
  Mat u = h.rows() <= 512 ? expm(cplx(0, -t) * h) : Propagator(h).unitary(t);
  (void)tol;
  return u * rho * u.adjoint();
}

// ---- superoperators in column-stacking convention: vec(A X B) = (B^T kron A) vec(X)

using Superop = Mat;

inline Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
inline Mat unvec(const Vec& v) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
  return Eigen::Map<const Mat>(v.data(), d, d);
}
inline Superop sprepost(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(b.transpose(), a).eval(); }
inline Superop spre(const Mat& a) { return sprepost(a, Mat::Identity(a.rows(), a.cols())); }
inline Superop spost(const Mat& b) { return sprepost(Mat::Identity(b.rows(), b.cols()), b); }
inline Superop commutator(const Mat& h) { return spre(h) - spost(h); }
inline Mat apply_to(const Superop& s, const Mat& rho) { return unvec(s * vec(rho)); }

/// Superoperator matrix of an arbitrary linear map given as a callable.
template <class F>
Superop superop_from(F&& f, int d) {
  Superop s(d * d, d * d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) {
      Mat e = Mat::Zero(d, d);
      e(r, c) = 1.0;
      s.col(c * d + r) = vec(f(e));
    }
  return s;
}

/// Tr[L(X)] as a row functional: vec(I)^dagger L.
inline double trace_annihilation_residual(const Superop& s) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  Vec id = vec(Mat::Identity(d, d));
  return (id.adjoint() * s).cwiseAbs().maxCoeff();
}

/// Choi matrix of the map; eigenvalues of its Hermitian part test complete positivity.
inline Mat choi(const Superop& s) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  Mat c = Mat::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      e(i, j) = 1.0;
      Mat out = apply_to(s, e);
      c += Eigen::kroneckerProduct(e, out).eval();
    }
  return c;
}

inline double min_hermitian_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Complete positivity of e^{tL} for a generator L: the Choi matrix of L projected on the
/// complement of the maximally entangled vector must be PSD.
inline double generator_cp_margin(const Superop& s) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  Mat c = choi(s);
  Vec w = Vec::Zero(d * d);
  for (int i = 0; i < d; ++i) w(i * d + i) = 1.0 / std::sqrt(double(d));
  Mat p = Mat::Identity(d * d, d * d) - w * w.adjoint();
  return min_hermitian_eigenvalue(p * c * p);
}

struct Eigenpair {
  cplx value;
  Vec right;
  Vec left;
  double residual = 0.0;
  bool degenerate = false;
};

/// Eigenvalue of largest real part with its left and right eigenvectors.
inline Eigenpair dominant_eigenvalue(const Mat& s, double degeneracy_tol = 1e-9) {
  Eigen::ComplexEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  const auto& ev = es.eigenvalues();
  int best = 0;
  for (int k = 1; k < ev.size(); ++k)
    if (ev(k).real() > ev(best).real()) best = k;
  Eigenpair p;
  p.value = ev(best);
  for (int k = 0; k < ev.size(); ++k)
    if (k != best && std::abs(ev(k) - ev(best)) < degeneracy_tol * std::max(1.0, std::abs(ev(best)))) p.degenerate = true;
  p.right = es.eigenvectors().col(best).normalized();
  // refine by inverse iteration to pin the residual down
  const int n = static_cast<int>(s.rows());
  const double shift_eps = 1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff());
  auto refine = [&](const Mat& a, cplx mu, Vec v) {
    Eigen::PartialPivLU<Mat> lu(a - (mu + shift_eps) * Mat::Identity(n, n));
    for (int it = 0; it < 3; ++it) v = lu.solve(v).normalized();
    return v;
  };
  if (!p.degenerate) {
    p.right = refine(s, p.value, p.right);
    cplx rq = p.right.dot(s * p.right);
    p.value = rq;
    Eigen::ComplexEigenSolver<Mat> esl(s.adjoint());
    const auto& evl = esl.eigenvalues();
    int bl = 0;
    for (int k = 1; k < evl.size(); ++k)
      if (std::abs(evl(k) - std::conj(p.value)) < std::abs(evl(bl) - std::conj(p.value))) bl = k;
    p.left = esl.eigenvectors().col(bl).normalized();
    p.left = refine(s.adjoint(), std::conj(p.value), p.left);
  } else {
    p.left = p.right;
  }
  p.residual = (s * p.right - p.value * p.right).norm();
  return p;
}

/// Full spectrum, used as an oracle and for diagnostics.
inline Vec spectrum(const Mat& s) { return Eigen::ComplexEigenSolver<Mat>(s, false).eigenvalues(); }

}  // namespace qlt
