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

#include <cmath>

#include "doctest.h"
#include "qlt/model.hpp"
#include "support.hpp"

using namespace qlt;

namespace {

ModelParams small_laser(int nmax) {
  ModelParams p;
  p.laser_nmax = nmax;
  return p;
}

Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

}  // namespace

TEST_CASE("Hamiltonians are Hermitian and decouple at g0 = 0") {
  ModelParams p = small_laser(6);
  p.bath.n_modes = 2;
  Hamiltonians h = build_hamiltonians(p);
  for (const Operator* o : {&h.H_A, &h.H_L, &h.H_B, &h.V_AL, &h.V_AB, &h.H_X, &h.H}) CHECK(o->is_hermitian(1e-12));
  p.g0 = 0;
  Hamiltonians h0 = build_hamiltonians(p);
  CHECK(max_abs((h0.H_X - h0.H_A - h0.H_L).data()) == 0.0);
}

TEST_CASE("RWA qubit-laser Hamiltonian conserves the excitation number") {
  ModelParams p = small_laser(8);
  Hamiltonians h = build_hamiltonians(p, {.rwa_laser = true, .with_bath = false});
  const int nl = p.laser_nmax + 1;
  double off = 0;
  for (int r = 0; r < 2 * nl; ++r)
    for (int c = 0; c < 2 * nl; ++c) {
      const int er = r % nl + r / nl, ec = c % nl + c / nl;
      if (er != ec) off = std::max(off, std::abs(h.H_X.data()(r, c)));
    }
  CHECK(off == 0.0);
  Hamiltonians full = build_hamiltonians(p, {.with_bath = false});
  CHECK(max_abs((full.V_AL - h.V_AL).data()) > 0.0);
}

TEST_CASE("qubit-bath coupling matrix elements") {
  ModelParams p = small_laser(1);
  p.bath.n_modes = 1;
  p.bath.g_bath = 0.3;
  Hamiltonians h = build_hamiltonians(p);
  Operator vab = partial_trace(h.V_AB, {"A", "B0"}) * cplx(0.5);  // laser identity has trace 2
  // (s+ + s-) x (g/2)(b + b^dag) on {a0, a1, b0, b1}: anti-diagonal entries g/2
  Mat hand = Mat::Zero(4, 4);
  for (int k = 0; k < 4; ++k) hand(k, 3 - k) = 0.15;
  CHECK(max_abs(vab.data() - hand) < 1e-15);
  Hamiltonians hr = build_hamiltonians(p, {.rwa_bath = true});
  Mat rwa = (partial_trace(hr.V_AB, {"A", "B0"}) * cplx(0.5)).data();
  Mat hand_rwa = Mat::Zero(4, 4);
  hand_rwa(1, 2) = hand_rwa(2, 1) = 0.15;  // |a,1> <-> |b,0>
  CHECK(max_abs(rwa - hand_rwa) < 1e-15);
}

TEST_CASE("dressed-basis coefficients") {
  ModelParams p;
  p.omega_a = p.omega_l;
  CHECK(p.c_plus() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(p.c_minus() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  p.omega_a = p.omega_l + 3;
  p.g0 = 2;  // g = 4
  CHECK(p.rabi() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(p.c_plus() == doctest::Approx(std::sqrt(0.8)).epsilon(1e-15));
  CHECK(p.c_minus() == doctest::Approx(std::sqrt(0.2)).epsilon(1e-15));
  CHECK(!p.near_resonance());  // |delta| = 3 > wL/10
  CHECK(!p.macroscopic_laser());
  p.g0 = 0;
  p.omega_a = p.omega_l;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("dressed transform diagonalizes every block") {
  ModelParams p = small_laser(10);
  p.omega_a = 20.3;
  Hamiltonians h = build_hamiltonians(p, {.rwa_laser = true, .constant_coupling = true, .with_bath = false});
  DressedBasis d = dressed_transform(p);
  CHECK(max_abs(d.isometry.adjoint() * d.isometry - Mat::Identity(2 * d.n_dl, 2 * d.n_dl)) < 1e-12);
  Mat hd = d.isometry.adjoint() * h.H_X.data() * d.isometry;
  Mat expect = Mat::Zero(2 * d.n_dl, 2 * d.n_dl);
  for (int n = 0; n < d.n_dl; ++n) {
    expect(n, n) = p.omega_l * (n + 1) - p.rabi() / 2;
    expect(d.n_dl + n, d.n_dl + n) = p.omega_l * (n + 1) + p.rabi() / 2;
  }
  CHECK(max_abs(hd - expect) < 1e-12);
  for (int n = 0; n < d.n_dl; ++n) CHECK(std::abs(hd(d.n_dl + n, d.n_dl + n) - hd(n, n) - p.rabi()) < 1e-12);

  // the dressed-qubit part on the product space is (delta/2) sz + (g/2)(s+ E + s- E^dag)
  Mat hda = d.isometry.adjoint() * dressed_qubit_hamiltonian_product(p) * d.isometry;
  Mat eda = kron(Mat(0.5 * p.rabi() * qubit::sz()), Mat::Identity(d.n_dl, d.n_dl));
  CHECK(max_abs(hda - eda) < 1e-12);
}

TEST_CASE("dressed laser Hamiltonian") {
  ModelParams p = small_laser(10);
  p.omega_a = 19.8;
  DressedLaserHamiltonian dl = dressed_laser_hamiltonian(p);
  DressedBasis d = dressed_transform(p);
  Mat on_dressed = d.isometry.adjoint() * dl.product * d.isometry;
  CHECK(max_abs(on_dressed - kron(qubit::id(), dl.spectral)) < 1e-12);
  Mat hda = dressed_qubit_hamiltonian_product(p);
  CHECK(max_abs(dl.product * hda - hda * dl.product) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(kron(qubit::id(), dl.spectral));
  for (int n = 0; n < d.n_dl; ++n) {
    CHECK(std::abs(es.eigenvalues()(2 * n) - p.omega_l * (n + 1)) < 1e-12);
    CHECK(std::abs(es.eigenvalues()(2 * n + 1) - p.omega_l * (n + 1)) < 1e-12);
  }
  Hamiltonians h = build_hamiltonians(p, {.with_bath = false});
  for (int k = 0; k < 5; ++k) {
    Mat r = qlt::testing::random_density(2 * (p.laser_nmax + 1));
    const double lhs = (dl.product * r).trace().real() - (h.H_L.data() * r).trace().real();
    const double rhs = 0.5 * p.omega_l * (kron(qubit::sz(), Mat::Identity(11, 11)) * r).trace().real();
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("Mollow transformation") {
  ModelParams p = small_laser(60);
  p.alpha_abs = 0;
  HilbertSpace s{{"A", 2}, {"L", 61}};
  Operator r(s, qlt::testing::random_density(122));
  CHECK(max_abs(mollow_transform(r, p, 0.3).data() - r.data()) < 1e-14);

  p.alpha_abs = 2;
  p.alpha_phase = 0.4;
  Mat ra = qlt::testing::random_density(2);
  Operator prod(s, kron(ra, coherent_state({2.0, 0.4, 60}).data()));
  Mat vac = Mat::Zero(61, 61);
  vac(0, 0) = 1;
  CHECK(max_abs(mollow_transform(prod, p, 0.0).data() - kron(ra, vac)) < 1e-8);
  Operator rr(s, qlt::testing::random_density(122));
  CHECK(std::abs(mollow_transform(rr, p, 1.3).trace() - 1.0) < 1e-10);
}

TEST_CASE("Floquet states") {
  ModelParams p;
  p.omega_a = 20.5;
  p.alpha_phase = 0.3;
  Mat cols = dressed_columns(p, p.alpha_phase);
  FloquetStates f0 = floquet_states(p, 0.0);
  CHECK((f0.u1 - cols.col(0)).norm() < 1e-15);
  CHECK((f0.u2 - cols.col(1)).norm() < 1e-15);
  CHECK(f0.eps1 == doctest::Approx(-p.rabi() / 2));
  CHECK(f0.eps2 == doctest::Approx(p.rabi() / 2));
  const double period = 2 * M_PI / p.omega_l;
  for (double t : {0.0, 0.13, 0.71, 2.2}) {
    FloquetStates f = floquet_states(p, t), g = floquet_states(p, t + period);
    CHECK(std::abs(f.u1.dot(f.u2)) < 1e-14);
    CHECK(max_abs(f.u1 * f.u1.adjoint() - g.u1 * g.u1.adjoint()) < 1e-12);
    CHECK(max_abs(f.u2 * f.u2.adjoint() - g.u2 * g.u2.adjoint()) < 1e-12);
    // (H_A + V(t) - i d/dt) u = eps u with d/dt u = -i (wL/2) sz u
    Mat h = qubit_drive_hamiltonian(p, t);
    Mat dt = cplx(0, -0.5 * p.omega_l) * qubit::sz();
    CHECK((h * f.u1 - I * dt * f.u1 - f.eps1 * f.u1).norm() < 1e-10);
    CHECK((h * f.u2 - I * dt * f.u2 - f.eps2 * f.u2).norm() < 1e-10);
  }
}

TEST_CASE("rotating frame") {
  ModelParams p;
  p.omega_a = 20.4;
  p.alpha_phase = 0.9;
  HilbertSpace s = HilbertSpace::single("A", 2);
  Operator r(s, qlt::testing::random_density(2));
  CHECK(max_abs(rotating_frame(r, p, 0.0).data() - r.data()) < 1e-15);
  CHECK(max_abs(rotating_frame_inverse(rotating_frame(r, p, 0.8), p, 0.8).data() - r.data()) < 1e-14);
  for (double t : {0.0, 0.37, 1.9}) {
    Operator h(s, qubit_drive_hamiltonian(p, t));
    Mat hrot = rotating_frame(h, p, t).data() - 0.5 * p.omega_l * qubit::sz();
    CHECK(max_abs(hrot - drive_hamiltonian_rot(p, p.alpha_phase)) < 1e-12);
    Operator v(s, drive_v(p, t));
    CHECK(max_abs(rotating_frame(v, p, t).data() - drive_v(p, 0.0)) < 1e-14);
  }
  // dressed states diagonalize the rotating-frame drive
  Mat d = qubit_to_dressed(drive_hamiltonian_rot(p, p.alpha_phase), p);
  Mat e = 0.5 * p.rabi() * qubit::sz();
  CHECK(max_abs(d - e) < 1e-12);
  CHECK(max_abs(dressed_to_qubit(qubit_to_dressed(r.data(), p), p) - r.data()) < 1e-14);
  p.alpha_phase = 0.0;
  for (int k = 0; k < 5; ++k) {
    Mat q = qlt::testing::random_density(2);
    Mat dd = qubit_to_dressed(q, p);
    CHECK(std::abs(q(1, 0).imag() - dd(1, 0).imag()) < 1e-14);
  }
}

TEST_CASE("RWA report") {
  ModelParams p;
  p.laser_nmax = 44;
  RwaReport r = rwa_error_bound(p);
  CHECK(r.norm_ratio > 0.5);
  CHECK(r.norm_ratio < 2.0);
  CHECK(r.admixture < 0.01);
}
