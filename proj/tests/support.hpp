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

#include <random>

#include "qlt/linops.hpp"

namespace qlt::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20260101);
  return g;
}

inline Mat random_matrix(int d) {
  std::normal_distribution<double> n;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng()), n(rng()));
  return m;
}

inline Mat random_hermitian(int d) {
  Mat m = random_matrix(d);
  return 0.5 * (m + m.adjoint());
}

inline Mat random_density(int d) {
  Mat m = random_matrix(d);
  Mat r = m * m.adjoint();
  return r / r.trace();
}

inline Vec random_state(int d) {
  std::normal_distribution<double> n;
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(n(rng()), n(rng()));
  return v.normalized();
}

}  // namespace qlt::testing
