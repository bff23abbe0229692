/*
 * Copyright 2026 The lcvx Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Oracles shared by the unit tests. Nothing here calls into the library's
// numerical routines; the point is to have an independent reference.
#pragma once

#include <cmath>
#include <random>

#include "lcvx/discretization.hpp"

namespace lcvx::testing {

// Taylor series with scaling and squaring.
inline Matrix expm_oracle(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = m / std::pow(2.0, squarings);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

inline ContinuousSystem double_integrator() {
  ContinuousSystem sys;
  sys.a_c = Matrix::Zero(6, 6);
  sys.a_c.topRightCorner(3, 3).setIdentity();
  sys.b_c = Matrix::Zero(6, 3);
  sys.b_c.bottomRows(3).setIdentity();
  return sys;
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols,
                            double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < cols; ++k) m(i, k) = dist(rng);
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

}  // namespace lcvx::testing
