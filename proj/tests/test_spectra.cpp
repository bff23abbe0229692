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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>

#include "lcvx/errors.hpp"
#include "lcvx/spectra.hpp"
#include "support.hpp"

using namespace lcvx;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

int group_of(const EigenStructure& s, double re, double im = 0.0) {
  for (std::size_t k = 0; k < s.distinct_eigenvalues.size(); ++k) {
    if (std::abs(s.distinct_eigenvalues[k] - Complex(re, im)) < 1e-6) {
      return s.cluster_group[k];
    }
  }
  FAIL("eigenvalue not found");
  return -1;
}

std::vector<int> block_sizes(const EigenStructure& s) {
  std::vector<int> sizes;
  for (const auto& b : s.blocks) sizes.push_back(b.size);
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

// Eigenvalues matched greedily; returns the worst distance.
double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0.0;
  for (const Complex& x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](const Complex& l, const Complex& r) {
      return std::abs(l - x) < std::abs(r - x);
    });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

std::vector<Complex> eigenvalues(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

}  // namespace

TEST_CASE("diagonal matrix") {
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 1.0, 2.0;
  const EigenStructure s = eigen_structure(a);
  CHECK(s.dimension() == 2);
  CHECK(block_sizes(s) == std::vector<int>{1, 1});
  Vector q = Vector::Zero(2);
  q(group_of(s, 1.0)) = 0.1;
  q(group_of(s, 2.0)) = -0.1;
  Matrix expected = Matrix::Zero(2, 2);
  expected.diagonal() << 1.1, 1.9;
  CHECK(max_abs(perturb(s, q) - expected) < 1e-12);
}

TEST_CASE("explicit Jordan block keeps its shape") {
  Matrix a(2, 2);
  a << 1.0, 1.0, 0.0, 1.0;
  const EigenStructure s = eigen_structure(a);
  CHECK(s.dimension() == 1);
  CHECK(block_sizes(s) == std::vector<int>{2});
  Vector q(1);
  q << 0.05;
  Matrix expected(2, 2);
  expected << 1.05, 1.0, 0.0, 1.05;
  CHECK(max_abs(perturb(s, q) - expected) < 1e-12);
}

TEST_CASE("double integrator structure") {
  const DiscreteSystem d = integrate_stm(testing::double_integrator(), 4.0, 16);
  Eigen::FullPivLU<Matrix> lu(d.a - Matrix::Identity(6, 6));
  CHECK(lu.rank() == 3);  // three chains of length two

  const EigenStructure s = eigen_structure(d.a);
  CHECK(s.dimension() == 1);
  CHECK(block_sizes(s) == std::vector<int>{2, 2, 2});
  CHECK(std::abs(s.distinct_eigenvalues.at(0) - Complex(1.0, 0.0)) < 1e-9);
  CHECK(max_abs((s.reconstruct() - d.a.cast<Complex>()).cwiseAbs()) < 1e-8 * d.a.norm());
  CHECK(max_abs(perturb(s, Vector::Zero(1)) - d.a) < 1e-12);

  // The shift moves every block; Jordan chains stay intact.
  Vector q(1);
  q << 1e-6;
  const Matrix at = perturb(s, q);
  const Matrix shifted = at - (1.0 + q(0)) * Matrix::Identity(6, 6);
  CHECK(max_abs(shifted * shifted) < 1e-12);
  CHECK(spectrum_distance(eigenvalues(at), std::vector<Complex>(6, Complex(1.0 + q(0), 0.0))) <
        1e-7);

  Eigen::JacobiSVD<ComplexMatrix> svd(s.p);
  const double kappa = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
  CHECK(max_abs(at - d.a) <= kappa * std::abs(q(0)) * (1.0 + 1e-6));
}

TEST_CASE("spectrum shift on random diagonalizable matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 4;
    const Matrix a = testing::random_matrix(rng, n, n);
    const EigenStructure s = eigen_structure(a);
    const PerturbationSpec spec = sample_q(s.dimension(), 1e-3, 100 + trial);
    const Matrix at = perturb(s, spec.q);
    std::vector<Complex> expected;
    for (const auto& b : s.blocks) {
      const Complex shift(spec.q(s.cluster_group[b.cluster]), 0.0);
      for (int k = 0; k < b.size; ++k) expected.push_back(b.eigenvalue + shift);
    }
    CAPTURE(trial);
    CHECK(spectrum_distance(eigenvalues(at), expected) < 1e-7);
  }
}

TEST_CASE("conjugate pairs share a shift and stay real") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = -1.0;
  a(1, 0) = 1.0;
  a(2, 2) = 2.0;
  const EigenStructure s = eigen_structure(a);
  CHECK(s.dimension() == 2);
  CHECK(s.distinct_eigenvalues.size() == 3);
  CHECK(group_of(s, 0.0, 1.0) == group_of(s, 0.0, -1.0));
  Vector q = Vector::Zero(2);
  q(group_of(s, 0.0, 1.0)) = 0.25;
  q(group_of(s, 2.0)) = -0.5;
  const Matrix at = perturb(s, q);
  const std::vector<Complex> expected{{0.25, 1.0}, {0.25, -1.0}, {1.5, 0.0}};
  CHECK(spectrum_distance(eigenvalues(at), expected) < 1e-7);
  // Rotation part becomes 0.25 I + rotation.
  CHECK(std::abs(at(0, 0) - 0.25) < 1e-12);
  CHECK(std::abs(at(1, 0) - 1.0) < 1e-12);
}

TEST_CASE("sampling") {
  const PerturbationSpec a = sample_q(3, 1e-6, 7);
  const PerturbationSpec b = sample_q(3, 1e-6, 7);
  CHECK(a.q == b.q);
  CHECK(a.q.size() == 3);
  CHECK(a.q.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(sample_q(3, 1e-6, 8).q != a.q);
  CHECK(sample_q(4, 0.0, 1).q == Vector::Zero(4));

  const int d = 10000;
  const double eps = 1e-6;
  const Vector big = sample_q(d, eps, 2026).q;
  CHECK(big.cwiseAbs().maxCoeff() <= eps);
  CHECK(std::abs(big.mean()) <= 3.0 * eps / std::sqrt(12.0 * d));
  // Uniform on [-e, e] has variance e^2 / 3.
  const double var = big.squaredNorm() / d;
  CHECK(var == doctest::Approx(eps * eps / 3.0).epsilon(0.05));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(eigen_structure(Matrix::Zero(2, 3)), ValidationError);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(eigen_structure(nan), ValidationError);
  const EigenStructure s = eigen_structure(Matrix::Identity(2, 2));
  CHECK(s.dimension() == 1);
  CHECK_THROWS_AS(perturb(s, Vector::Zero(2)), ValidationError);
  CHECK_THROWS_AS(sample_q(2, -1.0, 0), ValidationError);

  EigenStructure broken = s;
  broken.blocks.pop_back();
  CHECK_THROWS_AS(broken.validate(), ValidationError);
}
