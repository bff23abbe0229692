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

#include "lcvx/conic.hpp"
#include "lcvx/errors.hpp"
#include "support.hpp"

using namespace lcvx;
using namespace lcvx::conic;

namespace {

SparseMatrix sparse(const Matrix& m) { return m.sparseView(); }

ConicProgram make(const Vector& c, const Matrix& a, const Vector& b, const Matrix& g,
                  const Vector& h, ConeDims cones) {
  ConicProgram p;
  p.c = c;
  p.a = sparse(a);
  p.b = b;
  p.g = sparse(g);
  p.h = h;
  p.cones = std::move(cones);
  return p;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Projects onto a random point of int K by shifting with the identity.
Vector interior(std::mt19937_64& rng, const ConeDims& cones) {
  Vector v = testing::random_vector(rng, cones.size());
  const double lo = min_eigenvalue(cones, v);
  int offset = cones.nonneg;
  for (int i = 0; i < cones.nonneg; ++i) v(i) += 1.0 - std::min(lo, 0.0);
  for (int d : cones.soc) {
    v(offset) += 1.0 - std::min(lo, 0.0);
    offset += d;
  }
  return v;
}

}  // namespace

TEST_CASE("unit disk maximization") {
  // min -x1 - x2  s.t. ||(x1, x2)|| <= 1
  Matrix g(3, 2);
  g << 0, 0, -1, 0, 0, -1;
  const ConicProgram p =
      make(vec({-1, -1}), Matrix(0, 2), Vector(0), g, vec({1, 0, 0}), {0, {3}});
  const Result r = solve(p);
  REQUIRE(r.status == Status::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(r.x(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(r.primal_cost == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-7));
  // Stationarity c + G'z = 0 pins z = (sqrt 2, -1, -1).
  CHECK(r.z(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(r.z(1) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(r.z(2) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("linear program with an equality") {
  // min x1 + 2 x2  s.t. x1 + x2 = 1, x >= 0
  Matrix a(1, 2);
  a << 1, 1;
  const ConicProgram p = make(vec({1, 2}), a, vec({1}), -Matrix::Identity(2, 2),
                              Vector::Zero(2), {2, {}});
  const Result r = solve(p);
  REQUIRE(r.status == Status::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(r.x(1)) < 1e-7);
  CHECK(r.y(0) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(r.z(1) == doctest::Approx(1.0).epsilon(1e-6));
  const Vector stat = p.c + Matrix(p.a).transpose() * r.y + Matrix(p.g).transpose() * r.z;
  CHECK(stat.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("infeasible and unbounded programs") {
  Matrix g(2, 1);
  g << -1, 1;
  const ConicProgram infeasible =
      make(vec({1}), Matrix(0, 1), Vector(0), g, vec({-1, -1}), {2, {}});
  CHECK(solve(infeasible).status == Status::primal_infeasible);

  const ConicProgram unbounded =
      make(vec({-1}), Matrix(0, 1), Vector(0), -Matrix::Identity(1, 1), Vector::Zero(1),
           {1, {}});
  CHECK(solve(unbounded).status == Status::dual_infeasible);
}

TEST_CASE("random feasible SOCPs satisfy KKT") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 6;
    ConeDims cones{3, {4, 3}};
    const int m = cones.size();
    const Matrix g = testing::random_matrix(rng, m, n);
    const Matrix a = testing::random_matrix(rng, 2, n);
    const Vector x0 = testing::random_vector(rng, n);
    // h chosen so x0 is strictly feasible; c from a dual interior point so
    // the program is bounded.
    const Vector h = g * x0 + interior(rng, cones);
    const Vector z0 = interior(rng, cones);
    const Vector y0 = testing::random_vector(rng, 2);
    const Vector c = -g.transpose() * z0 - a.transpose() * y0;
    const ConicProgram p = make(c, a, a * x0, g, h, cones);
    const Result r = solve(p);
    CAPTURE(trial);
    REQUIRE(r.status == Status::optimal);
    CHECK((a * r.x - p.b).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((g * r.x + r.s - h).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((c + a.transpose() * r.y + g.transpose() * r.z).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(min_eigenvalue(cones, r.s) > -1e-9);
    CHECK(min_eigenvalue(cones, r.z) > -1e-9);
    CHECK(std::abs(r.s.dot(r.z)) < 1e-6);
    CHECK(r.primal_cost == doctest::Approx(r.dual_cost).epsilon(1e-6));
  }
}

TEST_CASE("cone helpers") {
  std::mt19937_64 rng(4);
  const ConeDims cones{2, {3, 4}};
  const Vector e = [&] {
    Vector v = Vector::Zero(cones.size());
    v.head(2).setOnes();
    v(2) = 1.0;
    v(5) = 1.0;
    return v;
  }();
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = interior(rng, cones);
    const Vector d = testing::random_vector(rng, cones.size(), 3.0);
    CHECK((jordan_product(cones, e, x) - x).cwiseAbs().maxCoeff() < 1e-12);
    const Vector lam = interior(rng, cones);
    const Vector back = jordan_divide(cones, lam, jordan_product(cones, lam, x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);

    // Step length against bisection on the membership test.
    const double alpha = max_step(cones, x, d);
    if (std::isfinite(alpha)) {
      CHECK(min_eigenvalue(cones, x + 0.999 * alpha * d) >= -1e-12);
      CHECK(min_eigenvalue(cones, x + 1.001 * alpha * d) < 0.0);
    } else {
      CHECK(min_eigenvalue(cones, x + 1e6 * d) >= -1e-6);
    }

    const Vector s = interior(rng, cones);
    const Vector z = interior(rng, cones);
    const NtScaling w(cones, s, z);
    CHECK((w.apply(z) - w.lambda()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((w.apply_inverse(s) - w.lambda()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((w.apply_inverse(w.apply(d)) - d).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("program validation") {
  ConicProgram p = make(vec({1, 1}), Matrix(0, 2), Vector(0), -Matrix::Identity(2, 2),
                        Vector::Zero(2), {2, {}});
  CHECK_NOTHROW(p.validate());
  p.cones.nonneg = 3;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.cones.nonneg = 2;
  p.h = Vector::Zero(3);
  CHECK_THROWS_AS(p.validate(), ValidationError);
}
