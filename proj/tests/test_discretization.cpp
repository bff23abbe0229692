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

#include <Eigen/LU>

#include "lcvx/discretization.hpp"
#include "lcvx/errors.hpp"
#include "support.hpp"

using namespace lcvx;
using lcvx::testing::double_integrator;
using lcvx::testing::expm_oracle;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Hold integrals from one exponential of [[A, B, 0], [0, 0, I], [0, 0, 0]]:
// block (0,1) is int_0^dt e^{A(dt-s)} B ds, block (0,2) is the same with a
// factor s in the integrand.
struct HoldOracle {
  Matrix a, b0, b1, zoh_b;
};

HoldOracle hold_oracle(const ContinuousSystem& sys, double dt) {
  const int nx = sys.nx(), nu = sys.nu();
  Matrix m = Matrix::Zero(nx + 2 * nu, nx + 2 * nu);
  m.topLeftCorner(nx, nx) = sys.a_c;
  m.block(0, nx, nx, nu) = sys.b_c;
  m.block(nx, nx + nu, nu, nu).setIdentity();
  const Matrix e = expm_oracle(m * dt);
  const Matrix phi1 = e.block(0, nx, nx, nu);
  const Matrix phi2 = e.block(0, nx + nu, nx, nu) / dt;
  return {e.topLeftCorner(nx, nx), phi1 - phi2, phi2, phi1};
}

}  // namespace

TEST_CASE("double integrator FOH matrices match closed forms") {
  const DiscreteSystem d = integrate_stm(double_integrator(), 4.0, 16);
  const double dt = 0.25;
  CHECK(d.dt == doctest::Approx(dt));
  CHECK(d.n_segments * d.dt == doctest::Approx(4.0));

  Matrix a = Matrix::Identity(6, 6);
  a.topRightCorner(3, 3) = dt * Matrix::Identity(3, 3);
  Matrix b0(6, 3), b1(6, 3);
  b0 << dt * dt / 3.0 * Matrix::Identity(3, 3), dt / 2.0 * Matrix::Identity(3, 3);
  b1 << dt * dt / 6.0 * Matrix::Identity(3, 3), dt / 2.0 * Matrix::Identity(3, 3);
  CHECK(max_abs(d.a - a) < 1e-9);
  CHECK(max_abs(d.b0 - b0) < 1e-9);
  CHECK(max_abs(d.b1 - b1) < 1e-9);
  CHECK(max_abs(d.a - expm_oracle(double_integrator().a_c * dt)) < 1e-9);
}

TEST_CASE("double integrator ZOH pair") {
  const ZohSystem z = discretize_zoh(double_integrator(), 4.0, 16);
  const double dt = 0.25;
  Matrix b(6, 3);
  b << dt * dt / 2.0 * Matrix::Identity(3, 3), dt * Matrix::Identity(3, 3);
  CHECK(max_abs(z.b - b) < 1e-9);
  CHECK(z.n_segments == 16);
}

TEST_CASE("zero system discretizes to identity") {
  ContinuousSystem sys{Matrix::Zero(3, 3), Matrix::Zero(3, 2)};
  const DiscreteSystem d = integrate_stm(sys, 2.0, 4);
  CHECK(max_abs(d.a - Matrix::Identity(3, 3)) == 0.0);
  CHECK(max_abs(d.b0) == 0.0);
  CHECK(max_abs(d.b1) == 0.0);
  CHECK(max_abs(discretize_zoh(sys, 2.0, 4).b) == 0.0);

  ContinuousSystem integ{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
  const ZohSystem z = discretize_zoh(integ, 2.0, 4);
  CHECK(max_abs(z.a - Matrix::Identity(2, 2)) < 1e-15);
  CHECK(max_abs(z.b - 0.5 * Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("random systems agree with the exponential oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = 2 + trial % 5;
    const int nu = 1 + trial % 3;
    ContinuousSystem sys{testing::random_matrix(rng, nx, nx, 1.5),
                         testing::random_matrix(rng, nx, nu)};
    const double t_f = 3.0;
    const int n = 10;
    const DiscreteSystem d = integrate_stm(sys, t_f, n);
    const HoldOracle o = hold_oracle(sys, t_f / n);
    CAPTURE(trial);
    CHECK(max_abs(d.a - o.a) < 1e-9);
    CHECK(max_abs(d.b0 - o.b0) < 1e-9);
    CHECK(max_abs(d.b1 - o.b1) < 1e-9);
    const ZohSystem z = discretize_zoh(sys, t_f, n);
    CHECK(max_abs(z.a - o.a) < 1e-9);
    CHECK(max_abs(z.b - o.zoh_b) < 1e-9);
    // A constant control through either hold gives the same response.
    CHECK(max_abs(d.b0 + d.b1 - z.b) < 1e-9);
  }
}

TEST_CASE("substep refinement converges") {
  const ContinuousSystem sys = double_integrator();
  const DiscreteSystem coarse = integrate_stm(sys, 4.0, 16, 64);
  const DiscreteSystem fine = integrate_stm(sys, 4.0, 16, 128);
  CHECK(max_abs(coarse.a - fine.a) < 1e-9);
  CHECK(max_abs(coarse.b0 - fine.b0) < 1e-9);
  CHECK(max_abs(coarse.b1 - fine.b1) < 1e-9);

  std::mt19937_64 rng(5);
  ContinuousSystem r{testing::random_matrix(rng, 4, 4), testing::random_matrix(rng, 4, 2)};
  const DiscreteSystem rc = integrate_stm(r, 2.0, 8, 64);
  const DiscreteSystem rf = integrate_stm(r, 2.0, 8, 128);
  CHECK(max_abs(rc.b0 - rf.b0) < 1e-9);
  CHECK(max_abs(rc.b1 - rf.b1) < 1e-9);
}

TEST_CASE("controllability rank") {
  const DiscreteSystem d = integrate_stm(double_integrator(), 4.0, 16);
  const ControllabilityResult r = check_controllability(d);
  CHECK(r.rank == 6);
  CHECK(r.controllable);
  const Matrix m = d.b0 + d.a * d.b1;
  Matrix expected(6, 3);
  expected << 0.0625 * Matrix::Identity(3, 3), 0.25 * Matrix::Identity(3, 3);
  CHECK(max_abs(m - expected) < 1e-9);

  DiscreteSystem stuck{Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Zero(2, 1),
                       1.0, 1, 1.0};
  CHECK(check_controllability(stuck).rank == 0);
  CHECK_FALSE(check_controllability(stuck).controllable);

  DiscreteSystem scalar{Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                        1.0, 1, 1.0};
  CHECK(check_controllability(scalar).rank == 1);
  CHECK(check_controllability(scalar).controllable);
}

TEST_CASE("controllability agrees with a full-pivot LU rank") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = 4;
    DiscreteSystem d{testing::random_matrix(rng, nx, nx), testing::random_matrix(rng, nx, 1),
                     testing::random_matrix(rng, nx, 1), 1.0, 1, 1.0};
    if (trial % 2 == 0) {
      // Block-diagonal A with input into one block only: rank 2.
      d.a.topRightCorner(2, 2).setZero();
      d.a.bottomLeftCorner(2, 2).setZero();
      d.b0.bottomRows(2).setZero();
      d.b1.bottomRows(2).setZero();
    }
    const Matrix m = d.b0 + d.a * d.b1;
    Matrix c(nx, nx);
    Matrix block = m;
    for (int k = 0; k < nx; ++k) {
      c.col(k) = block;
      block = d.a * block;
    }
    Eigen::FullPivLU<Matrix> lu(c);
    CAPTURE(trial);
    CHECK(check_controllability(d).rank == lu.rank());
  }
}

TEST_CASE("rollout") {
  SUBCASE("zero control under identity dynamics") {
    DiscreteSystem d{Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(2, 1),
                     0.5, 3, 1.5};
    Vector x0(2);
    x0 << 1.0, -2.0;
    const VectorSequence x = rollout(d, x0, VectorSequence(4, Vector::Zero(1)));
    REQUIRE(x.size() == 4);
    for (const auto& xi : x) CHECK(max_abs(xi - x0) == 0.0);
  }
  SUBCASE("double integrator under constant thrust") {
    const DiscreteSystem d = integrate_stm(double_integrator(), 4.0, 16);
    Vector u(3);
    u << 1.0, 0.0, 0.0;
    const VectorSequence x = rollout(d, Vector::Zero(6), VectorSequence(17, u));
    CHECK(x.back()(3) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(x.back()(0) == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("scalar arithmetic") {
    DiscreteSystem d{Matrix::Ones(1, 1), 0.5 * Matrix::Ones(1, 1), 0.5 * Matrix::Ones(1, 1),
                     1.0, 1, 1.0};
    const VectorSequence x =
        rollout(d, Vector::Zero(1), VectorSequence(2, Vector::Ones(1)));
    CHECK(x[1](0) == doctest::Approx(1.0));
  }
  SUBCASE("length mismatch") {
    const DiscreteSystem d = integrate_stm(double_integrator(), 4.0, 16);
    CHECK_THROWS_AS(rollout(d, Vector::Zero(6), VectorSequence(16, Vector::Zero(3))),
                    ValidationError);
    const ZohSystem z = discretize_zoh(double_integrator(), 4.0, 16);
    CHECK_THROWS_AS(rollout(z, Vector::Zero(6), VectorSequence(17, Vector::Zero(3))),
                    ValidationError);
    CHECK(rollout(z, Vector::Zero(6), VectorSequence(16, Vector::Zero(3))).size() == 17);
  }
}

TEST_CASE("input validation") {
  ContinuousSystem bad{Matrix::Zero(2, 3), Matrix::Zero(2, 1)};
  CHECK_THROWS_AS(integrate_stm(bad, 1.0, 1), ValidationError);
  ContinuousSystem rows{Matrix::Zero(2, 2), Matrix::Zero(3, 1)};
  CHECK_THROWS_AS(integrate_stm(rows, 1.0, 1), ValidationError);
  ContinuousSystem nan{Matrix::Zero(2, 2), Matrix::Zero(2, 1)};
  nan.a_c(0, 1) = std::nan("");
  CHECK_THROWS_AS(integrate_stm(nan, 1.0, 1), ValidationError);
  const ContinuousSystem ok = double_integrator();
  CHECK_THROWS_AS(integrate_stm(ok, 0.0, 4), ValidationError);
  CHECK_THROWS_AS(integrate_stm(ok, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(integrate_stm(ok, 1.0, 4, 0), ValidationError);
  CHECK_THROWS_AS(discretize_zoh(ok, -1.0, 4), ValidationError);

  DiscreteSystem d = integrate_stm(ok, 4.0, 16);
  CHECK_NOTHROW(d.validate());
  d.t_f = 4.1;
  CHECK_THROWS_AS(d.validate(), ValidationError);
}
