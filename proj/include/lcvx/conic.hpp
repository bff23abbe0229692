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

#pragma once

#include <string>
#include <vector>

#include "lcvx/types.hpp"

namespace lcvx::conic {

/// Cone K = R_+^nonneg x Q^soc[0] x Q^soc[1] x ...  (slack entries in that
/// order). Q^k = { (t, v) in R x R^(k-1) : ||v|| <= t }.
struct ConeDims {
  int nonneg = 0;
  std::vector<int> soc;

  int size() const;
  /// Barrier degree: one per orthant entry and one per second-order cone.
  int degree() const;
};

/// Standard-form second-order cone program
///
///   minimize    c' x
///   subject to  A x = b
///               G x + s = h,   s in K.
///
/// Duals follow the Lagrangian c'x + y'(Ax - b) + z'(Gx - h), so an optimal
/// point satisfies c + A'y + G'z = 0 with z in K.
struct ConicProgram {
  Vector c;
  SparseMatrix a;
  Vector b;
  SparseMatrix g;
  Vector h;
  ConeDims cones;

  int num_variables() const { return static_cast<int>(c.size()); }
  int num_equalities() const { return static_cast<int>(b.size()); }
  int num_inequalities() const { return static_cast<int>(h.size()); }

  void validate() const;
};

enum class Status {
  optimal,
  primal_infeasible,
  dual_infeasible,
  max_iterations,
  numerical_failure,
};

std::string to_string(Status status);

struct Settings {
  double feas_tol = 1e-8;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iterations = 100;
  double static_regularization = 1e-10;
  int refinement_steps = 3;
  double step_fraction = 0.99;
};

struct Result {
  Status status = Status::numerical_failure;
  Vector x, y, z, s;
  double primal_cost = 0.0;
  double dual_cost = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

/// Primal-dual interior point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
/// Newton systems are solved by a sparse LDL' factorization of the
/// regularized quasi-definite KKT matrix plus iterative refinement.
///
/// On `optimal` the iterates are rescaled by 1/tau; on `primal_infeasible`
/// (y, z) is a normalized Farkas certificate, on `dual_infeasible` (x, s) is.
Result solve(const ConicProgram& program, const Settings& settings = {});

// Cone helpers, exposed for testing.

/// Largest alpha in [0, inf) with x + alpha d in K (infinity if unbounded).
double max_step(const ConeDims& cones, const Vector& x, const Vector& d);

/// Minimum "eigenvalue" over K: x_i for orthant entries, t - ||v|| for cones.
double min_eigenvalue(const ConeDims& cones, const Vector& x);

/// Nesterov-Todd scaling for a pair (s, z) in int K: symmetric W with
/// W z = W^-1 s = lambda.
class NtScaling {
 public:
  NtScaling(const ConeDims& cones, const Vector& s, const Vector& z);

  Vector apply(const Vector& v) const;          // W v
  Vector apply_inverse(const Vector& v) const;  // W^-1 v
  const Vector& lambda() const { return lambda_; }
  /// Dense W^2 block for cone k (k indexes soc cones).
  Matrix soc_block_squared(int k) const;
  double nonneg_squared(int i) const { return d_(i) * d_(i); }

 private:
  ConeDims cones_;
  Vector d_;                    // orthant scaling sqrt(s/z)
  std::vector<double> eta_;     // cone scale factors
  std::vector<Vector> wbar_;    // normalized scaling points
  Vector lambda_;
};

/// Jordan product u o v on K.
Vector jordan_product(const ConeDims& cones, const Vector& u, const Vector& v);
/// Solves lambda o x = d for x.
Vector jordan_divide(const ConeDims& cones, const Vector& lambda,
                     const Vector& d);

}  // namespace lcvx::conic
