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

#include <optional>
#include <string>

#include "lcvx/conic.hpp"
#include "lcvx/discretization.hpp"
#include "lcvx/types.hpp"

namespace lcvx {

enum class RunningCost { linear, quadratic };

std::string to_string(RunningCost kind);

/// Objective  w * ||x[N] - target|| + sum_i q_i * l(sigma_i)  with l(s) = s
/// (linear) or s^2 (quadratic).
struct CostSpec {
  double terminal_weight = 0.0;
  Vector terminal_target;
  RunningCost running = RunningCost::quadratic;
  Vector quadrature_weights;

  void validate(int nx, int n_vertices) const;
};

/// dt/2 at both ends, dt in the interior: N+1 weights.
Vector trapezoid_weights(int n_segments, double dt);

/// Affine terminal map G(x) = matrix * x + offset. Zero rows means no terminal
/// equality.
struct TerminalMap {
  Matrix matrix;
  Vector offset;

  int rows() const { return static_cast<int>(matrix.rows()); }
  Vector evaluate(const Vector& x) const { return matrix * x + offset; }
};

struct TrajectoryProblem {
  DiscreteSystem disc;
  CostSpec cost;
  double rho_min = 0.0;
  double rho_eff = 0.0;
  double rho_max = 0.0;
  std::optional<double> rate_bound;
  Vector x_init;
  TerminalMap terminal;

  int nx() const { return disc.nx(); }
  int nu() const { return disc.nu(); }
  int n_segments() const { return disc.n_segments; }

  void validate() const;
};

/// Copy of `problem` at effective lower bound `rho_eff`. With `rate` set the
/// rate bound is 2 sqrt(rho_eff^2 - rho_min^2); otherwise it is cleared.
TrajectoryProblem with_rho_eff(const TrajectoryProblem& problem, double rho_eff,
                               bool rate = true);

enum class Hold { first_order, zero_order };

/// Where each block of the trajectory lives inside the conic program.
struct ProgramLayout {
  Hold hold = Hold::first_order;
  int nx = 0;
  int nu = 0;
  int n_segments = 0;
  int n_controls = 0;  // N+1 for FOH, N for ZOH

  int x_offset = 0;
  int u_offset = 0;
  int sigma_offset = 0;
  int terminal_epigraph = -1;   // variable index, -1 when absent
  int running_epigraph = -1;    // variable index, -1 when absent

  int dynamics_row = 0;
  int initial_row = 0;
  int terminal_row = 0;
  int terminal_rows = 0;
  int rate_equality_row = -1;   // rows forcing u[i+1] == u[i] when delta == 0

  int norm_cones = 0;
  int rate_cones = 0;
  int rate_equalities = 0;

  std::string running_cost_encoding;

  int primary_variables() const {
    return (n_segments + 1) * nx + n_controls * (nu + 1);
  }
  int dynamics_equalities() const { return n_segments * nx; }
};

/// A trajectory problem lowered to a conic program.
struct ConicFormulation {
  conic::ConicProgram program;
  ProgramLayout layout;
  double terminal_weight = 0.0;
};

/// Epigraph SOCP: dynamics, x[0] = x_init and G(x[N]) = 0 as equalities;
/// sigma box as orthant rows; ||u_i|| <= sigma_i, the rate bound and the
/// terminal-norm epigraph as second-order cones; a quadratic running cost
/// as one rotated cone  sum q_i sigma_i^2 <= t.
ConicFormulation build_program(const TrajectoryProblem& problem);

/// Piecewise-constant counterpart: x[i+1] = a x[i] + b u[i] with N controls,
/// rectangle weights dt and no rate constraint.
ConicFormulation build_zoh_program(const TrajectoryProblem& problem,
                                   const ZohSystem& zoh);

enum class SolveStatus { optimal, infeasible, numerical_failure };

std::string to_string(SolveStatus status);

struct SolverSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 100;
};

struct Solution {
  SolveStatus status = SolveStatus::numerical_failure;
  VectorSequence x;
  VectorSequence u;
  Vector sigma;
  VectorSequence eta;  // one multiplier per dynamics block
  Vector mu1;
  Vector mu2;
  double cost = 0.0;

  conic::Status solver_status = conic::Status::numerical_failure;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;

  bool optimal() const { return status == SolveStatus::optimal; }
  double eta_norm() const;
};

/// Solves and unpacks primal and dual blocks. The dynamics multipliers come
/// straight from the solver: rows are written as -x[i+1] + A x[i] + ..., which
/// matches the Lagrangian convention under which eta[i-1] = A' eta[i].
Solution solve(const ConicFormulation& formulation,
               const SolverSettings& settings = {});

Solution solve(const TrajectoryProblem& problem,
               const SolverSettings& settings = {});

/// Objective value recomputed from the primal trajectory.
double evaluate_cost(const CostSpec& cost, const Solution& solution);

struct SlaterProbe {
  SolveStatus status = SolveStatus::numerical_failure;
  double margin = 0.0;  // max over feasible trajectories of min_i (rho_max - ||u_i||)
  bool strictly_feasible = false;
};

struct AssumptionReport {
  int equality_rows = 0;
  int jacobian_rank = 0;
  bool full_row_rank = false;
  ControllabilityResult controllability;
  SlaterProbe slater;
  std::string non_degenerate_terminal = "not machine-checkable";
};

AssumptionReport assumption_diagnostics(const TrajectoryProblem& problem,
                                        const SolverSettings& settings = {});

}  // namespace lcvx
