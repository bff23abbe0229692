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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lcvx/io.hpp"
#include "lcvx/program.hpp"
#include "lcvx/search.hpp"

namespace lcvx {

/// Six-state double integrator, x = (p, v), u = acceleration, flown from
/// (0,0,0,0,0,10) toward (10,10,10,0,0,0) over t in [0,4] with N = 16 and
/// 4 <= ||u|| <= 6. The target enters only through the terminal cost.
ProblemConfig double_integrator_config();
TrajectoryProblem double_integrator_problem();

struct BenchTarget {
  std::string name;
  std::string reference;  // published value the target is compared against
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  /// "abs": |value - expected| <= tolerance, "max": value <= expected.
  std::string comparison = "abs";
  bool pass = false;
};

struct BenchOptions {
  double eps = 1e-3;
  double eps_a = kDefaultEpsA;
  std::uint64_t seed = 1;
  bool perturb = true;
  double sweep_step = 0.025;
  /// Bisection steps refining each classification transition of the sweep.
  int refine_steps = 6;
  SearchSettings settings;
};

struct BenchReport {
  double delta_at_4_5 = 0.0;
  double max_control_jump_unconstrained = 0.0;
  std::optional<double> rho_minus_est;
  std::optional<double> rho_plus_est;
  double converged_rho = 0.0;
  int solver_calls = 0;
  int vertex_violations = 0;
  int edge_violations = 0;
  double final_cost = 0.0;
  double max_recursion_residual = 0.0;
  double perturbed_cost_gap = 0.0;
  double rollout_defect = 0.0;
  std::uint64_t seed = 0;
  double eps_a = 0.0;
  Vector q;
  std::vector<BenchTarget> targets;
  std::vector<ProbeOutcome> sweep;
  SearchTrace trace;
  Solution final_solution;
  CertificationReport final_report;

  bool all_pass() const;
};

/// max_i ||u[i+1] - u[i]||.
double max_control_jump(const Solution& solution);
/// max_i ||eta[i-1] - a' eta[i]||.
double recursion_residual(const Solution& solution, const Matrix& a);

/// Problem with its discrete A replaced by the eigenvalue-shifted matrix.
/// `q_out` receives the sampled shift.
TrajectoryProblem perturbed_problem(const TrajectoryProblem& base, double eps_a,
                                    std::uint64_t seed, Vector* q_out = nullptr);

/// Runs the reference experiment: unconstrained-rate solve at 4.5, a fine
/// sweep with refined transitions, the ternary search with eps and a final
/// certification. Writes trajectory.csv, controls.csv, sweep.csv, edges.csv
/// and report.json into `out_dir` when it is non-empty.
BenchReport reproduce_paper(const std::filesystem::path& out_dir,
                            const BenchOptions& options = {});

Json to_json(const BenchReport& report, bool with_timestamp = true);

struct ZohComparison {
  Solution zoh;
  Solution foh;
  double zoh_position_error = 0.0;
  double foh_position_error = 0.0;
  /// cost / terminal weight: the running cost is non-negative, so this bounds
  /// the terminal distance of each run.
  double zoh_slack = 0.0;
  double foh_slack = 0.0;
};

/// Single ZOH solve at rho_min without rate constraint beside the FOH
/// search result. Writes zoh_trajectory.csv, zoh_controls.csv,
/// foh_trajectory.csv and foh_controls.csv into `out_dir` when non-empty.
ZohComparison compare_zoh(const std::filesystem::path& out_dir,
                          const BenchOptions& options = {});

}  // namespace lcvx
