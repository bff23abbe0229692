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
#include <vector>

#include "lcvx/certify.hpp"
#include "lcvx/errors.hpp"
#include "lcvx/program.hpp"

namespace lcvx {

/// Probe classes of the ternary search. `unusable` marks a probe whose solve
/// did not reach optimality.
enum class Classification { too_low, eta_zero, feasible, unusable };

std::string to_string(Classification c);

struct ProbeOutcome {
  double rho_eff = 0.0;
  Classification classification = Classification::unusable;
  double cost = 0.0;
  Solution solution;
  CertificationReport report;
};

struct SearchSettings {
  SolverSettings solver;
  double eps_eta = kDefaultEpsEta;
  /// Absolute violation tolerance; defaults to 1e-4 * rho_max when unset.
  std::optional<double> violation_tol;
  /// Run the two probes of an iteration (and sweep points) concurrently.
  bool parallel = true;

  double tolerance_for(const TrajectoryProblem& p) const {
    return violation_tol.value_or(default_violation_tol(p.rho_max));
  }
};

struct SearchIteration {
  double rho_low = 0.0;
  double rho_high = 0.0;
  double rho_1 = 0.0;
  double rho_2 = 0.0;
  Classification class_1 = Classification::unusable;
  Classification class_2 = Classification::unusable;
  double cost_1 = 0.0;
  double cost_2 = 0.0;
};

struct SearchTrace {
  std::vector<SearchIteration> iterations;
  int solver_calls = 0;
  double final_rho = 0.0;
  /// Largest probe seen too_low and smallest probe seen eta_zero; these bound
  /// the feasible interval from the outside. Empty if never observed.
  std::optional<double> rho_min_minus;
  std::optional<double> rho_min_plus;
};

struct SearchResult {
  ProbeOutcome final_probe;
  SearchTrace trace;
};

class SearchError : public Error {
 public:
  SearchError(const std::string& what, SearchTrace trace)
      : Error(what), trace_(std::move(trace)) {}
  const SearchTrace& trace() const { return trace_; }

 private:
  SearchTrace trace_;
};

/// Classifies a solved probe: eta_zero when the terminal multiplier vanishes,
/// too_low when it does not and more than nx + 1 vertices fall below rho_min,
/// feasible otherwise. Non-optimal solves are `unusable`.
ProbeOutcome classify_probe(const TrajectoryProblem& problem_at_rho,
                            const Solution& solution,
                            const SearchSettings& settings);

/// Solves the rate-constrained problem at `rho_eff` and classifies it,
/// retrying once with relaxed tolerances if the first solve fails.
/// `solver_calls` is incremented per solve.
ProbeOutcome run_probe(const TrajectoryProblem& base, double rho_eff,
                       const SearchSettings& settings, int& solver_calls);

/// Ternary search over the effective lower bound with classification-driven
/// bracket moves, followed by a final solve at the bracket midpoint.
/// Throws SearchError (trace attached) when a probe stays unusable.
SearchResult ternary_search(const TrajectoryProblem& base, double eps,
                            const SearchSettings& settings = {});

/// One classified probe per grid value; per-point failures are recorded as
/// `unusable` and the sweep continues.
std::vector<ProbeOutcome> sweep(const TrajectoryProblem& base,
                                const std::vector<double>& grid,
                                const SearchSettings& settings = {});

/// Bracket estimate from a sweep: midpoints of the last too_low -> other and
/// the first feasible -> eta_zero transitions.
struct BracketEstimate {
  std::optional<double> rho_min_minus;
  std::optional<double> rho_min_plus;
};

BracketEstimate estimate_bracket(const std::vector<ProbeOutcome>& sweep);

}  // namespace lcvx
