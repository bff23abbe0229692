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

#include "lcvx/search.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <thread>

namespace lcvx {
namespace {

SolverSettings relaxed(const SolverSettings& s) {
  SolverSettings out = s;
  out.feas_tol *= 100.0;
  out.gap_tol *= 100.0;
  out.max_iterations *= 2;
  return out;
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::too_low:
      return "too_low";
    case Classification::eta_zero:
      return "eta_zero";
    case Classification::feasible:
      return "feasible";
    case Classification::unusable:
      return "unusable";
  }
  return "unknown";
}

ProbeOutcome classify_probe(const TrajectoryProblem& problem_at_rho,
                            const Solution& solution,
                            const SearchSettings& settings) {
  ProbeOutcome out;
  out.rho_eff = problem_at_rho.rho_eff;
  out.solution = solution;
  if (!solution.optimal()) return out;

  DualCheckOptions dual;
  dual.eps_eta = settings.eps_eta;
  dual.terminal_scale = problem_at_rho.cost.terminal_weight;
  out.report = certify(solution, problem_at_rho.disc, problem_at_rho.rho_min,
                       problem_at_rho.rho_max,
                       settings.tolerance_for(problem_at_rho), dual);
  out.cost = solution.cost;
  if (out.report.eta_n_zero) {
    out.classification = Classification::eta_zero;
  } else if (out.report.lower_vertex_violations() > problem_at_rho.nx() + 1) {
    out.classification = Classification::too_low;
  } else {
    out.classification = Classification::feasible;
  }
  return out;
}

ProbeOutcome run_probe(const TrajectoryProblem& base, double rho_eff,
                       const SearchSettings& settings, int& solver_calls) {
  const TrajectoryProblem problem = with_rho_eff(base, rho_eff, true);
  const ConicFormulation formulation = build_program(problem);
  Solution sol = solve(formulation, settings.solver);
  ++solver_calls;
  if (sol.status == SolveStatus::numerical_failure) {
    sol = solve(formulation, relaxed(settings.solver));
    ++solver_calls;
  }
  return classify_probe(problem, sol, settings);
}

SearchResult ternary_search(const TrajectoryProblem& base, double eps,
                            const SearchSettings& settings) {
  base.validate();
  if (!(eps > 0.0)) throw ValidationError("search tolerance eps must be > 0");

  SearchTrace trace;
  double low = base.rho_min;
  double high = base.rho_max;

  auto note = [&](const ProbeOutcome& p) {
    if (p.classification == Classification::too_low) {
      trace.rho_min_minus = std::max(trace.rho_min_minus.value_or(p.rho_eff), p.rho_eff);
    } else if (p.classification == Classification::eta_zero) {
      trace.rho_min_plus = std::min(trace.rho_min_plus.value_or(p.rho_eff), p.rho_eff);
    }
  };

  while (high - low > eps) {
    const double rho_1 = low + (high - low) / 3.0;
    const double rho_2 = high - (high - low) / 3.0;
    int calls_1 = 0;
    int calls_2 = 0;
    ProbeOutcome p1, p2;
    if (settings.parallel) {
      auto f2 = std::async(std::launch::async, [&] {
        return run_probe(base, rho_2, settings, calls_2);
      });
      p1 = run_probe(base, rho_1, settings, calls_1);
      p2 = f2.get();
    } else {
      p1 = run_probe(base, rho_1, settings, calls_1);
      p2 = run_probe(base, rho_2, settings, calls_2);
    }
    trace.solver_calls += calls_1 + calls_2;
    trace.iterations.push_back({low, high, rho_1, rho_2, p1.classification,
                                p2.classification, p1.cost, p2.cost});
    note(p1);
    note(p2);

    if (p1.classification == Classification::unusable ||
        p2.classification == Classification::unusable) {
      std::ostringstream msg;
      msg << "search aborted: probe at rho_eff = "
          << (p1.classification == Classification::unusable ? rho_1 : rho_2)
          << " failed to solve after retry";
      throw SearchError(msg.str(), std::move(trace));
    }

    if (p1.classification == Classification::too_low) {
      low = rho_1;
    } else if (p2.classification == Classification::eta_zero) {
      high = rho_2;
    } else if (p1.cost > p2.cost) {
      low = rho_1;
    } else {
      high = rho_2;
    }
  }

  const double mid = 0.5 * (low + high);
  trace.final_rho = mid;
  ProbeOutcome final_probe = run_probe(base, mid, settings, trace.solver_calls);
  if (final_probe.classification == Classification::unusable) {
    throw SearchError("search aborted: final midpoint solve failed",
                      std::move(trace));
  }
  note(final_probe);
  return {std::move(final_probe), std::move(trace)};
}

std::vector<ProbeOutcome> sweep(const TrajectoryProblem& base,
                                const std::vector<double>& grid,
                                const SearchSettings& settings) {
  base.validate();
  for (double r : grid) {
    if (!(r >= base.rho_min) || !(r < base.rho_max)) {
      std::ostringstream msg;
      msg << "sweep grid value " << r << " outside [" << base.rho_min << ", "
          << base.rho_max << ")";
      throw ValidationError(msg.str());
    }
  }
  std::vector<ProbeOutcome> out(grid.size());
  auto work = [&](std::size_t i) {
    int calls = 0;
    try {
      out[i] = run_probe(base, grid[i], settings, calls);
    } catch (const Error&) {
      out[i] = ProbeOutcome{};
      out[i].rho_eff = grid[i];
    }
  };
  if (!settings.parallel || grid.size() < 2) {
    for (std::size_t i = 0; i < grid.size(); ++i) work(i);
    return out;
  }
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(
                                   std::thread::hardware_concurrency(), 8));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers) work(i);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

BracketEstimate estimate_bracket(const std::vector<ProbeOutcome>& points) {
  std::vector<const ProbeOutcome*> usable;
  for (const auto& p : points) {
    if (p.classification != Classification::unusable) usable.push_back(&p);
  }
  std::sort(usable.begin(), usable.end(),
            [](const auto* a, const auto* b) { return a->rho_eff < b->rho_eff; });

  BracketEstimate est;
  // Last too_low point followed by a point of another class.
  for (std::size_t i = usable.size(); i-- > 1;) {
    if (usable[i - 1]->classification == Classification::too_low &&
        usable[i]->classification != Classification::too_low) {
      est.rho_min_minus = 0.5 * (usable[i - 1]->rho_eff + usable[i]->rho_eff);
      break;
    }
  }
  // First eta_zero point preceded by a point that is not eta_zero.
  for (std::size_t i = 1; i < usable.size(); ++i) {
    if (usable[i]->classification == Classification::eta_zero &&
        usable[i - 1]->classification != Classification::eta_zero) {
      est.rho_min_plus = 0.5 * (usable[i - 1]->rho_eff + usable[i]->rho_eff);
      break;
    }
  }
  return est;
}

}  // namespace lcvx
