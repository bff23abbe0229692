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

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "lcvx/bench.hpp"
#include "lcvx/certify.hpp"
#include "lcvx/discretization.hpp"
#include "lcvx/search.hpp"
#include "lcvx/spectra.hpp"
#include "support.hpp"

using namespace lcvx;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Matrix random_rotation(std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(testing::random_matrix(rng, 3, 3));
  return qr.householderQ();
}

double sampled_min(const Vector& a, const Vector& b, int n) {
  double m = a.norm();
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    m = std::min(m, ((1.0 - t) * a + t * b).norm());
  }
  return m;
}

double ratio(const Solution& s, const Matrix& a) {
  return recursion_residual(s, a) / (1.0 + s.eta_norm());
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const SearchSettings settings;
  const double gap_tol = settings.solver.gap_tol;

  // 1
  const double delta = delta_bound(4.5, 4.0);
  report(1, "delta_bound", std::abs(delta - 4.1231) <= 1e-3, fmt("delta=%.6f", delta));

  const TrajectoryProblem base = double_integrator_problem();
  Vector q;
  const TrajectoryProblem problem = perturbed_problem(base, kDefaultEpsA, 1, &q);
  double worst_recursion = 0.0;
  bool all_optimal = true;

  // 2
  const Solution free_rate = solve(with_rho_eff(problem, 4.5, false), settings.solver);
  all_optimal = all_optimal && free_rate.optimal();
  worst_recursion = std::max(worst_recursion, ratio(free_rate, problem.disc.a));
  const double jump = max_control_jump(free_rate);
  report(2, "rate_redundancy", free_rate.optimal() && std::abs(jump - 3.322) <= 0.05,
         fmt("max_jump=%.4f", jump));

  // 3, reproduced through the bench harness (sweep plus refinement).
  const BenchReport bench = reproduce_paper({});
  const bool have_bracket = bench.rho_minus_est && bench.rho_plus_est;
  const double lo = bench.rho_minus_est.value_or(NAN);
  const double hi = bench.rho_plus_est.value_or(NAN);
  report(3, "bracket", have_bracket && std::abs(lo - 4.026) <= 0.05 && std::abs(hi - 5.105) <= 0.05,
         fmt("rho_minus=%.4f rho_plus=%.4f", lo, hi));
  worst_recursion = std::max(worst_recursion, bench.max_recursion_residual);

  // 4, 5, 6
  bool search_ok = true;
  SearchResult result;
  try {
    result = ternary_search(problem, 1e-3, settings);
  } catch (const std::exception& e) {
    search_ok = false;
    std::printf("search failed: %s\n", e.what());
  }
  const double rho = result.trace.final_rho;
  report(4, "search_convergence", search_ok && std::abs(rho - 4.098) <= 0.05,
         fmt("final_rho=%.5f", rho));
  report(5, "solver_call_budget", search_ok && result.trace.solver_calls <= 39,
         fmt("calls=%.0f", result.trace.solver_calls));
  const CertificationReport& cert = result.final_probe.report;
  const int vv = static_cast<int>(cert.vertex_violations.size());
  const int ev = cert.violated_edges();
  report(6, "structural_bounds",
         search_ok && result.final_probe.solution.optimal() && vv <= 7 && ev <= 14,
         fmt("vertex=%.0f edge=%.0f", vv, ev));
  if (search_ok) {
    all_optimal = all_optimal && result.final_probe.solution.optimal();
    worst_recursion = std::max(worst_recursion, ratio(result.final_probe.solution, problem.disc.a));
  }

  // 7
  int calls = 0;
  const ProbeOutcome low = run_probe(problem, 4.025, settings, calls);
  const ProbeOutcome high = run_probe(problem, 5.5, settings, calls);
  report(7, "classification_regimes",
         low.classification == Classification::too_low &&
             high.classification == Classification::eta_zero,
         "4.025=" + to_string(low.classification) + " 5.5=" + to_string(high.classification));
  for (const ProbeOutcome* p : {&low, &high}) {
    all_optimal = all_optimal && p->solution.optimal();
    worst_recursion = std::max(worst_recursion, ratio(p->solution, problem.disc.a));
  }

  // 8
  {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int counterexamples = 0;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
      const double rho_max = 1.0 + 9.0 * unit(rng);
      const double rho_min = rho_max * (0.01 + 0.98 * unit(rng));
      const double rho_eff = rho_min + (rho_max - rho_min) * unit(rng);
      const double d = delta_bound(rho_eff, rho_min);
      const double ra = rho_eff + (rho_max - rho_eff) * unit(rng);
      const double rb_lo = std::max(rho_eff, ra - d);
      const double rb_hi = std::min(rho_max, ra + d);
      const double rb = rb_lo + (rb_hi - rb_lo) * unit(rng);
      const double cos_min =
          std::clamp((ra * ra + rb * rb - d * d) / (2.0 * ra * rb), -1.0, 1.0);
      const double theta = std::acos(cos_min) * unit(rng);
      const Matrix frame = random_rotation(rng);
      const Vector ua = ra * frame.col(0);
      const Vector ub = rb * (std::cos(theta) * frame.col(0) + std::sin(theta) * frame.col(1));
      if ((ub - ua).norm() > d * (1.0 + 1e-12) + 1e-12) continue;  // not a valid draw
      if (edge_min_norm(ua, ub) < rho_min - 1e-9 || edge_max_norm(ua, ub) > rho_max + 1e-12) {
        ++counterexamples;
      }
    }
    report(8, "interpolation_property", counterexamples == 0,
           fmt("draws=%.0f counterexamples=%.0f", draws, counterexamples));
  }

  // 9
  const double bound = 10.0 * gap_tol;
  report(9, "dual_recursion", all_optimal && worst_recursion <= bound,
         fmt("max_ratio=%.3g bound=%.3g", worst_recursion, bound));

  // 10
  {
    const ContinuousSystem sys = testing::double_integrator();
    const DiscreteSystem d = integrate_stm(sys, 4.0, 16);
    const double dt = d.dt;
    Matrix b0 = Matrix::Zero(6, 3), b1 = Matrix::Zero(6, 3);
    b0.topRows(3) = Matrix::Identity(3, 3) * dt * dt / 3.0;
    b1.topRows(3) = Matrix::Identity(3, 3) * dt * dt / 6.0;
    b0.bottomRows(3) = Matrix::Identity(3, 3) * dt / 2.0;
    b1.bottomRows(3) = Matrix::Identity(3, 3) * dt / 2.0;
    const double err = std::max({(d.a - testing::expm_oracle(sys.a_c * dt)).cwiseAbs().maxCoeff(),
                                 (d.b0 - b0).cwiseAbs().maxCoeff(),
                                 (d.b1 - b1).cwiseAbs().maxCoeff()});
    report(10, "discretization_golden", err <= 1e-9, fmt("max_err=%.3g", err));
  }

  // 11
  {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vector a = testing::random_vector(rng, 3, 5.0);
      const Vector b = testing::random_vector(rng, 3, 5.0);
      worst = std::max(worst, std::abs(edge_min_norm(a, b) - sampled_min(a, b, 10000)));
    }
    // Near the origin the grid spacing dominates, so only the one-sided
    // inequality is meaningful there.
    double above = 0.0;
    for (int k = 0; k < 250; ++k) {
      const Vector a = testing::random_vector(rng, 3, 5.0);
      const Vector b = -0.7 * a + testing::random_vector(rng, 3, 0.1);
      above = std::max(above, edge_min_norm(a, b) - sampled_min(a, b, 10000));
    }
    report(11, "edge_min_norm_oracle", worst <= 1e-6 && above <= 1e-12,
           fmt("max_diff=%.3g near_origin_excess=%.3g", worst, above));
  }

  // 12
  {
    const double shift = (problem.disc.a - base.disc.a - q(0) * Matrix::Identity(6, 6))
                             .cwiseAbs()
                             .maxCoeff();
    const double gap = bench.perturbed_cost_gap;
    report(12, "perturbation_robustness", q.size() == 1 && gap <= 1e-3 && shift <= 1e-7,
           fmt("cost_gap=%.3g shift_err=%.3g", gap, shift));
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d failure(s), %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
