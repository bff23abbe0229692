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

#include "lcvx/bench.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

#include "lcvx/certify.hpp"
#include "lcvx/errors.hpp"
#include "lcvx/spectra.hpp"

namespace lcvx {
namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

BenchTarget near(std::string name, std::string reference, double value,
                 double expected, double tol) {
  BenchTarget t{std::move(name), std::move(reference), value, expected, tol, "abs", false};
  t.pass = std::isfinite(value) && std::abs(value - expected) <= tol;
  return t;
}

BenchTarget at_most(std::string name, std::string reference, double value,
                    double bound) {
  BenchTarget t{std::move(name), std::move(reference), value, bound, 0.0, "max", false};
  t.pass = std::isfinite(value) && value <= bound;
  return t;
}

BenchTarget above(std::string name, std::string reference, double value,
                  double bound) {
  BenchTarget t{std::move(name), std::move(reference), value, bound, 0.0, "above", false};
  t.pass = std::isfinite(value) && value > bound;
  return t;
}

// Bisects [lo, hi] where pred(lo) is false and pred(hi) is true.
double refine(const TrajectoryProblem& problem, double lo, double hi, int steps,
              const SearchSettings& settings,
              bool (*pred)(Classification), int& calls) {
  for (int k = 0; k < steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    const ProbeOutcome p = run_probe(problem, mid, settings, calls);
    if (p.classification == Classification::unusable) break;
    (pred(p.classification) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

bool not_too_low(Classification c) { return c != Classification::too_low; }
bool is_eta_zero(Classification c) { return c == Classification::eta_zero; }

double recursion_ratio(const Solution& s, const Matrix& a) {
  if (!s.optimal() || s.eta.size() < 2) return 0.0;
  return recursion_residual(s, a) / (1.0 + s.eta_norm());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json optional_json(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

ProblemConfig double_integrator_config() {
  ProblemConfig c;
  c.system.a_c = Matrix::Zero(6, 6);
  c.system.a_c.topRightCorner(3, 3).setIdentity();
  c.system.b_c = Matrix::Zero(6, 3);
  c.system.b_c.bottomRows(3).setIdentity();
  c.t_f = 4.0;
  c.n_segments = 16;
  c.rho_min = 4.0;
  c.rho_max = 6.0;
  c.x_init = Vector::Zero(6);
  c.x_init(5) = 10.0;
  c.terminal.matrix = Matrix::Zero(0, 6);
  c.terminal.offset = Vector::Zero(0);
  c.terminal_weight = 100.0;
  c.terminal_target = Vector::Zero(6);
  c.terminal_target.head(3).setConstant(10.0);
  c.running = RunningCost::quadratic;
  c.quadrature = "trapezoid";
  return c;
}

TrajectoryProblem double_integrator_problem() {
  return make_problem(double_integrator_config());
}

bool BenchReport::all_pass() const {
  if (targets.empty()) return false;
  for (const auto& t : targets) {
    if (!t.pass) return false;
  }
  return true;
}

double max_control_jump(const Solution& s) {
  double jump = 0.0;
  for (std::size_t i = 0; i + 1 < s.u.size(); ++i) {
    jump = std::max(jump, (s.u[i + 1] - s.u[i]).norm());
  }
  return jump;
}

double recursion_residual(const Solution& s, const Matrix& a) {
  double r = 0.0;
  for (std::size_t i = 1; i < s.eta.size(); ++i) {
    r = std::max(r, (s.eta[i - 1] - a.transpose() * s.eta[i]).norm());
  }
  return r;
}

TrajectoryProblem perturbed_problem(const TrajectoryProblem& base, double eps_a,
                                    std::uint64_t seed, Vector* q_out) {
  const EigenStructure structure = eigen_structure(base.disc.a);
  const PerturbationSpec spec = sample_q(structure.dimension(), eps_a, seed);
  TrajectoryProblem out = base;
  out.disc.a = perturb(structure, spec.q);
  if (q_out) *q_out = spec.q;
  return out;
}

BenchReport reproduce_paper(const std::filesystem::path& out_dir,
                            const BenchOptions& opt) {
  BenchReport rep;
  rep.seed = opt.seed;
  rep.eps_a = opt.perturb ? opt.eps_a : 0.0;
  if (!out_dir.empty()) ensure_directory(out_dir);

  const TrajectoryProblem nominal = double_integrator_problem();
  const TrajectoryProblem problem =
      opt.perturb ? perturbed_problem(nominal, opt.eps_a, opt.seed, &rep.q) : nominal;
  if (!opt.perturb) rep.q = Vector::Zero(0);
  const SolverSettings& solver = opt.settings.solver;
  double recursion = 0.0;

  // (a) rate constraint dropped at 4.5.
  rep.delta_at_4_5 = delta_bound(4.5, problem.rho_min);
  const Solution free_rate = solve(with_rho_eff(problem, 4.5, false), solver);
  if (!free_rate.optimal()) throw SolverError("unconstrained-rate solve at 4.5 failed");
  rep.max_control_jump_unconstrained = max_control_jump(free_rate);
  recursion = std::max(recursion, recursion_ratio(free_rate, problem.disc.a));

  // The rate bound stays redundant for larger effective bounds as well.
  double redundancy = std::numeric_limits<double>::infinity();
  for (double r = 4.5; r < problem.rho_max - 1e-12; r += 0.25) {
    const Solution s = solve(with_rho_eff(problem, r, false), solver);
    if (!s.optimal()) {
      redundancy = nan();
      break;
    }
    redundancy = std::min(redundancy, delta_bound(r, problem.rho_min) - max_control_jump(s));
    recursion = std::max(recursion, recursion_ratio(s, problem.disc.a));
  }

  // (b) sweep plus refined transitions.
  std::vector<double> grid;
  for (double r = problem.rho_min; r < problem.rho_max - 1e-12; r += opt.sweep_step) {
    grid.push_back(r);
  }
  rep.sweep = sweep(problem, grid, opt.settings);
  for (const auto& p : rep.sweep) {
    recursion = std::max(recursion, recursion_ratio(p.solution, problem.disc.a));
  }
  const BracketEstimate coarse = estimate_bracket(rep.sweep);
  int refine_calls = 0;
  if (coarse.rho_min_minus) {
    const double h = 0.5 * opt.sweep_step;
    rep.rho_minus_est = refine(problem, *coarse.rho_min_minus - h, *coarse.rho_min_minus + h,
                               opt.refine_steps, opt.settings, not_too_low, refine_calls);
  }
  if (coarse.rho_min_plus) {
    const double h = 0.5 * opt.sweep_step;
    rep.rho_plus_est = refine(problem, *coarse.rho_min_plus - h, *coarse.rho_min_plus + h,
                              opt.refine_steps, opt.settings, is_eta_zero, refine_calls);
  }

  // (c) search, (d) certification of its final solve.
  SearchResult result = ternary_search(problem, opt.eps, opt.settings);
  rep.trace = result.trace;
  rep.converged_rho = result.trace.final_rho;
  rep.solver_calls = result.trace.solver_calls;
  rep.final_solution = result.final_probe.solution;
  rep.final_report = result.final_probe.report;
  rep.final_cost = rep.final_solution.cost;
  rep.vertex_violations = static_cast<int>(rep.final_report.vertex_violations.size());
  rep.edge_violations = rep.final_report.violated_edges();
  recursion = std::max(recursion, recursion_ratio(rep.final_solution, problem.disc.a));
  rep.max_recursion_residual = recursion;

  // Perturbation robustness: same bound on the nominal system.
  if (opt.perturb) {
    const Solution plain = solve(with_rho_eff(nominal, rep.converged_rho, true), solver);
    rep.perturbed_cost_gap = plain.optimal() ? std::abs(plain.cost - rep.final_cost) : nan();
    const VectorSequence x = rollout(nominal.disc, nominal.x_init, rep.final_solution.u);
    rep.rollout_defect = (x.back() - rep.final_solution.x.back()).norm();
    if (nominal.terminal.rows() > 0) {
      rep.rollout_defect = std::max(rep.rollout_defect,
                                    nominal.terminal.evaluate(x.back()).norm());
    }
  }

  const int nx = problem.nx();
  const double span = problem.rho_max - problem.rho_min;
  const int call_budget =
      2 * static_cast<int>(std::ceil(std::log(span / opt.eps) / std::log(1.5))) + 1;
  const double gap_tol = solver.gap_tol;
  rep.targets = {
      near("delta_at_4_5", "4.123", rep.delta_at_4_5, 4.1231, 1e-3),
      near("max_control_jump_unconstrained", "3.322", rep.max_control_jump_unconstrained,
           3.322, 0.05),
      above("rate_bound_redundant_above_4_5", "delta exceeds the free-rate jump",
            redundancy, 0.0),
      near("rho_minus_est", "4.026", rep.rho_minus_est.value_or(nan()), 4.026, 0.05),
      near("rho_plus_est", "5.105", rep.rho_plus_est.value_or(nan()), 5.105, 0.05),
      near("converged_rho", "4.098", rep.converged_rho, 4.098, 0.05),
      at_most("solver_calls", "O(log(span / eps)) calls", rep.solver_calls, call_budget),
      at_most("vertex_violations", "at most nx + 1 vertices", rep.vertex_violations, nx + 1),
      at_most("edge_violations", "at most 2 nx + 2 edges", rep.edge_violations, 2 * nx + 2),
      at_most("recursion_residual", "eta[i-1] = A' eta[i]", rep.max_recursion_residual,
              10.0 * gap_tol),
  };
  if (opt.perturb) {
    rep.targets.push_back(at_most("perturbed_cost_gap", "vanishing with eps_a",
                                  rep.perturbed_cost_gap, 1e-3));
    rep.targets.push_back(at_most("rollout_defect", "vanishing with eps_a",
                                  rep.rollout_defect, 1e-3));
  }

  if (!out_dir.empty()) {
    const double dt = problem.disc.dt;
    write_text(out_dir / "trajectory.csv", trajectory_csv(rep.final_solution.x, dt));
    write_text(out_dir / "controls.csv", controls_csv(rep.final_solution.u, dt));
    write_text(out_dir / "sweep.csv", sweep_csv(rep.sweep));
    write_text(out_dir / "edges.csv", edges_csv(rep.final_report));
    write_json(out_dir / "report.json", to_json(rep));
  }
  return rep;
}

Json to_json(const BenchReport& r, bool with_timestamp) {
  Json j;
  if (with_timestamp) j["timestamp"] = utc_timestamp();
  j["seed"] = r.seed;
  j["eps_a"] = r.eps_a;
  j["q"] = to_json(r.q);
  j["all_pass"] = r.all_pass();
  j["delta_at_4_5"] = r.delta_at_4_5;
  j["max_control_jump_unconstrained"] = r.max_control_jump_unconstrained;
  j["rho_minus_est"] = optional_json(r.rho_minus_est);
  j["rho_plus_est"] = optional_json(r.rho_plus_est);
  j["converged_rho"] = r.converged_rho;
  j["solver_calls"] = r.solver_calls;
  j["violation_counts"] = {{"vertex", r.vertex_violations}, {"edge", r.edge_violations}};
  j["final_cost"] = r.final_cost;
  j["max_recursion_residual"] = r.max_recursion_residual;
  j["perturbed_cost_gap"] = r.perturbed_cost_gap;
  j["rollout_defect"] = r.rollout_defect;
  Json targets = Json::array();
  for (const auto& t : r.targets) {
    targets.push_back({{"name", t.name},
                       {"reference", t.reference},
                       {"value", std::isfinite(t.value) ? Json(t.value) : Json(nullptr)},
                       {"expected", t.expected},
                       {"tolerance", t.tolerance},
                       {"comparison", t.comparison},
                       {"pass", t.pass}});
  }
  j["targets"] = targets;
  j["trace"] = to_json(r.trace);
  j["certification"] = to_json(r.final_report);
  return j;
}

ZohComparison compare_zoh(const std::filesystem::path& out_dir,
                          const BenchOptions& opt) {
  if (!out_dir.empty()) ensure_directory(out_dir);
  const ProblemConfig config = double_integrator_config();
  const TrajectoryProblem nominal = make_problem(config);
  const TrajectoryProblem problem =
      opt.perturb ? perturbed_problem(nominal, opt.eps_a, opt.seed) : nominal;

  ZohComparison out;
  const ZohSystem zoh = make_zoh(config);
  out.zoh = solve(build_zoh_program(with_rho_eff(nominal, nominal.rho_min, false), zoh),
                  opt.settings.solver);
  if (!out.zoh.optimal()) throw SolverError("ZOH solve failed: " + to_string(out.zoh.status));
  out.foh = ternary_search(problem, opt.eps, opt.settings).final_probe.solution;

  const Vector target = config.terminal_target.head(3);
  out.zoh_position_error = (out.zoh.x.back().head(3) - target).norm();
  out.foh_position_error = (out.foh.x.back().head(3) - target).norm();
  out.zoh_slack = out.zoh.cost / config.terminal_weight;
  out.foh_slack = out.foh.cost / config.terminal_weight;

  if (!out_dir.empty()) {
    const double dt = nominal.disc.dt;
    write_text(out_dir / "zoh_trajectory.csv", trajectory_csv(out.zoh.x, dt));
    write_text(out_dir / "zoh_controls.csv", controls_csv(out.zoh.u, dt, true));
    write_text(out_dir / "foh_trajectory.csv", trajectory_csv(out.foh.x, dt));
    write_text(out_dir / "foh_controls.csv", controls_csv(out.foh.u, dt));
  }
  return out;
}

}  // namespace lcvx
