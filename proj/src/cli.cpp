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

#include "lcvx/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lcvx/bench.hpp"
#include "lcvx/certify.hpp"
#include "lcvx/errors.hpp"
#include "lcvx/io.hpp"
#include "lcvx/search.hpp"
#include "lcvx/spectra.hpp"

namespace lcvx {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string grid;
  std::string solution;
  std::optional<double> eps;
  std::optional<double> eps_a;
  std::optional<double> tol_feas;
  std::optional<double> tol_viol;
  std::optional<double> rho_eff;
  std::optional<std::uint64_t> seed;
  bool no_perturb = false;
  bool zoh = false;
  bool dump = false;
};

// Failure that already carries its exit code.
struct Exit {
  int code;
};

ProblemConfig load(const Options& o) {
  if (o.config.empty()) throw ValidationError("--config is required");
  ProblemConfig c = load_config(o.config);
  RunSettings& s = c.settings;
  if (o.eps) s.eps = *o.eps;
  if (o.eps_a) s.eps_a = *o.eps_a;
  if (o.seed) s.seed = *o.seed;
  if (o.tol_feas) s.tol_feas = *o.tol_feas;
  if (o.tol_viol) s.tol_viol = *o.tol_viol;
  if (o.rho_eff) s.rho_eff = *o.rho_eff;
  if (o.no_perturb) s.perturb = false;
  // Re-validate so flag values go through the same schema checks.
  return parse_config(config_to_json(c));
}

struct Prepared {
  TrajectoryProblem problem;
  Vector q;
};

Prepared prepare(const ProblemConfig& c) {
  Prepared p{make_problem(c), Vector::Zero(0)};
  if (c.settings.perturb && c.settings.eps_a > 0.0) {
    p.problem = perturbed_problem(p.problem, c.settings.eps_a, c.settings.seed, &p.q);
  }
  return p;
}

bool bounds_hold(const CertificationReport& r, int nx, bool edges) {
  const bool vertices = static_cast<int>(r.vertex_violations.size()) <= nx + 1;
  return vertices && (!edges || r.violated_edges() <= 2 * nx + 2);
}

Json run_header(const ProblemConfig& c, const Vector& q) {
  return {{"seed", c.settings.seed},
          {"perturb", c.settings.perturb},
          {"eps_a", c.settings.eps_a},
          {"q", to_json(q)}};
}

int cmd_discretize(const Options& o, std::ostream& out) {
  const ProblemConfig c = load(o);
  const fs::path dir = o.out;
  ensure_directory(dir);
  const DiscreteSystem d = integrate_stm(c.system, c.t_f, c.n_segments, c.substeps);
  const ZohSystem z = make_zoh(c);
  const ControllabilityResult ctrb = check_controllability(d);
  Json j;
  j["dt"] = d.dt;
  j["n_segments"] = d.n_segments;
  j["t_f"] = d.t_f;
  j["a"] = to_json(d.a);
  j["b0"] = to_json(d.b0);
  j["b1"] = to_json(d.b1);
  j["zoh"] = {{"a", to_json(z.a)}, {"b", to_json(z.b)}};
  j["controllability"] = {{"rank", ctrb.rank}, {"controllable", ctrb.controllable}};
  write_json(dir / "discretization.json", j);
  out << "discretized: dt=" << d.dt << " N=" << d.n_segments
      << " controllability rank=" << ctrb.rank << "\n";
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const ProblemConfig c = load(o);
  const fs::path dir = o.out;
  ensure_directory(dir);
  const Prepared prep = prepare(c);
  const TrajectoryProblem& p = prep.problem;
  const SearchSettings settings = c.settings.search_settings();

  ConicFormulation f;
  TrajectoryProblem posed = p;
  if (o.zoh) {
    posed = with_rho_eff(make_problem(c), p.rho_eff, false);
    f = build_zoh_program(posed, make_zoh(c));
  } else {
    f = build_program(p);
  }
  if (o.dump) write_json(dir / "program.json", to_json(f));
  const Solution s = solve(f, settings.solver);

  Json report = run_header(c, prep.q);
  report["hold"] = o.zoh ? "zero_order" : "first_order";
  report["rho_eff"] = posed.rho_eff;
  report["status"] = to_string(s.status);
  report["solver_status"] = conic::to_string(s.solver_status);
  report["iterations"] = s.iterations;
  if (o.dump) write_json(dir / "solution.json", to_json(s));
  if (!s.optimal()) {
    write_json(dir / "report.json", report);
    out << "solve failed: " << conic::to_string(s.solver_status) << "\n";
    return kExitSolverFailure;
  }
  write_json(dir / "solution.json", to_json(s));
  const double dt = p.disc.dt;
  write_text(dir / "trajectory.csv", trajectory_csv(s.x, dt));
  write_text(dir / "controls.csv", controls_csv(s.u, dt, o.zoh));

  CertificationReport cert;
  if (o.zoh) {
    cert = certify(s, p.rho_min, p.rho_max, settings.tolerance_for(p));
    // Piecewise-constant controls have no interpolated edges.
    cert.edge_violations.clear();
    cert.edge_min_norms.clear();
    cert.edge_max_norms.clear();
  } else {
    const ProbeOutcome probe = classify_probe(p, s, settings);
    cert = probe.report;
    report["classification"] = to_string(probe.classification);
  }
  report["cost"] = s.cost;
  report["certification"] = to_json(cert);
  report["assumptions"] = to_json(assumption_diagnostics(p, settings.solver));
  const bool ok = bounds_hold(cert, p.nx(), !o.zoh);
  report["bounds_hold"] = ok;
  write_json(dir / "report.json", report);
  out << "solved: cost=" << s.cost << " vertex violations="
      << cert.vertex_violations.size() << " violated edges=" << cert.violated_edges()
      << "\n";
  return ok ? kExitOk : kExitCertificationFailure;
}

int cmd_search(const Options& o, std::ostream& out) {
  const ProblemConfig c = load(o);
  const fs::path dir = o.out;
  ensure_directory(dir);
  const Prepared prep = prepare(c);
  const TrajectoryProblem& p = prep.problem;
  Json report = run_header(c, prep.q);
  report["eps"] = c.settings.eps;

  SearchResult result;
  try {
    result = ternary_search(p, c.settings.eps, c.settings.search_settings());
  } catch (const SearchError& e) {
    write_json(dir / "trace.json", to_json(e.trace()));
    report["error"] = e.what();
    write_json(dir / "report.json", report);
    throw;
  }
  const ProbeOutcome& fin = result.final_probe;
  write_json(dir / "trace.json", to_json(result.trace));
  write_text(dir / "trajectory.csv", trajectory_csv(fin.solution.x, p.disc.dt));
  write_text(dir / "controls.csv", controls_csv(fin.solution.u, p.disc.dt));
  write_json(dir / "solution.json", to_json(fin.solution));
  const bool ok = bounds_hold(fin.report, p.nx(), true);
  report["final_rho"] = result.trace.final_rho;
  report["solver_calls"] = result.trace.solver_calls;
  report["classification"] = to_string(fin.classification);
  report["cost"] = fin.cost;
  report["bounds_hold"] = ok;
  report["certification"] = to_json(fin.report);
  write_json(dir / "report.json", report);
  out << "search: rho_eff=" << result.trace.final_rho << " cost=" << fin.cost
      << " calls=" << result.trace.solver_calls << " class="
      << to_string(fin.classification) << "\n";
  return ok ? kExitOk : kExitCertificationFailure;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const ProblemConfig c = load(o);
  std::vector<double> grid;
  if (o.grid.empty()) {
    for (double r = c.rho_min; r < c.rho_max - 1e-12; r += 0.1) grid.push_back(r);
  } else {
    grid = parse_grid(o.grid);
  }
  const fs::path dir = o.out;
  const Prepared prep = prepare(c);
  const std::vector<ProbeOutcome> points =
      sweep(prep.problem, grid, c.settings.search_settings());
  ensure_directory(dir);
  write_text(dir / "sweep.csv", sweep_csv(points));
  const BracketEstimate est = estimate_bracket(points);
  Json j = run_header(c, prep.q);
  j["points"] = to_json(points);
  j["rho_min_minus"] = est.rho_min_minus ? Json(*est.rho_min_minus) : Json(nullptr);
  j["rho_min_plus"] = est.rho_min_plus ? Json(*est.rho_min_plus) : Json(nullptr);
  write_json(dir / "sweep.json", j);
  int failed = 0;
  for (const auto& pt : points) failed += pt.classification == Classification::unusable;
  out << "sweep: " << points.size() << " points, " << failed << " failed\n";
  return (!points.empty() && failed == static_cast<int>(points.size())) ? kExitSolverFailure
                                                                         : kExitOk;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const ProblemConfig c = load(o);
  if (o.solution.empty()) throw ValidationError("--solution is required");
  std::ifstream in(o.solution);
  if (!in) throw IoError("cannot read solution file " + o.solution);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("solution: malformed JSON: ") + e.what());
  }
  const Solution s = solution_from_json(doc);
  const TrajectoryProblem p = make_problem(c);
  if (static_cast<int>(s.u.size()) != p.n_segments() + 1 || s.u.front().size() != p.nu()) {
    throw ValidationError("solution: expected " + std::to_string(p.n_segments() + 1) +
                          " controls of length " + std::to_string(p.nu()));
  }
  const double tol = c.settings.tol_viol.value_or(default_violation_tol(p.rho_max));
  CertificationReport r;
  const bool duals = static_cast<int>(s.eta.size()) == p.n_segments();
  if (duals) {
    DualCheckOptions d;
    d.eps_eta = c.settings.eps_eta;
    d.terminal_scale = p.cost.terminal_weight;
    r = certify(s, p.disc, p.rho_min, p.rho_max, tol, d);
  } else {
    r = certify(s, p.rho_min, p.rho_max, tol);
  }
  const bool ok = bounds_hold(r, p.nx(), true);
  Json j = to_json(r);
  j["bounds_hold"] = ok;
  if (!o.out.empty()) {
    ensure_directory(o.out);
    write_json(fs::path(o.out) / "report.json", j);
  }
  out << "certify: vertex violations=" << r.vertex_violations.size()
      << " violated edges=" << r.violated_edges() << "\n";
  return ok ? kExitOk : kExitCertificationFailure;
}

int cmd_bench(const Options& o, std::ostream& out) {
  BenchOptions b;
  if (o.eps) b.eps = *o.eps;
  if (o.eps_a) b.eps_a = *o.eps_a;
  if (o.seed) b.seed = *o.seed;
  if (o.tol_feas) b.settings.solver.feas_tol = *o.tol_feas;
  if (o.tol_viol) b.settings.violation_tol = *o.tol_viol;
  b.perturb = !o.no_perturb;
  if (!(b.eps > 0.0) || b.eps_a < 0.0) throw ValidationError("eps must be > 0, eps-a >= 0");
  const fs::path dir = o.out;
  ensure_directory(dir);
  const BenchReport rep = reproduce_paper(dir, b);
  const ZohComparison cmp = compare_zoh(dir, b);
  Json j = to_json(rep);
  j["zoh_comparison"] = {{"zoh_controls", cmp.zoh.u.size()},
                         {"foh_controls", cmp.foh.u.size()},
                         {"zoh_position_error", cmp.zoh_position_error},
                         {"foh_position_error", cmp.foh_position_error},
                         {"zoh_slack", cmp.zoh_slack},
                         {"foh_slack", cmp.foh_slack}};
  write_json(dir / "report.json", j);
  for (const auto& t : rep.targets) {
    out << (t.pass ? "PASS " : "FAIL ") << t.name << " value=" << t.value << "\n";
  }
  return rep.all_pass() ? kExitOk : kExitCertificationFailure;
}

void add_common(CLI::App* sub, Options& o, bool needs_config) {
  auto* cfg = sub->add_option("--config", o.config, "Problem config (JSON)");
  if (needs_config) cfg->required();
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--eps", o.eps, "Search tolerance on rho_eff");
  sub->add_option("--eps-a", o.eps_a, "Eigenvalue perturbation half-width");
  sub->add_option("--seed", o.seed, "Perturbation seed");
  sub->add_option("--tol-feas", o.tol_feas, "Solver feasibility tolerance");
  sub->add_option("--tol-viol", o.tol_viol, "Absolute bound-violation tolerance");
  sub->add_flag("--no-perturb", o.no_perturb, "Skip the eigenvalue perturbation");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Lossless convexification for piecewise-linear controls", "lcvx"};
  app.require_subcommand(1);
  Options o;

  auto* disc = app.add_subcommand("discretize", "Write FOH and ZOH matrices");
  add_common(disc, o, true);
  auto* solve_cmd = app.add_subcommand("solve", "Solve once at a fixed rho_eff");
  add_common(solve_cmd, o, true);
  solve_cmd->add_option("--rho-eff", o.rho_eff, "Effective lower bound");
  solve_cmd->add_flag("--zoh", o.zoh, "Piecewise-constant controls, no rate constraint");
  solve_cmd->add_flag("--dump", o.dump, "Write the conic program and raw solution");
  auto* search_cmd = app.add_subcommand("search", "Ternary search over rho_eff");
  add_common(search_cmd, o, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "Classify a grid of rho_eff values");
  add_common(sweep_cmd, o, true);
  sweep_cmd->add_option("--grid", o.grid, "start:stop:step, stop excluded");
  auto* certify_cmd = app.add_subcommand("certify", "Certify a solution file");
  add_common(certify_cmd, o, true);
  certify_cmd->add_option("--solution", o.solution, "Solution JSON")->required();
  auto* bench_cmd = app.add_subcommand("bench", "Reference double-integrator run");
  add_common(bench_cmd, o, false);

  std::vector<std::string> argv_store{"lcvx"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  if (o.out.empty() && !certify_cmd->parsed()) o.out = "lcvx_out";

  try {
    if (disc->parsed()) return cmd_discretize(o, out);
    if (solve_cmd->parsed()) return cmd_solve(o, out);
    if (search_cmd->parsed()) return cmd_search(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    if (certify_cmd->parsed()) return cmd_certify(o, out);
    if (bench_cmd->parsed()) return cmd_bench(o, out);
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const ContractError& e) {
    err << "certification error: " << e.what() << "\n";
    return kExitCertificationFailure;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitConfigError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace lcvx
