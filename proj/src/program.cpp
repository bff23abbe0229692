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

#include "lcvx/program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lcvx/certify.hpp"
#include "lcvx/errors.hpp"

namespace lcvx {
namespace {

// Accumulates equality rows (A x = b) and cone rows (G x + s = h) while the
// program is laid out. Cone rows are collected per kind and stitched in
// orthant-first order at the end.
class ProgramBuilder {
 public:
  explicit ProgramBuilder(int num_variables) : n_(num_variables) {}

  int add_variable() { return n_++; }
  int num_variables() const { return n_; }

  int add_equality_rows(int count) {
    const int first = eq_rows_;
    eq_rows_ += count;
    b_.conservativeResize(eq_rows_);
    b_.tail(count).setZero();
    return first;
  }
  void eq(int row, int col, double v) {
    if (v != 0.0) eq_trip_.emplace_back(row, col, v);
  }
  void eq_rhs(int row, double v) { b_(row) = v; }

  struct ConeRows {
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> h;
  };

  // Orthant row:  s = h - g'x >= 0.
  int add_nonneg() {
    orthant_.h.push_back(0.0);
    return static_cast<int>(orthant_.h.size()) - 1;
  }
  void nonneg(int row, int col, double v) { orthant_.trip.emplace_back(row, col, v); }
  void nonneg_rhs(int row, double v) { orthant_.h[row] = v; }

  // Second-order cone of dimension `dim`; returns its index.
  int add_soc(int dim) {
    socs_.push_back({{}, std::vector<double>(dim, 0.0)});
    return static_cast<int>(socs_.size()) - 1;
  }
  void soc(int cone, int row, int col, double v) {
    if (v != 0.0) socs_[cone].trip.emplace_back(row, col, v);
  }
  void soc_rhs(int cone, int row, double v) { socs_[cone].h[row] = v; }

  conic::ConicProgram finish(Vector c) && {
    conic::ConicProgram prog;
    c.conservativeResize(n_);
    prog.c = std::move(c);
    prog.a.resize(eq_rows_, n_);
    prog.a.setFromTriplets(eq_trip_.begin(), eq_trip_.end());
    prog.b = b_;

    std::vector<Eigen::Triplet<double>> g_trip = orthant_.trip;
    std::vector<double> h = orthant_.h;
    prog.cones.nonneg = static_cast<int>(orthant_.h.size());
    for (const auto& cone : socs_) {
      const int offset = static_cast<int>(h.size());
      for (const auto& t : cone.trip) {
        g_trip.emplace_back(offset + t.row(), t.col(), t.value());
      }
      h.insert(h.end(), cone.h.begin(), cone.h.end());
      prog.cones.soc.push_back(static_cast<int>(cone.h.size()));
    }
    prog.g.resize(static_cast<Eigen::Index>(h.size()), n_);
    prog.g.setFromTriplets(g_trip.begin(), g_trip.end());
    prog.h = Eigen::Map<const Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
    return prog;
  }

 private:
  int n_;
  int eq_rows_ = 0;
  std::vector<Eigen::Triplet<double>> eq_trip_;
  Vector b_;
  ConeRows orthant_;
  std::vector<ConeRows> socs_;
};

struct Dims {
  int nx, nu, n_segments, n_controls;
};

// Shared tail of the FOH and ZOH builders: sigma box, norm cones, boundary
// rows, terminal map and cost epigraphs.
void add_common(const TrajectoryProblem& problem, const Vector& weights,
                ProgramBuilder& builder, ProgramLayout& layout, Vector& c) {
  const int nx = layout.nx;
  const int nu = layout.nu;
  const int nc = layout.n_controls;
  auto xi = [&](int i, int k) { return layout.x_offset + i * nx + k; };
  auto ui = [&](int i, int k) { return layout.u_offset + i * nu + k; };
  auto si = [&](int i) { return layout.sigma_offset + i; };

  layout.initial_row = builder.add_equality_rows(nx);
  for (int k = 0; k < nx; ++k) {
    builder.eq(layout.initial_row + k, xi(0, k), 1.0);
    builder.eq_rhs(layout.initial_row + k, problem.x_init(k));
  }
  const int ng = problem.terminal.rows();
  layout.terminal_row = builder.add_equality_rows(ng);
  layout.terminal_rows = ng;
  for (int r = 0; r < ng; ++r) {
    for (int k = 0; k < nx; ++k) {
      builder.eq(layout.terminal_row + r, xi(layout.n_segments, k),
                 problem.terminal.matrix(r, k));
    }
    builder.eq_rhs(layout.terminal_row + r, -problem.terminal.offset(r));
  }

  // rho_eff <= sigma_i <= rho_max
  for (int i = 0; i < nc; ++i) {
    const int lo = builder.add_nonneg();
    builder.nonneg(lo, si(i), -1.0);
    builder.nonneg_rhs(lo, -problem.rho_eff);
    const int hi = builder.add_nonneg();
    builder.nonneg(hi, si(i), 1.0);
    builder.nonneg_rhs(hi, problem.rho_max);
  }
  // ||u_i|| <= sigma_i
  for (int i = 0; i < nc; ++i) {
    const int cone = builder.add_soc(nu + 1);
    builder.soc(cone, 0, si(i), -1.0);
    for (int k = 0; k < nu; ++k) builder.soc(cone, 1 + k, ui(i, k), -1.0);
  }
  layout.norm_cones = nc;

  if (problem.cost.terminal_weight > 0.0) {
    layout.terminal_epigraph = builder.add_variable();
    const int cone = builder.add_soc(nx + 1);
    builder.soc(cone, 0, layout.terminal_epigraph, -1.0);
    for (int k = 0; k < nx; ++k) {
      builder.soc(cone, 1 + k, xi(layout.n_segments, k), -1.0);
      builder.soc_rhs(cone, 1 + k, -problem.cost.terminal_target(k));
    }
  }

  int running_cone = -1;
  if (problem.cost.running == RunningCost::quadratic) {
    // sum_i w_i sigma_i^2 <= t  <=>  ||(t - 1, 2 sqrt(w) sigma)|| <= t + 1
    layout.running_cost_encoding = "rotated_cone";
    layout.running_epigraph = builder.add_variable();
    running_cone = builder.add_soc(nc + 2);
    builder.soc(running_cone, 0, layout.running_epigraph, -1.0);
    builder.soc_rhs(running_cone, 0, 1.0);
    builder.soc(running_cone, 1, layout.running_epigraph, -1.0);
    builder.soc_rhs(running_cone, 1, -1.0);
    for (int i = 0; i < nc; ++i) {
      builder.soc(running_cone, 2 + i, si(i), -2.0 * std::sqrt(weights(i)));
    }
  } else {
    layout.running_cost_encoding = "linear";
  }

  c = Vector::Zero(builder.num_variables());
  if (layout.terminal_epigraph >= 0) {
    c(layout.terminal_epigraph) = problem.cost.terminal_weight;
  }
  if (layout.running_epigraph >= 0) {
    c(layout.running_epigraph) = 1.0;
  } else {
    for (int i = 0; i < nc; ++i) c(si(i)) = weights(i);
  }
}

void check_rho(const TrajectoryProblem& p) {
  if (!(p.rho_min > 0.0) || !std::isfinite(p.rho_min)) {
    throw ValidationError("rho_min must be positive and finite");
  }
  if (!(p.rho_min < p.rho_max) || !std::isfinite(p.rho_max)) {
    throw ValidationError("rho_min must be strictly below rho_max");
  }
  if (!(p.rho_eff >= p.rho_min) || !(p.rho_eff < p.rho_max)) {
    std::ostringstream msg;
    msg << "effective lower bound " << p.rho_eff << " outside [" << p.rho_min
        << ", " << p.rho_max << ")";
    throw ValidationError(msg.str());
  }
}

VectorSequence split(const Vector& v, int offset, int count, int dim) {
  VectorSequence out(count);
  for (int i = 0; i < count; ++i) out[i] = v.segment(offset + i * dim, dim);
  return out;
}

}  // namespace

std::string to_string(RunningCost kind) {
  return kind == RunningCost::linear ? "linear" : "quadratic";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

void CostSpec::validate(int nx, int n_vertices) const {
  if (!std::isfinite(terminal_weight) || terminal_weight < 0.0) {
    throw ValidationError("terminal_weight must be finite and non-negative");
  }
  if (terminal_weight > 0.0 && terminal_target.size() != nx) {
    throw ValidationError("terminal_target must have nx entries");
  }
  if (!terminal_target.allFinite()) {
    throw ValidationError("terminal_target has non-finite entries");
  }
  if (quadrature_weights.size() != n_vertices) {
    std::ostringstream msg;
    msg << "quadrature_weights must have " << n_vertices << " entries, got "
        << quadrature_weights.size();
    throw ValidationError(msg.str());
  }
  if (!quadrature_weights.allFinite() || (quadrature_weights.array() < 0.0).any()) {
    throw ValidationError("quadrature weights must be finite and non-negative");
  }
  if (terminal_weight == 0.0 && quadrature_weights.sum() == 0.0) {
    throw ValidationError("cost has neither a terminal nor a running term");
  }
}

Vector trapezoid_weights(int n_segments, double dt) {
  if (n_segments < 1) throw ValidationError("n_segments must be >= 1");
  Vector w = Vector::Constant(n_segments + 1, dt);
  w(0) = w(n_segments) = 0.5 * dt;
  return w;
}

void TrajectoryProblem::validate() const {
  disc.validate();
  cost.validate(nx(), n_segments() + 1);
  check_rho(*this);
  if (rate_bound && (!std::isfinite(*rate_bound) || *rate_bound < 0.0)) {
    throw ValidationError("rate_bound must be finite and non-negative");
  }
  if (x_init.size() != nx() || !x_init.allFinite()) {
    throw ValidationError("x_init must have nx finite entries");
  }
  if (terminal.matrix.cols() != nx() && terminal.rows() > 0) {
    throw ValidationError("terminal map must have nx columns");
  }
  if (terminal.offset.size() != terminal.rows()) {
    throw ValidationError("terminal map offset must match its row count");
  }
  if (!terminal.matrix.allFinite() || !terminal.offset.allFinite()) {
    throw ValidationError("terminal map has non-finite entries");
  }
}

TrajectoryProblem with_rho_eff(const TrajectoryProblem& problem, double rho_eff,
                               bool rate) {
  TrajectoryProblem out = problem;
  out.rho_eff = rho_eff;
  check_rho(out);
  if (rate) {
    out.rate_bound = delta_bound(rho_eff, problem.rho_min);
  } else {
    out.rate_bound.reset();
  }
  return out;
}

double Solution::eta_norm() const {
  double sq = 0.0;
  for (const auto& e : eta) sq += e.squaredNorm();
  return std::sqrt(sq);
}

ConicFormulation build_program(const TrajectoryProblem& problem) {
  problem.validate();
  const int nx = problem.nx();
  const int nu = problem.nu();
  const int n = problem.n_segments();

  ProgramLayout layout;
  layout.hold = Hold::first_order;
  layout.nx = nx;
  layout.nu = nu;
  layout.n_segments = n;
  layout.n_controls = n + 1;
  layout.x_offset = 0;
  layout.u_offset = (n + 1) * nx;
  layout.sigma_offset = layout.u_offset + (n + 1) * nu;

  ProgramBuilder builder(layout.primary_variables());
  auto xi = [&](int i, int k) { return layout.x_offset + i * nx + k; };
  auto ui = [&](int i, int k) { return layout.u_offset + i * nu + k; };

  const Matrix& a = problem.disc.a;
  const Matrix& b0 = problem.disc.b0;
  const Matrix& b1 = problem.disc.b1;

  // -x[i+1] + A x[i] + B0 u[i] + B1 u[i+1] = 0
  layout.dynamics_row = builder.add_equality_rows(n * nx);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < nx; ++r) {
      const int row = layout.dynamics_row + i * nx + r;
      builder.eq(row, xi(i + 1, r), -1.0);
      for (int k = 0; k < nx; ++k) builder.eq(row, xi(i, k), a(r, k));
      for (int k = 0; k < nu; ++k) {
        builder.eq(row, ui(i, k), b0(r, k));
        builder.eq(row, ui(i + 1, k), b1(r, k));
      }
    }
  }

  Vector c;
  add_common(problem, problem.cost.quadrature_weights, builder, layout, c);

  if (problem.rate_bound) {
    const double delta = *problem.rate_bound;
    if (delta > 0.0) {
      for (int i = 0; i < n; ++i) {
        const int cone = builder.add_soc(nu + 1);
        builder.soc_rhs(cone, 0, delta);
        for (int k = 0; k < nu; ++k) {
          builder.soc(cone, 1 + k, ui(i + 1, k), -1.0);
          builder.soc(cone, 1 + k, ui(i, k), 1.0);
        }
      }
      layout.rate_cones = n;
    } else {
      // A zero-radius cone has no interior; state it as equalities instead.
      layout.rate_equality_row = builder.add_equality_rows(n * nu);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < nu; ++k) {
          const int row = layout.rate_equality_row + i * nu + k;
          builder.eq(row, ui(i + 1, k), 1.0);
          builder.eq(row, ui(i, k), -1.0);
        }
      }
      layout.rate_equalities = n * nu;
    }
  }

  c.conservativeResize(builder.num_variables());
  ConicFormulation out{std::move(builder).finish(c), layout,
                       problem.cost.terminal_weight};
  return out;
}

ConicFormulation build_zoh_program(const TrajectoryProblem& problem,
                                   const ZohSystem& zoh) {
  problem.validate();
  const int nx = problem.nx();
  const int nu = problem.nu();
  const int n = problem.n_segments();
  if (zoh.nx() != nx || zoh.nu() != nu || zoh.n_segments != n) {
    throw ValidationError("ZOH system dimensions disagree with the problem");
  }

  ProgramLayout layout;
  layout.hold = Hold::zero_order;
  layout.nx = nx;
  layout.nu = nu;
  layout.n_segments = n;
  layout.n_controls = n;
  layout.x_offset = 0;
  layout.u_offset = (n + 1) * nx;
  layout.sigma_offset = layout.u_offset + n * nu;

  ProgramBuilder builder(layout.primary_variables());
  auto xi = [&](int i, int k) { return layout.x_offset + i * nx + k; };
  auto ui = [&](int i, int k) { return layout.u_offset + i * nu + k; };

  layout.dynamics_row = builder.add_equality_rows(n * nx);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < nx; ++r) {
      const int row = layout.dynamics_row + i * nx + r;
      builder.eq(row, xi(i + 1, r), -1.0);
      for (int k = 0; k < nx; ++k) builder.eq(row, xi(i, k), zoh.a(r, k));
      for (int k = 0; k < nu; ++k) builder.eq(row, ui(i, k), zoh.b(r, k));
    }
  }

  Vector c;
  add_common(problem, Vector::Constant(n, zoh.dt), builder, layout, c);
  c.conservativeResize(builder.num_variables());
  return {std::move(builder).finish(c), layout, problem.cost.terminal_weight};
}

Solution solve(const ConicFormulation& formulation,
               const SolverSettings& settings) {
  conic::Settings cs;
  cs.feas_tol = settings.feas_tol;
  cs.abs_tol = settings.gap_tol;
  cs.rel_tol = settings.gap_tol;
  cs.max_iterations = settings.max_iterations;
  const conic::Result res = conic::solve(formulation.program, cs);

  Solution sol;
  sol.solver_status = res.status;
  sol.iterations = res.iterations;
  sol.primal_residual = res.primal_residual;
  sol.dual_residual = res.dual_residual;
  sol.gap = res.gap;
  switch (res.status) {
    case conic::Status::optimal:
      sol.status = SolveStatus::optimal;
      break;
    case conic::Status::primal_infeasible:
      sol.status = SolveStatus::infeasible;
      return sol;
    default:
      sol.status = SolveStatus::numerical_failure;
      return sol;
  }

  const ProgramLayout& l = formulation.layout;
  sol.x = split(res.x, l.x_offset, l.n_segments + 1, l.nx);
  sol.u = split(res.x, l.u_offset, l.n_controls, l.nu);
  sol.sigma = res.x.segment(l.sigma_offset, l.n_controls);
  sol.eta = split(res.y, l.dynamics_row, l.n_segments, l.nx);
  sol.mu1 = res.y.segment(l.initial_row, l.nx);
  sol.mu2 = res.y.segment(l.terminal_row, l.terminal_rows);
  sol.cost = res.primal_cost;
  return sol;
}

Solution solve(const TrajectoryProblem& problem,
               const SolverSettings& settings) {
  return solve(build_program(problem), settings);
}

double evaluate_cost(const CostSpec& cost, const Solution& solution) {
  double total = 0.0;
  if (cost.terminal_weight > 0.0) {
    total += cost.terminal_weight *
             (solution.x.back() - cost.terminal_target).norm();
  }
  const auto n = solution.sigma.size();
  // ZOH solutions carry N sigmas; use rectangle weights from the FOH grid.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = n == cost.quadrature_weights.size()
                         ? cost.quadrature_weights(i)
                         : cost.quadrature_weights.sum() / n;
    const double s = solution.sigma(i);
    total += w * (cost.running == RunningCost::linear ? s : s * s);
  }
  return total;
}

AssumptionReport assumption_diagnostics(const TrajectoryProblem& problem,
                                        const SolverSettings& settings) {
  problem.validate();
  AssumptionReport report;
  const ConicFormulation f = build_program(with_rho_eff(problem, problem.rho_min, false));
  const ProgramLayout& l = f.layout;

  // Equality Jacobian over the primary variables (x, u, sigma).
  const int rows = l.dynamics_equalities() + l.nx + problem.terminal.rows();
  const Matrix full = Matrix(f.program.a);
  const Matrix jac = full.topLeftCorner(rows, l.primary_variables());
  Eigen::JacobiSVD<Matrix> svd(jac);
  const Vector& sv = svd.singularValues();
  const double cutoff = std::max(jac.rows(), jac.cols()) *
                        std::numeric_limits<double>::epsilon() *
                        (sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) ++rank;
  }
  report.equality_rows = rows;
  report.jacobian_rank = rank;
  report.full_row_rank = rank == rows;
  report.controllability = check_controllability(problem.disc);

  // Slater probe: maximize t subject to the dynamics, the boundary rows,
  // ||u_i|| <= rho_max - t and t >= 0.
  const int nx = l.nx;
  const int nu = l.nu;
  const int n = l.n_segments;
  const int n_vars = (n + 1) * (nx + nu) + 1;
  const int t_var = n_vars - 1;
  conic::ConicProgram probe;
  probe.c = Vector::Zero(n_vars);
  probe.c(t_var) = -1.0;
  {
    // Reuse the dynamics/boundary rows over (x, u); sigma columns are dropped.
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < f.program.a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(f.program.a, k); it; ++it) {
        if (it.row() < rows && it.col() < l.sigma_offset) {
          trip.emplace_back(it.row(), it.col(), it.value());
        }
      }
    }
    probe.a.resize(rows, n_vars);
    probe.a.setFromTriplets(trip.begin(), trip.end());
    probe.b = f.program.b.head(rows);
  }
  {
    std::vector<Eigen::Triplet<double>> trip;
    const int m = 1 + (n + 1) * (nu + 1);
    probe.h = Vector::Zero(m);
    trip.emplace_back(0, t_var, -1.0);  // t >= 0
    for (int i = 0; i <= n; ++i) {
      const int r = 1 + i * (nu + 1);
      trip.emplace_back(r, t_var, 1.0);
      probe.h(r) = problem.rho_max;
      for (int k = 0; k < nu; ++k) {
        trip.emplace_back(r + 1 + k, l.u_offset + i * nu + k, -1.0);
      }
    }
    probe.g.resize(m, n_vars);
    probe.g.setFromTriplets(trip.begin(), trip.end());
    probe.cones.nonneg = 1;
    probe.cones.soc.assign(n + 1, nu + 1);
  }
  conic::Settings cs;
  cs.feas_tol = settings.feas_tol;
  cs.abs_tol = settings.gap_tol;
  cs.rel_tol = settings.gap_tol;
  cs.max_iterations = settings.max_iterations;
  const conic::Result res = conic::solve(probe, cs);
  if (res.status == conic::Status::optimal) {
    report.slater.status = SolveStatus::optimal;
    report.slater.margin = res.x(t_var);
    report.slater.strictly_feasible =
        report.slater.margin > 1e-6 * problem.rho_max;
  } else if (res.status == conic::Status::primal_infeasible) {
    report.slater.status = SolveStatus::infeasible;
  } else {
    report.slater.status = SolveStatus::numerical_failure;
  }
  return report;
}

}  // namespace lcvx
