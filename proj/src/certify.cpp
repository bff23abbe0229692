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

#include "lcvx/certify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lcvx/errors.hpp"

namespace lcvx {

std::string to_string(BoundKind kind) {
  return kind == BoundKind::below ? "below" : "above";
}

int CertificationReport::lower_vertex_violations() const {
  return static_cast<int>(std::count_if(
      vertex_violations.begin(), vertex_violations.end(),
      [](const VertexViolation& v) { return v.kind == BoundKind::below; }));
}

int CertificationReport::violated_edges() const {
  std::vector<int> firsts;
  for (const auto& e : edge_violations) firsts.push_back(e.first);
  std::sort(firsts.begin(), firsts.end());
  return static_cast<int>(std::unique(firsts.begin(), firsts.end()) -
                          firsts.begin());
}

double delta_bound(double rho_eff, double rho_min) {
  if (!(rho_eff >= rho_min)) {
    std::ostringstream msg;
    msg << "delta_bound: rho_eff " << rho_eff << " below rho_min " << rho_min;
    throw DomainError(msg.str());
  }
  return 2.0 * std::sqrt(rho_eff * rho_eff - rho_min * rho_min);
}

double edge_min_norm(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ValidationError("edge_min_norm: endpoint dimensions differ");
  }
  const Vector g = b - a;
  const double gg = g.squaredNorm();
  if (gg == 0.0) return a.norm();
  const double t = -a.dot(g) / gg;
  if (t >= 0.0 && t <= 1.0) return (a + t * g).norm();
  return std::min(a.norm(), b.norm());
}

double edge_max_norm(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ValidationError("edge_max_norm: endpoint dimensions differ");
  }
  return std::max(a.norm(), b.norm());
}

CertificationReport certify(const Solution& solution, double rho_min,
                            double rho_max, double tol) {
  if (!solution.optimal()) {
    throw ContractError("certify requires an optimal solution, got " +
                        to_string(solution.status));
  }
  CertificationReport report;
  report.tolerance = tol;
  const auto& u = solution.u;
  const double lo = rho_min - tol;
  const double hi = rho_max + tol;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double norm = u[i].norm();
    report.vertex_norms.push_back(norm);
    const int idx = static_cast<int>(i);
    if (norm < lo) report.vertex_violations.push_back({idx, norm, BoundKind::below});
    if (norm > hi) report.vertex_violations.push_back({idx, norm, BoundKind::above});
  }
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double mn = edge_min_norm(u[i], u[i + 1]);
    const double mx = edge_max_norm(u[i], u[i + 1]);
    report.edge_min_norms.push_back(mn);
    report.edge_max_norms.push_back(mx);
    const int a = static_cast<int>(i);
    if (mn < lo) report.edge_violations.push_back({a, a + 1, mn, mx, BoundKind::below});
    if (mx > hi) report.edge_violations.push_back({a, a + 1, mn, mx, BoundKind::above});
  }
  return report;
}

CertificationReport certify(const Solution& solution, const DiscreteSystem& disc,
                            double rho_min, double rho_max, double tol,
                            const DualCheckOptions& options) {
  CertificationReport report = certify(solution, rho_min, rho_max, tol);
  if (solution.eta.empty()) return report;
  report.duals_checked = true;
  report.eta_n_norm = solution.eta.back().lpNorm<Eigen::Infinity>();
  report.eta_n_zero =
      eta_n_zero(solution, options.eps_eta, options.terminal_scale);
  for (int i = 0; i <= disc.n_segments; ++i) {
    if (!vertex_condition(solution, disc, i, options.vertex_threshold)) {
      report.vertex_condition_failures.push_back(i);
    }
  }
  return report;
}

bool vertex_condition(const Solution& solution, const DiscreteSystem& disc,
                      int index, double threshold) {
  const int n = disc.n_segments;
  if (index < 0 || index > n) {
    std::ostringstream msg;
    msg << "vertex index " << index << " outside [0, " << n << "]";
    throw ValidationError(msg.str());
  }
  if (static_cast<int>(solution.eta.size()) != n) {
    throw ContractError("vertex_condition requires N dynamics multipliers");
  }
  Vector v;
  if (index == 0) {
    v = disc.b0.transpose() * solution.eta.front();
  } else if (index == n) {
    v = disc.b1.transpose() * solution.eta.back();
  } else {
    v = (disc.b0 + disc.a * disc.b1).transpose() * solution.eta[index];
  }
  return v.lpNorm<Eigen::Infinity>() > threshold * (1.0 + solution.eta_norm());
}

bool eta_n_zero(const Solution& solution, double eps_eta,
                double terminal_scale) {
  if (solution.eta.empty()) {
    throw ContractError("eta_n_zero requires dynamics multipliers");
  }
  return solution.eta.back().lpNorm<Eigen::Infinity>() <=
         eps_eta * std::max(1.0, terminal_scale);
}

}  // namespace lcvx
