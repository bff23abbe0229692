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

#include "lcvx/program.hpp"

namespace lcvx {

enum class BoundKind { below, above };

std::string to_string(BoundKind kind);

struct VertexViolation {
  int index = 0;
  double norm = 0.0;
  BoundKind kind = BoundKind::below;
};

struct EdgeViolation {
  int first = 0;
  int second = 0;
  double min_norm = 0.0;
  double max_norm = 0.0;
  BoundKind kind = BoundKind::below;
};

struct CertificationReport {
  std::vector<VertexViolation> vertex_violations;
  std::vector<EdgeViolation> edge_violations;
  std::vector<double> vertex_norms;
  std::vector<double> edge_min_norms;
  std::vector<double> edge_max_norms;
  bool duals_checked = false;
  double eta_n_norm = 0.0;
  bool eta_n_zero = false;
  std::vector<int> vertex_condition_failures;
  double tolerance = 0.0;

  int lower_vertex_violations() const;
  /// Edges with at least one violated bound.
  int violated_edges() const;
};

/// Largest admissible control jump for effective lower bound rho_eff:
/// 2 sqrt(rho_eff^2 - rho_min^2). Throws DomainError if rho_eff < rho_min.
double delta_bound(double rho_eff, double rho_min);

/// min over t in [0,1] of ||(1-t) a + t b||, in closed form.
double edge_min_norm(const Vector& a, const Vector& b);

/// max over t in [0,1] of ||(1-t) a + t b||; the norm is convex on the segment.
double edge_max_norm(const Vector& a, const Vector& b);

inline double default_violation_tol(double rho_max) { return 1e-4 * rho_max; }
inline constexpr double kDefaultEpsEta = 1e-5;
inline constexpr double kDefaultVertexThreshold = 1e-5;

/// Vertex and edge checks of the controls against [rho_min - tol, rho_max + tol].
/// Requires an optimal solution.
CertificationReport certify(const Solution& solution, double rho_min,
                            double rho_max, double tol);

struct DualCheckOptions {
  double eps_eta = kDefaultEpsEta;
  double terminal_scale = 1.0;
  double vertex_threshold = kDefaultVertexThreshold;
};

/// certify() plus the dual diagnostics: the eta_N test and the per-vertex
/// sufficient conditions (failures are informative, not errors).
CertificationReport certify(const Solution& solution, const DiscreteSystem& disc,
                            double rho_min, double rho_max, double tol,
                            const DualCheckOptions& options);

/// Sufficient condition for the bound to hold at vertex `index` (0..N):
/// B0' eta[0] at the first vertex, B1' eta[N-1] at the last and
/// (B0 + A B1)' eta[i] elsewhere must be nonzero, measured as an inf-norm
/// above threshold * (1 + ||eta||).
bool vertex_condition(const Solution& solution, const DiscreteSystem& disc,
                      int index, double threshold);

/// ||eta_N||_inf <= eps_eta * max(1, terminal_scale).
bool eta_n_zero(const Solution& solution, double eps_eta,
                double terminal_scale = 1.0);

}  // namespace lcvx
