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

#include "lcvx/discretization.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lcvx/errors.hpp"

namespace lcvx {
namespace {

void require_grid(double t_f, int n_segments, int substeps) {
  if (!std::isfinite(t_f) || t_f <= 0.0) {
    throw ValidationError("t_f must be positive and finite");
  }
  if (n_segments < 1) throw ValidationError("n_segments must be >= 1");
  if (substeps < 1) throw ValidationError("substeps must be >= 1");
}

// Right-hand side of the three STM equations. `s` is the time elapsed since
// the start of the segment.
struct StmState {
  Matrix phi_a;
  Matrix phi_b0;
  Matrix phi_b1;
};

StmState stm_rhs(const ContinuousSystem& sys, const StmState& y, double s,
                 double dt) {
  const double lam_begin = (dt - s) / dt;
  const double lam_end = s / dt;
  return {sys.a_c * y.phi_a, sys.a_c * y.phi_b0 + sys.b_c * lam_begin,
          sys.a_c * y.phi_b1 + sys.b_c * lam_end};
}

StmState axpy(const StmState& y, double h, const StmState& k) {
  return {y.phi_a + h * k.phi_a, y.phi_b0 + h * k.phi_b0,
          y.phi_b1 + h * k.phi_b1};
}

}  // namespace

void ContinuousSystem::validate() const {
  if (a_c.rows() == 0 || a_c.rows() != a_c.cols()) {
    throw ValidationError("a_c must be a non-empty square matrix");
  }
  if (b_c.rows() != a_c.rows() || b_c.cols() == 0) {
    std::ostringstream msg;
    msg << "b_c must have " << a_c.rows() << " rows and at least one column";
    throw ValidationError(msg.str());
  }
  if (!a_c.allFinite() || !b_c.allFinite()) {
    throw ValidationError("continuous system has non-finite entries");
  }
}

void DiscreteSystem::validate() const {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw ValidationError("discrete a must be a non-empty square matrix");
  }
  if (b0.rows() != a.rows() || b1.rows() != a.rows() ||
      b0.cols() != b1.cols() || b0.cols() == 0) {
    throw ValidationError("discrete b0/b1 dimensions disagree with a");
  }
  if (!a.allFinite() || !b0.allFinite() || !b1.allFinite()) {
    throw ValidationError("discrete system has non-finite entries");
  }
  if (n_segments < 1 || !(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("discrete grid must have n_segments >= 1, dt > 0");
  }
  if (std::abs(dt * n_segments - t_f) > 1e-12 * std::abs(t_f)) {
    throw ValidationError("discrete grid violates dt * N == t_f");
  }
}

DiscreteSystem integrate_stm(const ContinuousSystem& sys, double t_f,
                             int n_segments, int substeps) {
  sys.validate();
  require_grid(t_f, n_segments, substeps);

  const int nx = sys.nx();
  const int nu = sys.nu();
  const double dt = t_f / n_segments;
  const double h = dt / substeps;

  StmState y{Matrix::Identity(nx, nx), Matrix::Zero(nx, nu),
             Matrix::Zero(nx, nu)};
  for (int k = 0; k < substeps; ++k) {
    const double s = k * h;
    const StmState k1 = stm_rhs(sys, y, s, dt);
    const StmState k2 = stm_rhs(sys, axpy(y, 0.5 * h, k1), s + 0.5 * h, dt);
    const StmState k3 = stm_rhs(sys, axpy(y, 0.5 * h, k2), s + 0.5 * h, dt);
    const StmState k4 = stm_rhs(sys, axpy(y, h, k3), s + h, dt);
    y.phi_a += (h / 6.0) * (k1.phi_a + 2.0 * k2.phi_a + 2.0 * k3.phi_a + k4.phi_a);
    y.phi_b0 +=
        (h / 6.0) * (k1.phi_b0 + 2.0 * k2.phi_b0 + 2.0 * k3.phi_b0 + k4.phi_b0);
    y.phi_b1 +=
        (h / 6.0) * (k1.phi_b1 + 2.0 * k2.phi_b1 + 2.0 * k3.phi_b1 + k4.phi_b1);
  }

  DiscreteSystem disc{std::move(y.phi_a), std::move(y.phi_b0),
                      std::move(y.phi_b1), dt, n_segments, t_f};
  disc.validate();
  return disc;
}

ZohSystem discretize_zoh(const ContinuousSystem& sys, double t_f,
                         int n_segments, int substeps) {
  sys.validate();
  require_grid(t_f, n_segments, substeps);

  const int nx = sys.nx();
  const double dt = t_f / n_segments;
  const double h = dt / substeps;

  // Augmented system d/dt [phi_a, phi_b] = a_c [phi_a, phi_b] + [0, b_c].
  Matrix y(nx, nx + sys.nu());
  y << Matrix::Identity(nx, nx), Matrix::Zero(nx, sys.nu());
  Matrix forcing = Matrix::Zero(nx, nx + sys.nu());
  forcing.rightCols(sys.nu()) = sys.b_c;
  auto rhs = [&](const Matrix& v) -> Matrix { return sys.a_c * v + forcing; };
  for (int k = 0; k < substeps; ++k) {
    const Matrix k1 = rhs(y);
    const Matrix k2 = rhs(y + 0.5 * h * k1);
    const Matrix k3 = rhs(y + 0.5 * h * k2);
    const Matrix k4 = rhs(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {y.leftCols(nx), y.rightCols(sys.nu()), dt, n_segments, t_f};
}

ControllabilityResult check_controllability(const DiscreteSystem& disc) {
  disc.validate();
  const int nx = disc.nx();
  const int nu = disc.nu();
  const Matrix m = disc.b0 + disc.a * disc.b1;

  Matrix krylov(nx, nx * nu);
  Matrix block = m;
  for (int k = 0; k < nx; ++k) {
    krylov.middleCols(k * nu, nu) = block;
    block = disc.a * block;
  }

  Eigen::JacobiSVD<Matrix> svd(krylov);
  const Vector& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff =
      nx * std::numeric_limits<double>::epsilon() * sigma_max;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff && sv(k) > 0.0) ++rank;
  }
  return {rank, rank == nx};
}

VectorSequence rollout(const DiscreteSystem& disc, const Vector& x_init,
                       const VectorSequence& u) {
  disc.validate();
  const auto n = static_cast<std::size_t>(disc.n_segments);
  if (u.size() != n + 1) {
    std::ostringstream msg;
    msg << "rollout expects " << n + 1 << " controls, got " << u.size();
    throw ValidationError(msg.str());
  }
  if (x_init.size() != disc.nx()) {
    throw ValidationError("rollout x_init has wrong dimension");
  }
  for (const auto& ui : u) {
    if (ui.size() != disc.nu()) {
      throw ValidationError("rollout control has wrong dimension");
    }
  }
  VectorSequence x(n + 1);
  x[0] = x_init;
  for (std::size_t i = 0; i < n; ++i) {
    x[i + 1] = disc.a * x[i] + disc.b0 * u[i] + disc.b1 * u[i + 1];
  }
  return x;
}

VectorSequence rollout(const ZohSystem& disc, const Vector& x_init,
                       const VectorSequence& u) {
  const auto n = static_cast<std::size_t>(disc.n_segments);
  if (u.size() != n) {
    std::ostringstream msg;
    msg << "ZOH rollout expects " << n << " controls, got " << u.size();
    throw ValidationError(msg.str());
  }
  if (x_init.size() != disc.nx()) {
    throw ValidationError("rollout x_init has wrong dimension");
  }
  VectorSequence x(n + 1);
  x[0] = x_init;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i].size() != disc.nu()) {
      throw ValidationError("rollout control has wrong dimension");
    }
    x[i + 1] = disc.a * x[i] + disc.b * u[i];
  }
  return x;
}

}  // namespace lcvx
