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

#include "lcvx/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "lcvx/errors.hpp"

namespace lcvx::conic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.norm(); }

Vector identity_element(const ConeDims& cones) {
  Vector e = Vector::Zero(cones.size());
  e.head(cones.nonneg).setOnes();
  int offset = cones.nonneg;
  for (int dim : cones.soc) {
    e(offset) = 1.0;
    offset += dim;
  }
  return e;
}

// Smallest positive root of  a t^2 + 2 b t + c = 0  with c > 0, or +inf.
double first_positive_root(double a, double b, double c) {
  if (c <= 0.0) return 0.0;
  if (std::abs(a) < 1e-300) {
    return b < 0.0 ? -c / (2.0 * b) : kInf;
  }
  const double disc = b * b - a * c;
  if (disc < 0.0) return kInf;  // a > 0 here: never leaves the cone
  const double sq = std::sqrt(disc);
  // Stable pair of roots.
  const double q = -(b + std::copysign(sq, b));
  const double r1 = q / a;
  const double r2 = q != 0.0 ? c / q : kInf;
  double best = kInf;
  if (r1 > 0.0) best = std::min(best, r1);
  if (r2 > 0.0) best = std::min(best, r2);
  return best;
}

// Solves the regularized quasi-definite KKT system
//   [ reg   A'    G'        ] [dx]   [rx]
//   [ A    -reg   0         ] [dy] = [ry]
//   [ G     0    -W^2 - reg ] [dz]   [rz]
// with iterative refinement against the unregularized matrix.
class KktSolver {
 public:
  KktSolver(const ConicProgram& prog, const NtScaling& scaling,
            const Settings& settings)
      : prog_(prog), scaling_(scaling), settings_(settings) {
    // A pivot can cancel to exactly zero at the configured regularization;
    // refinement runs against the unregularized matrix, so escalating is safe.
    double reg = settings.static_regularization;
    for (int attempt = 0; attempt < 4 && !ok_; ++attempt, reg *= 10.0) {
      ldlt_.compute(assemble(reg));
      ok_ = ldlt_.info() == Eigen::Success;
    }
  }

  bool ok() const { return ok_; }

  Vector solve(const Vector& rhs) const {
    Vector sol = ldlt_.solve(rhs);
    for (int k = 0; k < settings_.refinement_steps; ++k) {
      const Vector residual = rhs - multiply(sol);
      if (residual.lpNorm<Eigen::Infinity>() <=
          1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
        break;
      }
      sol += ldlt_.solve(residual);
    }
    return sol;
  }

 private:
  SparseMatrix assemble(double reg) const {
    const ConicProgram& prog = prog_;
    const int n = prog.num_variables();
    const int p = prog.num_equalities();
    const int m = prog.num_inequalities();
    const int dim = n + p + m;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(prog.a.nonZeros() + prog.g.nonZeros() + dim + 64 * m);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, reg);
    for (int k = 0; k < prog.a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(prog.a, k); it; ++it) {
        trip.emplace_back(n + it.row(), it.col(), it.value());
      }
    }
    for (int k = 0; k < prog.g.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(prog.g, k); it; ++it) {
        trip.emplace_back(n + p + it.row(), it.col(), it.value());
      }
    }
    for (int i = 0; i < p; ++i) trip.emplace_back(n + i, n + i, -reg);
    const ConeDims& cones = prog.cones;
    for (int i = 0; i < cones.nonneg; ++i) {
      const int r = n + p + i;
      trip.emplace_back(r, r, -scaling_.nonneg_squared(i) - reg);
    }
    int offset = n + p + cones.nonneg;
    for (std::size_t k = 0; k < cones.soc.size(); ++k) {
      const Matrix w2 = scaling_.soc_block_squared(static_cast<int>(k));
      const int d = cones.soc[k];
      for (int j = 0; j < d; ++j) {
        for (int i = j; i < d; ++i) {
          const double v = -w2(i, j) - (i == j ? reg : 0.0);
          trip.emplace_back(offset + i, offset + j, v);
        }
      }
      offset += d;
    }
    SparseMatrix kkt(dim, dim);
    kkt.setFromTriplets(trip.begin(), trip.end());
    return kkt;
  }

  Vector multiply(const Vector& v) const {
    const int n = prog_.num_variables();
    const int p = prog_.num_equalities();
    const int m = prog_.num_inequalities();
    const auto vx = v.head(n);
    const auto vy = v.segment(n, p);
    const Vector vz = v.tail(m);
    Vector out(v.size());
    out.head(n) = prog_.a.transpose() * vy + prog_.g.transpose() * vz;
    out.segment(n, p) = prog_.a * vx;
    out.tail(m) = prog_.g * vx - scaling_.apply(scaling_.apply(vz));
    return out;
  }

  const ConicProgram& prog_;
  const NtScaling& scaling_;
  const Settings& settings_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  bool ok_ = false;
};

struct Direction {
  Vector dx, dy, dz, ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

}  // namespace

int ConeDims::size() const {
  int total = nonneg;
  for (int d : soc) total += d;
  return total;
}

int ConeDims::degree() const {
  return nonneg + static_cast<int>(soc.size());
}

std::string to_string(Status status) {
  switch (status) {
    case Status::optimal:
      return "optimal";
    case Status::primal_infeasible:
      return "primal_infeasible";
    case Status::dual_infeasible:
      return "dual_infeasible";
    case Status::max_iterations:
      return "max_iterations";
    case Status::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  const auto n = c.size();
  if (a.cols() != n || a.rows() != b.size()) {
    throw ValidationError("conic program: A/b dimensions disagree with c");
  }
  if (g.cols() != n || g.rows() != h.size()) {
    throw ValidationError("conic program: G/h dimensions disagree with c");
  }
  if (cones.size() != h.size()) {
    throw ValidationError("conic program: cone dimensions do not match h");
  }
  if (cones.nonneg < 0) throw ValidationError("negative orthant dimension");
  for (int d : cones.soc) {
    if (d < 1) throw ValidationError("second-order cone dimension must be >= 1");
  }
  if (!c.allFinite() || !b.allFinite() || !h.allFinite()) {
    throw ValidationError("conic program has non-finite data");
  }
}

double min_eigenvalue(const ConeDims& cones, const Vector& x) {
  double lo = kInf;
  for (int i = 0; i < cones.nonneg; ++i) lo = std::min(lo, x(i));
  int offset = cones.nonneg;
  for (int d : cones.soc) {
    lo = std::min(lo, x(offset) - safe_norm(x.segment(offset + 1, d - 1)));
    offset += d;
  }
  return lo;
}

double max_step(const ConeDims& cones, const Vector& x, const Vector& d) {
  double alpha = kInf;
  for (int i = 0; i < cones.nonneg; ++i) {
    if (d(i) < 0.0) alpha = std::min(alpha, -x(i) / d(i));
  }
  int offset = cones.nonneg;
  for (int dim : cones.soc) {
    const double x0 = x(offset);
    const double d0 = d(offset);
    const auto x1 = x.segment(offset + 1, dim - 1);
    const auto d1 = d.segment(offset + 1, dim - 1);
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = x0 * d0 - x1.dot(d1);
    const double c = x0 * x0 - x1.squaredNorm();
    alpha = std::min(alpha, first_positive_root(a, b, std::max(c, 0.0)));
    if (d0 < 0.0) alpha = std::min(alpha, -x0 / d0);
    offset += dim;
  }
  return alpha;
}

Vector jordan_product(const ConeDims& cones, const Vector& u, const Vector& v) {
  Vector out(u.size());
  out.head(cones.nonneg) =
      u.head(cones.nonneg).cwiseProduct(v.head(cones.nonneg));
  int offset = cones.nonneg;
  for (int d : cones.soc) {
    const auto u1 = u.segment(offset + 1, d - 1);
    const auto v1 = v.segment(offset + 1, d - 1);
    out(offset) = u.segment(offset, d).dot(v.segment(offset, d));
    out.segment(offset + 1, d - 1) = u(offset) * v1 + v(offset) * u1;
    offset += d;
  }
  return out;
}

Vector jordan_divide(const ConeDims& cones, const Vector& lambda,
                     const Vector& d) {
  Vector out(d.size());
  out.head(cones.nonneg) =
      d.head(cones.nonneg).cwiseQuotient(lambda.head(cones.nonneg));
  int offset = cones.nonneg;
  for (int dim : cones.soc) {
    const double l0 = lambda(offset);
    const auto l1 = lambda.segment(offset + 1, dim - 1);
    const double d0 = d(offset);
    const auto d1 = d.segment(offset + 1, dim - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    const double x0 = (l0 * d0 - l1.dot(d1)) / det;
    out(offset) = x0;
    out.segment(offset + 1, dim - 1) = (d1 - x0 * l1) / l0;
    offset += dim;
  }
  return out;
}

NtScaling::NtScaling(const ConeDims& cones, const Vector& s, const Vector& z)
    : cones_(cones) {
  d_ = (s.head(cones.nonneg).cwiseQuotient(z.head(cones.nonneg))).cwiseSqrt();
  int offset = cones.nonneg;
  for (int dim : cones.soc) {
    const auto sk = s.segment(offset, dim);
    const auto zk = z.segment(offset, dim);
    const double s_res = sk(0) * sk(0) - sk.tail(dim - 1).squaredNorm();
    const double z_res = zk(0) * zk(0) - zk.tail(dim - 1).squaredNorm();
    const double s_norm = std::sqrt(std::max(s_res, 0.0));
    const double z_norm = std::sqrt(std::max(z_res, 0.0));
    const Vector sbar = sk / s_norm;
    const Vector zbar = zk / z_norm;
    const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    Vector w = sbar;
    w(0) += zbar(0);
    w.tail(dim - 1) -= zbar.tail(dim - 1);
    w /= 2.0 * gamma;
    wbar_.push_back(std::move(w));
    eta_.push_back(std::sqrt(s_norm / z_norm));
    offset += dim;
  }
  lambda_ = apply(z);
}

Vector NtScaling::apply(const Vector& v) const {
  Vector out(v.size());
  out.head(cones_.nonneg) = d_.cwiseProduct(v.head(cones_.nonneg));
  int offset = cones_.nonneg;
  for (std::size_t k = 0; k < cones_.soc.size(); ++k) {
    const int dim = cones_.soc[k];
    const Vector& w = wbar_[k];
    const double w0 = w(0);
    const auto w1 = w.tail(dim - 1);
    const double v0 = v(offset);
    const auto v1 = v.segment(offset + 1, dim - 1);
    const double w1v1 = w1.dot(v1);
    out(offset) = eta_[k] * (w0 * v0 + w1v1);
    out.segment(offset + 1, dim - 1) =
        eta_[k] * (v1 + (v0 + w1v1 / (1.0 + w0)) * w1);
    offset += dim;
  }
  return out;
}

Vector NtScaling::apply_inverse(const Vector& v) const {
  Vector out(v.size());
  out.head(cones_.nonneg) = v.head(cones_.nonneg).cwiseQuotient(d_);
  int offset = cones_.nonneg;
  for (std::size_t k = 0; k < cones_.soc.size(); ++k) {
    const int dim = cones_.soc[k];
    const Vector& w = wbar_[k];
    const double w0 = w(0);
    const auto w1 = w.tail(dim - 1);
    const double v0 = v(offset);
    const auto v1 = v.segment(offset + 1, dim - 1);
    const double w1v1 = w1.dot(v1);
    out(offset) = (w0 * v0 - w1v1) / eta_[k];
    out.segment(offset + 1, dim - 1) =
        (v1 + (-v0 + w1v1 / (1.0 + w0)) * w1) / eta_[k];
    offset += dim;
  }
  return out;
}

Matrix NtScaling::soc_block_squared(int k) const {
  const int dim = cones_.soc[k];
  const Vector& w = wbar_[k];
  const auto w1 = w.tail(dim - 1);
  Matrix wm(dim, dim);
  wm(0, 0) = w(0);
  wm.block(0, 1, 1, dim - 1) = w1.transpose();
  wm.block(1, 0, dim - 1, 1) = w1;
  wm.block(1, 1, dim - 1, dim - 1) =
      Matrix::Identity(dim - 1, dim - 1) + w1 * w1.transpose() / (1.0 + w(0));
  return eta_[k] * eta_[k] * wm * wm;
}

Result solve(const ConicProgram& prog, const Settings& settings) {
  prog.validate();
  const ConeDims& cones = prog.cones;
  const int n = prog.num_variables();
  const int p = prog.num_equalities();
  const int m = prog.num_inequalities();
  const Vector e = identity_element(cones);
  const double degree = cones.degree();

  const double c_scale = std::max(1.0, safe_norm(prog.c));
  const double b_scale = std::max(1.0, safe_norm(prog.b));
  const double h_scale = std::max(1.0, safe_norm(prog.h));

  Result result;

  // Initial point from two least-squares solves with W = I.
  Vector x, y, z, s;
  {
    const NtScaling unit(cones, e, e);
    const KktSolver kkt(prog, unit, settings);
    if (!kkt.ok()) {
      result.status = Status::numerical_failure;
      return result;
    }
    Vector rhs(n + p + m);
    rhs << Vector::Zero(n), prog.b, prog.h;
    Vector sol = kkt.solve(rhs);
    x = sol.head(n);
    s = -sol.tail(m);
    const double alpha_p = -min_eigenvalue(cones, s);
    if (alpha_p >= 0.0) s += (1.0 + alpha_p) * e;

    rhs << -prog.c, Vector::Zero(p), Vector::Zero(m);
    sol = kkt.solve(rhs);
    y = sol.segment(n, p);
    z = sol.tail(m);
    const double alpha_d = -min_eigenvalue(cones, z);
    if (alpha_d >= 0.0) z += (1.0 + alpha_d) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;

  auto finish = [&](Status status) {
    result.status = status;
    result.x = x;
    result.y = y;
    result.z = z;
    result.s = s;
    return result;
  };

  for (int iter = 0;; ++iter) {
    result.iterations = iter;
    const Vector aty = prog.a.transpose() * y;
    const Vector gtz = prog.g.transpose() * z;
    const Vector ax = prog.a * x;
    const Vector gx = prog.g * x;
    const Vector rx = aty + gtz + tau * prog.c;
    const Vector ry = ax - tau * prog.b;
    const Vector rz = gx + s - tau * prog.h;
    const double cx = prog.c.dot(x);
    const double by_hz = prog.b.dot(y) + prog.h.dot(z);
    const double rt = kappa + cx + by_hz;

    if (!x.allFinite() || !y.allFinite() || !z.allFinite() ||
        !s.allFinite() || !std::isfinite(tau) || !std::isfinite(kappa)) {
      return finish(Status::numerical_failure);
    }

    result.primal_residual =
        std::max(safe_norm(ry) / b_scale, safe_norm(rz) / h_scale) / tau;
    result.dual_residual = safe_norm(rx) / c_scale / tau;
    result.primal_cost = cx / tau;
    result.dual_cost = -by_hz / tau;
    result.gap = s.dot(z) / (tau * tau);
    double rel_gap = kInf;
    if (result.primal_cost < 0.0) {
      rel_gap = result.gap / -result.primal_cost;
    } else if (result.dual_cost > 0.0) {
      rel_gap = result.gap / result.dual_cost;
    }

    if (result.primal_residual <= settings.feas_tol &&
        result.dual_residual <= settings.feas_tol &&
        (result.gap <= settings.abs_tol || rel_gap <= settings.rel_tol)) {
      x /= tau;
      y /= tau;
      z /= tau;
      s /= tau;
      return finish(Status::optimal);
    }
    if (by_hz < 0.0) {
      const double cert = safe_norm(aty + gtz) / -by_hz;
      if (cert <= settings.feas_tol) {
        y /= -by_hz;
        z /= -by_hz;
        return finish(Status::primal_infeasible);
      }
    }
    if (cx < 0.0) {
      const double cert =
          std::max(safe_norm(ax) / b_scale, safe_norm(gx + s) / h_scale) / -cx;
      if (cert <= settings.feas_tol) {
        x /= -cx;
        s /= -cx;
        return finish(Status::dual_infeasible);
      }
    }
    if (iter >= settings.max_iterations) {
      return finish(Status::max_iterations);
    }

    const NtScaling scaling(cones, s, z);
    const KktSolver kkt(prog, scaling, settings);
    if (!kkt.ok()) return finish(Status::numerical_failure);
    const Vector& lambda = scaling.lambda();

    Vector rhs(n + p + m);
    rhs << -prog.c, prog.b, prog.h;
    const Vector u1 = kkt.solve(rhs);
    const double tau_den = -kappa / tau + prog.c.dot(u1.head(n)) +
                           prog.b.dot(u1.segment(n, p)) +
                           prog.h.dot(u1.tail(m));

    // Newton direction for residual scale `keep`, complementarity target
    // lambda o xi = ds and tau*kappa target dk.
    auto direction = [&](double keep, const Vector& ds, double dk) {
      const Vector xi = jordan_divide(cones, lambda, ds);
      const Vector wxi = scaling.apply(xi);
      rhs << -keep * rx, -keep * ry, -keep * rz + wxi;
      const Vector u0 = kkt.solve(rhs);
      const double num = -keep * rt + dk / tau - prog.c.dot(u0.head(n)) -
                         prog.b.dot(u0.segment(n, p)) -
                         prog.h.dot(u0.tail(m));
      Direction dir;
      dir.dtau = num / tau_den;
      const Vector full = u0 + dir.dtau * u1;
      dir.dx = full.head(n);
      dir.dy = full.segment(n, p);
      dir.dz = full.tail(m);
      dir.ds = -scaling.apply(xi + scaling.apply(dir.dz));
      dir.dkappa = -(dk + kappa * dir.dtau) / tau;
      return dir;
    };
    auto step_to_boundary = [&](const Direction& dir) {
      double alpha = std::min(max_step(cones, s, dir.ds),
                              max_step(cones, z, dir.dz));
      if (dir.dtau < 0.0) alpha = std::min(alpha, -tau / dir.dtau);
      if (dir.dkappa < 0.0) alpha = std::min(alpha, -kappa / dir.dkappa);
      return alpha;
    };

    const Vector lambda_sq = jordan_product(cones, lambda, lambda);
    const Direction affine = direction(1.0, lambda_sq, kappa * tau);
    const double alpha_aff = std::min(1.0, step_to_boundary(affine));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);

    const Vector corr =
        jordan_product(cones, scaling.apply_inverse(affine.ds),
                       scaling.apply(affine.dz));
    const Vector ds_comb = lambda_sq + corr - sigma * mu * e;
    const double dk_comb =
        kappa * tau + affine.dkappa * affine.dtau - sigma * mu;
    const Direction dir = direction(1.0 - sigma, ds_comb, dk_comb);
    const double alpha =
        std::min(1.0, settings.step_fraction * step_to_boundary(dir));
    if (!(alpha > 1e-12)) return finish(Status::numerical_failure);

    x += alpha * dir.dx;
    y += alpha * dir.dy;
    z += alpha * dir.dz;
    s += alpha * dir.ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
  }
}

}  // namespace lcvx::conic
