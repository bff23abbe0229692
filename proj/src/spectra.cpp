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

#include "lcvx/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "lcvx/errors.hpp"

namespace lcvx {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Orthonormal basis of the numerical null space of m: right singular vectors
// belonging to the `nullity` smallest singular values.
ComplexMatrix null_basis(const ComplexMatrix& m, int nullity) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(nullity);
}

int count_small(const ComplexMatrix& m, double thresh) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  int n = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) <= thresh) ++n;
  }
  // Square input: rank-deficient directions past the singular value count.
  return n + static_cast<int>(m.cols() - sv.size());
}

// Orthonormal basis of span(s) (columns), dropping dependent directions.
ComplexMatrix orth(const ComplexMatrix& s, double thresh) {
  if (s.cols() == 0) return ComplexMatrix(s.rows(), 0);
  Eigen::JacobiSVD<ComplexMatrix> svd(s, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > thresh * std::max(1.0, top)) ++r;
  }
  return svd.matrixU().leftCols(r);
}

// Single-linkage clustering of eigenvalues.
std::vector<std::vector<int>> cluster_eigenvalues(const ComplexVector& ev,
                                                  double tol) {
  const int n = static_cast<int>(ev.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) <= tol) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

struct ClusterChains {
  ComplexMatrix columns;    // n x m, block after block
  std::vector<int> sizes;   // block sizes in column order
};

// Jordan chains of the cluster at `lambda` with algebraic multiplicity m.
ClusterChains cluster_chains(const ComplexMatrix& a, Complex lambda, int m,
                             double rank_tol) {
  const int n = static_cast<int>(a.rows());
  const ComplexMatrix shifted = a - lambda * ComplexMatrix::Identity(n, n);

  ComplexMatrix power = ComplexMatrix::Identity(n, n);
  for (int k = 0; k < m; ++k) power = power * shifted;
  const ComplexMatrix v = null_basis(power, m);

  // Action of (A - lambda I) on the generalized eigenspace, nilpotent up to
  // rounding.
  const ComplexMatrix t = v.adjoint() * shifted * v;
  const double scale = std::max(1.0, t.norm());

  std::vector<int> nullity(m + 1, 0);
  ComplexMatrix tk = ComplexMatrix::Identity(m, m);
  for (int k = 1; k <= m; ++k) {
    tk = tk * t;
    nullity[k] = std::max(nullity[k - 1],
                          count_small(tk, rank_tol * std::pow(scale, k)));
  }
  nullity[m] = m;
  int kmax = 1;
  while (kmax < m && nullity[kmax] < m) ++kmax;

  // blocks_at_least[k] = number of blocks with size >= k.
  std::vector<int> at_least(kmax + 2, 0);
  for (int k = 1; k <= kmax; ++k) at_least[k] = nullity[k] - nullity[k - 1];

  std::vector<ComplexMatrix> kernels(kmax + 1);
  kernels[0] = ComplexMatrix(m, 0);
  tk = ComplexMatrix::Identity(m, m);
  for (int k = 1; k <= kmax; ++k) {
    tk = tk * t;
    kernels[k] = k == kmax ? ComplexMatrix(ComplexMatrix::Identity(m, m))
                           : null_basis(tk, nullity[k]);
  }

  struct Chain {
    ComplexVector top;
    int length;
  };
  std::vector<Chain> chains;
  for (int k = kmax; k >= 1; --k) {
    const int fresh = at_least[k] - at_least[k + 1];
    if (fresh <= 0) continue;
    ComplexMatrix spanning(m, kernels[k - 1].cols());
    spanning = kernels[k - 1];
    for (const auto& c : chains) {
      ComplexVector w = c.top;
      for (int j = 0; j < c.length - k; ++j) w = t * w;
      spanning.conservativeResize(Eigen::NoChange, spanning.cols() + 1);
      spanning.rightCols(1) = w;
    }
    const ComplexMatrix q = orth(spanning, 1e-10);
    const ComplexMatrix residual =
        kernels[k] - q * (q.adjoint() * kernels[k]);
    Eigen::JacobiSVD<ComplexMatrix> svd(residual, Eigen::ComputeThinU);
    for (int j = 0; j < fresh; ++j) {
      chains.push_back({svd.matrixU().col(j), k});
    }
  }

  ClusterChains out;
  out.columns.resize(n, m);
  int col = 0;
  for (const auto& c : chains) {
    // Column order: eigenvector T^(L-1) v first, top vector v last.
    std::vector<ComplexVector> chain(c.length);
    chain[c.length - 1] = c.top;
    for (int j = c.length - 2; j >= 0; --j) chain[j] = t * chain[j + 1];
    for (const auto& w : chain) out.columns.col(col++) = v * w;
    out.sizes.push_back(c.length);
  }
  if (col != m) {
    throw IllConditionedError(
        "ill-conditioned eigenstructure: Jordan chains do not span the "
        "generalized eigenspace; supply the structure explicitly");
  }
  return out;
}

}  // namespace

ComplexMatrix EigenStructure::jordan() const {
  const int size = n();
  ComplexMatrix j = ComplexMatrix::Zero(size, size);
  int offset = 0;
  for (const auto& b : blocks) {
    for (int k = 0; k < b.size; ++k) {
      j(offset + k, offset + k) = b.eigenvalue;
      if (k + 1 < b.size) j(offset + k, offset + k + 1) = 1.0;
    }
    offset += b.size;
  }
  return j;
}

ComplexMatrix EigenStructure::reconstruct() const {
  return p * jordan() * p.partialPivLu().inverse();
}

void EigenStructure::validate() const {
  if (p.rows() == 0 || p.rows() != p.cols()) {
    throw ValidationError("eigenstructure P must be square and non-empty");
  }
  int total = 0;
  for (const auto& b : blocks) {
    if (b.size < 1) throw ValidationError("Jordan block size must be >= 1");
    if (b.cluster < 0 ||
        b.cluster >= static_cast<int>(distinct_eigenvalues.size())) {
      throw ValidationError("Jordan block references an unknown cluster");
    }
    if (std::abs(b.eigenvalue - distinct_eigenvalues[b.cluster]) > 0.0) {
      throw ValidationError("Jordan block eigenvalue differs from its cluster");
    }
    total += b.size;
  }
  if (total != n()) {
    throw ValidationError("Jordan block sizes must sum to the dimension");
  }
  if (cluster_group.size() != distinct_eigenvalues.size()) {
    throw ValidationError("cluster_group must have one entry per cluster");
  }
  for (int g : cluster_group) {
    if (g < 0 || g >= num_groups) {
      throw ValidationError("cluster group index out of range");
    }
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(p);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= kEps * n() * sv(0)) {
    throw ValidationError("eigenstructure P is singular");
  }
}

EigenStructure eigen_structure(const Matrix& a, double cluster_tol) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw ValidationError("eigen_structure expects a non-empty square matrix");
  }
  if (!a.allFinite()) {
    throw ValidationError("eigen_structure input has non-finite entries");
  }
  if (!(cluster_tol > 0.0)) {
    throw ValidationError("cluster_tol must be positive");
  }
  const int n = static_cast<int>(a.rows());
  const double a_norm = a.norm();
  const ComplexMatrix ac = a.cast<Complex>();

  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw IllConditionedError(
        "ill-conditioned eigenstructure: eigenvalue iteration failed; supply "
        "the structure explicitly");
  }
  const ComplexVector ev = es.eigenvalues();
  const auto groups = cluster_eigenvalues(ev, cluster_tol);

  struct Cluster {
    Complex center;
    int multiplicity;
  };
  std::vector<Cluster> clusters;
  for (const auto& g : groups) {
    Complex sum = 0.0;
    for (int i : g) sum += ev(i);
    Complex c = sum / static_cast<double>(g.size());
    if (std::abs(c.imag()) <= cluster_tol) c = Complex(c.real(), 0.0);
    clusters.push_back({c, static_cast<int>(g.size())});
  }
  // Real clusters first, then each upper-half-plane cluster followed by its
  // conjugate partner.
  std::vector<int> order;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].center.imag() == 0.0) order.push_back(static_cast<int>(i));
  }
  std::vector<bool> used(clusters.size(), false);
  std::vector<int> partner(clusters.size(), -1);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].center.imag() <= 0.0 || used[i]) continue;
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (used[j] || clusters[j].center.imag() >= 0.0) continue;
      const double dist =
          std::abs(clusters[j].center - std::conj(clusters[i].center));
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(j);
      }
    }
    if (best < 0 || clusters[best].multiplicity != clusters[i].multiplicity) {
      throw IllConditionedError(
          "ill-conditioned eigenstructure: unmatched complex eigenvalue; "
          "supply the structure explicitly");
    }
    used[i] = used[best] = true;
    partner[i] = best;
    order.push_back(static_cast<int>(i));
    order.push_back(best);
  }

  const double rank_tol = std::max(cluster_tol, 1e3 * kEps);
  EigenStructure out;
  out.p.resize(n, n);
  int col = 0;
  int group = 0;
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const int ci = order[idx];
    const Cluster& c = clusters[ci];
    const int cluster_index = static_cast<int>(out.distinct_eigenvalues.size());
    out.distinct_eigenvalues.push_back(c.center);
    const ClusterChains chains =
        cluster_chains(ac, c.center, c.multiplicity, rank_tol);
    out.p.middleCols(col, c.multiplicity) = chains.columns;
    for (int s : chains.sizes) out.blocks.push_back({c.center, s, cluster_index});
    col += c.multiplicity;

    if (partner[ci] >= 0) {
      // Conjugate partner: conjugated chains, same group.
      const Complex conj_center = std::conj(c.center);
      out.distinct_eigenvalues.push_back(conj_center);
      out.p.middleCols(col, c.multiplicity) = chains.columns.conjugate();
      for (int s : chains.sizes) {
        out.blocks.push_back({conj_center, s, cluster_index + 1});
      }
      col += c.multiplicity;
      out.cluster_group.push_back(group);
      out.cluster_group.push_back(group);
      ++group;
      ++idx;  // partner already handled
    } else {
      out.cluster_group.push_back(group++);
    }
  }
  out.num_groups = group;

  const double residual = (out.reconstruct() - ac).norm();
  if (!(residual <= 1e-6 * std::max(a_norm, kEps))) {
    std::ostringstream msg;
    msg << "ill-conditioned eigenstructure: reconstruction residual "
        << residual << " exceeds 1e-6 * ||A||; supply the structure explicitly";
    throw IllConditionedError(msg.str());
  }
  return out;
}

Matrix perturb(const EigenStructure& structure, const Vector& q) {
  if (q.size() != structure.dimension()) {
    std::ostringstream msg;
    msg << "perturbation vector has length " << q.size() << ", expected "
        << structure.dimension();
    throw ValidationError(msg.str());
  }
  if (!q.allFinite()) throw ValidationError("perturbation has non-finite q");

  const ComplexMatrix p_inv = structure.p.partialPivLu().inverse();
  ComplexMatrix j = structure.jordan();
  const ComplexMatrix a_ref = structure.p * j * p_inv;
  int offset = 0;
  for (const auto& b : structure.blocks) {
    const double shift = q(structure.cluster_group[b.cluster]);
    for (int k = 0; k < b.size; ++k) j(offset + k, offset + k) += shift;
    offset += b.size;
  }
  const ComplexMatrix perturbed = structure.p * j * p_inv;
  const double imag = perturbed.imag().cwiseAbs().maxCoeff();
  const double limit = 1e-9 * std::max(a_ref.norm(), 1.0);
  if (imag > limit) {
    std::ostringstream msg;
    msg << "realness violated: perturbed matrix has imaginary part " << imag;
    throw RealnessError(msg.str());
  }
  return perturbed.real();
}

PerturbationSpec sample_q(int d, double eps_a, std::uint64_t seed) {
  if (d < 0) throw ValidationError("sample_q dimension must be >= 0");
  if (!(eps_a >= 0.0) || !std::isfinite(eps_a)) {
    throw ValidationError("eps_a must be finite and non-negative");
  }
  PerturbationSpec spec{Vector::Zero(d), eps_a, seed};
  if (eps_a == 0.0) return spec;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-eps_a, eps_a);
  for (int i = 0; i < d; ++i) spec.q(i) = dist(rng);
  return spec;
}

}  // namespace lcvx
