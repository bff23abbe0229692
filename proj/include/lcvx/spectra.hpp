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

#include <cstdint>
#include <vector>

#include "lcvx/types.hpp"

namespace lcvx {

struct JordanBlock {
  Complex eigenvalue;
  int size = 1;
  int cluster = 0;  // index into EigenStructure::distinct_eigenvalues
};

/// Jordan decomposition A = P J P^-1 with eigenvalues grouped into clusters.
///
/// Columns of `p` are ordered block by block, following `blocks`; within a
/// block the first column is the eigenvector and the rest are the chain.
/// Conjugate eigenvalue clusters share one perturbation group so that a real
/// shift keeps the perturbed matrix real; `dimension()` is the number of
/// groups and therefore the length of a perturbation vector q.
struct EigenStructure {
  ComplexMatrix p;
  std::vector<JordanBlock> blocks;
  std::vector<Complex> distinct_eigenvalues;
  std::vector<int> cluster_group;
  int num_groups = 0;

  int n() const { return static_cast<int>(p.rows()); }
  int dimension() const { return num_groups; }

  ComplexMatrix jordan() const;
  /// P J P^-1.
  ComplexMatrix reconstruct() const;

  /// Structural checks: block sizes sum to n, cluster/group indices in range,
  /// P invertible. Used for caller-supplied structures.
  void validate() const;
};

struct PerturbationSpec {
  Vector q;
  double eps_a = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultClusterTol = 1e-6;
inline constexpr double kDefaultEpsA = 1e-6;

/// Numerical Jordan form. Eigenvalues closer than cluster_tol are merged; block
/// sizes come from the nullities of powers of (A - lambda I) restricted to the
/// generalized eigenspace. Throws IllConditionedError when P J P^-1 misses A by
/// more than 1e-6 ||A||; supply the structure explicitly in that case.
EigenStructure eigen_structure(const Matrix& a,
                               double cluster_tol = kDefaultClusterTol);

/// Shifts every Jordan block of group j by q[j], keeping block shapes.
Matrix perturb(const EigenStructure& structure, const Vector& q);

/// q_j i.i.d. uniform on [-eps_a, eps_a]; deterministic in `seed`.
PerturbationSpec sample_q(int d, double eps_a, std::uint64_t seed);

}  // namespace lcvx
