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

#include "lcvx/types.hpp"

namespace lcvx {

/// Continuous LTI pair defining  xdot = a_c x + b_c u.
struct ContinuousSystem {
  Matrix a_c;
  Matrix b_c;

  int nx() const { return static_cast<int>(a_c.rows()); }
  int nu() const { return static_cast<int>(b_c.cols()); }

  /// Throws ValidationError unless a_c is square, b_c has nx rows and every
  /// entry is finite.
  void validate() const;
};

/// First-order-hold discrete dynamics  x[i+1] = a x[i] + b0 u[i] + b1 u[i+1]
/// on a uniform grid of n_segments edges of length dt.
struct DiscreteSystem {
  Matrix a;
  Matrix b0;
  Matrix b1;
  double dt = 0.0;
  int n_segments = 0;
  double t_f = 0.0;

  int nx() const { return static_cast<int>(a.rows()); }
  int nu() const { return static_cast<int>(b0.cols()); }

  /// Time of vertex i (zero based).
  double vertex_time(int i) const { return i * dt; }

  void validate() const;
};

/// Zero-order-hold pair  x[i+1] = a x[i] + b u[i]  (one control per edge).
struct ZohSystem {
  Matrix a;
  Matrix b;
  double dt = 0.0;
  int n_segments = 0;
  double t_f = 0.0;

  int nx() const { return static_cast<int>(a.rows()); }
  int nu() const { return static_cast<int>(b.cols()); }
};

struct ControllabilityResult {
  int rank = 0;
  bool controllable = false;
};

inline constexpr int kDefaultStmSubsteps = 64;

/// Integrates the three state-transition-matrix ODEs over one segment with
/// fixed-step classical RK4. The system is time invariant and the grid is
/// uniform, so the result applies to every segment.
DiscreteSystem integrate_stm(const ContinuousSystem& sys, double t_f,
                             int n_segments,
                             int substeps = kDefaultStmSubsteps);

ZohSystem discretize_zoh(const ContinuousSystem& sys, double t_f,
                         int n_segments, int substeps = kDefaultStmSubsteps);

/// Rank of [M, A M, ..., A^(nx-1) M] with M = b0 + a b1, using a singular
/// value cutoff of nx * eps * sigma_max.
ControllabilityResult check_controllability(const DiscreteSystem& disc);

/// Propagates x_init through the FOH recursion. `u` must hold N+1 controls.
VectorSequence rollout(const DiscreteSystem& disc, const Vector& x_init,
                       const VectorSequence& u);

/// ZOH counterpart of rollout; `u` holds N controls.
VectorSequence rollout(const ZohSystem& disc, const Vector& x_init,
                       const VectorSequence& u);

}  // namespace lcvx
