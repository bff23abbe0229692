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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcvx/certify.hpp"
#include "lcvx/discretization.hpp"
#include "lcvx/program.hpp"
#include "lcvx/search.hpp"
#include "lcvx/spectra.hpp"

namespace lcvx {

using Json = nlohmann::ordered_json;

struct RunSettings {
  double eps = 1e-3;
  double eps_a = kDefaultEpsA;
  std::uint64_t seed = 1;
  bool perturb = true;
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iterations = 100;
  std::optional<double> tol_viol;
  double eps_eta = kDefaultEpsEta;
  std::optional<double> rho_eff;

  SearchSettings search_settings() const;
};

/// Everything needed to build a trajectory problem from a file.
struct ProblemConfig {
  ContinuousSystem system;
  double t_f = 0.0;
  int n_segments = 0;
  int substeps = kDefaultStmSubsteps;
  double rho_min = 0.0;
  double rho_max = 0.0;
  Vector x_init;
  TerminalMap terminal;
  double terminal_weight = 0.0;
  Vector terminal_target;
  RunningCost running = RunningCost::quadratic;
  std::string quadrature = "trapezoid";
  RunSettings settings;
};

/// Schema validation; throws ValidationError naming the offending field.
ProblemConfig parse_config(const Json& doc);
/// Reads and parses a config file. Unreadable file -> IoError, malformed or
/// invalid document -> ValidationError.
ProblemConfig load_config(const std::filesystem::path& path);
Json config_to_json(const ProblemConfig& config);

/// Discretizes and assembles the problem at rho_eff (settings.rho_eff, else
/// rho_min) with the rate constraint enabled.
TrajectoryProblem make_problem(const ProblemConfig& config);
ZohSystem make_zoh(const ProblemConfig& config);

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Json to_json(const VectorSequence& seq);
Matrix matrix_from_json(const Json& j, const std::string& field);
Vector vector_from_json(const Json& j, const std::string& field);
VectorSequence sequence_from_json(const Json& j, const std::string& field);

Json to_json(const Solution& solution);
/// Reads a solution file. `u` is required, `x`, `sigma` and `eta` are
/// optional; the result is marked optimal so it can be certified.
Solution solution_from_json(const Json& j);
Json to_json(const CertificationReport& report);
Json to_json(const SearchTrace& trace);
Json to_json(const std::vector<ProbeOutcome>& sweep);
Json to_json(const AssumptionReport& report);
/// Debug dump of the conic program (triplet form) and its layout.
Json to_json(const ConicFormulation& formulation);

std::string trajectory_csv(const VectorSequence& x, double dt);
/// t_i, u components, ||u_i|| and the minimum norm along the edge to the next
/// vertex (the last row repeats its own norm). `piecewise_constant` marks a
/// ZOH control sequence, whose edge minimum is the vertex norm.
std::string controls_csv(const VectorSequence& u, double dt,
                         bool piecewise_constant = false);
std::string sweep_csv(const std::vector<ProbeOutcome>& sweep);
std::string edges_csv(const CertificationReport& report);

/// Writes `content` to `path`; failures raise IoError.
void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const Json& doc);
/// create_directories with IoError on failure.
void ensure_directory(const std::filesystem::path& dir);

/// "start:stop:step", half open at stop.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace lcvx
