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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lcvx/bench.hpp"
#include "lcvx/io.hpp"

using namespace lcvx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("lcvx_bench_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int columns(const std::string& line) {
  return 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
}

}  // namespace

TEST_CASE("reference problem data") {
  const TrajectoryProblem p = double_integrator_problem();
  CHECK(p.rho_min == 4.0);
  CHECK(p.rho_max == 6.0);
  CHECK(p.rho_eff == 4.0);
  CHECK(p.nx() == 6);
  CHECK(p.nu() == 3);
  Vector x0 = Vector::Zero(6);
  x0(5) = 10.0;
  CHECK(p.x_init == x0);
  CHECK(p.n_segments() * p.disc.dt == doctest::Approx(4.0));
  CHECK(p.n_segments() == 16);
  CHECK(p.terminal.rows() == 0);
  CHECK(p.cost.terminal_weight == 100.0);
  CHECK(p.cost.running == RunningCost::quadratic);
  CHECK(p.cost.quadrature_weights.sum() == doctest::Approx(4.0));
  CHECK(p.cost.quadrature_weights(0) == doctest::Approx(0.125));
}

TEST_CASE("bundled config matches the built-in problem") {
  const ProblemConfig file = load_config(fs::path(LCVX_SOURCE_DIR) / "configs" /
                                         "double_integrator.json");
  const ProblemConfig built = double_integrator_config();
  CHECK(file.system.a_c == built.system.a_c);
  CHECK(file.system.b_c == built.system.b_c);
  CHECK(file.x_init == built.x_init);
  CHECK(file.terminal_target == built.terminal_target);
  CHECK(file.terminal_weight == built.terminal_weight);
  CHECK(file.rho_min == built.rho_min);
  CHECK(file.rho_max == built.rho_max);
  CHECK(file.t_f == built.t_f);
  CHECK(file.n_segments == built.n_segments);
  CHECK(file.terminal.rows() == 0);
  CHECK(file.settings.seed == 1);
  CHECK(file.settings.eps == 1e-3);
}

TEST_CASE("reproduction run") {
  TempDir dir;
  const BenchReport rep = reproduce_paper(dir.path);
  for (const auto& t : rep.targets) {
    CAPTURE(t.name);
    CAPTURE(t.value);
    CHECK(t.pass);
    CHECK_FALSE(t.reference.empty());
  }
  CHECK(rep.all_pass());
  CHECK(rep.targets.size() == 12);
  CHECK(rep.seed == 1);
  CHECK(rep.q.size() == 1);
  CHECK(std::abs(rep.q(0)) <= 1e-6);

  for (const char* f : {"trajectory.csv", "controls.csv", "sweep.csv", "edges.csv", "report.json"}) {
    CHECK(fs::exists(dir.path / f));
  }
  const auto traj = lines(dir.path / "trajectory.csv");
  REQUIRE(traj.size() == 18);
  CHECK(traj[0] == "t,x0,x1,x2,x3,x4,x5");
  const auto ctrl = lines(dir.path / "controls.csv");
  REQUIRE(ctrl.size() == 18);
  CHECK(ctrl[0] == "t,u0,u1,u2,norm,edge_min_norm");
  CHECK(columns(ctrl[5]) == 6);
  const auto sw = lines(dir.path / "sweep.csv");
  CHECK(sw[0] == "rho_eff,classification,cost");
  CHECK(sw.size() == 1 + rep.sweep.size());

  std::ifstream in(dir.path / "report.json");
  const Json doc = Json::parse(in);
  CHECK(doc.contains("timestamp"));
  CHECK(doc["seed"] == 1);
  CHECK(doc["all_pass"] == true);
  for (const auto& t : doc["targets"]) {
    CHECK(t.contains("reference"));
    CHECK(t.contains("tolerance"));
  }
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  const BenchReport a = reproduce_paper({});
  const BenchReport b = reproduce_paper({});
  CHECK(to_json(a, false).dump() == to_json(b, false).dump());
  Json ja = to_json(a);
  Json jb = to_json(b);
  ja.erase("timestamp");
  jb.erase("timestamp");
  CHECK(ja == jb);
}

TEST_CASE("unperturbed run") {
  BenchOptions opt;
  opt.perturb = false;
  const BenchReport rep = reproduce_paper({}, opt);
  CHECK(rep.q.size() == 0);
  CHECK(rep.eps_a == 0.0);
  CHECK(rep.targets.size() == 10);
  CHECK(rep.all_pass());
}

TEST_CASE("ZOH comparison") {
  TempDir dir;
  const ZohComparison cmp = compare_zoh(dir.path);
  CHECK(cmp.zoh.u.size() == 16);
  CHECK(cmp.foh.u.size() == 17);
  CHECK(cmp.zoh_position_error <= cmp.zoh_slack);
  CHECK(cmp.foh_position_error <= cmp.foh_slack);
  for (const char* f : {"zoh_trajectory.csv", "zoh_controls.csv", "foh_trajectory.csv",
                        "foh_controls.csv"}) {
    CHECK(fs::exists(dir.path / f));
  }
  CHECK(lines(dir.path / "zoh_controls.csv").size() == 17);
  CHECK(lines(dir.path / "foh_controls.csv").size() == 18);
}
