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

#include "lcvx/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lcvx/errors.hpp"

namespace lcvx {
namespace fs = std::filesystem;

namespace {

const Json& require(const Json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError("config: missing field '" + path + key + "'");
  }
  return obj.at(key);
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError("config: '" + field + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError("config: '" + field + "' must be finite");
  return v;
}

int integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw ValidationError("config: '" + field + "' must be an integer");
  }
  return j.get<int>();
}

double opt_number(const Json& obj, const std::string& key, double fallback,
                  const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), path + key);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

SearchSettings RunSettings::search_settings() const {
  SearchSettings s;
  s.solver.feas_tol = tol_feas;
  s.solver.gap_tol = tol_gap;
  s.solver.max_iterations = max_iterations;
  s.eps_eta = eps_eta;
  s.violation_tol = tol_viol;
  return s;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const VectorSequence& seq) {
  Json out = Json::array();
  for (const auto& v : seq) out.push_back(to_json(v));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError("'" + field + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError("'" + field + "' must be an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string name = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ValidationError("'" + name + "' must be a row of length " +
                            std::to_string(cols));
    }
    m.row(static_cast<Eigen::Index>(i)) = vector_from_json(j[i], name).transpose();
  }
  return m;
}

VectorSequence sequence_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError("'" + field + "' must be an array of vectors");
  VectorSequence out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vector_from_json(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ProblemConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("config: document must be an object");
  ProblemConfig c;

  const Json& sys = require(doc, "system", "");
  c.system.a_c = matrix_from_json(require(sys, "a_c", "system."), "system.a_c");
  c.system.b_c = matrix_from_json(require(sys, "b_c", "system."), "system.b_c");
  c.system.validate();
  const int nx = c.system.nx();

  const Json& grid = require(doc, "grid", "");
  c.t_f = number(require(grid, "t_f", "grid."), "grid.t_f");
  c.n_segments = integer(require(grid, "n_segments", "grid."), "grid.n_segments");
  if (grid.contains("substeps")) c.substeps = integer(grid.at("substeps"), "grid.substeps");
  if (!(c.t_f > 0.0)) throw ValidationError("config: 'grid.t_f' must be positive");
  if (c.n_segments < 1) throw ValidationError("config: 'grid.n_segments' must be >= 1");
  if (c.substeps < 1) throw ValidationError("config: 'grid.substeps' must be >= 1");

  const Json& bounds = require(doc, "bounds", "");
  c.rho_min = number(require(bounds, "rho_min", "bounds."), "bounds.rho_min");
  c.rho_max = number(require(bounds, "rho_max", "bounds."), "bounds.rho_max");
  if (!(c.rho_min > 0.0)) throw ValidationError("config: 'bounds.rho_min' must be positive");
  if (!(c.rho_min < c.rho_max)) {
    throw ValidationError("config: 'bounds.rho_min' must be below 'bounds.rho_max'");
  }

  const Json& boundary = require(doc, "boundary", "");
  c.x_init = vector_from_json(require(boundary, "x_init", "boundary."), "boundary.x_init");
  if (c.x_init.size() != nx) {
    throw ValidationError("config: 'boundary.x_init' must have " + std::to_string(nx) +
                          " entries");
  }
  c.terminal.matrix = Matrix::Zero(0, nx);
  c.terminal.offset = Vector::Zero(0);
  if (boundary.contains("terminal_map")) {
    const Json& g = boundary.at("terminal_map");
    Matrix m = matrix_from_json(require(g, "matrix", "boundary.terminal_map."),
                                "boundary.terminal_map.matrix");
    if (m.rows() > 0) {
      if (m.cols() != nx) {
        throw ValidationError("config: 'boundary.terminal_map.matrix' must have " +
                              std::to_string(nx) + " columns");
      }
      c.terminal.matrix = m;
      c.terminal.offset = g.contains("offset")
                              ? vector_from_json(g.at("offset"), "boundary.terminal_map.offset")
                              : Vector::Zero(m.rows());
      if (c.terminal.offset.size() != m.rows()) {
        throw ValidationError("config: 'boundary.terminal_map.offset' length mismatch");
      }
    }
  }

  const Json& cost = require(doc, "cost", "");
  c.terminal_weight = number(require(cost, "terminal_weight", "cost."), "cost.terminal_weight");
  if (c.terminal_weight < 0.0) {
    throw ValidationError("config: 'cost.terminal_weight' must be non-negative");
  }
  c.terminal_target = cost.contains("terminal_target")
                          ? vector_from_json(cost.at("terminal_target"), "cost.terminal_target")
                          : Vector::Zero(nx);
  if (c.terminal_target.size() != nx) {
    throw ValidationError("config: 'cost.terminal_target' must have " +
                          std::to_string(nx) + " entries");
  }
  if (cost.contains("running")) {
    const Json& r = cost.at("running");
    if (r == "quadratic") {
      c.running = RunningCost::quadratic;
    } else if (r == "linear") {
      c.running = RunningCost::linear;
    } else {
      throw ValidationError("config: 'cost.running' must be \"quadratic\" or \"linear\"");
    }
  }
  if (cost.contains("quadrature")) {
    const Json& q = cost.at("quadrature");
    if (q != "trapezoid" && q != "rectangle") {
      throw ValidationError("config: 'cost.quadrature' must be \"trapezoid\" or \"rectangle\"");
    }
    c.quadrature = q.get<std::string>();
  }

  if (doc.contains("settings")) {
    const Json& s = doc.at("settings");
    if (!s.is_object()) throw ValidationError("config: 'settings' must be an object");
    RunSettings& r = c.settings;
    r.eps = opt_number(s, "eps", r.eps, "settings.");
    r.eps_a = opt_number(s, "eps_a", r.eps_a, "settings.");
    r.tol_feas = opt_number(s, "tol_feas", r.tol_feas, "settings.");
    r.tol_gap = opt_number(s, "tol_gap", r.tol_gap, "settings.");
    r.eps_eta = opt_number(s, "eps_eta", r.eps_eta, "settings.");
    if (s.contains("tol_viol")) r.tol_viol = number(s.at("tol_viol"), "settings.tol_viol");
    if (s.contains("rho_eff")) r.rho_eff = number(s.at("rho_eff"), "settings.rho_eff");
    if (s.contains("max_iterations")) {
      r.max_iterations = integer(s.at("max_iterations"), "settings.max_iterations");
    }
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) {
        throw ValidationError("config: 'settings.seed' must be a non-negative integer");
      }
      r.seed = s.at("seed").get<std::uint64_t>();
    }
    if (s.contains("perturb")) {
      if (!s.at("perturb").is_boolean()) {
        throw ValidationError("config: 'settings.perturb' must be a boolean");
      }
      r.perturb = s.at("perturb").get<bool>();
    }
  }
  const RunSettings& r = c.settings;
  if (!(r.eps > 0.0)) throw ValidationError("config: 'settings.eps' must be positive");
  if (r.eps_a < 0.0) throw ValidationError("config: 'settings.eps_a' must be non-negative");
  if (!(r.tol_feas > 0.0) || !(r.tol_gap > 0.0) || !(r.eps_eta > 0.0)) {
    throw ValidationError("config: solver tolerances must be positive");
  }
  if (r.tol_viol && *r.tol_viol < 0.0) {
    throw ValidationError("config: 'settings.tol_viol' must be non-negative");
  }
  if (r.max_iterations < 1) {
    throw ValidationError("config: 'settings.max_iterations' must be >= 1");
  }
  if (r.rho_eff && (!(*r.rho_eff >= c.rho_min) || !(*r.rho_eff < c.rho_max))) {
    throw ValidationError("config: 'settings.rho_eff' must lie in [rho_min, rho_max)");
  }
  return c;
}

ProblemConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("config: malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

Json config_to_json(const ProblemConfig& c) {
  Json doc;
  doc["system"] = {{"a_c", to_json(c.system.a_c)}, {"b_c", to_json(c.system.b_c)}};
  doc["grid"] = {{"t_f", c.t_f}, {"n_segments", c.n_segments}, {"substeps", c.substeps}};
  doc["bounds"] = {{"rho_min", c.rho_min}, {"rho_max", c.rho_max}};
  doc["boundary"] = {{"x_init", to_json(c.x_init)},
                     {"terminal_map",
                      {{"matrix", to_json(c.terminal.matrix)},
                       {"offset", to_json(c.terminal.offset)}}}};
  doc["cost"] = {{"terminal_weight", c.terminal_weight},
                 {"terminal_target", to_json(c.terminal_target)},
                 {"running", to_string(c.running)},
                 {"quadrature", c.quadrature}};
  const RunSettings& r = c.settings;
  Json s = {{"eps", r.eps},           {"eps_a", r.eps_a},
            {"seed", r.seed},         {"perturb", r.perturb},
            {"tol_feas", r.tol_feas}, {"tol_gap", r.tol_gap},
            {"eps_eta", r.eps_eta},   {"max_iterations", r.max_iterations}};
  if (r.tol_viol) s["tol_viol"] = *r.tol_viol;
  if (r.rho_eff) s["rho_eff"] = *r.rho_eff;
  doc["settings"] = s;
  return doc;
}

TrajectoryProblem make_problem(const ProblemConfig& c) {
  TrajectoryProblem p;
  p.disc = integrate_stm(c.system, c.t_f, c.n_segments, c.substeps);
  p.cost.terminal_weight = c.terminal_weight;
  p.cost.terminal_target = c.terminal_target;
  p.cost.running = c.running;
  p.cost.quadrature_weights =
      c.quadrature == "rectangle"
          ? Vector(Vector::Constant(c.n_segments + 1, p.disc.dt))
          : trapezoid_weights(c.n_segments, p.disc.dt);
  p.rho_min = c.rho_min;
  p.rho_max = c.rho_max;
  p.x_init = c.x_init;
  p.terminal = c.terminal;
  TrajectoryProblem out = with_rho_eff(p, c.settings.rho_eff.value_or(c.rho_min), true);
  out.validate();
  return out;
}

ZohSystem make_zoh(const ProblemConfig& c) {
  return discretize_zoh(c.system, c.t_f, c.n_segments, c.substeps);
}

Json to_json(const Solution& s) {
  Json j;
  j["status"] = to_string(s.status);
  j["solver_status"] = conic::to_string(s.solver_status);
  j["iterations"] = s.iterations;
  j["cost"] = s.cost;
  j["primal_residual"] = s.primal_residual;
  j["dual_residual"] = s.dual_residual;
  j["gap"] = s.gap;
  j["x"] = to_json(s.x);
  j["u"] = to_json(s.u);
  j["sigma"] = to_json(s.sigma);
  j["eta"] = to_json(s.eta);
  j["mu1"] = to_json(s.mu1);
  j["mu2"] = to_json(s.mu2);
  return j;
}

Solution solution_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("solution: document must be an object");
  if (!j.contains("u")) throw ValidationError("solution: missing field 'u'");
  Solution s;
  s.status = SolveStatus::optimal;
  s.solver_status = conic::Status::optimal;
  s.u = sequence_from_json(j.at("u"), "u");
  if (s.u.empty()) throw ValidationError("solution: 'u' must not be empty");
  for (const auto& u : s.u) {
    if (u.size() != s.u.front().size()) {
      throw ValidationError("solution: all controls must have the same length");
    }
  }
  if (j.contains("x")) s.x = sequence_from_json(j.at("x"), "x");
  if (j.contains("eta")) s.eta = sequence_from_json(j.at("eta"), "eta");
  if (j.contains("sigma")) s.sigma = vector_from_json(j.at("sigma"), "sigma");
  if (j.contains("cost")) s.cost = number(j.at("cost"), "cost");
  return s;
}

Json to_json(const CertificationReport& r) {
  Json j;
  j["tolerance"] = r.tolerance;
  j["vertex_violation_count"] = r.vertex_violations.size();
  j["lower_vertex_violations"] = r.lower_vertex_violations();
  j["violated_edges"] = r.violated_edges();
  Json vv = Json::array();
  for (const auto& v : r.vertex_violations) {
    vv.push_back({{"index", v.index}, {"norm", v.norm}, {"kind", to_string(v.kind)}});
  }
  j["vertex_violations"] = vv;
  Json ev = Json::array();
  for (const auto& e : r.edge_violations) {
    ev.push_back({{"first", e.first},
                  {"second", e.second},
                  {"min_norm", e.min_norm},
                  {"max_norm", e.max_norm},
                  {"kind", to_string(e.kind)}});
  }
  j["edge_violations"] = ev;
  j["vertex_norms"] = r.vertex_norms;
  j["edge_min_norms"] = r.edge_min_norms;
  j["edge_max_norms"] = r.edge_max_norms;
  j["duals_checked"] = r.duals_checked;
  if (r.duals_checked) {
    j["eta_n_norm"] = r.eta_n_norm;
    j["eta_n_zero"] = r.eta_n_zero;
    j["vertex_condition_failures"] = r.vertex_condition_failures;
  }
  return j;
}

Json to_json(const SearchTrace& t) {
  Json j;
  Json its = Json::array();
  for (const auto& it : t.iterations) {
    its.push_back({{"rho_low", it.rho_low},
                   {"rho_high", it.rho_high},
                   {"rho_1", it.rho_1},
                   {"rho_2", it.rho_2},
                   {"class_1", to_string(it.class_1)},
                   {"class_2", to_string(it.class_2)},
                   {"cost_1", it.cost_1},
                   {"cost_2", it.cost_2}});
  }
  j["iterations"] = its;
  j["solver_calls"] = t.solver_calls;
  j["final_rho"] = t.final_rho;
  j["rho_min_minus"] = t.rho_min_minus ? Json(*t.rho_min_minus) : Json(nullptr);
  j["rho_min_plus"] = t.rho_min_plus ? Json(*t.rho_min_plus) : Json(nullptr);
  return j;
}

Json to_json(const std::vector<ProbeOutcome>& sweep) {
  Json out = Json::array();
  for (const auto& p : sweep) {
    Json row = {{"rho_eff", p.rho_eff}, {"classification", to_string(p.classification)}};
    if (p.classification != Classification::unusable) {
      row["cost"] = p.cost;
      row["lower_vertex_violations"] = p.report.lower_vertex_violations();
      row["eta_n_norm"] = p.report.eta_n_norm;
    } else {
      row["cost"] = nullptr;
    }
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const AssumptionReport& r) {
  return {{"equality_rows", r.equality_rows},
          {"jacobian_rank", r.jacobian_rank},
          {"full_row_rank", r.full_row_rank},
          {"controllability_rank", r.controllability.rank},
          {"controllable", r.controllability.controllable},
          {"slater_status", to_string(r.slater.status)},
          {"slater_margin", r.slater.margin},
          {"strictly_feasible", r.slater.strictly_feasible},
          {"non_degenerate_terminal", r.non_degenerate_terminal}};
}

namespace {

Json triplets(const SparseMatrix& m) {
  Json rows = Json::array(), cols = Json::array(), vals = Json::array();
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      rows.push_back(it.row());
      cols.push_back(it.col());
      vals.push_back(it.value());
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"i", rows}, {"j", cols}, {"v", vals}};
}

}  // namespace

Json to_json(const ConicFormulation& f) {
  const auto& p = f.program;
  const auto& l = f.layout;
  Json j;
  j["c"] = to_json(p.c);
  j["a"] = triplets(p.a);
  j["b"] = to_json(p.b);
  j["g"] = triplets(p.g);
  j["h"] = to_json(p.h);
  j["cones"] = {{"nonneg", p.cones.nonneg}, {"soc", p.cones.soc}};
  j["layout"] = {{"hold", l.hold == Hold::first_order ? "first_order" : "zero_order"},
                 {"nx", l.nx},
                 {"nu", l.nu},
                 {"n_segments", l.n_segments},
                 {"n_controls", l.n_controls},
                 {"x_offset", l.x_offset},
                 {"u_offset", l.u_offset},
                 {"sigma_offset", l.sigma_offset},
                 {"terminal_epigraph", l.terminal_epigraph},
                 {"running_epigraph", l.running_epigraph},
                 {"dynamics_row", l.dynamics_row},
                 {"initial_row", l.initial_row},
                 {"terminal_row", l.terminal_row},
                 {"terminal_rows", l.terminal_rows},
                 {"rate_equality_row", l.rate_equality_row},
                 {"norm_cones", l.norm_cones},
                 {"rate_cones", l.rate_cones},
                 {"rate_equalities", l.rate_equalities},
                 {"running_cost_encoding", l.running_cost_encoding}};
  j["terminal_weight"] = f.terminal_weight;
  return j;
}

std::string trajectory_csv(const VectorSequence& x, double dt) {
  std::ostringstream os;
  os << "t";
  const int nx = x.empty() ? 0 : static_cast<int>(x.front().size());
  for (int k = 0; k < nx; ++k) os << ",x" << k;
  os << "\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << fmt(static_cast<double>(i) * dt);
    for (int k = 0; k < nx; ++k) os << "," << fmt(x[i](k));
    os << "\n";
  }
  return os.str();
}

std::string controls_csv(const VectorSequence& u, double dt, bool piecewise_constant) {
  std::ostringstream os;
  os << "t";
  const int nu = u.empty() ? 0 : static_cast<int>(u.front().size());
  for (int k = 0; k < nu; ++k) os << ",u" << k;
  os << ",norm,edge_min_norm\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double norm = u[i].norm();
    double edge = norm;
    if (!piecewise_constant && i + 1 < u.size()) edge = edge_min_norm(u[i], u[i + 1]);
    os << fmt(static_cast<double>(i) * dt);
    for (int k = 0; k < nu; ++k) os << "," << fmt(u[i](k));
    os << "," << fmt(norm) << "," << fmt(edge) << "\n";
  }
  return os.str();
}

std::string sweep_csv(const std::vector<ProbeOutcome>& sweep) {
  std::ostringstream os;
  os << "rho_eff,classification,cost\n";
  for (const auto& p : sweep) {
    os << fmt(p.rho_eff) << "," << to_string(p.classification) << ",";
    if (p.classification != Classification::unusable) os << fmt(p.cost);
    os << "\n";
  }
  return os.str();
}

std::string edges_csv(const CertificationReport& r) {
  std::ostringstream os;
  os << "edge,min_norm,max_norm\n";
  for (std::size_t i = 0; i < r.edge_min_norms.size(); ++i) {
    os << i << "," << fmt(r.edge_min_norms[i]) << "," << fmt(r.edge_max_norms[i]) << "\n";
  }
  return os.str();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const Json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : ""));
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("grid '" + spec + "': '" + item + "' is not a number");
    }
  }
  if (parts.size() != 3) throw ValidationError("grid must be start:stop:step, got '" + spec + "'");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || !(stop >= start)) {
    throw ValidationError("grid '" + spec + "' needs step > 0 and stop >= start");
  }
  // Half open; the slack absorbs round-off in (stop - start) / step.
  const auto n = static_cast<long>(std::ceil((stop - start) / step - 1e-9));
  if (n > 1000000) throw ValidationError("grid '" + spec + "' has too many points");
  std::vector<double> grid;
  for (long k = 0; k < n; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

}  // namespace lcvx
