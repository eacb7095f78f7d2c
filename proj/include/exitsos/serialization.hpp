#pragma once

// JSON forms of the library's results, and the run configuration that every
// CLI artifact carries.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exitsos/bounds.hpp"
#include "exitsos/certificates.hpp"
#include "exitsos/hierarchy.hpp"
#include "exitsos/oracle.hpp"
#include "exitsos/polynomial.hpp"
#include "exitsos/trig_polynomial.hpp"

namespace exitsos {

inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

/// [[exponent, coeff], ...] in graded-lex order.
inline json to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back({e, c});
  return {{"dim", p.dim()}, {"terms", terms}};
}

inline Polynomial polynomial_from_json(const json& j) {
  Polynomial p(j.at("dim").get<std::size_t>());
  for (const auto& t : j.at("terms")) p.add_term(t.at(0).get<Exponent>(), t.at(1).get<double>());
  return p;
}

/// [[frequency, re, im], ...].
inline json to_json(const TrigPolynomial& q) {
  json terms = json::array();
  for (const auto& [w, c] : q.terms()) terms.push_back({w, c.real(), c.imag()});
  return {{"dim", q.dim()}, {"bandwidth", q.bandwidth()}, {"terms", terms}};
}

inline TrigPolynomial trig_from_json(const json& j) {
  TrigPolynomial q(j.at("dim").get<std::size_t>(), j.at("bandwidth").get<int>());
  for (const auto& t : j.at("terms"))
    q.add_term(t.at(0).get<Frequency>(), Complex(t.at(1).get<double>(), t.at(2).get<double>()));
  return q;
}

inline json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
    rows.push_back(r);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols) throw std::invalid_argument("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = j.at(i).at(k).get<double>();
  }
  return M;
}

inline json to_json(const VerificationReport& r) {
  return {{"pass", r.pass}, {"residual", r.residual}, {"min_eig", r.min_eig}, {"tol", r.tol}};
}

inline json to_json(const GramCertificate& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["name"] = c.name;
  j["dim"] = c.dim;
  j["level"] = c.level;
  json blocks = json::array();
  for (const auto& B : c.blocks) blocks.push_back(matrix_to_json(B));
  j["blocks"] = blocks;
  j["bases"] = c.bases;
  j["frequencies"] = c.frequencies;
  if (c.kind == CertificateKind::SpherePreordering) j["multiplier"] = to_json(c.multiplier);
  if (c.kind == CertificateKind::TrigSos)
    j["target"] = to_json(c.target_trig);
  else
    j["target"] = to_json(c.target_poly);
  j["residual"] = c.residual;
  j["min_eig"] = c.min_eig;
  return j;
}

inline GramCertificate certificate_from_json(const json& j) {
  GramCertificate c;
  c.kind = certificate_kind_from_string(j.at("kind").get<std::string>());
  c.name = j.value("name", std::string());
  c.dim = j.at("dim").get<std::size_t>();
  c.level = j.at("level").get<int>();
  for (const auto& B : j.at("blocks")) c.blocks.push_back(matrix_from_json(B));
  c.bases = j.at("bases").get<std::vector<std::vector<Exponent>>>();
  c.frequencies = j.at("frequencies").get<std::vector<Frequency>>();
  c.multiplier = j.contains("multiplier") ? polynomial_from_json(j.at("multiplier")) : Polynomial(c.dim);
  if (c.kind == CertificateKind::TrigSos)
    c.target_trig = trig_from_json(j.at("target"));
  else
    c.target_poly = polynomial_from_json(j.at("target"));
  if (j.contains("residual") && j["residual"].is_number()) c.residual = j["residual"].get<double>();
  if (j.contains("min_eig") && j["min_eig"].is_number()) c.min_eig = j["min_eig"].get<double>();
  return c;
}

inline json to_json(const SolverResult& r) {
  return {{"status", to_string(r.status)},
          {"objective", r.objective},
          {"dual_objective", r.dual_objective},
          {"iterations", r.iterations},
          {"primal_infeasibility", r.primal_infeasibility},
          {"dual_infeasibility", r.dual_infeasibility},
          {"relative_gap", r.relative_gap},
          {"seconds", r.seconds},
          {"message", r.message}};
}

inline json to_json(const HierarchySolution& s) {
  json j;
  j["level"] = s.level;
  j["mode"] = to_string(s.mode);
  j["bound"] = s.bound;
  j["vdeg"] = s.vdeg;
  j["vdeg_capped"] = s.vdeg_capped;
  j["v"] = to_json(s.v);
  j["status"] = to_string(s.solver.status);
  j["solver"] = to_json(s.solver);
  j["seconds"] = s.seconds;
  j["block_sides"] = s.block_sides;
  j["certificates_verified"] = s.certificates_verified;
  json certs = json::array();
  for (std::size_t k = 0; k < s.certificates.size(); ++k) {
    json c = to_json(s.certificates[k]);
    if (k < s.verification.size()) c["verification"] = to_json(s.verification[k]);
    certs.push_back(c);
  }
  j["certificates"] = certs;
  j["notes"] = s.notes;
  return j;
}

inline json to_json(const McEstimate& e) {
  return {{"mean", e.mean},
          {"stderr", e.std_error},
          {"paths", e.paths},
          {"mean_exit_time", e.mean_exit_time},
          {"dt", e.dt},
          {"seed", e.seed},
          {"truncated", e.truncated},
          {"flagged", e.flagged}};
}

inline json to_json(const OracleValue& o) {
  json j = {{"value", o.value}, {"kind", to_string(o.kind)}, {"uncertainty", o.uncertainty}};
  if (o.mc) j["mc"] = to_json(*o.mc);
  return j;
}

inline json to_json(const FeasibilityReport& r) {
  return {{"worst_interior", r.worst_interior},
          {"worst_boundary", r.worst_boundary},
          {"scale", r.scale},
          {"samples", r.samples},
          {"pass", r.pass}};
}

inline json to_json(const SweepRow& r) {
  json j = {{"level", r.level},       {"mode", to_string(r.mode)}, {"bound", r.bound},   {"stderr", r.std_error},
            {"status", r.status},     {"seconds", r.seconds},      {"max_block", r.max_block},
            {"verified", r.verified}};
  j["oracle"] = r.oracle ? json(*r.oracle) : json(nullptr);
  j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline json to_json(const RateFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"residual", f.residual},
          {"points_used", f.points_used},
          {"points_excluded", f.points_excluded}};
}

struct RunConfig {
  std::string problem_path;
  std::string verb;
  std::vector<int> levels;
  std::string mode = "trig";
  std::optional<int> vdeg;
  double reg = 0.0;
  SolverOptions solver;
  std::string solver_name = "ipm";
  McOptions mc;
  double verify_tol = 1e-6;
  std::optional<int> degree;  // bounds verb
  std::string output_dir;
};

inline json to_json(const RunConfig& c) {
  json j;
  j["problem"] = c.problem_path;
  j["verb"] = c.verb;
  j["levels"] = c.levels;
  j["mode"] = c.mode;
  j["vdeg"] = c.vdeg ? json(*c.vdeg) : json(nullptr);
  j["reg"] = c.reg;
  j["solver"] = {{"name", c.solver_name},
                 {"feasibility_tol", c.solver.feasibility_tol},
                 {"gap_tol", c.solver.gap_tol},
                 {"max_iterations", c.solver.max_iterations},
                 {"time_limit_seconds", c.solver.time_limit_seconds}};
  j["mc"] = {{"paths", c.mc.paths}, {"dt", c.mc.dt}, {"seed", c.mc.seed}, {"max_steps", c.mc.max_steps}, {"jobs", c.mc.jobs}};
  j["verify_tol"] = c.verify_tol;
  j["degree"] = c.degree ? json(*c.degree) : json(nullptr);
  j["out"] = c.output_dir;
  j["version"] = kVersion;
  return j;
}

}  // namespace exitsos
