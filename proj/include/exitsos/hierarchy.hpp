#pragma once

// The two SDP hierarchies for the exit value, both maximizing v(x0) over
// polynomials v of bounded degree:
//   BASELINE  target(v) in Q_l(b),  g - v in Q_l(-b, b)
//   TRIG      target(v) in Q_l(b),  g o psi - v o psi in Sigma_l^T
// with target(v) the generator image selected by the problem's convention.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "exitsos/certificates.hpp"
#include "exitsos/conic_program.hpp"
#include "exitsos/generator.hpp"
#include "exitsos/oracle.hpp"
#include "exitsos/sdp_solver.hpp"
#include "exitsos/sphere_map.hpp"

namespace exitsos {

enum class Mode { Baseline, Trig };

inline std::string to_string(Mode m) { return m == Mode::Trig ? "trig" : "baseline"; }

inline Mode mode_from_string(const std::string& s) {
  if (s == "trig" || s == "TRIG") return Mode::Trig;
  if (s == "baseline" || s == "BASELINE") return Mode::Baseline;
  throw std::invalid_argument("unknown mode: " + s + " (expected trig or baseline)");
}

struct HierarchyOptions {
  std::optional<int> vdeg;     // overrides the default degree of v
  double reg = 0.0;            // objective penalty reg * sum of Gram traces
  bool restrict_support = false;  // TRIG: shrink the frequency box to the target's support
};

/// An assembled level of a hierarchy, with the bookkeeping needed to read a solution back.
struct AssembledHierarchy {
  Mode mode = Mode::Trig;
  int level = 0;
  int vdeg = 0;
  bool vdeg_capped = false;  // TRIG: deg v limited to l so that v o psi has bandwidth <= 2l
  ConicProgram program;
  std::vector<Exponent> v_basis;
  std::vector<std::size_t> v_vars;
  std::vector<ConstraintHandle> constraints;
  std::vector<std::string> notes;
};

namespace detail {

/// Largest d <= cap with generator image degree <= 2l.
inline int admissible_vdeg(const ExitProblem& prob, int level, int cap) {
  int d = cap;
  while (d > 0 && generator_degree(d, prob.degree_A(), prob.degree_drift()) > 2 * level) --d;
  return d;
}

inline AssembledHierarchy assemble(const ExitProblem& prob, int level, Mode mode, const HierarchyOptions& opt) {
  prob.validate();
  if (level < 1) throw std::invalid_argument("assemble: level must be >= 1");
  AssembledHierarchy h;
  h.mode = mode;
  h.level = level;
  const int gdeg = prob.g.degree();
  if (mode == Mode::Trig && 2 * gdeg > 2 * level)
    throw std::invalid_argument("assemble_trig: level " + std::to_string(level) + " is too small: g o psi has bandwidth " +
                                std::to_string(2 * gdeg) + " > 2l");
  if (mode == Mode::Baseline && gdeg > 2 * level)
    throw std::invalid_argument("assemble_baseline: level " + std::to_string(level) + " is too small for deg g = " +
                                std::to_string(gdeg));

  const int natural = mode == Mode::Trig ? level : 2 * level;
  const int requested = opt.vdeg.value_or(natural);
  if (requested < 0) throw std::invalid_argument("assemble: vdeg must be >= 0");
  if (mode == Mode::Trig && requested > level)
    throw std::invalid_argument("assemble_trig: vdeg " + std::to_string(requested) + " > l makes v o psi exceed bandwidth 2l");
  if (mode == Mode::Baseline && requested > 2 * level)
    throw std::invalid_argument("assemble_baseline: vdeg must be <= 2l");
  h.vdeg = admissible_vdeg(prob, level, requested);
  if (h.vdeg < requested)
    h.notes.push_back("deg v reduced from " + std::to_string(requested) + " to " + std::to_string(h.vdeg) +
                      " so the generator image has degree <= 2l");
  if (!ellipticity_check(prob).pass)
    h.notes.push_back("A fails the sampled ellipticity check; the bound may not be a valid lower bound");
  if (mode == Mode::Trig && !opt.vdeg) {
    h.vdeg_capped = true;
    h.notes.push_back("deg v capped at l = " + std::to_string(level) + " so that v o psi has bandwidth <= 2l");
  }

  ConicProgram& prog = h.program;
  const std::size_t n = prob.n;
  h.v_basis = monomials_up_to(n, h.vdeg);
  for (const auto& e : h.v_basis) {
    std::string label = "v[";
    for (std::size_t i = 0; i < e.size(); ++i) label += (i ? " " : "") + std::to_string(e[i]);
    h.v_vars.push_back(prog.add_free(label + "]"));
  }

  AffinePolynomial interior(n);
  for (std::size_t k = 0; k < h.v_basis.size(); ++k)
    interior.add_scaled(hierarchy_target(prob, Polynomial::monomial(h.v_basis[k])), h.v_vars[k]);
  h.constraints.push_back(qmodule_ball_constraint(prog, interior, level, "interior"));

  if (mode == Mode::Baseline) {
    AffinePolynomial boundary(prob.g);
    for (std::size_t k = 0; k < h.v_basis.size(); ++k)
      boundary.add_scaled(Polynomial::monomial(h.v_basis[k]), h.v_vars[k], -1.0);
    h.constraints.push_back(sphere_preordering_constraint(prog, boundary, level, "boundary"));
  } else {
    const SphereMap map(n, std::max(gdeg, h.vdeg));
    AffineTrig boundary(pullback(map, prob.g));
    for (std::size_t k = 0; k < h.v_basis.size(); ++k)
      boundary.add_scaled(pullback(map, Polynomial::monomial(h.v_basis[k])), h.v_vars[k], -1.0);
    h.constraints.push_back(trig_sos_constraint(prog, boundary, level, opt.restrict_support, "boundary"));
  }

  AffineForm obj;
  for (std::size_t k = 0; k < h.v_basis.size(); ++k) {
    double m = 1.0;
    for (std::size_t i = 0; i < n; ++i) m *= std::pow(prob.x0[i], h.v_basis[k][i]);
    obj.add(h.v_vars[k], m);
  }
  if (opt.reg > 0.0)
    for (const auto& b : prog.blocks())
      for (std::size_t i = 0; i < b.side; ++i) obj.add(b.index(i, i), -opt.reg);
  prog.set_objective(obj, Sense::Maximize);
  return h;
}

}  // namespace detail

inline AssembledHierarchy assemble_trig(const ExitProblem& prob, int level, const HierarchyOptions& opt = {}) {
  return detail::assemble(prob, level, Mode::Trig, opt);
}

inline AssembledHierarchy assemble_baseline(const ExitProblem& prob, int level, const HierarchyOptions& opt = {}) {
  return detail::assemble(prob, level, Mode::Baseline, opt);
}

struct HierarchySolution {
  int level = 0;
  Mode mode = Mode::Trig;
  int vdeg = 0;
  bool vdeg_capped = false;
  double bound = 0.0;  // v(x0), recomputed from v
  Polynomial v{1};
  std::vector<GramCertificate> certificates;
  std::vector<VerificationReport> verification;
  bool certificates_verified = false;
  SolverResult solver;
  double seconds = 0.0;
  std::vector<std::size_t> block_sides;
  std::vector<std::string> notes;

  std::size_t max_block() const {
    std::size_t m = 0;
    for (auto s : block_sides) m = std::max(m, s);
    return m;
  }
};

inline Polynomial hierarchy_v(const ExitProblem& prob, const AssembledHierarchy& h, const std::vector<double>& values) {
  Polynomial v(prob.n);
  for (std::size_t k = 0; k < h.v_basis.size(); ++k) v.add_term(h.v_basis[k], values.at(h.v_vars[k]));
  return v;
}

/// Solves an assembled level and checks everything it returns against the raw Gram data.
inline HierarchySolution solve(const ExitProblem& prob, const AssembledHierarchy& h, const SolverAdapter& solver,
                               const SolverOptions& opt = {}, double verify_tol = 1e-6) {
  const auto t0 = std::chrono::steady_clock::now();
  HierarchySolution s;
  s.level = h.level;
  s.mode = h.mode;
  s.vdeg = h.vdeg;
  s.vdeg_capped = h.vdeg_capped;
  s.notes = h.notes;
  for (const auto& b : h.program.blocks()) s.block_sides.push_back(b.side);
  s.solver = solver.solve(h.program, opt);
  s.v = hierarchy_v(prob, h, s.solver.primal);
  s.bound = s.v(prob.x0);

  // Targets are rebuilt from v, not read from the program, so a wrong assembly cannot verify itself.
  const Polynomial interior_target = hierarchy_target(prob, s.v);
  s.certificates_verified = true;
  for (std::size_t c = 0; c < h.constraints.size(); ++c) {
    GramCertificate cert = extract_certificate(h.program, h.constraints[c], s.solver.primal);
    if (c == 0) {
      cert.target_poly = interior_target;
    } else if (h.mode == Mode::Baseline) {
      cert.target_poly = prob.g - s.v;
    } else {
      const SphereMap map(prob.n, std::max(prob.g.degree(), h.vdeg));
      cert.target_trig = pullback(map, prob.g - s.v);
    }
    s.verification.push_back(verify_certificate(cert, verify_tol));
    s.certificates_verified = s.certificates_verified && s.verification.back().pass;
    s.certificates.push_back(std::move(cert));
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

inline HierarchySolution solve_level(const ExitProblem& prob, int level, Mode mode, const SolverAdapter& solver,
                                     const SolverOptions& opt = {}, const HierarchyOptions& hopt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const AssembledHierarchy h = detail::assemble(prob, level, mode, hopt);
  HierarchySolution s = solve(prob, h, solver, opt);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

struct SweepRow {
  int level = 0;
  Mode mode = Mode::Trig;
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> oracle;
  std::optional<double> gap;  // oracle - bound
  double std_error = 0.0;     // oracle uncertainty (0 for exact oracles)
  std::string status;
  double seconds = 0.0;
  std::size_t max_block = 0;
  bool verified = false;
  std::string error;  // non-empty when the level could not be assembled or solved
};

inline const char* kSweepCsvHeader = "level,mode,bound,oracle,gap,stderr,status,seconds,max_block";

inline std::string to_csv(const SweepRow& r) {
  auto opt_num = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  return std::to_string(r.level) + "," + to_string(r.mode) + "," + format_real(r.bound) + "," + opt_num(r.oracle) + "," +
         opt_num(r.gap) + "," + format_real(r.std_error) + "," + r.status + "," + format_real(r.seconds) + "," +
         std::to_string(r.max_block);
}

/// One row per level; failures are recorded in the row and the sweep continues.
inline std::vector<SweepRow> sweep(const ExitProblem& prob, const std::vector<int>& levels, Mode mode,
                                   const SolverAdapter& solver, const std::optional<OracleValue>& oracle,
                                   const SolverOptions& opt = {}, const HierarchyOptions& hopt = {}, unsigned jobs = 1) {
  if (levels.empty()) throw std::invalid_argument("sweep: no levels");
  if (!std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw std::invalid_argument("sweep: levels must be strictly ascending");

  auto run = [&](int level) {
    SweepRow row;
    row.level = level;
    row.mode = mode;
    try {
      const HierarchySolution s = solve_level(prob, level, mode, solver, opt, hopt);
      row.bound = s.bound;
      row.status = to_string(s.solver.status);
      row.seconds = s.seconds;
      row.max_block = s.max_block();
      row.verified = s.certificates_verified;
    } catch (const std::exception& e) {
      row.status = "ERROR";
      row.error = e.what();
    }
    if (oracle) {
      row.oracle = oracle->value;
      row.std_error = oracle->uncertainty;
      if (std::isfinite(row.bound)) row.gap = oracle->value - row.bound;
    }
    return row;
  };

  std::vector<SweepRow> rows(levels.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < levels.size(); ++i) rows[i] = run(levels[i]);
  } else {
    for (std::size_t start = 0; start < levels.size(); start += jobs) {
      std::vector<std::future<SweepRow>> batch;
      for (std::size_t i = start; i < std::min(levels.size(), start + jobs); ++i)
        batch.push_back(std::async(std::launch::async, run, levels[i]));
      for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
    }
  }
  return rows;
}

struct FeasibilityReport {
  double worst_interior = 0.0;  // min of target(v) over sampled ball points
  double worst_boundary = 0.0;  // min of g - v over sampled sphere points
  double scale = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Samples the generator target on B and g - v on S through psi at random angles.
inline FeasibilityReport posterior_feasibility_check(const Polynomial& v, const ExitProblem& prob,
                                                     std::size_t samples = 1000, std::uint64_t seed = 11) {
  FeasibilityReport r;
  r.samples = samples;
  const Polynomial target = hierarchy_target(prob, v);
  const Polynomial boundary = prob.g - v;
  const SphereMap map(prob.n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  r.worst_interior = std::numeric_limits<double>::infinity();
  r.worst_boundary = std::numeric_limits<double>::infinity();
  std::vector<double> theta(map.angle_dim());
  for (std::size_t k = 1; k <= samples; ++k) {
    const auto x = detail::region_point(Region::Ball, prob.n, halton_point(k, prob.n + 1));
    const double ti = target(x);
    r.worst_interior = std::min(r.worst_interior, ti);
    for (double& t : theta) t = unif(rng);
    const double tb = boundary(map.point(theta));
    r.worst_boundary = std::min(r.worst_boundary, tb);
    r.scale = std::max({r.scale, std::abs(ti), std::abs(tb)});
  }
  const double tol = -1e-6 * (1.0 + r.scale);
  r.pass = r.worst_interior >= tol && r.worst_boundary >= tol;
  return r;
}

inline FeasibilityReport posterior_feasibility_check(const HierarchySolution& s, const ExitProblem& prob,
                                                     std::size_t samples = 1000) {
  return posterior_feasibility_check(s.v, prob, samples);
}

}  // namespace exitsos
