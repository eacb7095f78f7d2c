#pragma once

// Exit problems for polynomial diffusions on the unit ball and the action
// of their second-order generator on polynomials.
//
// Two conventions are supported:
//   Dynkin         Gv = 1/2 sum a_ij d2v/dxidxj + sum f0_i dv/dxi
//   PaperVerbatim  Lv = -sum a_ij d2v/dxidxj + sum f0_i dv/dxi
// The hierarchy certifies Gv in Q(b) (Dynkin) or -Lv in Q(b) (PaperVerbatim).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "exitsos/bounds.hpp"
#include "exitsos/extrema.hpp"
#include "exitsos/polynomial.hpp"
#include "exitsos/random.hpp"

namespace exitsos {

using PolyMatrix = std::vector<std::vector<Polynomial>>;

enum class Convention { Dynkin, PaperVerbatim };

inline std::string to_string(Convention c) { return c == Convention::Dynkin ? "dynkin" : "paper_verbatim"; }

inline Convention convention_from_string(const std::string& s) {
  if (s == "dynkin" || s == "DYNKIN") return Convention::Dynkin;
  if (s == "paper_verbatim" || s == "PAPER_VERBATIM" || s == "paper") return Convention::PaperVerbatim;
  throw std::invalid_argument("unknown generator convention: " + s);
}

inline int max_degree(const std::vector<Polynomial>& v) {
  int d = 0;
  for (const auto& p : v) d = std::max(d, p.degree());
  return d;
}

inline int max_degree(const PolyMatrix& m) {
  int d = 0;
  for (const auto& row : m) d = std::max(d, max_degree(row));
  return d;
}

/// A = F F^T, exact.
inline PolyMatrix diffusion_to_A(const PolyMatrix& F) {
  if (F.empty()) throw std::invalid_argument("diffusion_to_A: empty matrix");
  const std::size_t n = F.size();
  const std::size_t r = F[0].size();
  for (const auto& row : F)
    if (row.size() != r) throw std::invalid_argument("diffusion_to_A: ragged diffusion matrix");
  const std::size_t dim = F[0].empty() ? 1 : F[0][0].dim();
  PolyMatrix A(n, std::vector<Polynomial>(n, Polynomial(dim)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < r; ++k) A[i][j] += F[i][k] * F[j][k];
  return A;
}

inline PolyMatrix identity_matrix(std::size_t n) {
  PolyMatrix I(n, std::vector<Polynomial>(n, Polynomial(n)));
  for (std::size_t i = 0; i < n; ++i) I[i][i] = Polynomial::constant(n, 1.0);
  return I;
}

inline std::vector<Polynomial> zero_vector(std::size_t n) { return std::vector<Polynomial>(n, Polynomial(n)); }

/// Margin by which x0 must lie inside the open unit ball.
inline constexpr double kInteriorMargin = 1e-9;

struct ExitProblem {
  std::size_t n = 0;
  std::vector<Polynomial> drift;         // f0, length n
  std::optional<PolyMatrix> diffusion;   // F, n x r, when specified at the SDE level
  PolyMatrix A;                          // F F^T, or supplied directly
  Polynomial g;                          // boundary data
  std::vector<double> x0;
  Convention convention = Convention::Dynkin;

  static ExitProblem from_diffusion(std::vector<Polynomial> drift, PolyMatrix F, Polynomial g, std::vector<double> x0,
                                    Convention c = Convention::Dynkin) {
    ExitProblem p;
    p.n = drift.size();
    p.drift = std::move(drift);
    p.A = diffusion_to_A(F);
    p.diffusion = std::move(F);
    p.g = std::move(g);
    p.x0 = std::move(x0);
    p.convention = c;
    p.validate();
    return p;
  }

  static ExitProblem from_generator_matrix(std::vector<Polynomial> drift, PolyMatrix A, Polynomial g,
                                           std::vector<double> x0, Convention c = Convention::Dynkin) {
    ExitProblem p;
    p.n = drift.size();
    p.drift = std::move(drift);
    p.A = std::move(A);
    p.g = std::move(g);
    p.x0 = std::move(x0);
    p.convention = c;
    p.validate();
    return p;
  }

  /// dX = dW in R^n.
  static ExitProblem brownian(std::size_t n, Polynomial g, std::vector<double> x0) {
    return from_diffusion(zero_vector(n), identity_matrix(n), std::move(g), std::move(x0));
  }

  int degree_A() const { return max_degree(A); }
  int degree_drift() const { return max_degree(drift); }

  bool drift_is_zero() const {
    return std::all_of(drift.begin(), drift.end(), [](const Polynomial& p) { return p.is_zero(); });
  }

  bool is_unit_diffusion() const {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!(A[i][j] == (i == j ? Polynomial::constant(n, 1.0) : Polynomial(n)))) return false;
    return true;
  }

  void validate() const {
    if (n == 0) throw std::invalid_argument("ExitProblem: dimension must be positive");
    if (drift.size() != n) throw std::invalid_argument("ExitProblem: drift must have n entries");
    for (const auto& p : drift)
      if (p.dim() != n) throw std::invalid_argument("ExitProblem: drift entry has wrong dimension");
    if (A.size() != n) throw std::invalid_argument("ExitProblem: A must be n x n");
    for (const auto& row : A) {
      if (row.size() != n) throw std::invalid_argument("ExitProblem: A must be n x n");
      for (const auto& p : row)
        if (p.dim() != n) throw std::invalid_argument("ExitProblem: A entry has wrong dimension");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!(A[i][j] == A[j][i])) throw std::invalid_argument("ExitProblem: A is not symmetric");
    if (diffusion) {
      if (diffusion->size() != n) throw std::invalid_argument("ExitProblem: diffusion must have n rows");
      for (const auto& row : *diffusion)
        for (const auto& p : row)
          if (p.dim() != n) throw std::invalid_argument("ExitProblem: diffusion entry has wrong dimension");
    }
    if (g.dim() != n) throw std::invalid_argument("ExitProblem: g has wrong dimension");
    if (x0.size() != n) throw std::invalid_argument("ExitProblem: x0 has wrong dimension");
    double r2 = 0.0;
    for (double v : x0) r2 += v * v;
    if (!(std::sqrt(r2) < 1.0 - kInteriorMargin))
      throw std::invalid_argument("ExitProblem: x0 must lie strictly inside the unit ball");
  }
};

struct GeneratorImage {
  Polynomial value;
  int degree_bound = 0;
};

inline GeneratorImage apply_generator(const ExitProblem& prob, const Polynomial& v) {
  if (v.dim() != prob.n) throw std::invalid_argument("apply_generator: dimension mismatch");
  const double second_order = prob.convention == Convention::Dynkin ? 0.5 : -1.0;
  Polynomial out(prob.n);
  for (std::size_t i = 0; i < prob.n; ++i) {
    const Polynomial di = partial(v, i);
    if (!prob.drift[i].is_zero()) out += prob.drift[i] * di;
    for (std::size_t j = 0; j < prob.n; ++j) {
      if (prob.A[i][j].is_zero()) continue;
      out += second_order * (prob.A[i][j] * partial(di, j));
    }
  }
  GeneratorImage img{std::move(out), generator_degree(v.degree(), prob.degree_A(), prob.degree_drift())};
  if (img.value.degree() > img.degree_bound) throw std::logic_error("apply_generator: degree bound violated");
  return img;
}

/// The polynomial whose Q_l(b)-membership the hierarchy certifies.
inline Polynomial hierarchy_target(const ExitProblem& prob, const Polynomial& v) {
  Polynomial img = apply_generator(prob, v).value;
  return prob.convention == Convention::Dynkin ? img : -img;
}

inline Eigen::MatrixXd evaluate_matrix(const PolyMatrix& M, std::span<const double> x) {
  const std::size_t rows = M.size(), cols = rows ? M[0].size() : 0;
  Eigen::MatrixXd out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = M[i][j](x);
  return out;
}

struct EllipticityReport {
  double min_eigenvalue = 0.0;
  std::vector<double> worst_point;
  std::size_t samples = 0;
  bool pass = false;
  static constexpr double kThreshold = 1e-8;
};

/// Minimum eigenvalue of A(x) over quasi-random ball points (plus the origin and the axis poles).
inline EllipticityReport ellipticity_check(const ExitProblem& prob, std::size_t samples = 4096) {
  if (samples < 1) throw std::invalid_argument("ellipticity_check: samples must be >= 1");
  EllipticityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  auto visit = [&](const std::vector<double>& x) {
    const Eigen::MatrixXd a = evaluate_matrix(prob.A, x);
    const double lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lam < rep.min_eigenvalue) {
      rep.min_eigenvalue = lam;
      rep.worst_point = x;
    }
    ++rep.samples;
  };
  visit(std::vector<double>(prob.n, 0.0));
  for (std::size_t i = 0; i < prob.n; ++i)
    for (double s : {-1.0, 1.0}) {
      std::vector<double> x(prob.n, 0.0);
      x[i] = s;
      visit(x);
    }
  for (std::size_t k = 1; k <= samples; ++k) visit(detail::region_point(Region::Ball, prob.n, halton_point(k, prob.n + 1)));
  rep.pass = rep.min_eigenvalue > EllipticityReport::kThreshold;
  return rep;
}

}  // namespace exitsos
