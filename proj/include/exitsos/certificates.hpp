#pragma once

// Gram-matrix encodings of three cones inside a ConicProgram:
//   Q_l(b)       sigma0 + b sigma1,   deg sigma0 <= 2l, deg b sigma1 <= 2l
//   Q_l(-b, b)   sigma0 + b lambda,   lambda free of degree <= 2l - 2
//   Sigma_l^T    phi^* Q phi,         Q Hermitian PSD over frequencies [-l, l]^m
// and the reconstruction checks that verify solved certificates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "exitsos/conic_program.hpp"
#include "exitsos/polynomial.hpp"
#include "exitsos/sdp_solver.hpp"
#include "exitsos/trig_polynomial.hpp"

namespace exitsos {

/// Polynomial whose coefficients are affine in the program's unknowns.
class AffinePolynomial {
 public:
  using Terms = std::map<Exponent, AffineForm, GradedLexLess>;

  explicit AffinePolynomial(std::size_t dim) : dim_(dim) {}
  explicit AffinePolynomial(const Polynomial& p) : dim_(p.dim()) { add_constant(p); }

  std::size_t dim() const { return dim_; }
  const Terms& terms() const { return terms_; }

  void add_constant(const Polynomial& p, double scale = 1.0) {
    check(p);
    for (const auto& [e, c] : p.terms()) terms_[e].constant += scale * c;
  }
  /// += scale * unknown * p
  void add_scaled(const Polynomial& p, std::size_t unknown, double scale = 1.0) {
    check(p);
    for (const auto& [e, c] : p.terms()) terms_[e].add(unknown, scale * c);
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, f] : terms_)
      if (!f.is_zero()) d = std::max(d, total_degree(e));
    return d;
  }

  Polynomial evaluate(const std::vector<double>& values) const {
    Polynomial p(dim_);
    for (const auto& [e, f] : terms_) p.add_term(e, f.evaluate(values));
    return p;
  }

 private:
  void check(const Polynomial& p) const {
    if (p.dim() != dim_) throw std::invalid_argument("AffinePolynomial: dimension mismatch");
  }
  std::size_t dim_;
  Terms terms_;
};

/// Trigonometric polynomial with affine real and imaginary parts per frequency.
class AffineTrig {
 public:
  struct Coef {
    AffineForm re, im;
  };
  using Terms = std::map<Frequency, Coef>;

  explicit AffineTrig(std::size_t dim) : dim_(dim) {}
  explicit AffineTrig(const TrigPolynomial& q) : dim_(q.dim()) { add_constant(q); }

  std::size_t dim() const { return dim_; }
  const Terms& terms() const { return terms_; }

  void add_constant(const TrigPolynomial& q, double scale = 1.0) {
    check(q);
    for (const auto& [w, c] : q.terms()) {
      auto& t = terms_[w];
      t.re.constant += scale * c.real();
      t.im.constant += scale * c.imag();
    }
  }
  void add_scaled(const TrigPolynomial& q, std::size_t unknown, double scale = 1.0) {
    check(q);
    for (const auto& [w, c] : q.terms()) {
      auto& t = terms_[w];
      t.re.add(unknown, scale * c.real());
      t.im.add(unknown, scale * c.imag());
    }
  }

  int bandwidth() const {
    int b = 0;
    for (const auto& [w, c] : terms_)
      if (!c.re.is_zero() || !c.im.is_zero()) b = std::max(b, max_abs_frequency(w));
    return b;
  }

  TrigPolynomial evaluate(const std::vector<double>& values) const {
    TrigPolynomial q(dim_, bandwidth());
    for (const auto& [w, c] : terms_) q.add_term(w, Complex(c.re.evaluate(values), c.im.evaluate(values)));
    return q;
  }

 private:
  void check(const TrigPolynomial& q) const {
    if (q.dim() != dim_) throw std::invalid_argument("AffineTrig: dimension mismatch");
  }
  std::size_t dim_;
  Terms terms_;
};

enum class CertificateKind { BallModule, SpherePreordering, TrigSos };

inline std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::BallModule: return "ball_quadratic_module";
    case CertificateKind::SpherePreordering: return "sphere_preordering";
    case CertificateKind::TrigSos: return "trig_sos";
  }
  return "unknown";
}

inline CertificateKind certificate_kind_from_string(const std::string& s) {
  if (s == "ball_quadratic_module") return CertificateKind::BallModule;
  if (s == "sphere_preordering") return CertificateKind::SpherePreordering;
  if (s == "trig_sos") return CertificateKind::TrigSos;
  throw std::invalid_argument("unknown certificate kind: " + s);
}

/// Where a membership constraint lives inside its program.
struct ConstraintHandle {
  CertificateKind kind = CertificateKind::BallModule;
  std::string name;
  std::size_t dim = 0;
  int level = 0;
  std::vector<std::size_t> blocks;          // block ordinals
  std::vector<std::vector<Exponent>> bases;  // Gram bases (polynomial kinds)
  std::vector<Frequency> frequencies;        // Gram frequencies (trig kind)
  std::vector<Exponent> multiplier_basis;    // free multiplier basis (sphere kind)
  std::vector<std::size_t> multiplier_vars;
  std::size_t first_equality = 0, num_equalities = 0;
};

namespace detail {

inline void add_polynomial_equalities(ConicProgram& prog, const std::map<Exponent, AffineForm, GradedLexLess>& expr,
                                      const AffinePolynomial& target, const std::string& name, ConstraintHandle& h) {
  std::map<Exponent, AffineForm, GradedLexLess> eqs = expr;
  for (const auto& [e, f] : target.terms()) {
    AffineForm neg = f;
    neg *= -1.0;
    eqs[e] += neg;
  }
  h.first_equality = prog.equalities().size();
  for (const auto& [e, f] : eqs) {
    std::string label = name + "[";
    for (std::size_t i = 0; i < e.size(); ++i) label += (i ? " " : "") + std::to_string(e[i]);
    prog.add_equality(f, label + "]");
  }
  h.num_equalities = prog.equalities().size() - h.first_equality;
}

/// Adds m^T G m (times the polynomial `mult`) for the block starting at `block` into expr.
inline void add_gram_expression(const ConicProgram& prog, std::size_t block, const std::vector<Exponent>& basis,
                                const Polynomial& mult, std::map<Exponent, AffineForm, GradedLexLess>& expr) {
  const PsdBlock& b = prog.blocks()[block];
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j) {
      const Exponent e = add_exponents(basis[i], basis[j]);
      const double w = i == j ? 1.0 : 2.0;
      for (const auto& [me, mc] : mult.terms()) expr[add_exponents(e, me)].add(b.index(i, j), w * mc);
    }
}

inline void check_level(int target_degree, int level, const char* who) {
  if (level < 0) throw std::invalid_argument(std::string(who) + ": level must be >= 0");
  if (target_degree > 2 * level)
    throw std::invalid_argument(std::string(who) + ": level " + std::to_string(level) +
                                " is too small for a target of degree " + std::to_string(target_degree));
}

}  // namespace detail

/// target = sigma0 + b sigma1 with Gram blocks over monomials of degree <= l and <= l-1.
inline ConstraintHandle qmodule_ball_constraint(ConicProgram& prog, const AffinePolynomial& target, int level,
                                                const std::string& name = "ball") {
  detail::check_level(target.degree(), level, "qmodule_ball_constraint");
  const std::size_t n = target.dim();
  ConstraintHandle h;
  h.kind = CertificateKind::BallModule;
  h.name = name;
  h.dim = n;
  h.level = level;
  std::map<Exponent, AffineForm, GradedLexLess> expr;
  h.bases.push_back(monomials_up_to(n, level));
  h.blocks.push_back(prog.add_psd_block(name + ".sigma0", h.bases[0].size()));
  detail::add_gram_expression(prog, h.blocks[0], h.bases[0], Polynomial::constant(n, 1.0), expr);
  if (level >= 1) {
    h.bases.push_back(monomials_up_to(n, level - 1));
    h.blocks.push_back(prog.add_psd_block(name + ".sigma1", h.bases[1].size()));
    detail::add_gram_expression(prog, h.blocks[1], h.bases[1], Polynomial::ball(n), expr);
  }
  detail::add_polynomial_equalities(prog, expr, target, name, h);
  return h;
}

/// target = sigma0 + b lambda with lambda a free polynomial of degree <= 2l - 2.
inline ConstraintHandle sphere_preordering_constraint(ConicProgram& prog, const AffinePolynomial& target, int level,
                                                      const std::string& name = "sphere") {
  detail::check_level(target.degree(), level, "sphere_preordering_constraint");
  const std::size_t n = target.dim();
  ConstraintHandle h;
  h.kind = CertificateKind::SpherePreordering;
  h.name = name;
  h.dim = n;
  h.level = level;
  std::map<Exponent, AffineForm, GradedLexLess> expr;
  h.bases.push_back(monomials_up_to(n, level));
  h.blocks.push_back(prog.add_psd_block(name + ".sigma0", h.bases[0].size()));
  detail::add_gram_expression(prog, h.blocks[0], h.bases[0], Polynomial::constant(n, 1.0), expr);
  if (level >= 1) {
    h.multiplier_basis = monomials_up_to(n, 2 * level - 2);
    const Polynomial b = Polynomial::ball(n);
    for (const auto& e : h.multiplier_basis) {
      std::string label = name + ".lambda[";
      for (std::size_t i = 0; i < e.size(); ++i) label += (i ? " " : "") + std::to_string(e[i]);
      const std::size_t var = prog.add_free(label + "]");
      h.multiplier_vars.push_back(var);
      for (const auto& [be, bc] : b.terms()) expr[add_exponents(e, be)].add(var, bc);
    }
  }
  detail::add_polynomial_equalities(prog, expr, target, name, h);
  return h;
}

/// Frequencies omega with omega = 0 or whose first nonzero entry is positive.
inline bool is_half_frequency(const Frequency& w) {
  for (int v : w) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return true;
}

/// target = phi^* Q phi, Q = X + iY Hermitian PSD over the frequency box [-r, r]^m.
///
/// Q is realized through a real PSD block Z of side 2N with X = (Z11 + Z22)/2 and
/// Y = (Z21 - Z12)/2; every Hermitian PSD Q arises this way, and conversely. The
/// box radius r is l, or ceil(bandwidth/2) when restrict_support is set (a subcone).
inline ConstraintHandle trig_sos_constraint(ConicProgram& prog, const AffineTrig& target, int level,
                                            bool restrict_support = false, const std::string& name = "trig") {
  if (level < 0) throw std::invalid_argument("trig_sos_constraint: level must be >= 0");
  const int bw = target.bandwidth();
  if (bw > 2 * level)
    throw std::invalid_argument("trig_sos_constraint: target bandwidth " + std::to_string(bw) + " exceeds 2l = " +
                                std::to_string(2 * level));
  for (const auto& [w, c] : target.terms()) {
    const auto it = target.terms().find(negate(w));
    auto same = [](const AffineForm& a, const AffineForm& b, double sign) {
      AffineForm d = b;
      d *= sign;
      d += a;
      if (std::abs(d.constant) > 1e-12) return false;
      return std::all_of(d.linear.begin(), d.linear.end(), [](const auto& kv) { return std::abs(kv.second) <= 1e-12; });
    };
    const AffineForm zero;
    const AffineForm& re2 = it == target.terms().end() ? zero : it->second.re;
    const AffineForm& im2 = it == target.terms().end() ? zero : it->second.im;
    if (!same(c.re, re2, -1.0) || !same(c.im, im2, 1.0))
      throw std::invalid_argument("trig_sos_constraint: target is not real-valued");
  }
  const std::size_t m = target.dim();
  const int radius = restrict_support ? (bw + 1) / 2 : level;
  ConstraintHandle h;
  h.kind = CertificateKind::TrigSos;
  h.name = name;
  h.dim = m;
  h.level = level;
  h.frequencies = frequency_box(m, radius);
  const std::size_t N = h.frequencies.size();
  h.blocks.push_back(prog.add_psd_block(name + ".Z", 2 * N));
  const PsdBlock& Z = prog.blocks()[h.blocks[0]];

  std::map<Frequency, AffineTrig::Coef> eqs;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) {
      Frequency w(m);
      for (std::size_t k = 0; k < m; ++k) w[k] = h.frequencies[b][k] - h.frequencies[a][k];
      if (!is_half_frequency(w)) continue;
      auto& e = eqs[w];
      e.re.add(Z.index(a, b), 0.5);
      e.re.add(Z.index(N + a, N + b), 0.5);
      if (a != b) {
        e.im.add(Z.index(b, N + a), 0.5);
        e.im.add(Z.index(a, N + b), -0.5);
      }
    }
  for (const auto& [w, c] : target.terms()) {
    if (!is_half_frequency(w)) continue;
    AffineForm re = c.re, im = c.im;
    re *= -1.0;
    im *= -1.0;
    eqs[w].re += re;
    eqs[w].im += im;
  }
  h.first_equality = prog.equalities().size();
  const Frequency zero(m, 0);
  for (const auto& [w, c] : eqs) {
    std::string label = name + "[";
    for (std::size_t i = 0; i < w.size(); ++i) label += (i ? " " : "") + std::to_string(w[i]);
    prog.add_equality(c.re, label + "].re");
    if (w != zero) prog.add_equality(c.im, label + "].im");
  }
  h.num_equalities = prog.equalities().size() - h.first_equality;
  return h;
}

/// Solved Gram data for one constraint; residual and min_eig are filled by verify_certificate.
struct GramCertificate {
  CertificateKind kind = CertificateKind::BallModule;
  std::string name;
  std::size_t dim = 0;
  int level = 0;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<std::vector<Exponent>> bases;
  std::vector<Frequency> frequencies;
  Polynomial multiplier{1};  // sphere kind
  Polynomial target_poly{1};
  TrigPolynomial target_trig{1, 0};
  double residual = std::numeric_limits<double>::infinity();
  double min_eig = -std::numeric_limits<double>::infinity();
};

struct VerificationReport {
  bool pass = false;
  double residual = 0.0;
  double min_eig = 0.0;
  double tol = 0.0;
};

inline Eigen::MatrixXd block_matrix(const ConicProgram& prog, std::size_t block, const std::vector<double>& values) {
  const PsdBlock& b = prog.blocks()[block];
  Eigen::MatrixXd M(b.side, b.side);
  for (std::size_t i = 0; i < b.side; ++i)
    for (std::size_t j = i; j < b.side; ++j) M(i, j) = M(j, i) = values.at(b.index(i, j));
  return M;
}

/// Hermitian Q = X + iY from the real block Z.
inline Eigen::MatrixXcd hermitian_from_embedding(const Eigen::MatrixXd& Z) {
  const Eigen::Index N = Z.rows() / 2;
  const Eigen::MatrixXd X = 0.5 * (Z.topLeftCorner(N, N) + Z.bottomRightCorner(N, N));
  const Eigen::MatrixXd Y = 0.5 * (Z.bottomLeftCorner(N, N) - Z.topRightCorner(N, N));
  Eigen::MatrixXcd Q(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) Q(i, j) = Complex(X(i, j), Y(i, j));
  return Q;
}

/// [[X, -Y], [Y, X]] for Q = X + iY.
inline Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd& Q) {
  const Eigen::Index N = Q.rows();
  Eigen::MatrixXd Z(2 * N, 2 * N);
  Z.topLeftCorner(N, N) = Q.real();
  Z.bottomRightCorner(N, N) = Q.real();
  Z.topRightCorner(N, N) = -Q.imag();
  Z.bottomLeftCorner(N, N) = Q.imag();
  return Z;
}

inline double min_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

inline double min_eigenvalue(const Eigen::MatrixXcd& M) {
  if (M.rows() == 0) return 0.0;
  const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

inline Polynomial gram_polynomial(std::size_t dim, const std::vector<Exponent>& basis, const Eigen::MatrixXd& G) {
  Polynomial p(dim);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) p.add_term(add_exponents(basis[i], basis[j]), G(i, j));
  return p;
}

inline TrigPolynomial gram_trig(std::size_t dim, const std::vector<Frequency>& freqs, const Eigen::MatrixXcd& Q) {
  int r = 0;
  for (const auto& f : freqs) r = std::max(r, max_abs_frequency(f));
  TrigPolynomial q(dim, 2 * r);
  for (std::size_t a = 0; a < freqs.size(); ++a)
    for (std::size_t b = 0; b < freqs.size(); ++b) {
      Frequency w(dim);
      for (std::size_t k = 0; k < dim; ++k) w[k] = freqs[b][k] - freqs[a][k];
      q.add_term(w, Q(a, b));
    }
  return q;
}

/// Polynomial (or, for the trig kind, trigonometric polynomial) represented by the certificate.
inline Polynomial reconstruct_polynomial(const GramCertificate& c) {
  if (c.kind == CertificateKind::TrigSos) throw std::invalid_argument("reconstruct_polynomial: trig certificate");
  Polynomial p = gram_polynomial(c.dim, c.bases.at(0), c.blocks.at(0));
  const Polynomial b = Polynomial::ball(c.dim);
  if (c.kind == CertificateKind::BallModule) {
    if (c.blocks.size() > 1) p += b * gram_polynomial(c.dim, c.bases.at(1), c.blocks.at(1));
  } else {
    p += b * c.multiplier;
  }
  return p;
}

inline TrigPolynomial reconstruct_trig(const GramCertificate& c) {
  if (c.kind != CertificateKind::TrigSos) throw std::invalid_argument("reconstruct_trig: not a trig certificate");
  return gram_trig(c.dim, c.frequencies, hermitian_from_embedding(c.blocks.at(0)));
}

/// Recomputes the target from the raw Gram blocks; PASS iff residual <= tol and min_eig >= -tol.
inline VerificationReport verify_certificate(GramCertificate& c, double tol = 1e-6) {
  VerificationReport r;
  r.tol = tol;
  if (c.kind == CertificateKind::TrigSos) {
    r.residual = max_coefficient_distance(reconstruct_trig(c), c.target_trig);
    r.min_eig = min_eigenvalue(hermitian_from_embedding(c.blocks.at(0)));
  } else {
    r.residual = max_abs_coefficient(reconstruct_polynomial(c) - c.target_poly);
    r.min_eig = std::numeric_limits<double>::infinity();
    for (const auto& B : c.blocks) r.min_eig = std::min(r.min_eig, min_eigenvalue(B));
    if (c.blocks.empty()) r.min_eig = 0.0;
  }
  c.residual = r.residual;
  c.min_eig = r.min_eig;
  r.pass = r.residual <= tol && r.min_eig >= -tol;
  return r;
}

inline GramCertificate extract_certificate(const ConicProgram& prog, const ConstraintHandle& h,
                                           const std::vector<double>& values) {
  GramCertificate c;
  c.kind = h.kind;
  c.name = h.name;
  c.dim = h.dim;
  c.level = h.level;
  c.bases = h.bases;
  c.frequencies = h.frequencies;
  for (std::size_t b : h.blocks) c.blocks.push_back(block_matrix(prog, b, values));
  c.multiplier = Polynomial(h.dim);
  for (std::size_t k = 0; k < h.multiplier_vars.size(); ++k)
    c.multiplier.add_term(h.multiplier_basis[k], values.at(h.multiplier_vars[k]));
  return c;
}

struct LowerBoundResult {
  double value = 0.0;
  SolverResult solver;
  GramCertificate certificate;
  VerificationReport verification;
};

/// lb(g, l) = max { lambda : g - lambda in Q_l(b) }.
inline LowerBoundResult lb_ball(const Polynomial& g, int level, const SolverAdapter& solver,
                                const SolverOptions& opt = {}) {
  ConicProgram prog;
  const std::size_t lam = prog.add_free("lambda");
  AffinePolynomial target(g);
  target.add_scaled(Polynomial::constant(g.dim(), 1.0), lam, -1.0);
  const ConstraintHandle h = qmodule_ball_constraint(prog, target, level);
  AffineForm obj;
  obj.add(lam, 1.0);
  prog.set_objective(obj, Sense::Maximize);
  LowerBoundResult r;
  r.solver = solver.solve(prog, opt);
  r.value = r.solver.primal.at(lam);
  r.certificate = extract_certificate(prog, h, r.solver.primal);
  r.certificate.target_poly = target.evaluate(r.solver.primal);
  r.verification = verify_certificate(r.certificate);
  return r;
}

/// lb_T(q, l) = max { c : q - c in Sigma_l^T }.
inline LowerBoundResult lb_trig(const TrigPolynomial& q, int level, const SolverAdapter& solver,
                                const SolverOptions& opt = {}, bool restrict_support = false) {
  ConicProgram prog;
  const std::size_t c = prog.add_free("c");
  AffineTrig target(q);
  target.add_scaled(TrigPolynomial::constant(q.dim(), 1.0), c, -1.0);
  const ConstraintHandle h = trig_sos_constraint(prog, target, level, restrict_support);
  AffineForm obj;
  obj.add(c, 1.0);
  prog.set_objective(obj, Sense::Maximize);
  LowerBoundResult r;
  r.solver = solver.solve(prog, opt);
  r.value = r.solver.primal.at(c);
  r.certificate = extract_certificate(prog, h, r.solver.primal);
  r.certificate.target_trig = target.evaluate(r.solver.primal);
  r.verification = verify_certificate(r.certificate);
  return r;
}

}  // namespace exitsos
