#pragma once

// Sparse multivariate real polynomials over a fixed ambient dimension.
//
// Terms are kept in graded-lexicographic order: total degree first, then
// lexicographic comparison of the exponent vectors. Every serialization and
// every constraint index derived from a Polynomial follows that order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exitsos {

using Exponent = std::vector<int>;

inline int total_degree(const Exponent& e) {
  return std::accumulate(e.begin(), e.end(), 0);
}

struct GradedLexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

/// All exponents of total degree <= max_degree in `dim` variables, graded-lex ascending.
inline std::vector<Exponent> monomials_up_to(std::size_t dim, int max_degree) {
  std::vector<Exponent> out;
  if (max_degree < 0) return out;
  Exponent cur(dim, 0);
  // Depth-first enumeration of all compositions with sum <= max_degree.
  auto rec = [&](auto&& self, std::size_t axis, int budget) -> void {
    if (axis == dim) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= budget; ++k) {
      cur[axis] = k;
      self(self, axis + 1, budget - k);
    }
    cur[axis] = 0;
  };
  rec(rec, 0, max_degree);
  std::sort(out.begin(), out.end(), GradedLexLess{});
  return out;
}

inline std::size_t monomial_count(std::size_t dim, int max_degree) {
  if (max_degree < 0) return 0;
  // binom(dim + d, dim)
  double r = 1.0;
  for (std::size_t i = 1; i <= dim; ++i) r = r * static_cast<double>(max_degree + i) / static_cast<double>(i);
  return static_cast<std::size_t>(std::llround(r));
}

inline Exponent add_exponents(const Exponent& a, const Exponent& b) {
  Exponent r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

class Polynomial {
 public:
  using Terms = std::map<Exponent, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("Polynomial: dimension must be positive");
  }

  static Polynomial constant(std::size_t dim, double c) {
    Polynomial p(dim);
    p.add_term(Exponent(dim, 0), c);
    return p;
  }

  /// The coordinate x_{axis}, axis zero-based.
  static Polynomial variable(std::size_t dim, std::size_t axis) {
    if (axis >= dim) throw std::out_of_range("Polynomial::variable: axis out of range");
    Polynomial p(dim);
    Exponent e(dim, 0);
    e[axis] = 1;
    p.add_term(e, 1.0);
    return p;
  }

  static Polynomial monomial(const Exponent& e, double c = 1.0) {
    Polynomial p(e.size());
    p.add_term(e, c);
    return p;
  }

  /// b(x) = 1 - |x|^2, the defining polynomial of the unit ball.
  static Polynomial ball(std::size_t dim) {
    Polynomial p = constant(dim, 1.0);
    for (std::size_t i = 0; i < dim; ++i) {
      Exponent e(dim, 0);
      e[i] = 2;
      p.add_term(e, -1.0);
    }
    return p;
  }

  static Polynomial squared_norm(std::size_t dim) { return constant(dim, 1.0) - ball(dim); }

  std::size_t dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
  }

  double coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  /// Accumulates c into the coefficient of x^e; an exactly-zero result is removed.
  void add_term(const Exponent& e, double c) {
    if (e.size() != dim_) throw std::invalid_argument("Polynomial::add_term: exponent length mismatch");
    for (int k : e)
      if (k < 0) throw std::invalid_argument("Polynomial::add_term: negative exponent");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != dim_) throw std::invalid_argument("Polynomial: evaluation point has wrong dimension");
    if (terms_.empty()) return 0.0;
    const int deg = degree();
    // powers[i * (deg + 1) + k] = x_i^k
    std::vector<double> powers(dim_ * static_cast<std::size_t>(deg + 1));
    for (std::size_t i = 0; i < dim_; ++i) {
      double v = 1.0;
      for (int k = 0; k <= deg; ++k) {
        powers[i * (deg + 1) + k] = v;
        v *= x[i];
      }
    }
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (std::size_t i = 0; i < dim_; ++i) t *= powers[i * (deg + 1) + e[i]];
      s += t;
    }
    return s;
  }

  double operator()(const std::vector<double>& x) const { return (*this)(std::span<const double>(x)); }

  Polynomial& operator+=(const Polynomial& o) {
    check_same_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_same_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (it->second == 0.0)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same_dim(b);
    Polynomial r(a.dim_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) r.add_term(add_exponents(ea, eb), ca * cb);
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  void check_same_dim(const Polynomial& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("Polynomial: dimension mismatch");
  }

  std::size_t dim_ = 1;
  Terms terms_;
};

inline Polynomial pow(const Polynomial& p, int k) {
  if (k < 0) throw std::invalid_argument("pow: negative exponent");
  Polynomial r = Polynomial::constant(p.dim(), 1.0);
  for (int i = 0; i < k; ++i) r = r * p;
  return r;
}

/// Formal partial derivative d p / d x_axis (axis zero-based).
inline Polynomial partial(const Polynomial& p, std::size_t axis) {
  if (axis >= p.dim()) throw std::out_of_range("partial: axis out of range");
  Polynomial r(p.dim());
  for (const auto& [e, c] : p.terms()) {
    if (e[axis] == 0) continue;
    Exponent f = e;
    f[axis] -= 1;
    r.add_term(f, c * e[axis]);
  }
  return r;
}

inline Polynomial partial(const Polynomial& p, std::size_t axis_i, std::size_t axis_j) {
  return partial(partial(p, axis_i), axis_j);
}

/// Drops terms with |c| <= tol. Display helper; arithmetic never prunes by tolerance.
inline Polynomial truncate(const Polynomial& p, double tol) {
  Polynomial r(p.dim());
  for (const auto& [e, c] : p.terms())
    if (std::abs(c) > tol) r.add_term(e, c);
  return r;
}

inline double max_abs_coefficient(const Polynomial& p) {
  double m = 0.0;
  for (const auto& [e, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One line per term: `e1 e2 ... en : coeff`.
inline std::string to_text(const Polynomial& p) {
  std::ostringstream os;
  for (const auto& [e, c] : p.terms()) {
    for (std::size_t i = 0; i < e.size(); ++i) os << e[i] << ' ';
    os << ": " << format_real(c) << '\n';
  }
  return os.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses a single term line `e1 ... en : coeff` and adds it to p.
inline void parse_term_line(const std::string& line, Polynomial& p) {
  const auto colon = line.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("polynomial term line lacks ':' : " + line);
  std::istringstream lhs(line.substr(0, colon));
  Exponent e;
  int k;
  while (lhs >> k) e.push_back(k);
  if (!lhs.eof()) throw std::invalid_argument("bad exponent list: " + line);
  if (e.size() != p.dim())
    throw std::invalid_argument("exponent has " + std::to_string(e.size()) + " entries, expected " +
                                std::to_string(p.dim()) + ": " + line);
  std::istringstream rhs(line.substr(colon + 1));
  double c;
  if (!(rhs >> c)) throw std::invalid_argument("bad coefficient: " + line);
  std::string rest;
  if (rhs >> rest) throw std::invalid_argument("trailing characters after coefficient: " + line);
  p.add_term(e, c);
}

/// Inverse of to_text. Blank lines and lines starting with '#' are skipped.
inline Polynomial polynomial_from_text(std::size_t dim, const std::string& text) {
  Polynomial p(dim);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    parse_term_line(line, p);
  }
  return p;
}

inline std::ostream& operator<<(std::ostream& os, const Polynomial& p) {
  if (p.is_zero()) return os << "0";
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    const double a = std::abs(c);
    const bool is_const = total_degree(e) == 0;
    if (a != 1.0 || is_const) os << a;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      os << "x" << (i + 1);
      if (e[i] > 1) os << "^" << e[i];
    }
  }
  return os;
}

}  // namespace exitsos
