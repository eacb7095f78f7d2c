#pragma once

// Multivariate trigonometric polynomials on [0,1]^m:
//   f(theta) = sum_w f_w exp(2 pi i w . theta),  max_i |w_i| <= bandwidth.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "exitsos/polynomial.hpp"

namespace exitsos {

using Frequency = std::vector<int>;
using Complex = std::complex<double>;

inline int max_abs_frequency(const Frequency& w) {
  int m = 0;
  for (int k : w) m = std::max(m, std::abs(k));
  return m;
}

inline Frequency negate(const Frequency& w) {
  Frequency r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[i] = -w[i];
  return r;
}

/// All frequencies in [-b, b]^m in lexicographic order.
inline std::vector<Frequency> frequency_box(std::size_t m, int b) {
  std::vector<Frequency> out;
  Frequency cur(m, -b);
  if (m == 0) return out;
  while (true) {
    out.push_back(cur);
    std::size_t i = m;
    while (i > 0) {
      --i;
      if (cur[i] < b) {
        ++cur[i];
        for (std::size_t j = i + 1; j < m; ++j) cur[j] = -b;
        break;
      }
      if (i == 0) return out;
    }
  }
}

class TrigPolynomial {
 public:
  using Terms = std::map<Frequency, Complex>;

  TrigPolynomial() = default;
  TrigPolynomial(std::size_t dim, int bandwidth) : dim_(dim), bandwidth_(bandwidth) {
    if (dim == 0) throw std::invalid_argument("TrigPolynomial: dimension must be positive");
    if (bandwidth < 0) throw std::invalid_argument("TrigPolynomial: negative bandwidth");
  }

  static TrigPolynomial constant(std::size_t dim, Complex c) {
    TrigPolynomial q(dim, 0);
    q.add_term(Frequency(dim, 0), c);
    return q;
  }

  /// cos(2 pi k theta_axis).
  static TrigPolynomial cos_mode(std::size_t dim, std::size_t axis, int k) {
    TrigPolynomial q(dim, std::abs(k));
    Frequency w(dim, 0);
    w[axis] = k;
    q.add_term(w, 0.5);
    q.add_term(negate(w), 0.5);
    return q;
  }

  /// sin(2 pi k theta_axis) = (e^{2 pi i k t} - e^{-2 pi i k t}) / (2i).
  static TrigPolynomial sin_mode(std::size_t dim, std::size_t axis, int k) {
    TrigPolynomial q(dim, std::abs(k));
    Frequency w(dim, 0);
    w[axis] = k;
    q.add_term(w, Complex(0.0, -0.5));
    q.add_term(negate(w), Complex(0.0, 0.5));
    return q;
  }

  std::size_t dim() const { return dim_; }
  int bandwidth() const { return bandwidth_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Largest |w_i| actually stored; <= bandwidth().
  int effective_bandwidth() const {
    int b = 0;
    for (const auto& [w, c] : terms_) b = std::max(b, max_abs_frequency(w));
    return b;
  }

  Complex coefficient(const Frequency& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? Complex{} : it->second;
  }

  void add_term(const Frequency& w, Complex c) {
    if (w.size() != dim_) throw std::invalid_argument("TrigPolynomial::add_term: frequency length mismatch");
    if (max_abs_frequency(w) > bandwidth_)
      throw std::invalid_argument("TrigPolynomial::add_term: frequency exceeds bandwidth");
    if (c == Complex{}) return;
    auto [it, inserted] = terms_.try_emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Complex{}) terms_.erase(it);
    }
  }

  bool is_real_valued(double tol = 1e-12) const {
    for (const auto& [w, c] : terms_)
      if (std::abs(coefficient(negate(w)) - std::conj(c)) > tol) return false;
    return true;
  }

  Complex operator()(std::span<const double> theta) const {
    if (theta.size() != dim_) throw std::invalid_argument("TrigPolynomial: evaluation point has wrong dimension");
    if (terms_.empty()) return {};
    const int b = effective_bandwidth();
    const std::size_t stride = 2 * static_cast<std::size_t>(b) + 1;
    // phases[i * stride + (k + b)] = exp(2 pi i k theta_i)
    std::vector<Complex> phases(dim_ * stride);
    for (std::size_t i = 0; i < dim_; ++i)
      for (int k = -b; k <= b; ++k)
        phases[i * stride + (k + b)] = std::polar(1.0, 2.0 * std::numbers::pi * k * theta[i]);
    Complex s{};
    for (const auto& [w, c] : terms_) {
      Complex t = c;
      for (std::size_t i = 0; i < dim_; ++i) t *= phases[i * stride + (w[i] + b)];
      s += t;
    }
    return s;
  }
  Complex operator()(const std::vector<double>& theta) const { return (*this)(std::span<const double>(theta)); }

  TrigPolynomial& operator+=(const TrigPolynomial& o) {
    check_same_dim(o);
    bandwidth_ = std::max(bandwidth_, o.bandwidth_);
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
  }
  TrigPolynomial& operator-=(const TrigPolynomial& o) {
    check_same_dim(o);
    bandwidth_ = std::max(bandwidth_, o.bandwidth_);
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
  }
  TrigPolynomial& operator*=(Complex s) {
    if (s == Complex{}) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (it->second == Complex{})
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
  friend TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b) { return a -= b; }
  friend TrigPolynomial operator*(TrigPolynomial a, Complex s) { return a *= s; }
  friend TrigPolynomial operator*(Complex s, TrigPolynomial a) { return a *= s; }
  friend TrigPolynomial operator*(TrigPolynomial a, double s) { return a *= Complex(s); }
  friend TrigPolynomial operator*(double s, TrigPolynomial a) { return a *= Complex(s); }

  /// Convolution of coefficient tables; bandwidths add.
  friend TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b) {
    a.check_same_dim(b);
    TrigPolynomial r(a.dim_, a.bandwidth_ + b.bandwidth_);
    for (const auto& [wa, ca] : a.terms_)
      for (const auto& [wb, cb] : b.terms_) r.add_term(add_exponents(wa, wb), ca * cb);
    return r;
  }

 private:
  void check_same_dim(const TrigPolynomial& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("TrigPolynomial: dimension mismatch");
  }

  std::size_t dim_ = 1;
  int bandwidth_ = 0;
  Terms terms_;
};

/// Copy whose declared bandwidth equals the stored frequency support.
inline TrigPolynomial tighten(const TrigPolynomial& q) {
  TrigPolynomial r(q.dim(), q.effective_bandwidth());
  for (const auto& [w, c] : q.terms()) r.add_term(w, c);
  return r;
}

/// ||f||_F = sum_w |f_w|.
inline double trig_fnorm(const TrigPolynomial& q) {
  double s = 0.0;
  for (const auto& [w, c] : q.terms()) s += std::abs(c);
  return s;
}

inline Complex trig_mean(const TrigPolynomial& q) { return q.coefficient(Frequency(q.dim(), 0)); }

/// q - q_0.
inline TrigPolynomial without_mean(const TrigPolynomial& q) {
  TrigPolynomial r = q;
  r.add_term(Frequency(q.dim(), 0), -trig_mean(q));
  return r;
}

/// Sum_w |f_w|^2, the squared L2 norm over [0,1]^m.
inline double trig_l2_squared(const TrigPolynomial& q) {
  double s = 0.0;
  for (const auto& [w, c] : q.terms()) s += std::norm(c);
  return s;
}

inline TrigPolynomial truncate(const TrigPolynomial& q, double tol) {
  TrigPolynomial r(q.dim(), q.bandwidth());
  for (const auto& [w, c] : q.terms())
    if (std::abs(c) > tol) r.add_term(w, c);
  return r;
}

/// Max coefficient distance between two trig polynomials.
inline double max_coefficient_distance(const TrigPolynomial& a, const TrigPolynomial& b) {
  const TrigPolynomial d = a - b;
  double m = 0.0;
  for (const auto& [w, c] : d.terms()) m = std::max(m, std::abs(c));
  return m;
}

/// Gradient of Re q at theta.
inline std::vector<double> trig_gradient_real(const TrigPolynomial& q, std::span<const double> theta) {
  std::vector<double> g(q.dim(), 0.0);
  for (const auto& [w, c] : q.terms()) {
    double phase = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) phase += w[i] * theta[i];
    const Complex e = c * std::polar(1.0, 2.0 * std::numbers::pi * phase);
    // d/dtheta_i of c e^{2 pi i w.theta} = 2 pi i w_i (...)
    for (std::size_t i = 0; i < q.dim(); ++i) g[i] += (Complex(0.0, 2.0 * std::numbers::pi * w[i]) * e).real();
  }
  return g;
}

/// One line per term: `w1 ... wm : re im`.
inline std::string to_text(const TrigPolynomial& q) {
  std::ostringstream os;
  for (const auto& [w, c] : q.terms()) {
    for (std::size_t i = 0; i < w.size(); ++i) os << w[i] << ' ';
    os << ": " << format_real(c.real()) << ' ' << format_real(c.imag()) << '\n';
  }
  return os.str();
}

inline TrigPolynomial trig_from_text(std::size_t dim, int bandwidth, const std::string& text) {
  TrigPolynomial q(dim, bandwidth);
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("trig term line lacks ':' : " + line);
    std::istringstream lhs(line.substr(0, colon));
    Frequency w;
    int k;
    while (lhs >> k) w.push_back(k);
    std::istringstream rhs(line.substr(colon + 1));
    double re, im;
    if (!(rhs >> re >> im)) throw std::invalid_argument("bad complex coefficient: " + line);
    q.add_term(w, Complex(re, im));
  }
  return q;
}

}  // namespace exitsos
