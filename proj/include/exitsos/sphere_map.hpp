#pragma once

// Spherical coordinates on [0,1]^{n-1} as exact trigonometric polynomials:
//   psi_i     = cos(2 pi t_i) prod_{j<i} sin(2 pi t_j),              i <= n-2
//   psi_{n-1} = prod_{j<=n-2} sin(2 pi t_j) cos(4 pi t_{n-1})
//   psi_n     = prod_{j<=n-2} sin(2 pi t_j) sin(4 pi t_{n-1})
// For n = 2 the products are empty: psi = (cos 4 pi t, sin 4 pi t).

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "exitsos/polynomial.hpp"
#include "exitsos/trig_polynomial.hpp"

namespace exitsos {

class SphereMap {
 public:
  /// Powers psi_i^k for k <= memo_degree are tabulated at construction.
  explicit SphereMap(std::size_t n, int memo_degree = 8) : n_(n) {
    if (n < 2) throw std::invalid_argument("SphereMap: ambient dimension must be >= 2");
    const std::size_t m = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      TrigPolynomial c = TrigPolynomial::constant(m, 1.0);
      const std::size_t prefix = (i + 1 < n - 1) ? i : n - 2;  // number of leading sine factors
      for (std::size_t j = 0; j < prefix; ++j) c = c * TrigPolynomial::sin_mode(m, j, 1);
      if (i + 2 < n)
        c = c * TrigPolynomial::cos_mode(m, i, 1);
      else if (i + 2 == n)
        c = c * TrigPolynomial::cos_mode(m, m - 1, 2);
      else
        c = c * TrigPolynomial::sin_mode(m, m - 1, 2);
      components_.push_back(tighten(c));
    }
    powers_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      powers_[i].push_back(TrigPolynomial::constant(m, 1.0));
      for (int k = 1; k <= memo_degree; ++k) powers_[i].push_back(tighten(powers_[i].back() * components_[i]));
    }
  }

  std::size_t ambient_dim() const { return n_; }
  std::size_t angle_dim() const { return n_ - 1; }
  const std::vector<TrigPolynomial>& components() const { return components_; }

  /// psi_i^k; tabulated when k <= memo_degree, computed on the fly otherwise.
  TrigPolynomial component_power(std::size_t i, int k) const {
    if (k < static_cast<int>(powers_[i].size())) return powers_[i][k];
    TrigPolynomial r = powers_[i].back();
    for (int e = static_cast<int>(powers_[i].size()) - 1; e < k; ++e) r = tighten(r * components_[i]);
    return r;
  }

  /// psi(theta) evaluated with direct trigonometric functions.
  std::vector<double> point(std::span<const double> theta) const {
    if (theta.size() != n_ - 1) throw std::invalid_argument("SphereMap::point: angle vector has wrong length");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> x(n_);
    double prod = 1.0;
    for (std::size_t i = 0; i + 2 < n_; ++i) {
      x[i] = prod * std::cos(two_pi * theta[i]);
      prod *= std::sin(two_pi * theta[i]);
    }
    x[n_ - 2] = prod * std::cos(2.0 * two_pi * theta[n_ - 2]);
    x[n_ - 1] = prod * std::sin(2.0 * two_pi * theta[n_ - 2]);
    return x;
  }
  std::vector<double> point(const std::vector<double>& theta) const { return point(std::span<const double>(theta)); }

  /// Angles theta in [0,1/2]^{n-2} x [0,1/2) with point(theta) = x, for |x| = 1.
  /// At a pole (all trailing coordinates zero) the remaining angles are 0.
  std::vector<double> inverse(std::span<const double> x) const {
    if (x.size() != n_) throw std::invalid_argument("SphereMap::inverse: point has wrong dimension");
    std::vector<double> theta(n_ - 1, 0.0);
    for (std::size_t i = 0; i + 2 < n_; ++i) {
      double tail = 0.0;
      for (std::size_t j = i; j < n_; ++j) tail += x[j] * x[j];
      tail = std::sqrt(tail);
      if (tail == 0.0) return theta;
      // Spherical angle phi_i in [0,1] with cos(pi phi_i) = x_i / tail; theta_i = phi_i / 2.
      theta[i] = std::acos(std::clamp(x[i] / tail, -1.0, 1.0)) / (2.0 * std::numbers::pi);
    }
    if (x[n_ - 2] == 0.0 && x[n_ - 1] == 0.0) return theta;
    double a = std::atan2(x[n_ - 1], x[n_ - 2]);  // = 2 pi phi_{n-1}
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    theta[n_ - 2] = a / (4.0 * std::numbers::pi);
    if (theta[n_ - 2] >= 0.5) theta[n_ - 2] = 0.0;
    return theta;
  }
  std::vector<double> inverse(const std::vector<double>& x) const { return inverse(std::span<const double>(x)); }

 private:
  std::size_t n_;
  std::vector<TrigPolynomial> components_;
  std::vector<std::vector<TrigPolynomial>> powers_;
};

inline SphereMap build_sphere_map(std::size_t n, int memo_degree = 8) { return SphereMap(n, memo_degree); }

inline std::vector<double> psi_point(const SphereMap& map, std::span<const double> theta) { return map.point(theta); }

/// q = p o psi, expanded monomial by monomial. Bandwidth <= 2 deg p.
inline TrigPolynomial pullback(const SphereMap& map, const Polynomial& p) {
  if (p.dim() != map.ambient_dim()) throw std::invalid_argument("pullback: polynomial dimension does not match map");
  const std::size_t m = map.angle_dim();
  TrigPolynomial q(m, 2 * p.degree());
  for (const auto& [e, c] : p.terms()) {
    TrigPolynomial t = TrigPolynomial::constant(m, c);
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) t = t * map.component_power(i, e[i]);
    // Bandwidth of t may be declared larger than the true frequency support; re-declare.
    TrigPolynomial tt(m, 2 * p.degree());
    for (const auto& [w, v] : t.terms()) tt.add_term(w, v);
    q += tt;
  }
  return q;
}

struct SphereEquivalenceReport {
  double min_on_sphere = 0.0;  // sampled min of p over random sphere points
  double min_on_cube = 0.0;    // sampled min of q over random angles
  double max_roundtrip_error = 0.0;  // max |q(inverse(x)) - p(x)| over the sphere samples
  std::size_t trials = 0;
};

/// Samples p on S and q = p o psi on the cube; the two empirical minima agree
/// up to sampling noise when psi covers S.
inline SphereEquivalenceReport sphere_nonneg_equiv_check(const Polynomial& p, std::size_t trials,
                                                         std::uint64_t seed = 7) {
  const SphereMap map(p.dim());
  const TrigPolynomial q = pullback(map, p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SphereEquivalenceReport rep;
  rep.trials = trials;
  rep.min_on_sphere = std::numeric_limits<double>::infinity();
  rep.min_on_cube = std::numeric_limits<double>::infinity();
  std::vector<double> x(p.dim()), theta(map.angle_dim());
  for (std::size_t t = 0; t < trials; ++t) {
    double r = 0.0;
    for (double& v : x) {
      v = normal(rng);
      r += v * v;
    }
    r = std::sqrt(r);
    for (double& v : x) v /= r;
    const double px = p(x);
    rep.min_on_sphere = std::min(rep.min_on_sphere, px);
    rep.max_roundtrip_error = std::max(rep.max_roundtrip_error, std::abs(q(map.inverse(x)).real() - px));
    for (double& v : theta) v = unif(rng);
    rep.min_on_cube = std::min(rep.min_on_cube, q(theta).real());
  }
  return rep;
}

}  // namespace exitsos
