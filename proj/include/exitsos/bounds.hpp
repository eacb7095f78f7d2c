#pragma once

// Closed-form degree and level bounds for the ball and sphere
// Positivstellensaetze, and empirical rate fits for sweep tables.
//
// c_n(d) is only known through an explicit upper bound; every calculator
// here substitutes cn_upper for c_n, so the levels they return are
// sufficient levels under that bound, not sharp ones.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "exitsos/extrema.hpp"
#include "exitsos/trig_polynomial.hpp"

namespace exitsos {

/// 2(n+1)^2 d^2 (1 + 2d/(n-1))^{1/2} (d+1)^{n/2 - 1}.
inline double cn_upper(int n, int d) {
  if (n < 2) throw std::invalid_argument("cn_upper: n must be >= 2");
  if (d < 1) throw std::invalid_argument("cn_upper: d must be >= 1");
  const double nn = n, dd = d;
  // Both half-integer powers under one root, so integer cases evaluate exactly.
  return 2.0 * (nn + 1) * (nn + 1) * dd * dd * std::sqrt((1.0 + 2.0 * dd / (nn - 1)) * std::pow(dd + 1, nn - 2.0));
}

namespace detail {

/// Smallest integer l >= lower with l^2 >= rhs.
inline long smallest_level(double rhs, long lower) {
  if (!(rhs >= 0.0) || !std::isfinite(rhs)) throw std::invalid_argument("level bound is not finite");
  long l = static_cast<long>(std::ceil(std::sqrt(rhs)));
  // Guard against sqrt rounding in either direction.
  while (l > 0 && static_cast<double>(l - 1) * static_cast<double>(l - 1) >= rhs) --l;
  while (static_cast<double>(l) * static_cast<double>(l) < rhs) ++l;
  return std::max(l, lower);
}

}  // namespace detail

/// Ball certificate level: smallest l >= n d with l^2 >= c_n(d) (gmax - gmin) / gmin.
/// nullopt when gmin <= 0 (no finite level certifies a non-positive polynomial).
inline std::optional<long> cor1_level(int n, int d, double gmin, double gmax) {
  if (gmax < gmin) throw std::invalid_argument("cor1_level: gmax < gmin");
  if (!(gmin > 0.0)) return std::nullopt;
  return detail::smallest_level(cn_upper(n, d) * (gmax - gmin) / gmin, static_cast<long>(n) * d);
}

/// Trig certificate level from the ratio ||q - q0||_F / q_min:
/// smallest l with l^2 >= 12 d^2 n max{1, ratio}, where q has bandwidth 2d in n angles.
inline long cor2_level_from_ratio(int n, int d, double ratio) {
  if (n < 1 || d < 1) throw std::invalid_argument("cor2_level: n, d must be >= 1");
  if (ratio < 0.0) throw std::invalid_argument("cor2_level: negative ratio");
  // The display implies l >= 3d, the validity range of the underlying rate.
  return detail::smallest_level(12.0 * d * d * n * std::max(1.0, ratio), 3L * d);
}

struct TrigLevelBound {
  long level = 0;
  double fnorm_centered = 0.0;
  double qmin_estimate = 0.0;
  bool estimated_extrema = true;
};

/// cor2 with ||q - q0||_F computed exactly and q_min estimated by sampling.
inline std::optional<TrigLevelBound> cor2_level(int d, const TrigPolynomial& q, const ExtremaOptions& opt = {}) {
  if (!q.is_real_valued()) throw std::invalid_argument("cor2_level: q must be real-valued");
  TrigLevelBound b;
  b.fnorm_centered = trig_fnorm(without_mean(q));
  b.qmin_estimate = trig_extrema_estimate(q, opt).min_est;
  if (!(b.qmin_estimate > 0.0)) return std::nullopt;
  b.level = cor2_level_from_ratio(static_cast<int>(q.dim()), d, b.fnorm_centered / b.qmin_estimate);
  return b;
}

/// Sphere certificate level: smallest l with l^2 >= 48 d^2 (n-1) (4d+1)^{n/2} pmax / pmin.
inline std::optional<long> cor3_level(int n, int d, double pmin, double pmax) {
  if (n < 2) throw std::invalid_argument("cor3_level: n must be >= 2");
  if (d < 1) throw std::invalid_argument("cor3_level: d must be >= 1");
  if (pmax < pmin) throw std::invalid_argument("cor3_level: pmax < pmin");
  if (!(pmin > 0.0)) return std::nullopt;
  const double dd = d;
  return detail::smallest_level(48.0 * dd * dd * (n - 1) * std::pow(4.0 * dd + 1.0, n / 2.0) * pmax / pmin, 0);
}

/// Degree of the generator image of a degree-d polynomial: max{d - 2 + deg A, d - 1 + deg f0}, floored at 0.
inline int generator_degree(int d, int deg_a, int deg_f0) {
  if (d < 0) throw std::invalid_argument("generator_degree: d must be >= 0");
  return std::max({0, d - 2 + deg_a, d - 1 + deg_f0});
}

/// l_d = max{6 c_n(d_hat), 144 d^2 (n-1) (4d+1)^{n/2}}^{1/2}; the first branch is 0 when d_hat = 0.
inline double theoretical_level(int n, int d, int deg_a, int deg_f0) {
  if (n < 2) throw std::invalid_argument("theoretical_level: n must be >= 2");
  if (d < 1) throw std::invalid_argument("theoretical_level: d must be >= 1");
  const int dhat = generator_degree(d, deg_a, deg_f0);
  const double ball_branch = dhat >= 1 ? 6.0 * cn_upper(n, dhat) : 0.0;
  const double dd = d;
  const double sphere_branch = 144.0 * dd * dd * (n - 1) * std::pow(4.0 * dd + 1.0, n / 2.0);
  return std::sqrt(std::max(ball_branch, sphere_branch));
}

/// Reference curve l^{-1/((2.5+s) n)} for the polynomial-rate baseline (unit constant).
inline double baseline_rate(int n, double s, double level) {
  if (!(s > 0.0)) throw std::invalid_argument("baseline_rate: s must be > 0");
  if (level < 1.0) throw std::invalid_argument("baseline_rate: level must be >= 1");
  return std::pow(level, -1.0 / ((2.5 + s) * n));
}

struct GapPoint {
  double level = 0.0;
  double gap = 0.0;
};

struct RateFit {
  double slope = 0.0;      // gap ~ C * level^slope
  double intercept = 0.0;  // log C
  double residual = 0.0;   // RMS residual of the log-log fit
  std::size_t points_used = 0;
  std::size_t points_excluded = 0;  // rows with gap <= 0
};

/// Least squares of log(gap) on log(level); non-positive gaps are dropped and counted.
inline RateFit fit_rate(const std::vector<GapPoint>& rows) {
  std::vector<double> xs, ys;
  RateFit fit;
  for (const auto& r : rows) {
    if (r.gap > 0.0 && r.level > 0.0) {
      xs.push_back(std::log(r.level));
      ys.push_back(std::log(r.gap));
    } else {
      ++fit.points_excluded;
    }
  }
  if (xs.size() < 3) throw std::invalid_argument("fit_rate: fewer than 3 rows with positive gap");
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all levels coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / k);
  fit.points_used = xs.size();
  return fit;
}

}  // namespace exitsos
