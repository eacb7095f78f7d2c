#pragma once

// Sampled inner estimates of polynomial extrema on the ball, the sphere, a
// cube, and of trigonometric polynomials on [0,1]^m. These are never
// certified bounds: min_est >= true min and max_est <= true max.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "exitsos/polynomial.hpp"
#include "exitsos/random.hpp"
#include "exitsos/trig_polynomial.hpp"

namespace exitsos {

enum class Region { Ball, Sphere, Cube };

struct ExtremaOptions {
  std::size_t samples = 4096;
  bool refine = true;
  int refine_steps = 50;
  std::size_t refine_starts = 8;
};

struct ExtremaEstimate {
  double min_est = 0.0;
  double max_est = 0.0;
  std::vector<double> argmin;
  std::vector<double> argmax;
  bool refined = false;
  // Always true: sampled values are inner estimates, not certified bounds.
  bool estimated = true;
};

namespace detail {

inline double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// Maps a point of [0,1)^k to the region. Ball and sphere use normal deviates from
/// the first n coordinates; the ball radius uses coordinate n.
inline std::vector<double> region_point(Region region, std::size_t n, const std::vector<double>& u) {
  std::vector<double> x(n);
  if (region == Region::Cube) {
    for (std::size_t i = 0; i < n; ++i) x[i] = 2.0 * u[i] - 1.0;
    return x;
  }
  for (std::size_t i = 0; i < n; ++i) x[i] = inverse_normal_cdf(std::clamp(u[i], 1e-12, 1.0 - 1e-12));
  double r = norm2(x);
  if (r == 0.0) {
    x.assign(n, 0.0);
    x[0] = 1.0;
    r = 1.0;
  }
  const double radius = region == Region::Ball ? std::pow(u[n], 1.0 / static_cast<double>(n)) : 1.0;
  for (double& v : x) v *= radius / r;
  return x;
}

inline void project(Region region, std::vector<double>& x) {
  switch (region) {
    case Region::Cube:
      for (double& v : x) v = std::clamp(v, -1.0, 1.0);
      break;
    case Region::Ball: {
      const double r = norm2(x);
      if (r > 1.0)
        for (double& v : x) v /= r;
      break;
    }
    case Region::Sphere: {
      const double r = norm2(x);
      if (r > 0.0)
        for (double& v : x) v /= r;
      break;
    }
  }
}

/// Projected gradient descent (sign = +1) or ascent (sign = -1) with backtracking.
template <class F, class G, class P>
void descend(F&& f, G&& grad, P&& proj, std::vector<double>& x, double& fx, double sign, int steps) {
  double step = 0.25;
  for (int it = 0; it < steps; ++it) {
    const std::vector<double> g = grad(x);
    double gn = 0.0;
    for (double v : g) gn += v * v;
    if (gn == 0.0) return;
    gn = std::sqrt(gn);
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      std::vector<double> y = x;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= sign * step * g[i] / gn;
      proj(y);
      const double fy = f(y);
      if (sign * fy < sign * fx) {
        x = std::move(y);
        fx = fy;
        moved = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return;
  }
}

template <class F, class G, class P>
ExtremaEstimate sample_and_refine(std::size_t samples, const ExtremaOptions& opt, F&& f, G&& grad,
                                  P&& proj, auto&& point_of) {
  struct Sample {
    double value;
    std::vector<double> x;
  };
  std::vector<Sample> pts;
  pts.reserve(samples);
  for (std::size_t k = 1; k <= samples; ++k) {
    std::vector<double> x = point_of(k);
    const double v = f(x);
    pts.push_back({v, std::move(x)});
  }
  ExtremaEstimate est;
  auto by_value = [](const Sample& a, const Sample& b) { return a.value < b.value; };
  std::sort(pts.begin(), pts.end(), by_value);
  est.min_est = pts.front().value;
  est.argmin = pts.front().x;
  est.max_est = pts.back().value;
  est.argmax = pts.back().x;
  if (opt.refine) {
    est.refined = true;
    const std::size_t starts = std::min(opt.refine_starts, pts.size());
    for (std::size_t s = 0; s < starts; ++s) {
      std::vector<double> x = pts[s].x;
      double fx = pts[s].value;
      descend(f, grad, proj, x, fx, +1.0, opt.refine_steps);
      if (fx < est.min_est) {
        est.min_est = fx;
        est.argmin = x;
      }
      std::vector<double> y = pts[pts.size() - 1 - s].x;
      double fy = pts[pts.size() - 1 - s].value;
      descend(f, grad, proj, y, fy, -1.0, opt.refine_steps);
      if (fy > est.max_est) {
        est.max_est = fy;
        est.argmax = y;
      }
    }
  }
  return est;
}

}  // namespace detail

/// Sampled extrema of p on the unit ball, the unit sphere, or the cube [-1,1]^n.
inline ExtremaEstimate extrema_estimate(const Polynomial& p, Region region, const ExtremaOptions& opt = {}) {
  if (opt.samples < 1) throw std::invalid_argument("extrema_estimate: samples must be >= 1");
  const std::size_t n = p.dim();
  std::vector<Polynomial> grad_polys;
  for (std::size_t i = 0; i < n; ++i) grad_polys.push_back(partial(p, i));
  auto f = [&](const std::vector<double>& x) { return p(x); };
  auto grad = [&](const std::vector<double>& x) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = grad_polys[i](x);
    if (region == Region::Sphere) {
      // Tangential component only.
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[i] * x[i];
      for (std::size_t i = 0; i < n; ++i) g[i] -= dot * x[i];
    }
    return g;
  };
  auto proj = [&](std::vector<double>& x) { detail::project(region, x); };
  const std::size_t qdim = region == Region::Ball ? n + 1 : n;
  auto point_of = [&](std::size_t k) { return detail::region_point(region, n, halton_point(k, qdim)); };
  return detail::sample_and_refine(opt.samples, opt, f, grad, proj, point_of);
}

/// Sampled extrema of Re q over [0,1]^m.
inline ExtremaEstimate trig_extrema_estimate(const TrigPolynomial& q, const ExtremaOptions& opt = {}) {
  if (opt.samples < 1) throw std::invalid_argument("trig_extrema_estimate: samples must be >= 1");
  const std::size_t m = q.dim();
  auto f = [&](const std::vector<double>& t) { return q(t).real(); };
  auto grad = [&](const std::vector<double>& t) { return trig_gradient_real(q, t); };
  auto proj = [](std::vector<double>& t) {
    for (double& v : t) v -= std::floor(v);
  };
  auto point_of = [&](std::size_t k) { return halton_point(k, m); };
  return detail::sample_and_refine(opt.samples, opt, f, grad, proj, point_of);
}

}  // namespace exitsos
