#pragma once

// Reference values for v*(x0) = E g(X_tau): the harmonic extension for
// driftless unit-diffusion problems, Euler-Maruyama exit simulation otherwise.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "exitsos/generator.hpp"
#include "exitsos/polynomial.hpp"
#include "exitsos/random.hpp"

namespace exitsos {

struct HarmonicExtension {
  Polynomial h{1};
  Polynomial w{1};               // g = h + b w
  double residual = 0.0;         // max |g - h - b w| coefficient
  double laplacian_residual = 0.0;  // max |Delta h| coefficient
};

/// Harmonic h of degree <= deg g with h = g on the unit sphere.
inline HarmonicExtension harmonic_extension(const Polynomial& g) {
  const std::size_t n = g.dim();
  const int D = g.degree();
  const auto hb = monomials_up_to(n, D);
  const auto wb = D >= 2 ? monomials_up_to(n, D - 2) : std::vector<Exponent>{};
  const auto lb = wb;  // Delta h has degree <= D - 2
  std::map<Exponent, std::size_t, GradedLexLess> row_of;
  for (std::size_t i = 0; i < hb.size(); ++i) row_of[hb[i]] = i;
  std::map<Exponent, std::size_t, GradedLexLess> lap_row;
  for (std::size_t i = 0; i < lb.size(); ++i) lap_row[lb[i]] = hb.size() + i;

  const Eigen::Index rows = static_cast<Eigen::Index>(hb.size() + lb.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(hb.size() + wb.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (const auto& [e, c] : g.terms()) rhs(row_of.at(e)) = c;
  for (std::size_t k = 0; k < hb.size(); ++k) {
    M(row_of.at(hb[k]), k) += 1.0;
    Polynomial lap(n);
    const Polynomial mono = Polynomial::monomial(hb[k]);
    for (std::size_t i = 0; i < n; ++i) lap += partial(mono, i, i);
    for (const auto& [e, c] : lap.terms()) M(lap_row.at(e), k) += c;
  }
  const Polynomial b = Polynomial::ball(n);
  for (std::size_t k = 0; k < wb.size(); ++k) {
    const Polynomial bw = b * Polynomial::monomial(wb[k]);
    for (const auto& [e, c] : bw.terms()) M(row_of.at(e), hb.size() + k) += c;
  }
  const Eigen::VectorXd sol = M.colPivHouseholderQr().solve(rhs);

  HarmonicExtension out;
  out.h = Polynomial(n);
  out.w = Polynomial(n);
  // QR round-off below this level is dropped; the residual checks below see the pruned result.
  const double prune = 1e-14 * (1.0 + max_abs_coefficient(g));
  for (std::size_t k = 0; k < hb.size(); ++k)
    if (std::abs(sol(k)) > prune) out.h.add_term(hb[k], sol(k));
  for (std::size_t k = 0; k < wb.size(); ++k)
    if (std::abs(sol(hb.size() + k)) > prune) out.w.add_term(wb[k], sol(hb.size() + k));
  out.residual = max_abs_coefficient(g - out.h - b * out.w);
  Polynomial lap(n);
  for (std::size_t i = 0; i < n; ++i) lap += partial(out.h, i, i);
  out.laplacian_residual = max_abs_coefficient(lap);
  if (out.residual > 1e-10 * (1.0 + max_abs_coefficient(g)))
    throw std::runtime_error("harmonic_extension: decomposition residual " + format_real(out.residual));
  return out;
}

struct McOptions {
  std::size_t paths = 100000;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 10000000;
  unsigned jobs = 1;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  double mean_exit_time = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::size_t truncated = 0;  // paths that hit max_steps
  bool flagged = false;       // truncated > 0.1% of paths
};

namespace detail {

/// Flat evaluation form of a polynomial, for the inner simulation loop.
struct CompiledPolynomial {
  std::size_t n = 0;
  int max_degree = 0;
  std::vector<int> exps;  // term-major, n per term
  std::vector<double> coefs;

  explicit CompiledPolynomial(const Polynomial& p) : n(p.dim()), max_degree(p.degree()) {
    for (const auto& [e, c] : p.terms()) {
      exps.insert(exps.end(), e.begin(), e.end());
      coefs.push_back(c);
    }
  }
  bool is_zero() const { return coefs.empty(); }

  /// `pw` holds x_i^k at pw[i * (stride) + k].
  double eval(const double* pw, int stride) const {
    double s = 0.0;
    for (std::size_t t = 0; t < coefs.size(); ++t) {
      double m = coefs[t];
      const int* e = &exps[t * n];
      for (std::size_t i = 0; i < n; ++i)
        if (e[i]) m *= pw[i * stride + e[i]];
      s += m;
    }
    return s;
  }
};

inline double pairwise_sum(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, count - half);
}

}  // namespace detail

/// Euler-Maruyama exit simulation; the crossing step is cut where the chord meets the sphere.
inline McEstimate simulate_exit(const ExitProblem& prob, const McOptions& opt = {}) {
  prob.validate();
  if (!(opt.dt > 0.0)) throw std::invalid_argument("simulate_exit: dt must be > 0");
  if (opt.paths < 1) throw std::invalid_argument("simulate_exit: paths must be >= 1");
  const std::size_t n = prob.n;
  if (const auto ell = ellipticity_check(prob); !ell.pass)
    throw std::invalid_argument("simulate_exit: diffusion is not elliptic on the ball (min eigenvalue " +
                                format_real(ell.min_eigenvalue) + ")");

  const bool brownian = prob.drift_is_zero() && prob.is_unit_diffusion();
  const bool use_F = prob.diffusion.has_value();
  const std::size_t r = use_F ? (*prob.diffusion)[0].size() : n;
  std::vector<detail::CompiledPolynomial> drift, diff;
  for (const auto& p : prob.drift) drift.emplace_back(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < (use_F ? r : n); ++j) diff.emplace_back(use_F ? (*prob.diffusion)[i][j] : prob.A[i][j]);
  int max_deg = std::max(prob.degree_drift(), use_F ? max_degree(*prob.diffusion) : prob.degree_A());
  const detail::CompiledPolynomial g(prob.g);
  max_deg = std::max(max_deg, prob.g.degree());
  const int stride = max_deg + 1;
  const double sqdt = std::sqrt(opt.dt);

  std::vector<double> values(opt.paths), times(opt.paths);
  std::vector<char> truncated(opt.paths, 0);

  auto run_path = [&](std::uint64_t path, std::vector<double>& x, std::vector<double>& xn, std::vector<double>& pw,
                      std::vector<double>& xi, Eigen::MatrixXd& F) {
    std::copy(prob.x0.begin(), prob.x0.end(), x.begin());
    auto powers = [&](const std::vector<double>& y) {
      for (std::size_t i = 0; i < n; ++i) {
        double* row = &pw[i * stride];
        row[0] = 1.0;
        for (int k = 1; k < stride; ++k) row[k] = row[k - 1] * y[i];
      }
    };
    for (std::uint64_t step = 0; step < opt.max_steps; ++step) {
      for (std::size_t b = 0; 2 * b < r; ++b) {
        const auto z = keyed_normal_pair(opt.seed, path, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(b));
        xi[2 * b] = z[0];
        if (2 * b + 1 < r) xi[2 * b + 1] = z[1];
      }
      if (brownian) {
        for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + sqdt * xi[i];
      } else {
        powers(x);
        if (use_F) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < r; ++j) F(i, j) = diff[i * r + j].eval(pw.data(), stride);
        } else {
          Eigen::MatrixXd A(n, n);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) A(i, j) = diff[i * n + j].eval(pw.data(), stride);
          F = Eigen::LLT<Eigen::MatrixXd>(A).matrixL();
        }
        for (std::size_t i = 0; i < n; ++i) {
          double s = drift[i].is_zero() ? 0.0 : drift[i].eval(pw.data(), stride) * opt.dt;
          for (std::size_t j = 0; j < r; ++j) s += F(i, j) * sqdt * xi[j];
          xn[i] = x[i] + s;
        }
      }
      double nn = 0.0;
      for (double v : xn) nn += v * v;
      if (nn >= 1.0) {
        // |x + s (xn - x)|^2 = 1 for s in (0, 1].
        double a = 0.0, bb = 0.0, c = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dlt = xn[i] - x[i];
          a += dlt * dlt;
          bb += x[i] * dlt;
          c += x[i] * x[i];
        }
        const double s = std::clamp((-bb + std::sqrt(std::max(0.0, bb * bb - a * c))) / a, 0.0, 1.0);
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          xn[i] = x[i] + s * (xn[i] - x[i]);
          norm += xn[i] * xn[i];
        }
        norm = std::sqrt(norm);
        for (double& v : xn) v /= norm;
        powers(xn);
        values[path] = g.eval(pw.data(), stride);
        times[path] = (static_cast<double>(step) + s) * opt.dt;
        return;
      }
      std::swap(x, xn);
    }
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : x) v /= norm;
    powers(x);
    values[path] = g.eval(pw.data(), stride);
    times[path] = static_cast<double>(opt.max_steps) * opt.dt;
    truncated[path] = 1;
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(opt.paths)));
  auto worker = [&](unsigned j) {
    std::vector<double> x(n), xn(n), pw(n * stride), xi(r + 1);
    Eigen::MatrixXd F(n, r);
    for (std::uint64_t p = j; p < opt.paths; p += jobs) run_path(p, x, xn, pw, xi, F);
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
    for (auto& t : pool) t.join();
  }

  McEstimate est;
  est.paths = opt.paths;
  est.dt = opt.dt;
  est.seed = opt.seed;
  const double N = static_cast<double>(opt.paths);
  est.mean = detail::pairwise_sum(values.data(), values.size()) / N;
  est.mean_exit_time = detail::pairwise_sum(times.data(), times.size()) / N;
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - est.mean) * (values[i] - est.mean);
  const double var = opt.paths > 1 ? detail::pairwise_sum(dev.data(), dev.size()) / (N - 1.0) : 0.0;
  est.std_error = std::sqrt(var / N);
  est.truncated = static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 1));
  est.flagged = static_cast<double>(est.truncated) > 1e-3 * N;
  return est;
}

enum class OracleKind { Exact, MonteCarlo };

inline std::string to_string(OracleKind k) { return k == OracleKind::Exact ? "EXACT" : "MC"; }

struct OracleValue {
  double value = 0.0;
  OracleKind kind = OracleKind::Exact;
  double uncertainty = 0.0;
  std::optional<McEstimate> mc;
};

/// Harmonic extension when A = I and f0 = 0, Monte-Carlo otherwise.
inline OracleValue oracle_value(const ExitProblem& prob, const McOptions& mc = {}) {
  OracleValue o;
  if (prob.drift_is_zero() && prob.is_unit_diffusion()) {
    o.value = harmonic_extension(prob.g).h(prob.x0);
    return o;
  }
  const McEstimate est = simulate_exit(prob, mc);
  o.kind = OracleKind::MonteCarlo;
  o.value = est.mean;
  o.uncertainty = est.std_error;
  o.mc = est;
  return o;
}

}  // namespace exitsos
