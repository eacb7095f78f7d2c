#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exitsos/oracle.hpp"
#include "exitsos/sphere_map.hpp"

using namespace exitsos;

namespace {

Polynomial X(std::size_t i) { return Polynomial::variable(2, i); }
Polynomial C(double c) { return Polynomial::constant(2, c); }
const std::vector<double> kX0 = {0.3, 0.2};

McOptions quick(std::size_t paths = 4000, double dt = 1e-3, std::uint64_t seed = 1) {
  McOptions o;
  o.paths = paths;
  o.dt = dt;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Harmonic, Examples) {
  EXPECT_EQ(harmonic_extension(X(0)).h, X(0));
  const auto q = harmonic_extension(X(0) * X(0));
  EXPECT_LE(max_abs_coefficient(q.h - 0.5 * (C(1) + X(0) * X(0) - X(1) * X(1))), 1e-14);
  EXPECT_NEAR(q.h(kX0), 0.525, 1e-14);
  EXPECT_LE(max_abs_coefficient(harmonic_extension(Polynomial::squared_norm(3)).h - Polynomial::constant(3, 1)),
            1e-14);
}

TEST(Harmonic, RandomDataSelfCheck) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n = 2; n <= 3; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      Polynomial g(n);
      for (const auto& e : monomials_up_to(n, 4)) g.add_term(e, u(rng));
      const auto h = harmonic_extension(g);
      EXPECT_LE(h.laplacian_residual, 1e-12);
      EXPECT_LE(h.residual, 1e-10);
      EXPECT_LE(h.h.degree(), g.degree());
      const SphereMap m(n);
      for (int k = 0; k < 50; ++k) {
        std::vector<double> th(n - 1);
        for (auto& t : th) t = 0.5 * (u(rng) + 1);
        const auto x = m.point(th);
        EXPECT_NEAR(h.h(x), g(x), 1e-10);
      }
    }
}

TEST(MonteCarlo, ConstantDataIsExact) {
  const auto e = simulate_exit(ExitProblem::brownian(2, C(1.0), kX0), quick(1000));
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.paths, 1000u);
}

TEST(MonteCarlo, BrownianMatchesHarmonicOracle) {
  const auto e1 = simulate_exit(ExitProblem::brownian(2, X(0), kX0), quick());
  EXPECT_LE(std::abs(e1.mean - 0.3), 3 * e1.std_error);
  EXPECT_NEAR(e1.mean_exit_time, (1 - 0.13) / 2, 0.05);
  const auto e2 = simulate_exit(ExitProblem::brownian(2, X(0) * X(0), kX0), quick());
  EXPECT_LE(std::abs(e2.mean - 0.525), 3 * e2.std_error);
}

TEST(MonteCarlo, StepHalvingSanity) {
  const auto prob = ExitProblem::brownian(2, X(0), kX0);
  const auto a = simulate_exit(prob, quick(10000, 2e-3));
  const auto b = simulate_exit(prob, quick(10000, 1e-3, 2));
  EXPECT_LE(std::abs(a.mean - b.mean), 3 * std::hypot(a.std_error, b.std_error));
}

TEST(MonteCarlo, ReproducibleAndOrderFree) {
  const auto prob = ExitProblem::brownian(2, X(0) * X(1) + X(1), kX0);
  const auto a = simulate_exit(prob, quick(2000));
  const auto b = simulate_exit(prob, quick(2000));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.mean_exit_time, b.mean_exit_time);
  McOptions par = quick(2000);
  par.jobs = 3;
  const auto c = simulate_exit(prob, par);
  EXPECT_EQ(a.mean, c.mean);
  EXPECT_EQ(a.std_error, c.std_error);
  EXPECT_NE(simulate_exit(prob, quick(2000, 1e-3, 99)).mean, a.mean);
}

TEST(MonteCarlo, DriftAndGeneralDiffusion) {
  std::vector<Polynomial> drift = {-0.5 * X(0), -0.5 * X(1)};
  PolyMatrix F = {{C(0.8), C(0)}, {C(0), C(0.8)}};
  const auto via_f = ExitProblem::from_diffusion(drift, F, X(0) * X(0), kX0);
  const auto via_a = ExitProblem::from_generator_matrix(drift, via_f.A, X(0) * X(0), kX0);
  const auto e = simulate_exit(via_f, quick());
  const auto f = simulate_exit(via_a, quick());
  EXPECT_NEAR(e.mean, f.mean, 1e-12);  // diagonal F equals chol(A)
  EXPECT_GT(e.std_error, 0.0);
  EXPECT_GE(e.mean, 0.0);
  EXPECT_LE(e.mean, 1.0);
}

TEST(MonteCarlo, TruncationIsCountedAndFlagged) {
  McOptions o = quick(200);
  o.max_steps = 5;
  const auto e = simulate_exit(ExitProblem::brownian(2, X(0), kX0), o);
  EXPECT_GT(e.truncated, 0u);
  EXPECT_TRUE(e.flagged);
}

TEST(MonteCarlo, RejectsBadInput) {
  const auto prob = ExitProblem::brownian(2, X(0), kX0);
  EXPECT_THROW(simulate_exit(prob, quick(10, 0.0)), std::invalid_argument);
  EXPECT_THROW(simulate_exit(prob, quick(0)), std::invalid_argument);
  const PolyMatrix Z(2, std::vector<Polynomial>(2, Polynomial(2)));
  EXPECT_THROW(simulate_exit(ExitProblem::from_diffusion(zero_vector(2), Z, X(0), kX0), quick(10)),
               std::invalid_argument);
}

TEST(Oracle, Dispatch) {
  const auto exact = oracle_value(ExitProblem::brownian(2, X(0) * X(0), kX0));
  EXPECT_EQ(exact.kind, OracleKind::Exact);
  EXPECT_NEAR(exact.value, 0.525, 1e-14);
  EXPECT_EQ(exact.uncertainty, 0.0);
  const auto c = oracle_value(ExitProblem::brownian(2, C(3.5), kX0));
  EXPECT_EQ(c.kind, OracleKind::Exact);
  EXPECT_NEAR(c.value, 3.5, 1e-14);
  std::vector<Polynomial> drift = {-0.5 * X(0), C(0)};
  const auto mc = oracle_value(ExitProblem::from_diffusion(drift, identity_matrix(2), X(0), kX0), quick(500));
  EXPECT_EQ(mc.kind, OracleKind::MonteCarlo);
  ASSERT_TRUE(mc.mc.has_value());
  EXPECT_EQ(mc.uncertainty, mc.mc->std_error);
  EXPECT_GT(mc.uncertainty, 0.0);
}
