#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exitsos/bounds.hpp"
#include "exitsos/certificates.hpp"
#include "exitsos/extrema.hpp"
#include "exitsos/generator.hpp"
#include "exitsos/level_report.hpp"

using namespace exitsos;

TEST(Bounds, CnUpper) {
  EXPECT_NEAR(cn_upper(2, 1), 18.0 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(cn_upper(2, 1), 31.17691, 1e-5);
  EXPECT_NEAR(cn_upper(3, 1), 64.0, 1e-12);
  // 2 (n+1)^2 d^2 sqrt(1 + 2d/(n-1)) (d+1)^(n/2-1) at n = d = 2.
  EXPECT_NEAR(cn_upper(2, 2), 72.0 * std::sqrt(5.0), 1e-12);
  EXPECT_THROW(cn_upper(1, 1), std::invalid_argument);
}

TEST(Bounds, BallLevel) {
  EXPECT_EQ(cor1_level(2, 3, 2.0, 2.0), 6);
  EXPECT_EQ(cor1_level(3, 2, 0.5, 0.5), 6);
  EXPECT_EQ(cor1_level(2, 1, 1.0, 4.0), 10);
  EXPECT_EQ(cor1_level(2, 2, 1.0, 2.0), 13);
  EXPECT_FALSE(cor1_level(2, 1, 0.0, 1.0).has_value());
  EXPECT_FALSE(cor1_level(2, 1, -1.0, 1.0).has_value());
}

TEST(Bounds, TrigLevel) {
  EXPECT_EQ(cor2_level_from_ratio(1, 1, 0.0), 4);
  EXPECT_EQ(cor2_level_from_ratio(2, 1, 2.0), 7);
  EXPECT_EQ(cor2_level_from_ratio(2, 2, 1.0), 10);
  const auto b = cor2_level(1, TrigPolynomial::constant(1, 5.0));
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->level, 4);
  EXPECT_TRUE(b->estimated_extrema);
  EXPECT_FALSE(cor2_level(1, TrigPolynomial::cos_mode(1, 0, 1)).has_value());
}

TEST(Bounds, SphereLevel) {
  EXPECT_EQ(cor3_level(3, 1, 1.0, 3.0), 57);
  EXPECT_EQ(cor3_level(2, 1, 1.0, 1.0), 16);  // 48 * 5 = 240
  EXPECT_EQ(cor3_level(2, 2, 1.0, 1.0), 42);
  EXPECT_FALSE(cor3_level(2, 1, 0.0, 1.0).has_value());
}

TEST(Bounds, GeneratorDegreeAndTheoreticalLevel) {
  EXPECT_EQ(generator_degree(4, 0, 0), 3);
  EXPECT_EQ(generator_degree(2, 2, 1), 2);
  EXPECT_EQ(generator_degree(0, 0, 0), 0);
  EXPECT_NEAR(theoretical_level(2, 2, 0, 0), 72.0, 1e-12);
  EXPECT_NEAR(theoretical_level(3, 1, 0, 0), std::sqrt(144.0 * 2 * std::pow(5.0, 1.5)), 1e-12);
  EXPECT_NEAR(theoretical_level(3, 1, 0, 0), 56.74, 0.01);
  for (int n = 2; n <= 4; ++n) {
    double prev = 0.0;
    for (int d = 1; d <= 5; ++d) {
      const double l = theoretical_level(n, d, 2, 1);
      EXPECT_GE(l * l, 144.0 * d * d * (n - 1) * std::pow(4.0 * d + 1.0, n / 2.0) * (1 - 1e-12));
      EXPECT_GT(l, prev);
      prev = l;
    }
  }
}

TEST(Bounds, MonotoneInRatio) {
  for (int n = 2; n <= 4; ++n)
    for (int d = 1; d <= 3; ++d) {
      long p1 = 0, p2 = 0, p3 = 0;
      for (double ratio = 1.0; ratio < 50.0; ratio *= 1.3) {
        const long a = *cor1_level(n, d, 1.0, ratio), b = cor2_level_from_ratio(n, d, ratio),
                   c = *cor3_level(n, d, 1.0, ratio);
        EXPECT_GE(a, p1);
        EXPECT_GE(b, p2);
        EXPECT_GE(c, p3);
        EXPECT_GE(a, n * d);
        p1 = a, p2 = b, p3 = c;
      }
    }
}

TEST(Bounds, BaselineRate) {
  EXPECT_NEAR(baseline_rate(2, 0.5, 64.0), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(baseline_rate(3, 1.0, 1.0), 1.0);
  EXPECT_GT(baseline_rate(2, 0.5, 10.0), baseline_rate(2, 0.5, 11.0));
}

TEST(Bounds, FitRate) {
  std::vector<GapPoint> pw, cst, ex;
  for (int l = 2; l <= 10; ++l) {
    pw.push_back({double(l), 7.0 * std::pow(l, -3.0)});
    cst.push_back({double(l), 0.1});
    ex.push_back({double(l), std::exp(-double(l))});
  }
  const RateFit f = fit_rate(pw);
  EXPECT_NEAR(f.slope, -3.0, 0.01);
  EXPECT_NEAR(f.residual, 0.0, 1e-10);
  EXPECT_NEAR(fit_rate(cst).slope, 0.0, 1e-12);
  std::vector<GapPoint> head(ex.begin(), ex.begin() + 4);
  const RateFit short_fit = fit_rate(head), long_fit = fit_rate(ex);
  EXPECT_LT(long_fit.slope, short_fit.slope);
  EXPECT_GT(long_fit.residual, 1e-3);
  pw.push_back({11.0, 0.0});
  EXPECT_EQ(fit_rate(pw).points_excluded, 1u);
  EXPECT_THROW(fit_rate({{2, 1e-3}, {3, 0.0}}), std::invalid_argument);
}

TEST(Bounds, BallLevelCertifiesPositiveQuadratics) {
  const InteriorPointSolver solver;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int rep = 0; rep < 2; ++rep) {
    Polynomial g = Polynomial::constant(2, 1.0);
    for (const auto& e : monomials_up_to(2, 2))
      if (total_degree(e) > 0) g.add_term(e, u(rng));
    const auto ext = extrema_estimate(g, Region::Ball);
    ASSERT_GT(ext.min_est, 0.0);
    const long l = *cor1_level(2, 2, ext.min_est, ext.max_est);
    const auto r = lb_ball(g, static_cast<int>(l), solver);
    EXPECT_EQ(r.solver.status, SolveStatus::Optimal);
    EXPECT_GE(r.value, 0.0);
  }
}

TEST(LevelReport, AffineSphereExample) {
  Polynomial g = Polynomial::constant(3, 2.0) + Polynomial::variable(3, 0);
  const auto prob = ExitProblem::brownian(3, g, {0, 0, 0});
  const auto rows = level_bounds(prob, 1);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2].name, "cor3");
  ASSERT_TRUE(rows[2].level.has_value());
  EXPECT_EQ(*rows[2].level, 57.0);
  EXPECT_TRUE(rows[0].estimated_extrema);
  EXPECT_NEAR(*rows[3].level, theoretical_level(3, 1, 0, 0), 1e-12);
}
