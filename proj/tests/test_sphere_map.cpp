#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "exitsos/extrema.hpp"
#include "exitsos/sphere_map.hpp"

using namespace exitsos;

namespace {

Polynomial random_poly(std::mt19937_64& rng, std::size_t n, int deg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Polynomial p(n);
  for (const auto& e : monomials_up_to(n, deg)) p.add_term(e, u(rng));
  return p;
}

void expect_point(const SphereMap& m, std::vector<double> theta, std::vector<double> want) {
  const auto got = m.point(theta);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-14) << "component " << i;
}

}  // namespace

TEST(SphereMap, ComponentsForSmallN) {
  const SphereMap m2(2);
  ASSERT_EQ(m2.components().size(), 2u);
  EXPECT_LE(max_coefficient_distance(m2.components()[0], TrigPolynomial::cos_mode(1, 0, 2)), 1e-15);
  EXPECT_LE(max_coefficient_distance(m2.components()[1], TrigPolynomial::sin_mode(1, 0, 2)), 1e-15);

  const SphereMap m3(3);
  const auto c1 = TrigPolynomial::cos_mode(2, 0, 1), s1 = TrigPolynomial::sin_mode(2, 0, 1);
  const auto c2 = TrigPolynomial::cos_mode(2, 1, 2), s2 = TrigPolynomial::sin_mode(2, 1, 2);
  EXPECT_LE(max_coefficient_distance(m3.components()[0], c1), 1e-15);
  EXPECT_LE(max_coefficient_distance(m3.components()[1], s1 * c2), 1e-15);
  EXPECT_LE(max_coefficient_distance(m3.components()[2], s1 * s2), 1e-15);
}

TEST(SphereMap, ComponentInvariants) {
  for (std::size_t n = 2; n <= 6; ++n) {
    const SphereMap m(n);
    TrigPolynomial sum(n - 1, 0);
    for (const auto& c : m.components()) {
      EXPECT_TRUE(c.is_real_valued());
      EXPECT_LE(c.effective_bandwidth(), 2);
      for (const auto& [w, v] : c.terms())
        for (std::size_t a = 0; a + 1 < w.size(); ++a) EXPECT_LE(std::abs(w[a]), 1) << "n=" << n;
      sum += c * c;
    }
    EXPECT_LE(max_coefficient_distance(sum, TrigPolynomial::constant(n - 1, 1.0)), 1e-10);
  }
}

TEST(SphereMap, PointExamples) {
  expect_point(SphereMap(2), {0.0}, {1.0, 0.0});
  expect_point(SphereMap(3), {0.25, 0.0}, {0.0, 1.0, 0.0});
  expect_point(SphereMap(2), {0.125}, {0.0, 1.0});
}

TEST(SphereMap, NormOneImage) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 2; n <= 6; ++n) {
    const SphereMap m(n);
    for (int k = 0; k < 10000; ++k) {
      std::vector<double> th(n - 1);
      for (auto& t : th) t = u(rng);
      double r = 0.0;
      for (double v : m.point(th)) r += v * v;
      ASSERT_LE(std::abs(std::sqrt(r) - 1.0), 1e-12);
    }
  }
}

TEST(Pullback, Examples) {
  const SphereMap m2(2);
  const TrigPolynomial q = pullback(m2, Polynomial::variable(2, 0));
  EXPECT_EQ(q.coefficient({2}), Complex(0.5, 0));
  EXPECT_EQ(q.coefficient({-2}), Complex(0.5, 0));
  EXPECT_EQ(tighten(q).terms().size(), 2u);
  for (std::size_t n = 2; n <= 4; ++n) {
    const SphereMap m(n);
    EXPECT_LE(max_coefficient_distance(pullback(m, Polynomial::squared_norm(n)), TrigPolynomial::constant(n - 1, 1.0)),
              1e-12);
    EXPECT_LE(max_coefficient_distance(pullback(m, Polynomial::constant(n, 1.0)), TrigPolynomial::constant(n - 1, 1.0)),
              0.0);
  }
}

TEST(Pullback, ExactnessAndBandwidth) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 2; n <= 4; ++n) {
    const SphereMap m(n);
    for (int rep = 0; rep < 10; ++rep) {
      const Polynomial p = random_poly(rng, n, 3);
      const TrigPolynomial q = pullback(m, p);
      EXPECT_LE(q.bandwidth(), 2 * p.degree());
      for (const auto& [w, c] : q.terms()) EXPECT_LE(max_abs_frequency(w), 2 * p.degree());
      double pmax = 0.0, err = 0.0;
      for (int k = 0; k < 100; ++k) {
        std::vector<double> th(n - 1);
        for (auto& t : th) t = u(rng);
        const double pv = p(m.point(th));
        pmax = std::max(pmax, std::abs(pv));
        err = std::max(err, std::abs(q(th).real() - pv));
      }
      EXPECT_LE(err, 1e-9 * (1 + pmax));
    }
  }
}

TEST(Pullback, FrobeniusBound) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> deg(1, 3);
  const std::size_t n = 3;
  const SphereMap m(n);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = deg(rng);
    const Polynomial p = random_poly(rng, n, d);
    const auto ext = extrema_estimate(p, Region::Sphere);
    const double pmax = std::max(std::abs(ext.min_est), std::abs(ext.max_est));
    const double lhs = trig_fnorm(without_mean(pullback(m, p)));
    EXPECT_LE(lhs, std::pow(4.0 * d + 1.0, n / 2.0) * 1.01 * pmax);
  }
}

TEST(SphereMap, InverseRoundTrip) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (std::size_t n = 2; n <= 5; ++n) {
    const SphereMap m(n);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> xv(n);
      double r = 0.0;
      for (auto& v : xv) {
        v = g(rng);
        r += v * v;
      }
      for (auto& v : xv) v /= std::sqrt(r);
      const auto back = m.point(m.inverse(xv));
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], xv[i], 1e-10);
    }
  }
}

TEST(SphereMap, NonnegativityEquivalenceExamples) {
  const auto a = sphere_nonneg_equiv_check(Polynomial::constant(2, 1.0) - Polynomial::variable(2, 0), 1000);
  EXPECT_NEAR(a.min_on_sphere, 0.0, 1e-3);
  EXPECT_NEAR(a.min_on_cube, 0.0, 1e-3);
  EXPECT_LE(a.max_roundtrip_error, 1e-10);
  const auto b = sphere_nonneg_equiv_check(Polynomial::constant(3, 1.0), 1000);
  EXPECT_NEAR(b.min_on_sphere, 1.0, 1e-15);
  EXPECT_NEAR(b.min_on_cube, 1.0, 1e-15);
  const auto c = sphere_nonneg_equiv_check(Polynomial::variable(2, 0), 1000);
  EXPECT_NEAR(c.min_on_sphere, -1.0, 1e-3);
  EXPECT_NEAR(c.min_on_cube, -1.0, 1e-3);
}
