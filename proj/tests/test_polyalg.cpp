#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "exitsos/extrema.hpp"
#include "exitsos/polynomial.hpp"
#include "exitsos/random.hpp"
#include "exitsos/trig_polynomial.hpp"

using namespace exitsos;

namespace {

constexpr double kPi = std::numbers::pi;

Polynomial random_poly(std::mt19937_64& rng, std::size_t n, int deg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Polynomial p(n);
  for (const auto& e : monomials_up_to(n, deg))
    if (u(rng) > -0.3) p.add_term(e, u(rng));
  return p;
}

TrigPolynomial random_real_trig(std::mt19937_64& rng, std::size_t m, int bw) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrigPolynomial q(m, bw);
  for (const auto& w : frequency_box(m, bw)) {
    if (w > negate(w)) continue;
    const Complex c(u(rng), w == negate(w) ? 0.0 : u(rng));
    q.add_term(w, c);
    if (w != negate(w)) q.add_term(negate(w), std::conj(c));
  }
  return q;
}

Polynomial x(std::size_t n, std::size_t i) { return Polynomial::variable(n, i); }

}  // namespace

TEST(Polynomial, EvaluationExamples) {
  EXPECT_EQ(Polynomial(2)({0.7, -0.2}), 0.0);
  EXPECT_NEAR((x(2, 0) * x(2, 0) + x(2, 1) * x(2, 1))({0.6, 0.8}), 1.0, 1e-15);
  EXPECT_NEAR((Polynomial::constant(2, 1.0) + 2.0 * x(2, 0) * x(2, 1))({0.5, 0.5}), 1.5, 1e-15);
}

TEST(Polynomial, ArithmeticExamples) {
  const Polynomial one = Polynomial::constant(2, 1.0);
  EXPECT_EQ(x(2, 0) * x(2, 0), Polynomial::monomial({2, 0}));
  EXPECT_EQ(Polynomial::ball(2) + Polynomial::squared_norm(2), one);
  EXPECT_EQ((one + x(2, 0)) * (one - x(2, 0)), one - Polynomial::monomial({2, 0}));
}

TEST(Polynomial, DerivativeExamples) {
  const Polynomial p = Polynomial::monomial({2, 1});
  EXPECT_EQ(partial(p, 0, 1), 2.0 * x(2, 0));
  EXPECT_TRUE(partial(Polynomial::constant(2, 3.0), 0).is_zero());
  EXPECT_EQ(partial(Polynomial::squared_norm(2), 0), 2.0 * x(2, 0));
}

TEST(Polynomial, ProductEvaluatesAsProduct) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n = 1; n <= 4; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      const Polynomial p = random_poly(rng, n, 4), q = random_poly(rng, n, 4);
      const Polynomial pq = p * q;
      for (int k = 0; k < 100; ++k) {
        std::vector<double> pt(n);
        for (auto& v : pt) v = u(rng);
        const double a = p(pt), b = q(pt);
        EXPECT_LE(std::abs(pq(pt) - a * b), 1e-9 * (1 + std::abs(a * b)));
      }
    }
}

TEST(Polynomial, GradedLexOrderAndExactCancellation) {
  const auto basis = monomials_up_to(2, 2);
  ASSERT_EQ(basis.size(), 6u);
  EXPECT_EQ(basis[0], (Exponent{0, 0}));
  for (std::size_t i = 1; i < basis.size(); ++i) EXPECT_TRUE(GradedLexLess{}(basis[i - 1], basis[i]));
  Polynomial p = x(2, 0) + 1e-300 * x(2, 1);
  p -= x(2, 0);
  EXPECT_EQ(p.size(), 1u);  // no epsilon pruning
  EXPECT_TRUE(truncate(p, 1e-200).is_zero());
}

TEST(Polynomial, TextRoundTrip) {
  std::mt19937_64 rng(5);
  const Polynomial p = random_poly(rng, 3, 3);
  EXPECT_EQ(polynomial_from_text(3, to_text(p)), p);
  EXPECT_THROW(polynomial_from_text(2, "1 2 3 : 1\n"), std::exception);
  EXPECT_THROW(polynomial_from_text(2, "1 -1 : 1\n"), std::exception);
}

TEST(Trig, EvaluationExamples) {
  const TrigPolynomial c = TrigPolynomial::cos_mode(1, 0, 1);
  EXPECT_EQ(c.coefficient({1}), Complex(0.5, 0));
  EXPECT_EQ(c.coefficient({-1}), Complex(0.5, 0));
  EXPECT_NEAR(c(std::vector<double>{0.0}).real(), 1.0, 1e-15);
  EXPECT_NEAR(c(std::vector<double>{0.25}).real(), 0.0, 1e-15);
  EXPECT_NEAR(TrigPolynomial::constant(1, 2.5)(std::vector<double>{0.3}).real(), 2.5, 1e-15);
}

TEST(Trig, ProductToSum) {
  const TrigPolynomial c = TrigPolynomial::cos_mode(1, 0, 1), s = TrigPolynomial::sin_mode(1, 0, 1);
  const TrigPolynomial half = TrigPolynomial::constant(1, 0.5);
  const TrigPolynomial c2 = TrigPolynomial::cos_mode(1, 0, 2);
  EXPECT_LE(max_coefficient_distance(c * c, half + 0.5 * c2), 1e-15);
  EXPECT_LE(max_coefficient_distance(s * s, half - 0.5 * c2), 1e-15);
  EXPECT_LE(max_coefficient_distance(c * TrigPolynomial::constant(1, 1.0), c), 0.0);
}

TEST(Trig, NormAndMeanExamples) {
  EXPECT_DOUBLE_EQ(trig_fnorm(TrigPolynomial::cos_mode(1, 0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(trig_fnorm(TrigPolynomial::constant(1, 3.0)), 3.0);
  const TrigPolynomial q = 2.0 * TrigPolynomial::sin_mode(2, 0, 1) * TrigPolynomial::cos_mode(2, 1, 1);
  EXPECT_NEAR(trig_fnorm(q), 2.0, 1e-15);
  EXPECT_EQ(trig_mean(TrigPolynomial::cos_mode(1, 0, 1)), Complex(0, 0));
  EXPECT_EQ(trig_mean(TrigPolynomial::constant(1, 5.0) + TrigPolynomial::cos_mode(1, 0, 1)), Complex(5, 0));
  const TrigPolynomial s = TrigPolynomial::sin_mode(1, 0, 1);
  EXPECT_NEAR(trig_mean(s * s).real(), 0.5, 1e-15);
}

TEST(Trig, RealValuedProductsAndNormInequalities) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const TrigPolynomial a = random_real_trig(rng, 2, 2), b = random_real_trig(rng, 2, 1);
    const TrigPolynomial ab = a * b;
    EXPECT_TRUE(ab.is_real_valued(1e-12));
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> th{u(rng), u(rng)};
      const Complex want = a(th) * b(th);
      EXPECT_LE(std::abs(ab(th) - want), 1e-9 * (1 + std::abs(want)));
    }
    EXPECT_LE(trig_fnorm(a + b), trig_fnorm(a) + trig_fnorm(b) + 1e-12);
    EXPECT_LE(trig_fnorm(ab), trig_fnorm(a) * trig_fnorm(b) + 1e-12);
  }
}

TEST(Trig, ParsevalByQuasiRandomQuadrature) {
  std::mt19937_64 rng(12);
  const TrigPolynomial q = random_real_trig(rng, 2, 2);
  double acc = 0.0;
  const int nodes = 10000;
  for (int k = 1; k <= nodes; ++k) acc += std::norm(q(halton_point(k, 2)));
  acc /= nodes;
  EXPECT_LE(std::abs(acc - trig_l2_squared(q)) / trig_l2_squared(q), 1e-3);
}

TEST(Extrema, Examples) {
  const auto r = extrema_estimate(Polynomial::squared_norm(2), Region::Ball);
  EXPECT_NEAR(r.min_est, 0.0, 1e-6);
  EXPECT_NEAR(r.max_est, 1.0, 1e-6);
  EXPECT_TRUE(r.estimated);
  const auto s = extrema_estimate(x(2, 0), Region::Sphere);
  EXPECT_NEAR(s.min_est, -1.0, 1e-6);
  EXPECT_NEAR(s.max_est, 1.0, 1e-6);
  const auto c = extrema_estimate(Polynomial::constant(3, 1.0), Region::Cube);
  EXPECT_EQ(c.min_est, 1.0);
  EXPECT_EQ(c.max_est, 1.0);
  const auto t = trig_extrema_estimate(TrigPolynomial::cos_mode(1, 0, 1));
  EXPECT_NEAR(t.min_est, -1.0, 1e-6);
}

TEST(Random, PhiloxKnownAnswer) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Random, InverseNormalCdf) {
  EXPECT_NEAR(inverse_normal_cdf(0.5), 0.0, 1e-12);
  EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(inverse_normal_cdf(1e-10), -6.361340902404056, 1e-7);
  const auto a = keyed_normal_pair(1, 2, 3, 0), b = keyed_normal_pair(1, 2, 3, 0);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, keyed_normal_pair(1, 2, 4, 0));
}
