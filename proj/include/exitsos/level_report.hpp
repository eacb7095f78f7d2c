#pragma once

// Table of closed-form level bounds for one exit problem and degree.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exitsos/bounds.hpp"
#include "exitsos/extrema.hpp"
#include "exitsos/generator.hpp"
#include "exitsos/sphere_map.hpp"

namespace exitsos {

struct LevelBoundRow {
  std::string name;       // cor1, cor2, cor3, ell_d
  std::string statement;  // the inequality being solved
  std::optional<double> level;  // nullopt when no finite level exists
  nlohmann::json inputs;
  bool estimated_extrema = false;
};

/// Rows for the ball, trig and sphere certificate levels of g, and the hierarchy level l_d.
/// Every row substitutes cn_upper for c_n; extrema are sampled estimates.
inline std::vector<LevelBoundRow> level_bounds(const ExitProblem& prob, int d, const ExtremaOptions& opt = {}) {
  if (d < 1) throw std::invalid_argument("level_bounds: degree must be >= 1");
  const int n = static_cast<int>(prob.n);
  std::vector<LevelBoundRow> rows;

  const ExtremaEstimate ball = extrema_estimate(prob.g, Region::Ball, opt);
  LevelBoundRow r1{"cor1", "l >= n d and l^2 >= cn_upper(n,d) (gmax - gmin) / gmin", std::nullopt, {}, true};
  r1.inputs = {{"n", n}, {"d", d}, {"gmin", ball.min_est}, {"gmax", ball.max_est}};
  if (n >= 2)
    if (const auto l = cor1_level(n, d, ball.min_est, ball.max_est)) r1.level = static_cast<double>(*l);
  rows.push_back(r1);

  if (n >= 2) {
    const SphereMap map(prob.n);
    const TrigPolynomial q = pullback(map, prob.g);
    LevelBoundRow r2{"cor2", "l^2 >= 12 d^2 m max{1, ||q - q0||_F / qmin}, q = g o psi", std::nullopt, {}, true};
    const auto b = cor2_level(d, q, opt);
    r2.inputs = {{"m", n - 1}, {"d", d}, {"fnorm_centered", trig_fnorm(without_mean(q))},
                 {"qmin", trig_extrema_estimate(q, opt).min_est}};
    if (b) r2.level = static_cast<double>(b->level);
    rows.push_back(r2);

    const ExtremaEstimate sph = extrema_estimate(prob.g, Region::Sphere, opt);
    LevelBoundRow r3{"cor3", "l^2 >= 48 d^2 (n-1) (4d+1)^(n/2) pmax / pmin", std::nullopt, {}, true};
    r3.inputs = {{"n", n}, {"d", d}, {"pmin", sph.min_est}, {"pmax", sph.max_est}};
    if (const auto l = cor3_level(n, d, sph.min_est, sph.max_est)) r3.level = static_cast<double>(*l);
    rows.push_back(r3);

    LevelBoundRow r4{"ell_d", "max{6 cn_upper(n, dhat), 144 d^2 (n-1) (4d+1)^(n/2)}^(1/2)", std::nullopt, {}, false};
    r4.inputs = {{"n", n},
                 {"d", d},
                 {"deg_A", prob.degree_A()},
                 {"deg_f0", prob.degree_drift()},
                 {"dhat", generator_degree(d, prob.degree_A(), prob.degree_drift())}};
    r4.level = theoretical_level(n, d, prob.degree_A(), prob.degree_drift());
    rows.push_back(r4);
  }
  return rows;
}

inline nlohmann::json to_json(const LevelBoundRow& r) {
  return {{"bound", r.name},
          {"statement", r.statement},
          {"level", r.level ? nlohmann::json(*r.level) : nlohmann::json(nullptr)},
          {"inputs", r.inputs},
          {"estimated_extrema", r.estimated_extrema},
          {"c_n", "cn_upper"}};
}

}  // namespace exitsos
