#include <gtest/gtest.h>

#include <sstream>

#include "exitsos/hierarchy.hpp"

using namespace exitsos;

namespace {

const InteriorPointSolver kSolver;
const std::vector<double> kX0 = {0.3, 0.2};

Polynomial X(std::size_t i) { return Polynomial::variable(2, i); }
Polynomial C(double c) { return Polynomial::constant(2, c); }

void expect_verified(const HierarchySolution& s) {
  EXPECT_EQ(s.solver.status, SolveStatus::Optimal);
  EXPECT_TRUE(s.certificates_verified);
  for (const auto& v : s.verification) EXPECT_TRUE(v.pass);
}

}  // namespace

TEST(Hierarchy, BrownianLinearIsExact) {
  const auto prob = ExitProblem::brownian(2, X(0), kX0);
  for (Mode mode : {Mode::Trig, Mode::Baseline}) {
    const auto s = solve_level(prob, 2, mode, kSolver);
    expect_verified(s);
    EXPECT_NEAR(s.bound, 0.3, 1e-5) << to_string(mode);
    EXPECT_NEAR(s.bound, s.v(kX0), 1e-8);
  }
}

TEST(Hierarchy, ConstantBoundaryData) {
  const auto prob = ExitProblem::brownian(2, C(1.0), kX0);
  for (Mode mode : {Mode::Trig, Mode::Baseline}) {
    const auto s = solve_level(prob, 2, mode, kSolver);
    expect_verified(s);
    EXPECT_NEAR(s.bound, 1.0, 1e-6);
  }
}

TEST(Hierarchy, QuadraticBoundaryData) {
  const auto prob = ExitProblem::brownian(2, X(0) * X(0), kX0);
  const auto s3 = solve_level(prob, 3, Mode::Trig, kSolver);
  expect_verified(s3);
  EXPECT_LE(s3.bound, 0.525 + 1e-6);
  EXPECT_NEAR(s3.bound, 0.525, 1e-3);
  const auto s4 = solve_level(prob, 4, Mode::Trig, kSolver);
  expect_verified(s4);
  EXPECT_NEAR(s4.bound, 0.525, 1e-3);
}

TEST(Hierarchy, TrigModeCapsDegreeOfV) {
  const auto prob = ExitProblem::brownian(2, X(0), kX0);
  const auto h = assemble_trig(prob, 3);
  EXPECT_EQ(h.vdeg, 3);
  EXPECT_TRUE(h.vdeg_capped);
  EXPECT_FALSE(h.notes.empty());
  EXPECT_THROW(assemble_trig(prob, 2, HierarchyOptions{4, 0.0, false}), std::invalid_argument);
  EXPECT_EQ(assemble_baseline(prob, 2).vdeg, 4);
  EXPECT_THROW(assemble_trig(ExitProblem::brownian(2, pow(X(0), 3), kX0), 2), std::invalid_argument);
}

TEST(Hierarchy, AssemblyIsDeterministic) {
  const auto prob = ExitProblem::brownian(2, X(0) * X(0) + 0.5 * X(1), kX0);
  for (Mode mode : {Mode::Trig, Mode::Baseline}) {
    std::ostringstream a, b;
    write_sdpa(detail::assemble(prob, 3, mode, {}).program, a);
    write_sdpa(detail::assemble(prob, 3, mode, {}).program, b);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(Hierarchy, LowerBoundAndMonotoneAcrossLevels) {
  const auto prob = ExitProblem::brownian(2, X(0) * X(0) - X(0) * X(1) + 0.5 * X(1), kX0);
  const double oracle = 0.5 * (1 + 0.09 - 0.04) - 0.06 + 0.1;
  for (Mode mode : {Mode::Trig, Mode::Baseline}) {
    double prev = -1e9;
    for (int l = 2; l <= 4; ++l) {
      const auto s = solve_level(prob, l, mode, kSolver);
      expect_verified(s);
      EXPECT_LE(s.bound, oracle + 1e-6);
      EXPECT_GE(s.bound, prev - 1e-7);
      prev = s.bound;
    }
  }
}

TEST(Hierarchy, BaselineWithManyFreeCoefficients) {
  const auto prob = ExitProblem::brownian(2, X(0) * X(0) - 0.7 * X(0) * X(1) + 0.3 * X(1) - C(0.2), kX0);
  const double oracle = 0.5 * (1 + 0.09 - 0.04) - 0.7 * 0.06 + 0.06 - 0.2;
  for (int l = 6; l <= 7; ++l) {
    const auto s = solve_level(prob, l, Mode::Baseline, kSolver);
    expect_verified(s);
    EXPECT_LE(s.bound, oracle + 1e-6);
    EXPECT_NEAR(s.bound, oracle, 1e-4);
  }
}

TEST(Hierarchy, DriftProblemIsBoundedByTheMaximumPrinciple) {
  std::vector<Polynomial> drift = {-0.5 * X(0), -0.5 * X(1)};
  PolyMatrix F = {{C(0.8), C(0)}, {C(0), C(0.8)}};
  const auto prob = ExitProblem::from_diffusion(drift, F, X(0) * X(0), kX0);
  const auto s = solve_level(prob, 3, Mode::Trig, kSolver);
  expect_verified(s);
  EXPECT_GE(s.bound, 0.0 - 1e-6);  // g >= 0 on S
  EXPECT_LE(s.bound, 1.0 + 1e-6);  // g <= 1 on S
  EXPECT_TRUE(posterior_feasibility_check(s, prob).pass);
}

TEST(Sweep, RowsAndCsv) {
  const auto prob = ExitProblem::brownian(2, X(0) * X(0), kX0);
  const OracleValue oracle{0.525, OracleKind::Exact, 0.0, std::nullopt};
  const auto rows = sweep(prob, {2, 3, 4}, Mode::Trig, kSolver, oracle);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "OPTIMAL");
    ASSERT_TRUE(r.gap.has_value());
    EXPECT_LE(*r.gap, 1e-3);
    EXPECT_GE(*r.gap, -1e-6);
    EXPECT_GT(r.max_block, 0u);
  }
  EXPECT_EQ(std::string(kSweepCsvHeader), "level,mode,bound,oracle,gap,stderr,status,seconds,max_block");
  const std::string line = to_csv(rows[0]);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
  EXPECT_EQ(line.rfind("2,trig,", 0), 0u);
  const auto par = sweep(prob, {2, 3, 4}, Mode::Trig, kSolver, oracle, {}, {}, 3);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(par[i].bound, rows[i].bound);
  EXPECT_THROW(sweep(prob, {3, 2}, Mode::Trig, kSolver, oracle), std::invalid_argument);
}

TEST(Sweep, ConstantDataHasNoGap) {
  const auto prob = ExitProblem::brownian(2, C(2.0), kX0);
  const OracleValue oracle{2.0, OracleKind::Exact, 0.0, std::nullopt};
  for (const auto& r : sweep(prob, {1, 2, 3}, Mode::Baseline, kSolver, oracle)) EXPECT_LE(std::abs(*r.gap), 1e-6);
}

TEST(Sweep, FailedLevelIsRecorded) {
  const auto prob = ExitProblem::brownian(2, pow(X(0), 3), kX0);
  const auto rows = sweep(prob, {1, 2}, Mode::Trig, kSolver, std::nullopt);
  EXPECT_EQ(rows[0].status, "ERROR");
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_FALSE(rows[0].gap.has_value());
}

TEST(Feasibility, PosteriorCheckExamples) {
  const auto prob = ExitProblem::brownian(2, X(0), kX0);
  const auto opt = posterior_feasibility_check(X(0), prob);
  EXPECT_TRUE(opt.pass);
  EXPECT_NEAR(opt.worst_interior, 0.0, 1e-12);
  EXPECT_NEAR(opt.worst_boundary, 0.0, 1e-12);
  const auto bad = posterior_feasibility_check(X(0) + C(1.0), prob);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.worst_boundary, -1.0, 1e-12);
  const auto sq = ExitProblem::brownian(2, X(0) * X(0), kX0);
  EXPECT_TRUE(posterior_feasibility_check(Polynomial(2), sq).pass);
}
