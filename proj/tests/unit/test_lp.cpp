#include <cmath>

#include <gtest/gtest.h>

#include "lp_oracle.hpp"
#include "motdual/errors.hpp"
#include "motdual/lp.hpp"

using namespace motdual;

TEST(Lp, SingleBound) {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  lp.add_row({{x, 1.0}}, RowSense::LessEqual, 1.0);
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_DOUBLE_EQ(r.x[x], 1.0);
}

TEST(Lp, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
  LinearProgram lp;
  int x = lp.add_variable(3), y = lp.add_variable(5);
  lp.add_row({{x, 1}}, RowSense::LessEqual, 4);
  lp.add_row({{y, 2}}, RowSense::LessEqual, 12);
  lp.add_row({{x, 3}, {y, 2}}, RowSense::LessEqual, 18);
  for (bool presolve : {true, false}) {
    LpOptions o;
    o.presolve = presolve;
    auto r = solve_lp(lp, o);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.value, 36.0, 1e-12);
    EXPECT_NEAR(r.x[x], 2.0, 1e-12);
    EXPECT_NEAR(r.x[y], 6.0, 1e-12);
  }
}

TEST(Lp, RedundantEqualities) {
  // x + y = 1 stated three times, min x - y: optimum -1.
  LinearProgram lp(Objective::Minimize);
  int x = lp.add_variable(1), y = lp.add_variable(-1);
  for (int i = 0; i < 3; ++i) lp.add_row({{x, 1}, {y, 1}}, RowSense::Equal, 1);
  lp.add_row({{x, 2}, {y, 2}}, RowSense::Equal, 2);
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.value, -1.0, 1e-12);
  EXPECT_LE(r.primal_residual, 1e-12);
}

TEST(Lp, NegativeRightHandSides) {
  // x - y = -2, min x + y: y = x + 2, optimum 2 at x = 0.
  LinearProgram lp(Objective::Minimize);
  int x = lp.add_variable(1), y = lp.add_variable(1);
  lp.add_row({{x, 1}, {y, -1}}, RowSense::Equal, -2);
  lp.add_row({{x, -1}}, RowSense::GreaterEqual, -5);
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(Lp, FreeVariables) {
  // min z with z >= x - 3, z >= 3 - x, x free, z free: optimum 0 at x = 3.
  LinearProgram lp(Objective::Minimize);
  int x = lp.add_variable(0, true), z = lp.add_variable(1, true);
  lp.add_row({{z, 1}, {x, -1}}, RowSense::GreaterEqual, -3);
  lp.add_row({{z, 1}, {x, 1}}, RowSense::GreaterEqual, 3);
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  // A free variable can settle at a negative value.
  LinearProgram neg(Objective::Minimize);
  int w = neg.add_variable(1, true);
  neg.add_row({{w, 1}}, RowSense::GreaterEqual, -4);
  auto rn = solve_lp(neg);
  ASSERT_EQ(rn.status, LpStatus::Optimal);
  EXPECT_NEAR(rn.x[w], -4.0, 1e-12);
}

TEST(Lp, Infeasible) {
  LinearProgram lp;
  int x = lp.add_variable(1);
  lp.add_row({{x, 1}}, RowSense::LessEqual, -1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Infeasible);
  LinearProgram lp2;
  int a = lp2.add_variable(1), b = lp2.add_variable(1);
  lp2.add_row({{a, 1}, {b, 1}}, RowSense::Equal, 1);
  lp2.add_row({{a, 1}, {b, 1}}, RowSense::Equal, 2);
  EXPECT_EQ(solve_lp(lp2).status, LpStatus::Infeasible);
}

TEST(Lp, Unbounded) {
  LinearProgram lp;
  int x = lp.add_variable(1), y = lp.add_variable(0);
  lp.add_row({{x, 1}, {y, -1}}, RowSense::LessEqual, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
  LinearProgram free_min(Objective::Minimize);
  free_min.add_variable(1, true);
  EXPECT_EQ(solve_lp(free_min).status, LpStatus::Unbounded);
}

TEST(Lp, BealeCyclingExampleTerminates) {
  // Cycles under the largest-coefficient rule; optimum -1/20.
  LinearProgram lp(Objective::Minimize);
  int x4 = lp.add_variable(-0.75), x5 = lp.add_variable(150), x6 = lp.add_variable(-0.02),
      x7 = lp.add_variable(6);
  lp.add_row({{x4, 0.25}, {x5, -60}, {x6, -0.04}, {x7, 9}}, RowSense::LessEqual, 0);
  lp.add_row({{x4, 0.5}, {x5, -90}, {x6, -0.02}, {x7, 3}}, RowSense::LessEqual, 0);
  lp.add_row({{x6, 1}}, RowSense::LessEqual, 1);
  for (bool presolve : {true, false}) {
    LpOptions o;
    o.presolve = presolve;
    auto r = solve_lp(lp, o);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.value, -0.05, 1e-12);
  }
}

TEST(Lp, RejectsBadInput) {
  LinearProgram lp;
  EXPECT_THROW(lp.add_variable(NAN), DomainError);
  int x = lp.add_variable(1);
  EXPECT_THROW(lp.add_row({{x + 1, 1.0}}, RowSense::Equal, 0), DomainError);
  EXPECT_THROW(lp.add_row({{x, 1.0}}, RowSense::Equal, INFINITY), DomainError);
}

TEST(Lp, IterationCapReportsFailure) {
  LinearProgram lp;
  int x = lp.add_variable(3), y = lp.add_variable(5);
  lp.add_row({{x, 3}, {y, 2}}, RowSense::LessEqual, 18);
  LpOptions o;
  o.max_iterations = 0;
  o.presolve = false;
  auto r = solve_lp(lp, o);
  EXPECT_EQ(r.status, LpStatus::SolverFailure);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Lp, TableauGuard) {
  LinearProgram lp;
  int x = lp.add_variable(1);
  lp.add_row({{x, 1}}, RowSense::LessEqual, 1);
  LpOptions o;
  o.max_tableau_entries = 1;
  auto r = solve_lp(lp, o);
  EXPECT_EQ(r.status, LpStatus::SolverFailure);
  EXPECT_NE(r.diagnostics.find("exceeds"), std::string::npos);
}

TEST(Lp, MatchesVertexEnumeration) {
  Rng rng(2024);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    LinearProgram lp = oracle::random_bounded_lp(rng);
    auto best = oracle::vertex_enumeration(lp);
    for (bool presolve : {true, false}) {
      LpOptions o;
      o.presolve = presolve;
      auto r = solve_lp(lp, o);
      if (!best) {
        EXPECT_EQ(r.status, LpStatus::Infeasible) << "trial " << trial;
        continue;
      }
      ASSERT_EQ(r.status, LpStatus::Optimal) << "trial " << trial << ": " << r.diagnostics;
      EXPECT_NEAR(r.value, *best, 1e-9) << "trial " << trial;
      EXPECT_LE(r.primal_residual, 1e-9);
      EXPECT_NEAR(r.value, lp.objective_value(r.x), 1e-12);
    }
    (best ? optimal : infeasible)++;
  }
  // The generator should exercise both outcomes.
  EXPECT_GT(optimal, 50);
  EXPECT_GT(infeasible, 5);
}
