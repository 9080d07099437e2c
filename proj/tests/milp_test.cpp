#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "harvest/branch_and_bound.hpp"
#include "harvest/milp.hpp"

namespace hm = harvest::milp;
using hm::LinearExpr;
using hm::Relation;

namespace {

// Exhaustive minimum over the integer box of an all-integer model.
double enumerate_min(const hm::IntegerProgram& m, std::vector<double>* best_x = nullptr) {
  const int n = m.num_variables();
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = m.variable(j).lower;
  double best = hm::kInf;
  while (true) {
    if (m.is_feasible(x, 1e-9)) {
      const double v = m.objective_value(x);
      if (v < best) {
        best = v;
        if (best_x) *best_x = x;
      }
    }
    int j = 0;
    for (; j < n; ++j) {
      auto& v = x[static_cast<std::size_t>(j)];
      if (v + 1 <= m.variable(j).upper) {
        v += 1;
        break;
      }
      v = m.variable(j).lower;
    }
    if (j == n) break;
  }
  return best;
}

hm::IntegerProgram random_model(std::mt19937_64& rng, int nvars, int nrows) {
  std::uniform_int_distribution<int> coef(-5, 9);
  std::uniform_int_distribution<int> obj(-20, 10);
  hm::IntegerProgram m;
  for (int j = 0; j < nvars; ++j) {
    m.add_binary("b" + std::to_string(j));
    m.set_objective(j, obj(rng));
  }
  for (int i = 0; i < nrows; ++i) {
    LinearExpr e;
    double total = 0.0;
    for (int j = 0; j < nvars; ++j) {
      const int c = coef(rng);
      if (c != 0) e.add(j, c);
      total += std::max(c, 0);
    }
    const Relation rel = i % 4 == 3 ? Relation::GreaterEqual : Relation::LessEqual;
    const double rhs = rel == Relation::LessEqual ? std::floor(total * 0.4) : 1.0;
    m.add_constraint(e, rel, rhs);
  }
  return m;
}

}  // namespace

TEST(Solve, SingleBinary) {
  hm::IntegerProgram m;
  const int d = m.add_binary("delta");
  m.set_objective(d, -1.0);
  const auto s = hm::solve(m);
  ASSERT_EQ(s.status, hm::SolveStatus::Optimal);
  EXPECT_NEAR(s.value(d), 1.0, 1e-9);
  EXPECT_NEAR(s.objective, -1.0, 1e-9);
}

TEST(Solve, KnapsackMatchesEnumeration) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> w(1, 20), v(1, 30);
  for (int rep = 0; rep < 10; ++rep) {
    hm::IntegerProgram m;
    LinearExpr cap;
    double total = 0;
    for (int j = 0; j < 8; ++j) {
      const int b = m.add_binary("x" + std::to_string(j));
      m.set_objective(b, -v(rng));
      const int wj = w(rng);
      cap.add(b, wj);
      total += wj;
    }
    m.add_constraint(cap, Relation::LessEqual, std::floor(total / 2));
    const auto s = hm::solve(m);
    ASSERT_EQ(s.status, hm::SolveStatus::Optimal);
    EXPECT_NEAR(s.objective, enumerate_min(m), 1e-6);
    EXPECT_TRUE(m.is_feasible(s.values));
  }
}

TEST(Solve, RandomSmallModelsMatchEnumeration) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const int nv = 4 + rep % 9;
    const int nr = 1 + rep % 10;
    auto m = random_model(rng, nv, nr);
    const double oracle = enumerate_min(m);
    const auto s = hm::solve(m);
    if (!std::isfinite(oracle)) {
      EXPECT_EQ(s.status, hm::SolveStatus::Infeasible) << "rep " << rep;
      continue;
    }
    ASSERT_EQ(s.status, hm::SolveStatus::Optimal) << "rep " << rep;
    EXPECT_NEAR(s.objective, oracle, 1e-6) << "rep " << rep;
    EXPECT_TRUE(m.is_feasible(s.values, 1e-6));
  }
}

TEST(Solve, GeneralIntegersAndEqualities) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> c(-4, 6);
  for (int rep = 0; rep < 20; ++rep) {
    hm::IntegerProgram m;
    for (int j = 0; j < 5; ++j) {
      const int v = m.add_integer("z" + std::to_string(j), 0, 3);
      m.set_objective(v, c(rng));
    }
    LinearExpr e = LinearExpr::var(0) + LinearExpr::var(1, 2.0) + LinearExpr::var(2);
    m.add_constraint(e, Relation::Equal, 4);
    m.add_constraint(LinearExpr::var(3) - LinearExpr::var(4) + LinearExpr::var(2), Relation::GreaterEqual, 1);
    m.add_constraint(LinearExpr::var(0) + LinearExpr::var(3, 3.0), Relation::LessEqual, 7);
    const double oracle = enumerate_min(m);
    const auto s = hm::solve(m);
    ASSERT_EQ(s.status, hm::SolveStatus::Optimal);
    EXPECT_NEAR(s.objective, oracle, 1e-6);
  }
}

TEST(Solve, Infeasible) {
  hm::IntegerProgram m;
  const int a = m.add_binary("a");
  const int b = m.add_binary("b");
  m.add_constraint(LinearExpr::var(a) + LinearExpr::var(b), Relation::Equal, 1);
  m.add_constraint(LinearExpr::var(a) + LinearExpr::var(b, -1.0), Relation::Equal, 0);
  EXPECT_EQ(hm::solve(m).status, hm::SolveStatus::Infeasible);
}

TEST(Solve, NodeLimitReportsIterationLimit) {
  std::mt19937_64 rng(5);
  auto m = random_model(rng, 12, 6);
  hm::SolveLimits lim;
  lim.max_nodes = 1;
  const auto s = hm::solve(m, lim);
  EXPECT_TRUE(s.status == hm::SolveStatus::IterationLimit || s.status == hm::SolveStatus::Optimal ||
              s.status == hm::SolveStatus::Infeasible);
}

TEST(Solve, LpBoundNeverExceedsIncumbent) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    auto m = random_model(rng, 10, 5);
    std::vector<hm::NodeEvent> events;
    hm::SolveLimits lim;
    lim.observer = [&](const hm::NodeEvent& ev) { events.push_back(ev); };
    const auto s = hm::solve(m, lim);
    if (s.status != hm::SolveStatus::Optimal) continue;
    ASSERT_FALSE(events.empty());
    EXPECT_LE(events.front().lp_bound, s.objective + 1e-6);
    for (const auto& ev : events) {
      if (ev.branched) {
        EXPECT_LE(ev.lp_bound, ev.incumbent + 1e-9);
      }
      if (std::isfinite(ev.lp_bound)) {
        EXPECT_GE(ev.lp_bound, events.front().lp_bound - 1e-6);
      }
    }
  }
}

TEST(Solve, ContinuousVariablesViaConditionalValue) {
  hm::IntegerProgram m;
  const int b = m.add_binary("b");
  const int z = m.add_integer("z", -2, 5);
  const int y = m.add_continuous("y", -10, 10);
  hm::add_conditional_value(m, y, b, LinearExpr::var(z));
  m.add_constraint(LinearExpr::var(z), Relation::Equal, 3);
  m.add_constraint(LinearExpr::var(b), Relation::Equal, 1);
  m.set_objective(y, 1.0);
  const auto s = hm::solve(m);
  ASSERT_EQ(s.status, hm::SolveStatus::Optimal);
  EXPECT_NEAR(s.value(y), 3.0, 1e-9);
}

TEST(LpRelaxation, FractionalKnapsack) {
  hm::IntegerProgram m;
  const int a = m.add_binary("a");
  const int b = m.add_binary("b");
  m.set_objective(a, -3);
  m.set_objective(b, -2);
  m.add_constraint(LinearExpr::var(a, 2.0) + LinearExpr::var(b, 2.0), Relation::LessEqual, 3);
  const auto s = hm::solve_lp_relaxation(m);
  ASSERT_EQ(s.status, hm::SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -4.0, 1e-9);
  EXPECT_NEAR(s.value(a), 1.0, 1e-9);
  EXPECT_NEAR(s.value(b), 0.5, 1e-9);
}

TEST(Logic, ReifiedLeqExamples) {
  for (double c : {5.0, -1.0}) {
    for (int bv = 0; bv <= 1; ++bv) {
      hm::IntegerProgram m;
      const int b = m.add_binary("b");
      hm::add_reified_leq(m, b, LinearExpr(c));
      const bool feasible = m.is_feasible({double(bv)}, 1e-12);
      EXPECT_EQ(feasible, (c <= 0) == (bv == 1)) << c << " " << bv;
    }
  }
  // f = delta - 1 is <= 0 at both lattice points, so b is forced to 1.
  for (int dv = 0; dv <= 1; ++dv)
    for (int bv = 0; bv <= 1; ++bv) {
      hm::IntegerProgram m;
      const int d = m.add_binary("delta");
      const int b = m.add_binary("b");
      hm::add_reified_leq(m, b, LinearExpr::var(d) - LinearExpr(1.0));
      std::vector<double> x(2);
      x[static_cast<std::size_t>(d)] = dv;
      x[static_cast<std::size_t>(b)] = bv;
      EXPECT_EQ(m.is_feasible(x, 1e-12), bv == 1);
    }
}

TEST(Logic, BinaryAndTruthTable) {
  for (int b1 = 0; b1 <= 1; ++b1)
    for (int b2 = 0; b2 <= 1; ++b2)
      for (int b3 = 0; b3 <= 1; ++b3) {
        hm::IntegerProgram m;
        const int v1 = m.add_binary("b1"), v2 = m.add_binary("b2"), v3 = m.add_binary("b3");
        hm::add_binary_and(m, v1, v2, v3);
        EXPECT_EQ(m.is_feasible({double(b1), double(b2), double(b3)}, 1e-12), b3 == b1 * b2);
      }
}

TEST(Logic, ConditionalValueExamples) {
  // f in [-2, 5] evaluating to -2 with b = 1 gives y = -2; b = 0 forces y = 0.
  for (int zv = -2; zv <= 5; ++zv)
    for (int bv = 0; bv <= 1; ++bv)
      for (int yv = -6; yv <= 6; ++yv) {
        hm::IntegerProgram m;
        const int z = m.add_integer("z", -2, 5);
        const int b = m.add_binary("b");
        const int y = m.add_continuous("y", -6, 6);
        hm::add_conditional_value(m, y, b, LinearExpr::var(z));
        const bool ok = m.is_feasible({double(zv), double(bv), double(yv)}, 1e-12);
        EXPECT_EQ(ok, yv == bv * zv);
      }
}

TEST(Logic, RejectsBadInputs) {
  hm::IntegerProgram m;
  const int z = m.add_integer("z", 0, 3);
  const int b = m.add_binary("b");
  EXPECT_THROW(hm::add_binary_and(m, z, b, b), harvest::ModelError);
  EXPECT_THROW(hm::add_reified_leq(m, z, LinearExpr::var(b)), harvest::ModelError);
  const int u = m.add_continuous("u", 0, hm::kInf);
  EXPECT_THROW(hm::add_reified_leq(m, b, LinearExpr::var(u)), harvest::ModelError);
  EXPECT_THROW(hm::add_conditional_value(m, z, b, LinearExpr::var(u)), harvest::ModelError);
  EXPECT_THROW(hm::add_reified_leq(m, b, LinearExpr::var(z), 0.0), harvest::ModelError);
}

TEST(LpFormat, DumpsSections) {
  hm::IntegerProgram m;
  const int a = m.add_binary("x[0,1]");
  const int b = m.add_integer("p", 0, 3);
  m.set_objective(a, 2.5);
  m.add_constraint(LinearExpr::var(a) - LinearExpr::var(b), Relation::LessEqual, 0, "link");
  std::ostringstream os;
  hm::write_lp_format(m, os);
  const std::string s = os.str();
  EXPECT_NE(s.find("Minimize"), std::string::npos);
  EXPECT_NE(s.find("link_0: + 1 x_0_1_ - 1 p <= 0"), std::string::npos);
  EXPECT_NE(s.find("General"), std::string::npos);
  EXPECT_NE(s.find("End"), std::string::npos);
}
