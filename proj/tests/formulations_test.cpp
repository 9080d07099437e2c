#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.hpp"

using namespace harvest;
using testutil::make_instance;
using testutil::random_instance;

namespace {

milp::Solution blank_solution(const IntegerProgram& m) {
  milp::Solution s;
  s.status = milp::SolveStatus::Optimal;
  s.values.assign(static_cast<std::size_t>(m.num_variables()), 0.0);
  return s;
}

void set(milp::Solution& s, int var, double v) { s.values.at(static_cast<std::size_t>(var)) = v; }

}  // namespace

TEST(CountVariables, TableTwoColumn) {
  EXPECT_EQ(count_variables(1, 3, 1, 10), 196);
  EXPECT_EQ(count_variables(3, 3, 3, 10), 262);
  EXPECT_EQ(count_variables(4, 3, 3, 10), 541);
  EXPECT_EQ(count_variables(5, 3, 3, 10), 195);
  EXPECT_EQ(count_variables(7, 3, 3, 10), 258);
  EXPECT_EQ(count_variables(8, 3, 3, 10), 348);
}

TEST(CountVariables, MatchesBuiltModels) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> kd(1, 3), ld(1, 7);
  for (int trial = 0; trial < 12; ++trial) {
    const int K = kd(rng), D = kd(rng), L = ld(rng);
    const Instance inst = random_instance(static_cast<std::uint64_t>(trial), L, K, D);
    const CostModel cm = build_cost_model(inst);
    for (int n = 1; n <= 8; ++n) {
      const auto [m, a] = build_ip(n, inst, cm);
      const long d_eff = base_variant(n) <= 2 ? 1 : D;
      EXPECT_EQ(m.num_variables(), count_variables(n, K, d_eff, L)) << "n=" << n << " K=" << K << " D=" << D << " L=" << L;
    }
  }
}

TEST(BuildIp, RejectsBadVariantAndDepot) {
  const Instance inst = random_instance(0, 3, 1, 2);
  const CostModel cm = build_cost_model(inst);
  EXPECT_THROW(build_ip(0, inst, cm), ModelError);
  EXPECT_THROW(build_ip(9, inst, cm), ModelError);
  BuildOptions bo;
  bo.designated_depot = 5;
  EXPECT_THROW(build_ip(1, inst, cm, bo), ValidationError);
}

TEST(BuildIp, SingleFieldShuttle) {
  const Instance inst = make_instance({{3, 4}}, {{0, 0}}, {{100.0}}, 2.0);
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(3, inst, cm);
  const SecResult r = solve_with_secs(m, a);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(out_legs(r.solution, a, 0, 0, 0), 2);
  EXPECT_NEAR(r.solution.objective, 2 * 10.0 - 100.0, 1e-9);
}

TEST(BuildIp, BinaryLegsForReturnVariants) {
  const Instance inst = random_instance(1, 4, 2, 2);
  const CostModel cm = build_cost_model(inst);
  for (int n : {4, 8}) {
    const auto [m, a] = build_ip(n, inst, cm);
    EXPECT_EQ(m.variable(a.x_out[0][0][0]).upper, 1.0);
    EXPECT_FALSE(a.x_in.empty());
  }
  const auto [m3, a3] = build_ip(3, inst, cm);
  EXPECT_EQ(m3.variable(a3.x_out[0][0][0]).upper, 2.0);
  EXPECT_TRUE(a3.x_in.empty());
}

TEST(BuildIp, EnforcedVariantsFixGamma) {
  const Instance inst = random_instance(2, 5, 3, 2);
  const CostModel cm = build_cost_model(inst);
  for (int n = 5; n <= 8; ++n) {
    auto [m, a] = build_ip(n, inst, cm);
    const SecResult r = solve_with_secs(m, a);
    ASSERT_TRUE(r.converged);
    const auto crops = field_crops(r.solution, a);
    for (int k = 0; k < 3; ++k) EXPECT_NE(std::count(crops.begin(), crops.end(), k), 0) << "n=" << n;
  }
}

TEST(Separation, AnchoredPathHasNoCuts) {
  const Instance inst = make_instance({{1, 0}, {2, 0}, {3, 0}}, {{0, 0}}, {{5.0}, {5.0}, {5.0}});
  const CostModel cm = build_cost_model(inst);
  const auto [m, a] = build_ip(1, inst, cm);
  auto s = blank_solution(m);
  for (int l = 0; l < 3; ++l) set(s, a.delta[static_cast<std::size_t>(l)][0], 1);
  set(s, a.x_out[0][0][0], 1);
  set(s, a.x_out[0][0][2], 1);
  set(s, a.edge[0][static_cast<std::size_t>(a.pair_index(0, 1))], 1);
  set(s, a.edge[0][static_cast<std::size_t>(a.pair_index(1, 2))], 1);
  EXPECT_TRUE(separate_subtours(s, a).empty());
  ASSERT_EQ(crop_loops(s, a, 0).size(), 1u);
  EXPECT_EQ(crop_loops(s, a, 0)[0], (std::vector<int>{0, 1, 2}));
}

TEST(Separation, TwoTrianglesGiveOneCut) {
  std::vector<testutil::Spot> fs{{1, 0}, {2, 0}, {1.5, 1}, {10, 0}, {11, 0}, {10.5, 1}};
  const Instance inst = make_instance(fs, {{0, 0}}, std::vector<std::vector<double>>(6, {5.0}));
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(1, inst, cm);
  auto s = blank_solution(m);
  for (int l = 0; l < 6; ++l) set(s, a.delta[static_cast<std::size_t>(l)][0], 1);
  set(s, a.x_out[0][0][0], 1);
  set(s, a.x_out[0][0][2], 1);
  for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {3, 4}, {4, 5}, {3, 5}})
    set(s, a.edge[0][static_cast<std::size_t>(a.pair_index(i, j))], 1);
  const auto cuts = separate_subtours(s, a);
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_EQ(cuts[0].crop, 0);
  EXPECT_EQ(cuts[0].fields, (std::vector<int>{3, 4, 5}));
  // The cut is violated by the point that produced it.
  EXPECT_GT(sec_lhs(a, cuts[0]).evaluate(s.values), 2.0);
  const int before = m.num_inequalities();
  add_sec_cuts(m, a, cuts);
  EXPECT_EQ(m.num_inequalities(), before + 1);
  EXPECT_EQ(a.sec_pool.size(), 1u);
}

TEST(Separation, RejectsFractionalPoint) {
  const Instance inst = random_instance(3, 3, 1, 1);
  const CostModel cm = build_cost_model(inst);
  const auto [m, a] = build_ip(1, inst, cm);
  auto s = blank_solution(m);
  set(s, 0, 0.5);
  EXPECT_THROW(separate_subtours(s, a), ModelError);
}

TEST(Separation, ThreeFieldModelsNeverCut) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = random_instance(seed, 3, 1, 1);
    const CostModel cm = build_cost_model(inst);
    auto [m, a] = build_ip(1, inst, cm);
    const SecResult r = solve_with_secs(m, a);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
  }
}

TEST(Separation, CutsHoldOnEveryHamiltonianTour) {
  std::vector<SecCut> pool;
  ModelArtifacts art;
  int nvars = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Instance inst = random_instance(seed, 6, 1, 1, 1.0);
    const CostModel cm = build_cost_model(inst);
    auto [m, a] = build_ip(1, inst, cm);
    solve_with_secs(m, a);
    pool.insert(pool.end(), a.sec_pool.begin(), a.sec_pool.end());
    art = a;
    nvars = m.num_variables();
  }
  ASSERT_FALSE(pool.empty());
  std::vector<int> p{0, 1, 2, 3, 4, 5};
  do {
    std::vector<double> x(static_cast<std::size_t>(nvars), 0.0);
    for (std::size_t t = 0; t + 1 < p.size(); ++t) x[static_cast<std::size_t>(art.edge[0][static_cast<std::size_t>(art.pair_index(p[t], p[t + 1]))])] = 1;
    for (const auto& c : pool) EXPECT_LE(sec_lhs(art, c).evaluate(x), static_cast<double>(c.fields.size()) - 1.0);
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST(SecLoop, FourFieldTourMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Instance inst = random_instance(seed, 4, 1, 1);
    const double oracle = testutil::oracle_single_depot(inst, 0);
    EXPECT_NEAR(testutil::exact_profit(1, inst), oracle, 1e-6) << "seed " << seed;
  }
}

TEST(SecLoop, ObjectiveTraceNonDecreasing) {
  int looped = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed, 9, 2, 2);
    const CostModel cm = build_cost_model(inst);
    for (int n : {1, 3, 7}) {
      auto [m, a] = build_ip(n, inst, cm);
      const SecResult r = solve_with_secs(m, a);
      ASSERT_TRUE(r.converged);
      ASSERT_EQ(r.objective_trace.size(), static_cast<std::size_t>(r.iterations));
      for (std::size_t t = 1; t < r.objective_trace.size(); ++t) EXPECT_GE(r.objective_trace[t], r.objective_trace[t - 1] - 1e-7);
      if (r.iterations > 1) ++looped;
      EXPECT_GE(r.final_inequalities, m.num_inequalities() - static_cast<int>(a.sec_pool.size()));
    }
  }
  EXPECT_GT(looped, 0);
}

TEST(SecLoop, ZeroCapReturnsImmediately) {
  const Instance inst = random_instance(4, 5, 1, 1);
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(1, inst, cm);
  const SecResult r = solve_with_secs(m, a, 0);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_FALSE(r.solution.has_values());
}

TEST(Dominance, SmallInstances) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Instance inst = random_instance(seed, 5, 2, 2);
    double j[9];
    for (int n = 1; n <= 8; ++n) j[n] = testutil::exact_profit(n, inst);
    EXPECT_GE(j[3], j[2] - 1e-6);
    EXPECT_GE(j[3], j[1] - 1e-6);
    for (int n = 1; n <= 4; ++n) EXPECT_GE(j[n], j[n + 4] - 1e-6) << "n=" << n << " seed " << seed;
  }
}

TEST(Agronomic, RotationForbidsCrop) {
  const Instance inst = random_instance(5, 5, 3, 1);
  const CostModel cm = build_cost_model(inst);
  for (int n : {3, 7}) {
    auto [m, a] = build_ip(n, inst, cm);
    AgronomicSpec spec;
    spec.rotation_forbidden = {{0, 2}, {1, 2}};
    add_agronomic_constraints(m, a, inst, spec);
    const SecResult r = solve_with_secs(m, a);
    ASSERT_TRUE(r.converged);
    const auto crops = field_crops(r.solution, a);
    EXPECT_NE(crops[0], 2);
    EXPECT_NE(crops[1], 2);
  }
}

TEST(Agronomic, ZeroDiversificationBudgetDisablesCrop) {
  const Instance inst = random_instance(6, 5, 3, 1);
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(3, inst, cm);
  AgronomicSpec spec;
  for (const auto& f : inst.fields) spec.diversification_weights.push_back({f.size_ha, f.size_ha, f.size_ha});
  spec.diversification_bounds = {0.0};
  add_agronomic_constraints(m, a, inst, spec);
  const SecResult r = solve_with_secs(m, a);
  ASSERT_TRUE(r.converged);
  for (int c : field_crops(r.solution, a)) EXPECT_NE(c, 0);

  auto [m2, a2] = build_ip(3, inst, cm);
  spec.diversification_bounds = {0.0, 0.0, 0.0};
  EXPECT_THROW(add_agronomic_constraints(m2, a2, inst, spec), ValidationError);
}

TEST(Agronomic, TimeWindow) {
  const Instance inst = make_instance({{1, 0}, {2, 0}}, {{0, 0}}, {{10.0}, {10.0}});
  const CostModel cm = build_cost_model(inst);
  AgronomicSpec spec;
  TimeSpec t;
  t.speed_kmh = 1.0;
  t.harvest_h = {{1.0}, {1.0}};
  t.window_h = {100.0};
  spec.time = t;
  {
    auto [m, a] = build_ip(1, inst, cm);
    add_agronomic_constraints(m, a, inst, spec);
    const SecResult r = solve_with_secs(m, a);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.solution.objective, 4.0 - 20.0, 1e-9);
  }
  spec.time->window_h = {5.9};  // tour takes 4 h of travel plus 2 h of harvesting
  auto [m, a] = build_ip(1, inst, cm);
  add_agronomic_constraints(m, a, inst, spec);
  EXPECT_EQ(solve_with_secs(m, a).solution.status, milp::SolveStatus::Infeasible);
}

TEST(Agronomic, PriorityNeedsArcs) {
  const Instance inst = random_instance(7, 5, 1, 1);
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(1, inst, cm);
  AgronomicSpec spec;
  spec.priority = {{0, 0, 1, 2}};
  EXPECT_THROW(add_agronomic_constraints(m, a, inst, spec), ModelError);
}

TEST(Agronomic, PriorityTripleIsConsecutive) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Instance inst = random_instance(seed + 20, 5, 1, 1, 1.0);
    const CostModel cm = build_cost_model(inst);
    // Pick fields that the unconstrained optimum does not visit as 3-1-4.
    const int c = 3, mid = 1, b = 4;
    BuildOptions bo;
    bo.asymmetric_pairs = {{c, mid}, {mid, b}};
    auto [m, a] = build_ip(1, inst, cm, bo);
    AgronomicSpec spec;
    spec.priority = {{0, c, mid, b}};
    add_agronomic_constraints(m, a, inst, spec);
    const SecResult r = solve_with_secs(m, a);
    ASSERT_TRUE(r.converged);
    const auto loops = crop_loops(r.solution, a, 0);
    ASSERT_EQ(loops.size(), 1u);
    const auto& t = loops[0];
    const auto at = [&](int f) { return std::find(t.begin(), t.end(), f) - t.begin(); };
    EXPECT_EQ(std::abs(at(c) - at(mid)), 1);
    EXPECT_EQ(std::abs(at(mid) - at(b)), 1);
    EXPECT_EQ(r.solution.value(a.arc(0, c, mid)), 1.0);
    EXPECT_EQ(r.solution.value(a.arc(0, mid, b)), 1.0);

    // Brute force over tours with c, mid, b consecutive.
    std::vector<int> p{0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      const auto pos = [&](int f) { return std::find(p.begin(), p.end(), f) - p.begin(); };
      if (std::abs(pos(c) - pos(mid)) != 1 || std::abs(pos(mid) - pos(b)) != 1) continue;
      double cost = cm.depot_field(0, 0, static_cast<std::size_t>(p.front())) + cm.depot_field(0, 0, static_cast<std::size_t>(p.back()));
      for (std::size_t s = 0; s + 1 < p.size(); ++s) cost += cm.field_field(0, static_cast<std::size_t>(p[s]), static_cast<std::size_t>(p[s + 1]));
      best = std::min(best, cost);
    } while (std::next_permutation(p.begin(), p.end()));
    double rev = 0;
    for (const auto& f : inst.fields) rev += f.revenue_eur[0];
    EXPECT_NEAR(r.solution.objective, best - rev + inst.crops.fixed_cost_eur, 1e-6);
  }
}

TEST(RelaxService, EmptySetLeavesModelUnchanged) {
  const Instance inst = random_instance(8, 4, 2, 2);
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(3, inst, cm);
  std::ostringstream before, after;
  milp::write_lp_format(m, before);
  relax_service(m, a, {});
  milp::write_lp_format(m, after);
  EXPECT_EQ(before.str(), after.str());
  EXPECT_THROW(relax_service(m, a, {9}), ValidationError);
}

TEST(RelaxService, ZeroRevenueServesNothing) {
  auto inst = make_instance({{1, 0}, {0, 2}, {3, 3}}, {{0, 0}, {5, 5}}, {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}, 1.0, 10.0);
  const CostModel cm = build_cost_model(inst);
  for (int n : {1, 2, 3}) {
    auto [m, a] = build_ip(n, inst, cm);
    relax_service(m, a, {0, 1, 2});
    const SecResult r = solve_with_secs(m, a);
    ASSERT_TRUE(r.converged) << "n=" << n;
    for (int c : field_crops(r.solution, a)) EXPECT_EQ(c, -1) << "n=" << n;
    EXPECT_NEAR(r.solution.objective, 0.0, 1e-9) << "n=" << n;
  }
  // IP-4 still opens a first and a last crop-tour.
  auto [m, a] = build_ip(4, inst, cm);
  relax_service(m, a, {0, 1, 2});
  const SecResult r = solve_with_secs(m, a);
  ASSERT_TRUE(r.converged);
  std::set<int> used;
  for (int c : field_crops(r.solution, a))
    if (c >= 0) used.insert(c);
  EXPECT_EQ(used.size(), 2u);
}

TEST(RelaxService, UnprofitableDistantFieldDropped) {
  auto inst = make_instance({{1, 0}, {0, 1}, {40, 40}}, {{0, 0}}, {{50.0}, {50.0}, {20.0}});
  const CostModel cm = build_cost_model(inst);
  auto [m, a] = build_ip(1, inst, cm);
  relax_service(m, a, {2});
  const SecResult r = solve_with_secs(m, a);
  ASSERT_TRUE(r.converged);
  const auto crops = field_crops(r.solution, a);
  EXPECT_EQ(crops[0], 0);
  EXPECT_EQ(crops[1], 0);
  EXPECT_EQ(crops[2], -1);
}

TEST(Baseline, UniformRevenuePicksWheat) {
  GenParams p;
  p.seed = 3;
  p.fields = 12;
  const Instance inst = generate_instance(p);
  auto [m, a] = build_assignment_baseline(inst);
  const auto sol = milp::solve(m);
  for (int c : field_crops(sol, a)) EXPECT_EQ(c, 2);
}

TEST(Baseline, SingleFieldSingleCrop) {
  const Instance inst = make_instance({{0, 0}}, {{1, 1}}, {{3.0}});
  auto [m, a] = build_assignment_baseline(inst);
  EXPECT_EQ(milp::solve(m).value(a.delta[0][0]), 1.0);
}

TEST(Baseline, RowwiseArgmax) {
  const Instance inst = random_instance(9, 10, 3, 1);
  auto [m, a] = build_assignment_baseline(inst);
  const auto crops = field_crops(milp::solve(m), a);
  for (std::size_t l = 0; l < inst.num_fields(); ++l) {
    const auto& r = inst.fields[l].revenue_eur;
    EXPECT_EQ(crops[l], static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin()));
  }
}

TEST(Baseline, LpRelaxationIntegralWithRotation) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = random_instance(seed, 8, 3, 1);
    auto [m, a] = build_assignment_baseline(inst);
    std::uniform_int_distribution<int> field(0, 7), crop(0, 1);
    for (int q = 0; q < 5; ++q)
      m.add_constraint(LinearExpr::var(a.delta[static_cast<std::size_t>(field(rng))][static_cast<std::size_t>(crop(rng))]),
                       Relation::Equal, 0.0, "rotation");
    const auto lp = milp::solve_lp_relaxation(m);
    ASSERT_EQ(lp.status, milp::SolveStatus::Optimal);
    EXPECT_TRUE(is_integral(lp, 1e-9)) << "seed " << seed;
  }
}
