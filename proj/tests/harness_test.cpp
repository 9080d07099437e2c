#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "test_util.hpp"

using namespace harvest;

namespace {

int count_of(const std::string& s, const std::string& needle) {
  int c = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++c;
  return c;
}

BenchRow row(std::uint64_t seed, int n, int kt, bool conv, double j) {
  BenchRow r;
  r.seed = seed;
  r.n = n;
  r.k_tilde = kt;
  r.metrics.n_z = 262;
  r.metrics.n_eq = 31;
  r.metrics.cpu_s = 0.125;
  r.metrics.iter_sec = 3;
  r.metrics.converged = conv;
  r.metrics.j_eur = j;
  return r;
}

}  // namespace

TEST(Csv, HeaderOnlyWhenEmpty) {
  std::ostringstream os;
  write_csv(os, {});
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
  EXPECT_EQ(std::string(kCsvHeader), "seed,n,k_tilde,N_z,N_eq,N_ineq_nosec,N_ineq_final,iter_sec,cpu_s,tsp_iter,tsp_cpu_s,converged,J_eur");
}

TEST(Csv, RoundTripKeepsValues) {
  const std::vector<BenchRow> rows{row(1, 3, 10, true, 12345.678), row(2, 4, 20, false, std::nan(""))};
  std::stringstream ss;
  write_csv(ss, rows);
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].metrics.j_eur, 12345.678);
  EXPECT_EQ(back[0].metrics.cpu_s, 0.125);
  EXPECT_TRUE(back[0].metrics.converged);
  EXPECT_TRUE(std::isnan(back[1].metrics.j_eur));
  EXPECT_EQ(back[1].k_tilde, 20);
}

TEST(Csv, RejectsWrongHeaderOrWidth) {
  std::istringstream bad_header("seed,n\n");
  EXPECT_THROW(read_csv(bad_header), ValidationError);
  std::istringstream short_row(std::string(kCsvHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_csv(short_row), ValidationError);
}

TEST(Summary, ConvergenceAndMeans) {
  const std::vector<BenchRow> rows{row(1, 1, 10, true, 100.0), row(2, 1, 10, false, 300.0), row(3, 1, 10, true, std::nan("")),
                                   row(1, 2, 10, true, 50.0)};
  EXPECT_DOUBLE_EQ(convergence_percent(rows), 75.0);
  EXPECT_EQ(convergence_percent({}), 0.0);
  const auto s = summarize(rows);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].runs, 3);
  EXPECT_NEAR(s[0].p_conv, 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(s[0].j_eur, 200.0);
  EXPECT_DOUBLE_EQ(s[0].iter_sec, 3.0);
}

TEST(Benchmark, EmptyVariantListGivesNoRows) {
  BenchConfig cfg;
  cfg.seeds = {1, 2};
  cfg.k_tildes = {10};
  EXPECT_TRUE(run_benchmark(cfg).empty());
}

TEST(Benchmark, RowsFollowSeedVariantClusterOrder) {
  BenchConfig cfg;
  cfg.seeds = {3};
  cfg.variants = {1, 3};
  cfg.k_tildes = {4, 5};
  cfg.gen.fields = 12;
  int seen = 0;
  const auto rows = run_benchmark(cfg, [&](const BenchRow& r, const HarvestPlan* p, const Instance& inst) {
    ASSERT_NE(p, nullptr);
    EXPECT_NEAR(evaluate_profit(*p, inst), r.metrics.j_eur, 1e-6);
    ++seen;
  });
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(seen, 4);
  EXPECT_EQ(rows[1].n, 1);
  EXPECT_EQ(rows[1].k_tilde, 5);
  EXPECT_EQ(rows[2].n, 3);
  EXPECT_EQ(rows[3].metrics.n_z, count_variables(3, 3, 3, 5));
}

TEST(Benchmark, FailingRunRecordedAsNotConverged) {
  BenchConfig cfg;
  cfg.seeds = {0};
  cfg.variants = {9};
  cfg.k_tildes = {3};
  cfg.gen.fields = 5;
  const auto rows = run_benchmark(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].metrics.converged);
  EXPECT_FALSE(rows[0].error.empty());
}

TEST(Render, EmptyPlanShowsFieldsAndDepots) {
  const Instance inst = testutil::make_instance({{0, 0}, {5, 5}}, {{1, 1}}, {{1.0}, {1.0}});
  HarvestPlan p;
  p.variant = 1;
  p.depot = 0;
  p.relaxed = true;
  p.assignment = {-1, -1};
  p.tours = {{}};
  const std::string svg = render_plan_svg(p, inst);
  EXPECT_EQ(count_of(svg, "<circle"), 2);
  EXPECT_EQ(count_of(svg, "class=\"depot\""), 1);
  EXPECT_EQ(count_of(svg, "<polyline"), 0);
  EXPECT_EQ(count_of(svg, "field unserved"), 2);
}

TEST(Render, OnePolylinePerActiveCrop) {
  GenParams g;
  g.seed = 5;
  g.fields = 10;
  const Instance inst = generate_instance(g);
  const HarvestPlan p = plan(inst, 5, 10, 0);
  const std::string svg = render_plan_svg(p, inst);
  EXPECT_EQ(count_of(svg, "<polyline"), static_cast<int>(p.active_crops.size()));
  for (int k : p.active_crops) EXPECT_EQ(count_of(svg, "tour crop-" + std::to_string(k)), 1);
  EXPECT_EQ(count_of(svg, "<circle"), 10);
  EXPECT_EQ(count_of(svg, "class=\"depot\""), 3);
}

TEST(Render, SingleCropTourClosesAtDepot) {
  const Instance inst = testutil::make_instance({{0, 10}, {10, 10}}, {{0, 0}}, {{1.0}, {1.0}});
  HarvestPlan p;
  p.variant = 1;
  p.depot = 0;
  p.assignment = {0, 0};
  p.tours = {{0, 1}};
  const std::string svg = render_plan_svg(p, inst);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("points=\"([^\"]*)\"")));
  std::istringstream pts(m[1].str());
  std::vector<std::string> v;
  for (std::string s; pts >> s;) v.push_back(s);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.front(), v.back());
}
