#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace harvest;
using testutil::make_instance;

namespace {

std::vector<Field> fields_at(const std::vector<testutil::Spot>& pts) {
  std::vector<Field> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Field f;
    f.id = static_cast<int>(i);
    f.position = {pts[i].x, pts[i].y};
    f.revenue_eur = {1.0};
    out.push_back(f);
  }
  return out;
}

std::vector<Field> random_fields(std::uint64_t seed, int L) {
  GenParams p;
  p.seed = seed;
  p.fields = L;
  return generate_instance(p).fields;
}

double wcss_of(const std::vector<Field>& fs, const std::vector<int>& assign, int k) {
  return clustering_from_assignment(fs, assign).wcss_trace.back() + 0.0 * k;
}

}  // namespace

TEST(KMeans, IdentityWhenKEqualsL) {
  const auto fs = random_fields(1, 7);
  const Clustering c = kmeans(fs, 7, 3);
  EXPECT_TRUE(c.is_identity());
  for (int l = 0; l < 7; ++l) {
    EXPECT_EQ(c.assignment[static_cast<std::size_t>(l)], l);
    EXPECT_EQ(c.centroids[static_cast<std::size_t>(l)].x_km, fs[static_cast<std::size_t>(l)].position.x_km);
  }
}

TEST(KMeans, SingleClusterCentroidIsMean) {
  const auto fs = fields_at({{0, 0}, {2, 0}, {4, 6}});
  const Clustering c = kmeans(fs, 1, 0);
  EXPECT_EQ(c.k, 1);
  EXPECT_NEAR(c.centroids[0].x_km, 2.0, 1e-12);
  EXPECT_NEAR(c.centroids[0].y_km, 2.0, 1e-12);
}

TEST(KMeans, SeparatesTwoGroupsOptimally) {
  const auto fs = fields_at({{0, 0}, {1, 0}, {0, 1}, {20, 20}, {21, 20}, {20, 22}, {1, 1}});
  const int L = static_cast<int>(fs.size());
  double best = 1e300;
  for (int mask = 1; mask < (1 << L) - 1; ++mask) {
    std::vector<int> a(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) a[static_cast<std::size_t>(l)] = (mask >> l) & 1;
    best = std::min(best, wcss_of(fs, a, 2));
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Clustering c = kmeans(fs, 2, seed);
    EXPECT_NEAR(c.wcss_trace.back(), best, 1e-9);
    EXPECT_EQ(c.assignment[0], c.assignment[6]);
    EXPECT_NE(c.assignment[0], c.assignment[3]);
  }
}

TEST(KMeans, ClampsLargeK) {
  const auto fs = random_fields(2, 4);
  const Clustering c = kmeans(fs, 9, 0);
  EXPECT_TRUE(c.clamped);
  EXPECT_EQ(c.k, 4);
  EXPECT_THROW(kmeans(fs, 0, 0), ValidationError);
}

TEST(KMeans, DeterministicPerSeed) {
  const auto fs = random_fields(3, 40);
  const Clustering a = kmeans(fs, 6, 11), b = kmeans(fs, 6, 11);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.wcss_trace, b.wcss_trace);
}

TEST(KMeans, WcssNonIncreasingAndNoEmptyCluster) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto fs = random_fields(seed, 30);
    // Duplicated positions stress the seeding and the empty-cluster repair.
    for (int l = 20; l < 30; ++l) fs[static_cast<std::size_t>(l)].position = fs[0].position;
    const int k = 2 + static_cast<int>(seed % 15);
    const Clustering c = kmeans(fs, k, seed);
    ASSERT_EQ(c.k, k);
    for (const auto& m : c.members) EXPECT_FALSE(m.empty());
    for (std::size_t t = 1; t < c.wcss_trace.size(); ++t) EXPECT_LE(c.wcss_trace[t], c.wcss_trace[t - 1] + 1e-9);
    EXPECT_LE(c.iterations, 100);
    std::vector<int> seen(fs.size(), 0);
    for (const auto& m : c.members)
      for (int l : m) ++seen[static_cast<std::size_t>(l)];
    for (int s : seen) EXPECT_EQ(s, 1);
  }
}

TEST(Clustering, ManualAssignment) {
  const auto fs = random_fields(4, 5);
  const Clustering c = clustering_from_assignment(fs, {1, 0, 1, 0, 2});
  EXPECT_EQ(c.k, 3);
  EXPECT_EQ(c.members[0], (std::vector<int>{1, 3}));
  EXPECT_THROW(clustering_from_assignment(fs, {0, 0, 2, 2, 2}), ValidationError);
  EXPECT_THROW(clustering_from_assignment(fs, {0, 0}), ShapeError);
}

TEST(Clustering, JsonRoundTrip) {
  const auto fs = random_fields(5, 6);
  const Clustering c = kmeans(fs, 3, 1);
  const json j = clustering_to_json(c);
  EXPECT_EQ(j.at("k").get<int>(), 3);
  EXPECT_EQ(clustering_assignment_from_json(j), c.assignment);
  EXPECT_THROW(clustering_assignment_from_json(json{{"k", 2}, {"assignment", {0, 2}}}), ValidationError);
}

TEST(Aggregate, TwoFieldsOneCluster) {
  const Instance inst = make_instance({{0, 0}, {2, 0}}, {{0, 5}}, {{10.0, 20.0}, {30.0, 40.0}});
  const Clustering c = clustering_from_assignment(inst.fields, {0, 0});
  const Instance agg = aggregate(c, inst);
  ASSERT_EQ(agg.num_fields(), 1u);
  EXPECT_EQ(agg.fields[0].revenue_eur, (std::vector<double>{40.0, 60.0}));
  EXPECT_EQ(agg.fields[0].position.x_km, 1.0);
}

TEST(Aggregate, IdentityKeepsRevenue) {
  GenParams p;
  p.seed = 6;
  p.fields = 9;
  const Instance inst = generate_instance(p);
  const Instance agg = aggregate(kmeans(inst.fields, 9, 0), inst);
  for (std::size_t l = 0; l < 9; ++l) EXPECT_EQ(agg.fields[l].revenue_eur, inst.fields[l].revenue_eur);
}

TEST(Aggregate, RevenueConserved) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenParams p;
    p.seed = seed;
    p.revenue_setting = 2;
    const Instance inst = generate_instance(p);
    const Instance agg = aggregate(kmeans(inst.fields, 7, seed), inst);
    for (std::size_t k = 0; k < 3; ++k) {
      double a = 0, b = 0;
      for (const auto& f : inst.fields) a += f.revenue_eur[k];
      for (const auto& f : agg.fields) b += f.revenue_eur[k];
      EXPECT_NEAR(a, b, 1e-9 * a);
    }
    EXPECT_TRUE(validate_instance(agg).empty());
  }
}

TEST(Aggregate, ExplicitMatricesUseMeanLinkage) {
  Instance inst = make_instance({{0, 0}, {1, 0}, {5, 0}}, {{0, 1}}, {{1.0}, {1.0}, {1.0}});
  Matrix ff(3, 3);
  ff(0, 1) = ff(1, 0) = 1;
  ff(0, 2) = ff(2, 0) = 5;
  ff(1, 2) = ff(2, 1) = 4;
  Matrix df(1, 3);
  df(0, 0) = 1;
  df(0, 1) = 2;
  df(0, 2) = 6;
  inst.cost = MatrixCost{{ff}, {df}};
  const Instance agg = aggregate(clustering_from_assignment(inst.fields, {0, 0, 1}), inst);
  const auto& m = std::get<MatrixCost>(agg.cost);
  EXPECT_DOUBLE_EQ(m.field_field[0](0, 1), 4.5);
  EXPECT_DOUBLE_EQ(m.field_field[0](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.depot_field[0](0, 0), 1.5);
  EXPECT_DOUBLE_EQ(m.depot_field[0](0, 1), 6.0);
}
