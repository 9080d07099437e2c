#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "harvest/instance.hpp"
#include "harvest/instance_io.hpp"

namespace harvest {

struct Clustering {
  int k = 0;
  std::vector<int> assignment;             // field -> cluster
  std::vector<Point> centroids;            // member mean positions
  std::vector<std::vector<int>> members;   // cluster -> fields, ascending
  std::vector<double> wcss_trace;          // within-cluster sum of squares after each update
  int iterations = 0;
  bool clamped = false;                    // requested k exceeded the field count

  bool is_identity() const { return k == static_cast<int>(assignment.size()); }
};

namespace detail {

inline double sq_dist(const Point& a, const Point& b) {
  const double dx = a.x_km - b.x_km;
  const double dy = a.y_km - b.y_km;
  return dx * dx + dy * dy;
}

inline void rebuild_members(Clustering& c, const std::vector<Field>& fields) {
  c.members.assign(static_cast<std::size_t>(c.k), {});
  for (std::size_t l = 0; l < c.assignment.size(); ++l) c.members[static_cast<std::size_t>(c.assignment[l])].push_back(static_cast<int>(l));
  c.centroids.assign(static_cast<std::size_t>(c.k), Point{});
  for (int z = 0; z < c.k; ++z) {
    const auto& mem = c.members[static_cast<std::size_t>(z)];
    if (mem.empty()) continue;
    Point p;
    for (int l : mem) {
      p.x_km += fields[static_cast<std::size_t>(l)].position.x_km;
      p.y_km += fields[static_cast<std::size_t>(l)].position.y_km;
    }
    p.x_km /= static_cast<double>(mem.size());
    p.y_km /= static_cast<double>(mem.size());
    c.centroids[static_cast<std::size_t>(z)] = p;
  }
}

inline double wcss(const Clustering& c, const std::vector<Field>& fields) {
  double s = 0.0;
  for (std::size_t l = 0; l < c.assignment.size(); ++l)
    s += sq_dist(fields[l].position, c.centroids[static_cast<std::size_t>(c.assignment[l])]);
  return s;
}

}  // namespace detail

/// Clustering given by an explicit field -> cluster map; cluster ids must cover 0..k-1.
inline Clustering clustering_from_assignment(const std::vector<Field>& fields, const std::vector<int>& assignment) {
  if (assignment.size() != fields.size()) throw ShapeError("cluster assignment needs one entry per field");
  Clustering c;
  c.assignment = assignment;
  for (int z : assignment) {
    if (z < 0) throw ValidationError("cluster index must be nonnegative");
    c.k = std::max(c.k, z + 1);
  }
  detail::rebuild_members(c, fields);
  for (const auto& m : c.members)
    if (m.empty()) throw ValidationError("cluster assignment leaves a cluster empty");
  c.wcss_trace.push_back(detail::wcss(c, fields));
  return c;
}

/// k-means with k-means++ seeding. k = L gives the identity partition; k > L is clamped to L.
inline Clustering kmeans(const std::vector<Field>& fields, int k, std::uint64_t seed, int max_iterations = 100) {
  const int L = static_cast<int>(fields.size());
  if (L == 0) throw ValidationError("no fields to cluster");
  if (k < 1) throw ValidationError("cluster count must be at least 1");
  Clustering c;
  if (k > L) {
    c.clamped = true;
    k = L;
  }
  c.k = k;
  if (k == L) {
    c.assignment.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) c.assignment[static_cast<std::size_t>(l)] = l;
    detail::rebuild_members(c, fields);
    c.wcss_trace.push_back(0.0);
    return c;
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point> centers;
  std::vector<char> chosen(static_cast<std::size_t>(L), 0);
  int first = std::min(L - 1, static_cast<int>(uniform() * L));
  centers.push_back(fields[static_cast<std::size_t>(first)].position);
  chosen[static_cast<std::size_t>(first)] = 1;
  std::vector<double> d2(static_cast<std::size_t>(L));
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int l = 0; l < L; ++l) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ctr : centers) best = std::min(best, detail::sq_dist(fields[static_cast<std::size_t>(l)].position, ctr));
      d2[static_cast<std::size_t>(l)] = chosen[static_cast<std::size_t>(l)] ? 0.0 : best;
      total += d2[static_cast<std::size_t>(l)];
    }
    int pick = -1;
    if (total > 0.0) {
      const double target = uniform() * total;
      double acc = 0.0;
      for (int l = 0; l < L; ++l) {
        acc += d2[static_cast<std::size_t>(l)];
        if (d2[static_cast<std::size_t>(l)] > 0.0 && acc > target) {
          pick = l;
          break;
        }
      }
      if (pick < 0)
        for (int l = L - 1; l >= 0; --l)
          if (d2[static_cast<std::size_t>(l)] > 0.0) {
            pick = l;
            break;
          }
    }
    if (pick < 0)
      for (int l = 0; l < L; ++l)
        if (!chosen[static_cast<std::size_t>(l)]) {
          pick = l;
          break;
        }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centers.push_back(fields[static_cast<std::size_t>(pick)].position);
  }

  c.assignment.assign(static_cast<std::size_t>(L), -1);
  c.centroids = centers;
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (int l = 0; l < L; ++l) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int z = 0; z < k; ++z) {
        const double d = detail::sq_dist(fields[static_cast<std::size_t>(l)].position, c.centroids[static_cast<std::size_t>(z)]);
        if (d < best_d) {
          best_d = d;
          best = z;
        }
      }
      if (c.assignment[static_cast<std::size_t>(l)] != best) {
        c.assignment[static_cast<std::size_t>(l)] = best;
        changed = true;
      }
    }
    // Empty-cluster repair: move the field farthest from its centroid into the empty cluster.
    detail::rebuild_members(c, fields);
    for (int z = 0; z < k; ++z) {
      if (!c.members[static_cast<std::size_t>(z)].empty()) continue;
      int far = -1;
      double far_d = -1.0;
      for (int l = 0; l < L; ++l) {
        const int owner = c.assignment[static_cast<std::size_t>(l)];
        if (c.members[static_cast<std::size_t>(owner)].size() < 2) continue;
        const double d = detail::sq_dist(fields[static_cast<std::size_t>(l)].position, c.centroids[static_cast<std::size_t>(owner)]);
        if (d > far_d) {
          far_d = d;
          far = l;
        }
      }
      c.assignment[static_cast<std::size_t>(far)] = z;
      detail::rebuild_members(c, fields);
      changed = true;
    }
    c.iterations = it + 1;
    c.wcss_trace.push_back(detail::wcss(c, fields));
    if (!changed) break;
  }
  return c;

}

inline json clustering_to_json(const Clustering& c) { return {{"k", c.k}, {"assignment", c.assignment}}; }

inline std::vector<int> clustering_assignment_from_json(const json& j) {
  try {
    auto a = j.at("assignment").get<std::vector<int>>();
    const int k = j.at("k").get<int>();
    for (int z : a)
      if (z < 0 || z >= k) throw ValidationError("cluster index out of range in clustering JSON");
    return a;
  } catch (const json::exception& e) {
    throw ShapeError(std::string("clustering JSON: ") + e.what());
  }
}

/// Instance whose fields are the clusters: centroid positions, summed sizes and revenues.
///
/// Rate-based costs are recomputed on the centroids. Explicit matrices use the
/// mean cost over member pairs (cluster-cluster) and members (depot-cluster).
inline Instance aggregate(const Clustering& c, const Instance& inst) {
  if (c.assignment.size() != inst.num_fields()) throw ShapeError("clustering does not match the instance's fields");
  Instance out;
  out.crops = inst.crops;
  out.depots = inst.depots;
  const std::size_t K = inst.num_crops();
  for (int z = 0; z < c.k; ++z) {
    Field f;
    f.id = z;
    f.position = c.centroids[static_cast<std::size_t>(z)];
    f.size_ha = 0.0;
    f.revenue_eur.assign(K, 0.0);
    for (int l : c.members[static_cast<std::size_t>(z)]) {
      const auto& src = inst.fields[static_cast<std::size_t>(l)];
      f.size_ha += src.size_ha;
      for (std::size_t k = 0; k < K; ++k) f.revenue_eur[k] += src.revenue_eur.at(k);
    }
    out.fields.push_back(std::move(f));
  }
  if (const auto* m = std::get_if<MatrixCost>(&inst.cost)) {
    MatrixCost agg;
    const auto Z = static_cast<std::size_t>(c.k);
    for (std::size_t k = 0; k < m->field_field.size(); ++k) {
      Matrix ff(Z, Z);
      for (std::size_t a = 0; a < Z; ++a)
        for (std::size_t b = 0; b < Z; ++b) {
          if (a == b) continue;
          double s = 0.0;
          for (int i : c.members[a])
            for (int j : c.members[b]) s += m->field_field[k](static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          ff(a, b) = s / static_cast<double>(c.members[a].size() * c.members[b].size());
        }
      agg.field_field.push_back(std::move(ff));
      const auto& df = m->depot_field.at(k);
      Matrix dz(df.rows(), Z);
      for (std::size_t d = 0; d < df.rows(); ++d)
        for (std::size_t a = 0; a < Z; ++a) {
          double s = 0.0;
          for (int j : c.members[a]) s += df(d, static_cast<std::size_t>(j));
          dz(d, a) = s / static_cast<double>(c.members[a].size());
        }
      agg.depot_field.push_back(std::move(dz));
    }
    out.cost = std::move(agg);
  } else {
    out.cost = inst.cost;
  }
  return out;
}

}  // namespace harvest
