#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "harvest/branch_and_bound.hpp"
#include "harvest/matrix.hpp"
#include "harvest/milp.hpp"

namespace harvest {

/// Hamiltonian path through all vertices of a cost matrix with fixed endpoints.
struct OpenTour {
  std::vector<int> order;  // vertex ids, order.front() = start, order.back() = end
  double length = 0.0;
  int sec_iterations = 0;
  double cpu_s = 0.0;
  bool converged = true;
};

inline double path_length(const Matrix& costs, const std::vector<int>& order) {
  double s = 0.0;
  for (std::size_t t = 0; t + 1 < order.size(); ++t)
    s += costs(static_cast<std::size_t>(order[t]), static_cast<std::size_t>(order[t + 1]));
  return s;
}

/// Exact open-path TSP: endpoints have degree 1, interior vertices degree 2,
/// subtours cut lazily on integral solutions.
inline OpenTour solve_open_tsp(const Matrix& costs, int start, int end, int max_iterations = 200) {
  const int N = static_cast<int>(costs.rows());
  if (costs.cols() != costs.rows()) throw ShapeError("open TSP needs a square cost matrix");
  if (N == 0) throw ValidationError("open TSP needs at least one vertex");
  if (start < 0 || start >= N || end < 0 || end >= N) throw ValidationError("open TSP endpoint out of range");
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double c = costs(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (c < 0.0) throw ValidationError("open TSP costs must be nonnegative");
      if (std::abs(c - costs(static_cast<std::size_t>(j), static_cast<std::size_t>(i))) > 1e-9)
        throw ValidationError("open TSP costs must be symmetric");
    }
  OpenTour t;
  if (N == 1) {
    t.order = {0};
    return t;
  }
  if (start == end) throw ValidationError("open TSP endpoints must differ when N >= 2");
  if (N == 2) {
    t.order = {start, end};
    t.length = path_length(costs, t.order);
    return t;
  }

  const auto t0 = std::chrono::steady_clock::now();
  milp::IntegerProgram m;
  std::vector<std::vector<int>> x(static_cast<std::size_t>(N), std::vector<int>(static_cast<std::size_t>(N), -1));
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const int v = m.add_binary("x[" + std::to_string(i) + "," + std::to_string(j) + "]");
      m.set_objective(v, costs(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      x[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
    }
  for (int i = 0; i < N; ++i) {
    milp::LinearExpr e;
    for (int j = 0; j < N; ++j)
      if (j != i) e.add(x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1.0);
    m.add_constraint(e, milp::Relation::Equal, (i == start || i == end) ? 1.0 : 2.0, "degree");
  }

  milp::Solution sol;
  t.converged = false;
  for (int it = 1; it <= max_iterations; ++it) {
    sol = milp::solve(m);
    t.sec_iterations = it;
    if (sol.status != milp::SolveStatus::Optimal) break;
    std::vector<int> parent(static_cast<std::size_t>(N));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
      while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      return a;
    };
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j)
        if (sol.value(x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > 0.5)
          parent[static_cast<std::size_t>(find(i))] = find(j);
    std::vector<std::vector<int>> comps(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) comps[static_cast<std::size_t>(find(i))].push_back(i);
    bool cut = false;
    const int root = find(start);
    for (int r = 0; r < N; ++r) {
      const auto& c = comps[static_cast<std::size_t>(r)];
      if (c.empty() || r == root) continue;
      milp::LinearExpr e;
      for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b)
          e.add(x[static_cast<std::size_t>(c[a])][static_cast<std::size_t>(c[b])], 1.0);
      m.add_constraint(e, milp::Relation::LessEqual, static_cast<double>(c.size()) - 1.0, "sec");
      cut = true;
    }
    if (!cut) {
      t.converged = true;
      break;
    }
  }
  t.cpu_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!t.converged) throw ModelError("open TSP did not converge within the SEC iteration cap");

  t.order = {start};
  std::vector<char> used(static_cast<std::size_t>(N), 0);
  used[static_cast<std::size_t>(start)] = 1;
  int cur = start;
  while (cur != end) {
    int next = -1;
    for (int j = 0; j < N && next < 0; ++j)
      if (!used[static_cast<std::size_t>(j)] && j != cur && sol.value(x[static_cast<std::size_t>(cur)][static_cast<std::size_t>(j)]) > 0.5) next = j;
    if (next < 0) throw ModelError("open TSP solution is not a path");
    used[static_cast<std::size_t>(next)] = 1;
    t.order.push_back(next);
    cur = next;
  }
  t.length = path_length(costs, t.order);
  return t;
}

/// Field-level tour of one crop obtained from its cluster sequence.
struct StitchedTour {
  std::vector<int> fields;
  double length = 0.0;  // depot legs, inter-cluster links and interior paths
  int tsp_iterations = 0;
  double tsp_cpu_s = 0.0;
};

/// Costs seen by the stitcher for one crop: field-field, depot->field, field->depot.
struct StitchCosts {
  const Matrix* field_field = nullptr;
  std::vector<double> out_leg;  // per field
  std::vector<double> in_leg;   // per field
};

/// Expands an ordered list of clusters into an ordered list of fields.
///
/// The first cluster is entered at its member with the cheapest out-leg and the
/// last one left at its member with the cheapest in-leg. Consecutive clusters are
/// linked through their cheapest member pair. If a multi-field cluster would be
/// entered and left through the same field, its exit moves to the member with
/// the next cheapest cost to the downstream target.
inline StitchedTour stitch_crop_tour(const std::vector<int>& cluster_seq, bool flipped,
                                     const std::vector<std::vector<int>>& members, const StitchCosts& c) {
  StitchedTour out;
  if (cluster_seq.empty()) return out;
  std::vector<int> seq = cluster_seq;
  if (flipped) std::reverse(seq.begin(), seq.end());
  const std::size_t T = seq.size();
  const Matrix& ff = *c.field_field;
  auto mem = [&](std::size_t t) -> const std::vector<int>& { return members.at(static_cast<std::size_t>(seq[t])); };
  auto cheapest = [](const std::vector<int>& cand, auto cost) {
    int best = cand.front();
    double bc = cost(best);
    for (int f : cand) {
      const double v = cost(f);
      if (v < bc || (v == bc && f < best)) {
        bc = v;
        best = f;
      }
    }
    return best;
  };

  std::vector<int> entry(T), exit(T);
  entry[0] = cheapest(mem(0), [&](int f) { return c.out_leg[static_cast<std::size_t>(f)]; });
  exit[T - 1] = cheapest(mem(T - 1), [&](int f) { return c.in_leg[static_cast<std::size_t>(f)]; });
  for (std::size_t t = 0; t + 1 < T; ++t) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i : mem(t))
      for (int j : mem(t + 1)) {
        const double v = ff(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (v < best || (v == best && (i < bi || (i == bi && j < bj)))) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    exit[t] = bi;
    entry[t + 1] = bj;
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (mem(t).size() < 2 || entry[t] != exit[t]) continue;
    std::vector<int> rest;
    for (int f : mem(t))
      if (f != entry[t]) rest.push_back(f);
    if (t + 1 < T) {
      const int target = entry[t + 1];
      exit[t] = cheapest(rest, [&](int f) { return ff(static_cast<std::size_t>(f), static_cast<std::size_t>(target)); });
    } else {
      exit[t] = cheapest(rest, [&](int f) { return c.in_leg[static_cast<std::size_t>(f)]; });
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    const auto& m = mem(t);
    if (m.size() == 1) {
      out.fields.push_back(m.front());
      continue;
    }
    const auto local = [&](int f) { return static_cast<int>(std::find(m.begin(), m.end(), f) - m.begin()); };
    std::vector<int> idx(m.begin(), m.end());
    const OpenTour path = solve_open_tsp(ff.submatrix(idx), local(entry[t]), local(exit[t]));
    out.tsp_iterations += path.sec_iterations;
    out.tsp_cpu_s += path.cpu_s;
    for (int v : path.order) out.fields.push_back(m[static_cast<std::size_t>(v)]);
  }
  out.length = c.out_leg[static_cast<std::size_t>(out.fields.front())] + c.in_leg[static_cast<std::size_t>(out.fields.back())];
  for (std::size_t t = 0; t + 1 < out.fields.size(); ++t)
    out.length += ff(static_cast<std::size_t>(out.fields[t]), static_cast<std::size_t>(out.fields[t + 1]));
  return out;
}

/// The shorter of the two stitched tours; ties keep the forward one.
inline const StitchedTour& pick_direction(const StitchedTour& forward, const StitchedTour& flipped) {
  return flipped.length < forward.length ? flipped : forward;
}

}  // namespace harvest
