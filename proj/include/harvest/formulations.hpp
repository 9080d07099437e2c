#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "harvest/branch_and_bound.hpp"
#include "harvest/instance.hpp"
#include "harvest/milp.hpp"

namespace harvest {

using milp::IntegerProgram;
using milp::LinearExpr;
using milp::Relation;

/// Variants 1..4 let the solver pick the active crops; 5..8 enforce all K crops.
inline int base_variant(int n) { return (n - 1) % 4 + 1; }
inline bool enforces_all_crops(int n) { return n >= 5; }
inline bool uses_virtual_depot(int n) { return base_variant(n) == 2; }
inline bool chooses_depot(int n) { return base_variant(n) >= 3; }
/// Variants 4 and 8 model depot legs as directed arcs with separate return legs.
inline bool has_return_legs(int n) { return base_variant(n) == 4; }

inline void check_variant(int n) {
  if (n < 1 || n > 8) throw ModelError("IP variant must be in 1..8, got " + std::to_string(n));
}

struct BuildOptions {
  int designated_depot = 0;                          // depot used by variants 1 and 5
  std::vector<std::pair<int, int>> asymmetric_pairs;  // field pairs modelled with two directed arcs
};

/// Subtour elimination cut: sum of edge variables inside `fields` <= |fields| - 1 for one crop.
struct SecCut {
  int crop = 0;
  std::vector<int> fields;
};

/// Column and row indices of a built model; -1 marks a symbol that is not a column.
struct ModelArtifacts {
  int variant = 0;
  int num_crops = 0;
  int num_fields = 0;
  std::vector<int> slot_depot;  // instance depot of each depot slot, -1 for the virtual depot

  std::vector<std::vector<std::vector<int>>> x_out;  // [k][slot][j]  x_dj^k
  std::vector<std::vector<std::vector<int>>> x_in;   // [k][slot][j]  x_jd^k
  std::vector<std::vector<int>> edge;                // [k][pair]     x_ij^k, i < j
  std::vector<std::vector<int>> arc_fwd;             // [k][pair]     i -> j on asymmetric pairs
  std::vector<std::vector<int>> arc_bwd;             // [k][pair]     j -> i on asymmetric pairs
  std::vector<std::vector<int>> delta;               // [l][k]
  std::vector<int> xi;                               // [slot]
  std::vector<int> p;                                // [slot]
  int gamma = -1;
  std::vector<int> alpha, alpha_first, beta_last;    // [k]
  std::vector<std::vector<std::vector<int>>> v, w;   // [k][slot][j]

  std::vector<std::vector<int>> degree_row;  // [l][k]
  std::vector<int> unique_row;               // [l]
  std::vector<int> xi_le_p_row;              // [slot]
  std::vector<int> p_le_gamma_row;           // [slot], p <= gamma + xi - 1
  std::vector<SecCut> sec_pool;

  int num_slots() const { return static_cast<int>(slot_depot.size()); }

  int pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    // Pairs (i, j), i < j, enumerated row by row.
    return i * num_fields - i * (i + 1) / 2 + (j - i - 1);
  }

  /// Variables whose sum is the usage of undirected edge {i, j} for crop k.
  std::vector<int> edge_vars(int k, int i, int j) const {
    const int q = pair_index(i, j);
    const auto uk = static_cast<std::size_t>(k);
    const auto uq = static_cast<std::size_t>(q);
    if (edge[uk][uq] >= 0) return {edge[uk][uq]};
    return {arc_fwd[uk][uq], arc_bwd[uk][uq]};
  }

  /// Column of directed arc a -> b for crop k, or -1 when {a, b} is modelled symmetrically.
  int arc(int k, int a, int b) const {
    const auto uk = static_cast<std::size_t>(k);
    const auto uq = static_cast<std::size_t>(pair_index(a, b));
    if (edge[uk][uq] >= 0) return -1;
    return a < b ? arc_fwd[uk][uq] : arc_bwd[uk][uq];
  }
};

/// Depot-to-field leg cost as charged by variant n. `first_crop`: k is the smallest active crop.
inline double out_leg_cost(const CostModel& cm, int n, int depot, std::size_t k, std::size_t j, bool first_crop) {
  if (uses_virtual_depot(n) || (has_return_legs(n) && first_crop)) return cm.assembly(k, j);
  return cm.depot_field(k, static_cast<std::size_t>(depot), j);
}

/// Field-to-depot leg cost as charged by variant n. `last_crop`: k is the largest active crop.
inline double in_leg_cost(const CostModel& cm, int n, int depot, std::size_t k, std::size_t j, bool last_crop) {
  if (uses_virtual_depot(n) || (has_return_legs(n) && last_crop)) return cm.dispersal(k, j);
  return cm.field_depot(k, j, static_cast<std::size_t>(depot));
}

/// Maintenance charged by the virtual depot: every depot hosting at least one harvester.
inline double virtual_depot_maintenance(const Instance& inst) {
  double z = 0.0;
  for (const auto& d : inst.depots)
    if (std::accumulate(d.harvesters.begin(), d.harvesters.end(), 0) > 0) z += d.maintenance_eur;
  return z;
}

/// Closed-form column count of build_ip for variant n.
inline long count_variables(int n, long K, long D, long L) {
  check_variant(n);
  const long kl = K * L;
  const long edges = K * L * (L - 1) / 2;
  switch (n) {
    case 1:
    case 2: return kl + edges + kl + 1;
    case 5:
    case 6: return kl + edges + kl;
    case 3: return K * D * L + edges + kl + 1 + 2 * D;
    case 7: return K * D * L + edges + kl + D;
    case 4: return 2 * K * D * L + edges + kl + 1 + 2 * D + 3 * K + 2 * K * D * L;
    default: return 2 * K * D * L + edges + kl + D;
  }
}

namespace detail {

inline std::string sym(const char* base, std::initializer_list<int> idx) {
  std::string s = base;
  s += '[';
  bool first = true;
  for (int i : idx) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  }
  s += ']';
  return s;
}

}  // namespace detail

/// Builds IP-n without subtour elimination constraints.
inline std::pair<IntegerProgram, ModelArtifacts> build_ip(int n, const Instance& inst, const CostModel& cm,
                                                          const BuildOptions& opts = {}) {
  check_variant(n);
  const int K = static_cast<int>(inst.num_crops());
  const int D = static_cast<int>(inst.num_depots());
  const int L = static_cast<int>(inst.num_fields());
  if (K == 0) throw ShapeError("instance has no crops");
  if (D == 0) throw ShapeError("instance has no depots");
  if (L == 0) throw ValidationError("instance has no fields");
  const int base = base_variant(n);
  const bool all = enforces_all_crops(n);

  IntegerProgram m;
  ModelArtifacts a;
  a.variant = n;
  a.num_crops = K;
  a.num_fields = L;
  if (base == 1) {
    if (opts.designated_depot < 0 || opts.designated_depot >= D)
      throw ValidationError("designated depot " + std::to_string(opts.designated_depot) + " out of range");
    a.slot_depot = {opts.designated_depot};
  } else if (base == 2) {
    a.slot_depot = {-1};
  } else {
    a.slot_depot.resize(static_cast<std::size_t>(D));
    std::iota(a.slot_depot.begin(), a.slot_depot.end(), 0);
  }
  const int S = a.num_slots();
  const auto uK = static_cast<std::size_t>(K);
  const auto uS = static_cast<std::size_t>(S);
  const auto uL = static_cast<std::size_t>(L);
  const bool directed = has_return_legs(n);

  // Depot legs.
  a.x_out.assign(uK, std::vector<std::vector<int>>(uS, std::vector<int>(uL, -1)));
  if (directed) a.x_in = a.x_out;
  for (int k = 0; k < K; ++k)
    for (int s = 0; s < S; ++s)
      for (int j = 0; j < L; ++j) {
        const int d = a.slot_depot[static_cast<std::size_t>(s)];
        const auto uk = static_cast<std::size_t>(k);
        const auto uj = static_cast<std::size_t>(j);
        const int var = m.add_integer(detail::sym("x_dj", {d, j, k}), 0, directed ? 1 : 2);
        // IP-8 has every crop active, so crop 0 is first and crop K-1 is last.
        m.set_objective(var, out_leg_cost(cm, n, d, uk, uj, n == 8 && k == 0));
        a.x_out[uk][static_cast<std::size_t>(s)][uj] = var;
      }
  if (directed)
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < S; ++s)
        for (int j = 0; j < L; ++j) {
          const int d = a.slot_depot[static_cast<std::size_t>(s)];
          const auto uk = static_cast<std::size_t>(k);
          const auto uj = static_cast<std::size_t>(j);
          const int var = m.add_binary(detail::sym("x_jd", {j, d, k}));
          m.set_objective(var, in_leg_cost(cm, n, d, uk, uj, n == 8 && k == K - 1));
          a.x_in[uk][static_cast<std::size_t>(s)][uj] = var;
        }

  // Field-field edges.
  const std::size_t pairs = uL * (uL - 1) / 2;
  std::vector<char> asym(pairs, 0);
  for (const auto& [i, j] : opts.asymmetric_pairs) {
    if (i < 0 || j < 0 || i >= L || j >= L || i == j) throw ValidationError("asymmetric pair out of range");
    asym[static_cast<std::size_t>(a.pair_index(i, j))] = 1;
  }
  a.edge.assign(uK, std::vector<int>(pairs, -1));
  a.arc_fwd = a.edge;
  a.arc_bwd = a.edge;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < L; ++i)
      for (int j = i + 1; j < L; ++j) {
        const auto q = static_cast<std::size_t>(a.pair_index(i, j));
        const auto uk = static_cast<std::size_t>(k);
        const double c = cm.field_field(uk, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (asym[q]) {
          a.arc_fwd[uk][q] = m.add_binary(detail::sym("x_arc", {i, j, k}));
          a.arc_bwd[uk][q] = m.add_binary(detail::sym("x_arc", {j, i, k}));
          m.set_objective(a.arc_fwd[uk][q], c);
          m.set_objective(a.arc_bwd[uk][q], c);
        } else {
          a.edge[uk][q] = m.add_binary(detail::sym("x_ij", {i, j, k}));
          m.set_objective(a.edge[uk][q], c);
        }
      }

  // Assignment.
  a.delta.assign(uL, std::vector<int>(uK, -1));
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k) {
      const int var = m.add_binary(detail::sym("delta", {l, k}));
      m.set_objective(var, -inst.fields[static_cast<std::size_t>(l)].revenue_eur.at(static_cast<std::size_t>(k)));
      a.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = var;
    }

  // Active-crop count and depot choice.
  const double m_cost = inst.crops.fixed_cost_eur;
  if (all) {
    m.add_objective_constant(m_cost * K);
  } else {
    a.gamma = m.add_integer("gamma", 1, K);
    m.set_objective(a.gamma, m_cost);
  }
  if (base == 1) m.add_objective_constant(inst.depots[static_cast<std::size_t>(opts.designated_depot)].maintenance_eur);
  if (base == 2) m.add_objective_constant(virtual_depot_maintenance(inst));
  a.xi.assign(uS, -1);
  a.p.assign(uS, -1);
  if (chooses_depot(n)) {
    for (int s = 0; s < S; ++s) {
      a.xi[static_cast<std::size_t>(s)] = m.add_binary(detail::sym("xi", {s}));
      m.set_objective(a.xi[static_cast<std::size_t>(s)], inst.depots[static_cast<std::size_t>(s)].maintenance_eur);
    }
    if (!all)
      for (int s = 0; s < S; ++s) a.p[static_cast<std::size_t>(s)] = m.add_integer(detail::sym("p", {s}), 0, K);
  }
  if (n == 4) {
    a.alpha.resize(uK);
    a.alpha_first.resize(uK);
    a.beta_last.resize(uK);
    for (int k = 0; k < K; ++k) a.alpha[static_cast<std::size_t>(k)] = m.add_binary(detail::sym("alpha", {k}));
    for (int k = 0; k < K; ++k) a.alpha_first[static_cast<std::size_t>(k)] = m.add_binary(detail::sym("alpha_first", {k}));
    for (int k = 0; k < K; ++k) a.beta_last[static_cast<std::size_t>(k)] = m.add_binary(detail::sym("beta_last", {k}));
    a.v.assign(uK, std::vector<std::vector<int>>(uS, std::vector<int>(uL, -1)));
    a.w = a.v;
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < S; ++s)
        for (int j = 0; j < L; ++j) {
          const auto uk = static_cast<std::size_t>(k);
          const auto uj = static_cast<std::size_t>(j);
          const int var = m.add_binary(detail::sym("v", {s, j, k}));
          m.set_objective(var, cm.assembly(uk, uj) - cm.depot_field(uk, static_cast<std::size_t>(s), uj));
          a.v[uk][static_cast<std::size_t>(s)][uj] = var;
        }
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < S; ++s)
        for (int j = 0; j < L; ++j) {
          const auto uk = static_cast<std::size_t>(k);
          const auto uj = static_cast<std::size_t>(j);
          const int var = m.add_binary(detail::sym("w", {j, s, k}));
          m.set_objective(var, cm.dispersal(uk, uj) - cm.field_depot(uk, uj, static_cast<std::size_t>(s)));
          a.w[uk][static_cast<std::size_t>(s)][uj] = var;
        }
  }

  // Field degree: every field is entered and left once per crop-tour of its crop.
  a.degree_row.assign(uL, std::vector<int>(uK, -1));
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const auto ul = static_cast<std::size_t>(l);
      LinearExpr e;
      for (int s = 0; s < S; ++s) {
        e.add(a.x_out[uk][static_cast<std::size_t>(s)][ul], 1.0);
        if (directed) e.add(a.x_in[uk][static_cast<std::size_t>(s)][ul], 1.0);
      }
      for (int o = 0; o < L; ++o)
        if (o != l)
          for (int var : a.edge_vars(k, l, o)) e.add(var, 1.0);
      e.add(a.delta[ul][uk], -2.0);
      a.degree_row[ul][uk] = m.add_constraint(e, Relation::Equal, 0.0, "degree");
    }
  // Uniqueness of the crop assignment.
  a.unique_row.assign(uL, -1);
  for (int l = 0; l < L; ++l) {
    LinearExpr e;
    for (int k = 0; k < K; ++k) e.add(a.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], 1.0);
    a.unique_row[static_cast<std::size_t>(l)] = m.add_constraint(e, Relation::Equal, 1.0, "uniqueness");
  }

  // Depot degree.
  auto depot_legs = [&](int s) {
    LinearExpr e;
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < L; ++j) {
        e.add(a.x_out[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)], 1.0);
        if (directed) e.add(a.x_in[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)], 1.0);
      }
    return e;
  };
  if (!chooses_depot(n)) {
    LinearExpr e = depot_legs(0);
    if (all)
      m.add_constraint(e, Relation::Equal, 2.0 * K, "depot_degree");
    else
      m.add_constraint(e - LinearExpr::var(a.gamma, 2.0), Relation::Equal, 0.0, "depot_degree");
  } else {
    for (int s = 0; s < S; ++s) {
      const auto us = static_cast<std::size_t>(s);
      if (all)
        m.add_constraint(depot_legs(s) - LinearExpr::var(a.xi[us], 2.0 * K), Relation::Equal, 0.0, "depot_degree");
      else
        m.add_constraint(depot_legs(s) - LinearExpr::var(a.p[us], 2.0), Relation::Equal, 0.0, "depot_degree");
    }
    LinearExpr one;
    for (int s = 0; s < S; ++s) one.add(a.xi[static_cast<std::size_t>(s)], 1.0);
    m.add_constraint(one, Relation::Equal, 1.0, "depot_choice");
  }

  if (n == 4) {
    LinearExpr sa, sb, sv, sw;
    for (int k = 0; k < K; ++k) {
      sa.add(a.alpha_first[static_cast<std::size_t>(k)], 1.0);
      sb.add(a.beta_last[static_cast<std::size_t>(k)], 1.0);
    }
    m.add_constraint(sa, Relation::Equal, 1.0, "first_last");
    m.add_constraint(sb, Relation::Equal, 1.0, "first_last");
    m.add_constraint(LinearExpr::var(a.alpha_first[0]) - LinearExpr::var(a.alpha[0]), Relation::Equal, 0.0, "first_last");
    m.add_constraint(LinearExpr::var(a.beta_last[uK - 1]) - LinearExpr::var(a.alpha[uK - 1]), Relation::Equal, 0.0,
                     "first_last");
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < S; ++s)
        for (int j = 0; j < L; ++j) {
          sv.add(a.v[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)], 1.0);
          sw.add(a.w[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)], 1.0);
        }
    m.add_constraint(sv, Relation::Equal, 1.0, "first_last");
    m.add_constraint(sw, Relation::Equal, 1.0, "first_last");
  }
  if (directed) {
    for (int s = 0; s < S; ++s)
      for (int k = 0; k < K; ++k) {
        LinearExpr e;
        for (int j = 0; j < L; ++j) e.add(a.x_out[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)], 1.0);
        m.add_constraint(e - LinearExpr::var(a.xi[static_cast<std::size_t>(s)]), Relation::Equal, 0.0, "depot_choice");
      }
    for (int s = 0; s < S; ++s)
      for (int k = 0; k < K; ++k) {
        LinearExpr e;
        for (int j = 0; j < L; ++j) e.add(a.x_in[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)], 1.0);
        m.add_constraint(e - LinearExpr::var(a.xi[static_cast<std::size_t>(s)]), Relation::Equal, 0.0, "depot_choice");
      }
  }

  // p^d = gamma * xi^d.
  if (chooses_depot(n) && !all) {
    a.xi_le_p_row.assign(uS, -1);
    a.p_le_gamma_row.assign(uS, -1);
    for (int s = 0; s < S; ++s) {
      const auto us = static_cast<std::size_t>(s);
      const LinearExpr xi = LinearExpr::var(a.xi[us]);
      const LinearExpr p = LinearExpr::var(a.p[us]);
      const LinearExpr g = LinearExpr::var(a.gamma);
      a.xi_le_p_row[us] = m.add_constraint(xi - p, Relation::LessEqual, 0.0, "depot_choice");
      if (n == 3) m.add_constraint(p - xi * double(K), Relation::LessEqual, 0.0, "depot_choice");
      a.p_le_gamma_row[us] = m.add_constraint(p - g - xi, Relation::LessEqual, -1.0, "depot_choice");
      m.add_constraint(p - g - xi * double(K), Relation::GreaterEqual, -double(K), "depot_choice");
    }
  }

  if (n == 4) {
    const double eps = 0.5;
    for (int k = 0; k < K; ++k) {
      LinearExpr f(1.0);
      for (int l = 0; l < L; ++l) f.add(a.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], -1.0);
      milp::add_reified_leq(m, a.alpha[static_cast<std::size_t>(k)], f, eps, "active_crop");
    }
    // alpha_first^k = alpha^k * (1 - sum_{t<k} alpha_first^t)
    for (int k = 1; k < K; ++k) {
      LinearExpr none_before(1.0);
      for (int t = 0; t < k; ++t) none_before.add(a.alpha_first[static_cast<std::size_t>(t)], -1.0);
      const LinearExpr ak = LinearExpr::var(a.alpha[static_cast<std::size_t>(k)]);
      const LinearExpr fk = LinearExpr::var(a.alpha_first[static_cast<std::size_t>(k)]);
      m.add_constraint(ak + none_before - fk, Relation::LessEqual, 1.0, "first_last");
      m.add_constraint(fk - ak, Relation::LessEqual, 0.0, "first_last");
      m.add_constraint(fk - none_before, Relation::LessEqual, 0.0, "first_last");
    }
    // beta_last^q = alpha^q * (1 - sum_{t>q} beta_last^t)
    for (int q = K - 2; q >= 0; --q) {
      LinearExpr none_after(1.0);
      for (int t = q + 1; t < K; ++t) none_after.add(a.beta_last[static_cast<std::size_t>(t)], -1.0);
      const LinearExpr aq = LinearExpr::var(a.alpha[static_cast<std::size_t>(q)]);
      const LinearExpr bq = LinearExpr::var(a.beta_last[static_cast<std::size_t>(q)]);
      m.add_constraint(aq + none_after - bq, Relation::LessEqual, 1.0, "first_last");
      m.add_constraint(bq - aq, Relation::LessEqual, 0.0, "first_last");
      m.add_constraint(bq - none_after, Relation::LessEqual, 0.0, "first_last");
    }
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < S; ++s)
        for (int j = 0; j < L; ++j) {
          const auto uk = static_cast<std::size_t>(k);
          const auto us = static_cast<std::size_t>(s);
          const auto uj = static_cast<std::size_t>(j);
          milp::add_binary_and(m, a.alpha_first[uk], a.x_out[uk][us][uj], a.v[uk][us][uj], "first_last");
          milp::add_binary_and(m, a.beta_last[uk], a.x_in[uk][us][uj], a.w[uk][us][uj], "first_last");
        }
  }

  if (all)
    for (int k = 0; k < K; ++k) {
      LinearExpr e;
      for (int l = 0; l < L; ++l) e.add(a.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)], 1.0);
      m.add_constraint(e, Relation::GreaterEqual, 1.0, "all_crops");
    }

  for (int k = 0; k < K; ++k)
    for (std::size_t q = 0; q < pairs; ++q)
      if (asym[q])
        m.add_constraint(LinearExpr::var(a.arc_fwd[static_cast<std::size_t>(k)][q]) +
                             LinearExpr::var(a.arc_bwd[static_cast<std::size_t>(k)][q]),
                         Relation::LessEqual, 1.0, "arcs");
  return {std::move(m), std::move(a)};
}

// ---------------------------------------------------------------------------
// Agronomic side constraints

/// Travel and harvest times for the time-window constraint.
struct TimeSpec {
  double speed_kmh = 0.0;                 // edge times from planar distance when no matrices are given
  std::vector<Matrix> field_field_h;      // optional K matrices, L x L
  std::vector<Matrix> depot_field_h;      // optional K matrices, D x L
  std::vector<double> window_h;           // T_win^k
  std::vector<std::vector<double>> harvest_h;  // [l][k] T_l^{harv,k}
};

struct PriorityTriple {
  int crop = 0;
  int c = 0;  // harvested first
  int a = 0;  // immediately after c
  int b = 0;  // immediately after a
};

struct AgronomicSpec {
  std::vector<std::pair<int, int>> rotation_forbidden;  // (field, crop)
  std::vector<std::vector<double>> diversification_weights;  // [l][k]
  std::vector<double> diversification_bounds;                // G^k, k = 0..K-2
  std::optional<TimeSpec> time;
  std::vector<PriorityTriple> priority;

  bool empty() const {
    return rotation_forbidden.empty() && diversification_bounds.empty() && !time && priority.empty();
  }
};

namespace detail {

inline double field_time(const TimeSpec& t, const Instance& inst, std::size_t k, std::size_t i, std::size_t j) {
  if (!t.field_field_h.empty()) return t.field_field_h.at(k)(i, j);
  if (!(t.speed_kmh > 0.0)) throw ValidationError("time spec needs a positive speed or explicit time matrices");
  return distance_km(inst.fields[i].position, inst.fields[j].position) / t.speed_kmh;
}

inline double depot_time(const TimeSpec& t, const Instance& inst, std::size_t k, std::size_t d, std::size_t j) {
  if (!t.depot_field_h.empty()) return t.depot_field_h.at(k)(d, j);
  if (!(t.speed_kmh > 0.0)) throw ValidationError("time spec needs a positive speed or explicit time matrices");
  return distance_km(inst.depots[d].position, inst.fields[j].position) / t.speed_kmh;
}

/// Leg time from a depot slot; the virtual depot waits for the slowest group.
inline double slot_time(const TimeSpec& t, const Instance& inst, int depot, std::size_t k, std::size_t j) {
  if (depot >= 0) return depot_time(t, inst, k, static_cast<std::size_t>(depot), j);
  double h = 0.0;
  for (std::size_t d = 0; d < inst.num_depots(); ++d)
    if (inst.depots[d].harvesters.at(k) > 0) h = std::max(h, depot_time(t, inst, k, d, j));
  return h;
}

}  // namespace detail

/// Appends rotation, diversification, time and priority constraints.
inline void add_agronomic_constraints(IntegerProgram& m, ModelArtifacts& a, const Instance& inst,
                                      const AgronomicSpec& spec) {
  const int K = a.num_crops;
  const int L = a.num_fields;
  auto check_field = [&](int l) {
    if (l < 0 || l >= L) throw ValidationError("agronomic constraint references unknown field " + std::to_string(l));
  };
  auto check_crop = [&](int k) {
    if (k < 0 || k >= K) throw ValidationError("agronomic constraint references unknown crop " + std::to_string(k));
  };
  for (const auto& [l, k] : spec.rotation_forbidden) {
    check_field(l);
    check_crop(k);
    m.add_constraint(LinearExpr::var(a.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]), Relation::Equal,
                     0.0, "rotation");
  }
  if (!spec.diversification_bounds.empty()) {
    if (spec.diversification_bounds.size() > static_cast<std::size_t>(std::max(K - 1, 0)))
      throw ValidationError("diversification bounds apply to crops 0..K-2 only");
    if (spec.diversification_weights.size() != static_cast<std::size_t>(L))
      throw ShapeError("diversification weights need one row per field");
    for (std::size_t k = 0; k < spec.diversification_bounds.size(); ++k) {
      LinearExpr e;
      for (int l = 0; l < L; ++l) {
        const double g = spec.diversification_weights[static_cast<std::size_t>(l)].at(k);
        if (g < 0.0) throw ValidationError("diversification weights must be nonnegative");
        if (g != 0.0) e.add(a.delta[static_cast<std::size_t>(l)][k], g);
      }
      m.add_constraint(e, Relation::LessEqual, spec.diversification_bounds[k], "diversification");
    }
  }
  if (spec.time) {
    const auto& t = *spec.time;
    if (t.window_h.size() != static_cast<std::size_t>(K)) throw ShapeError("time windows need one entry per crop");
    if (t.harvest_h.size() != static_cast<std::size_t>(L)) throw ShapeError("harvest times need one row per field");
    for (int k = 0; k < K; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      LinearExpr e;
      for (int s = 0; s < a.num_slots(); ++s)
        for (int j = 0; j < L; ++j) {
          const auto us = static_cast<std::size_t>(s);
          const auto uj = static_cast<std::size_t>(j);
          const double h = detail::slot_time(t, inst, a.slot_depot[us], uk, uj);
          e.add(a.x_out[uk][us][uj], h);
          if (!a.x_in.empty()) e.add(a.x_in[uk][us][uj], h);
        }
      for (int i = 0; i < L; ++i)
        for (int j = i + 1; j < L; ++j) {
          const double h = detail::field_time(t, inst, uk, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          for (int var : a.edge_vars(k, i, j)) e.add(var, h);
        }
      for (int l = 0; l < L; ++l) e.add(a.delta[static_cast<std::size_t>(l)][uk], t.harvest_h[static_cast<std::size_t>(l)].at(uk));
      m.add_constraint(e, Relation::LessEqual, t.window_h[uk], "time");
    }
  }
  for (const auto& pr : spec.priority) {
    check_crop(pr.crop);
    check_field(pr.c);
    check_field(pr.a);
    check_field(pr.b);
    const int ca = a.arc(pr.crop, pr.c, pr.a);
    const int ab = a.arc(pr.crop, pr.a, pr.b);
    if (ca < 0 || ab < 0)
      throw ModelError("priority constraints need asymmetric arcs; add field pairs (" + std::to_string(pr.c) + "," +
                       std::to_string(pr.a) + ") and (" + std::to_string(pr.a) + "," + std::to_string(pr.b) +
                       ") to BuildOptions::asymmetric_pairs");
    const auto uk = static_cast<std::size_t>(pr.crop);
    milp::add_binary_and(m, a.delta[static_cast<std::size_t>(pr.c)][uk], a.delta[static_cast<std::size_t>(pr.a)][uk], ca,
                         "priority");
    milp::add_binary_and(m, a.delta[static_cast<std::size_t>(pr.a)][uk], a.delta[static_cast<std::size_t>(pr.b)][uk], ab,
                         "priority");
  }
}

/// Lets the fields in `leasable` stay unserved: their crop assignment becomes "at most one".
///
/// The degree rows keep their equality form, so a field with delta = 0 is not
/// visited and a field with delta = 1 is.
inline void relax_service(IntegerProgram& m, ModelArtifacts& a, const std::vector<int>& leasable) {
  for (int l : leasable)
    if (l < 0 || l >= a.num_fields) throw ValidationError("unknown field id " + std::to_string(l) + " in leasable set");
  if (leasable.empty()) return;
  for (int l : leasable) m.set_relation(a.unique_row[static_cast<std::size_t>(l)], Relation::LessEqual);
  if (a.gamma >= 0) m.set_bounds(a.gamma, 0.0, m.variable(a.gamma).upper);
  // xi <= p would force a crop-tour out of the chosen depot even when nothing is served.
  for (int row : a.xi_le_p_row)
    if (row >= 0) m.set_rhs(row, 1.0);
  // With gamma down to 0 the upper envelope of p = gamma * xi is p <= gamma.
  for (std::size_t s = 0; s < a.p_le_gamma_row.size(); ++s)
    if (a.p_le_gamma_row[s] >= 0) {
      m.set_coefficient(a.p_le_gamma_row[s], a.xi[s], 0.0);
      m.set_rhs(a.p_le_gamma_row[s], 0.0);
    }
}

/// Pure crop assignment without routing: min -sum r delta, one crop per field.
inline std::pair<IntegerProgram, ModelArtifacts> build_assignment_baseline(const Instance& inst) {
  IntegerProgram m;
  ModelArtifacts a;
  a.num_crops = static_cast<int>(inst.num_crops());
  a.num_fields = static_cast<int>(inst.num_fields());
  a.delta.assign(inst.num_fields(), std::vector<int>(inst.num_crops(), -1));
  for (std::size_t l = 0; l < inst.num_fields(); ++l)
    for (std::size_t k = 0; k < inst.num_crops(); ++k) {
      a.delta[l][k] = m.add_binary(detail::sym("delta", {int(l), int(k)}));
      m.set_objective(a.delta[l][k], -inst.fields[l].revenue_eur.at(k));
    }
  a.unique_row.resize(inst.num_fields());
  for (std::size_t l = 0; l < inst.num_fields(); ++l) {
    LinearExpr e;
    for (std::size_t k = 0; k < inst.num_crops(); ++k) e.add(a.delta[l][k], 1.0);
    a.unique_row[l] = m.add_constraint(e, Relation::Equal, 1.0, "uniqueness");
  }
  return {std::move(m), std::move(a)};
}

// ---------------------------------------------------------------------------
// Reading solutions

inline bool is_integral(const milp::Solution& sol, double tol = 1e-6) {
  return std::all_of(sol.values.begin(), sol.values.end(), [&](double v) { return std::abs(v - std::round(v)) <= tol; });
}

inline double value_of(const milp::Solution& sol, int var) {
  return var < 0 ? 0.0 : sol.values.at(static_cast<std::size_t>(var));
}

inline double edge_value(const milp::Solution& sol, const ModelArtifacts& a, int k, int i, int j) {
  double v = 0.0;
  for (int var : a.edge_vars(k, i, j)) v += value_of(sol, var);
  return v;
}

/// Crop of each field (-1 when unserved), read with a 0.5 threshold.
inline std::vector<int> field_crops(const milp::Solution& sol, const ModelArtifacts& a) {
  std::vector<int> out(static_cast<std::size_t>(a.num_fields), -1);
  for (int l = 0; l < a.num_fields; ++l)
    for (int k = 0; k < a.num_crops; ++k)
      if (value_of(sol, a.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]) > 0.5) out[static_cast<std::size_t>(l)] = k;
  return out;
}

/// Depot slot used by the solution: the chosen xi, or the only slot.
inline int chosen_slot(const milp::Solution& sol, const ModelArtifacts& a) {
  for (int s = 0; s < a.num_slots(); ++s)
    if (a.xi[static_cast<std::size_t>(s)] >= 0 && value_of(sol, a.xi[static_cast<std::size_t>(s)]) > 0.5) return s;
  return 0;
}

inline int out_legs(const milp::Solution& sol, const ModelArtifacts& a, int k, int s, int j) {
  return static_cast<int>(std::lround(value_of(sol, a.x_out[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)])));
}

inline int in_legs(const milp::Solution& sol, const ModelArtifacts& a, int k, int s, int j) {
  if (a.x_in.empty()) return 0;
  return static_cast<int>(std::lround(value_of(sol, a.x_in[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(j)])));
}

/// Depot-anchored loops of crop k, each as the ordered fields between leaving and re-entering the depot.
inline std::vector<std::vector<int>> crop_loops(const milp::Solution& sol, const ModelArtifacts& a, int k) {
  const int L = a.num_fields;
  const int s = chosen_slot(sol, a);
  const bool directed = !a.x_in.empty();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j)
      if (edge_value(sol, a, k, i, j) > 0.5) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
      }
  std::vector<char> used(static_cast<std::size_t>(L), 0);
  std::vector<std::vector<int>> loops;
  for (int j = 0; j < L; ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    const int legs = out_legs(sol, a, k, s, j);
    if (legs == 0) continue;
    if (!directed && legs == 2) {
      used[static_cast<std::size_t>(j)] = 1;
      loops.push_back({j});
      continue;
    }
    std::vector<int> path{j};
    used[static_cast<std::size_t>(j)] = 1;
    int cur = j;
    while (true) {
      const bool at_end = directed ? in_legs(sol, a, k, s, cur) > 0 : (cur != j && out_legs(sol, a, k, s, cur) > 0);
      if (at_end) break;
      int next = -1;
      for (int o : adj[static_cast<std::size_t>(cur)])
        if (!used[static_cast<std::size_t>(o)]) {
          next = o;
          break;
        }
      if (next < 0) break;
      used[static_cast<std::size_t>(next)] = 1;
      path.push_back(next);
      cur = next;
    }
    loops.push_back(std::move(path));
  }
  return loops;
}

// ---------------------------------------------------------------------------
// Subtour elimination

/// Cuts for every served component of a crop-tour that never touches the depot.
inline std::vector<SecCut> separate_subtours(const milp::Solution& sol, const ModelArtifacts& a) {
  if (!sol.has_values()) throw ModelError("separation needs a solution");
  if (!is_integral(sol)) throw ModelError("separation is defined on integral solutions only");
  const int L = a.num_fields;
  std::vector<SecCut> cuts;
  for (int k = 0; k < a.num_crops; ++k) {
    std::vector<int> parent(static_cast<std::size_t>(L));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (int i = 0; i < L; ++i)
      for (int j = i + 1; j < L; ++j)
        if (edge_value(sol, a, k, i, j) > 0.5) parent[static_cast<std::size_t>(find(i))] = find(j);
    std::vector<char> anchored(static_cast<std::size_t>(L), 0), served(static_cast<std::size_t>(L), 0);
    for (int j = 0; j < L; ++j) {
      if (value_of(sol, a.delta[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]) > 0.5) served[static_cast<std::size_t>(j)] = 1;
      for (int s = 0; s < a.num_slots(); ++s)
        if (out_legs(sol, a, k, s, j) > 0 || in_legs(sol, a, k, s, j) > 0) anchored[static_cast<std::size_t>(find(j))] = 1;
    }
    std::vector<std::vector<int>> comps(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j)
      if (served[static_cast<std::size_t>(j)]) comps[static_cast<std::size_t>(find(j))].push_back(j);
    for (int r = 0; r < L; ++r) {
      const auto& c = comps[static_cast<std::size_t>(r)];
      if (c.empty() || anchored[static_cast<std::size_t>(r)]) continue;
      cuts.push_back({k, c});
    }
  }
  return cuts;
}

inline LinearExpr sec_lhs(const ModelArtifacts& a, const SecCut& cut) {
  LinearExpr e;
  for (std::size_t x = 0; x < cut.fields.size(); ++x)
    for (std::size_t y = x + 1; y < cut.fields.size(); ++y)
      for (int var : a.edge_vars(cut.crop, cut.fields[x], cut.fields[y])) e.add(var, 1.0);
  return e;
}

inline void add_sec_cuts(IntegerProgram& m, ModelArtifacts& a, const std::vector<SecCut>& cuts) {
  for (const auto& c : cuts) {
    m.add_constraint(sec_lhs(a, c), Relation::LessEqual, static_cast<double>(c.fields.size()) - 1.0, "sec");
    a.sec_pool.push_back(c);
  }
}

struct SecResult {
  milp::Solution solution;
  int iterations = 0;            // solves performed, the initial SEC-free solve included
  int final_inequalities = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

/// Solve, separate, add cuts, repeat until no subtour remains or `max_iterations` solves were made.
inline SecResult solve_with_secs(IntegerProgram& m, ModelArtifacts& a, int max_iterations = 200,
                                 const milp::SolveLimits& limits = {}) {
  SecResult r;
  r.final_inequalities = m.num_inequalities();
  for (int it = 1; it <= max_iterations; ++it) {
    r.solution = milp::solve(m, limits);
    r.iterations = it;
    if (r.solution.status == milp::SolveStatus::Infeasible) break;
    if (!r.solution.has_values()) break;
    r.objective_trace.push_back(r.solution.objective);
    if (r.solution.status != milp::SolveStatus::Optimal) break;
    const auto cuts = separate_subtours(r.solution, a);
    if (cuts.empty()) {
      r.converged = true;
      break;
    }
    add_sec_cuts(m, a, cuts);
    r.final_inequalities = m.num_inequalities();
  }
  r.final_inequalities = m.num_inequalities();
  return r;
}

}  // namespace harvest
