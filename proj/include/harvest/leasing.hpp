#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "harvest/capr.hpp"

namespace harvest {

/// Plan computed on a subset of the instance's fields; `fields[i]` is the instance id of local field i.
struct SubPlan {
  std::vector<int> fields;
  HarvestPlan plan;
  double profit = 0.0;  // 0 for an empty field set
  bool converged = true;
};

struct LeasingDecision {
  std::vector<int> own, pro, ptl;  // owned, possibly rented out, possibly taken on lease
  std::vector<int> ntl;            // leasable fields not worth taking
  std::vector<int> ro;             // owned fields worth renting out
  std::vector<int> l1;             // fields farmed after the decision
  SubPlan relaxed, with_l1, with_own;
  double delta_j = 0.0;            // J^{L1} - J^{own}
  bool advisory = false;           // a sub-run did not converge
  bool negative_bound = false;     // delta_j < 0: try another lease selection

  double j_l1() const { return with_l1.profit; }
  double j_own() const { return with_own.profit; }
};

namespace detail {

inline std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool contains(const std::vector<int>& sorted, int x) { return std::binary_search(sorted.begin(), sorted.end(), x); }

inline SubPlan sub_plan(const Instance& inst, const std::vector<int>& fields, int n, int k_tilde, std::uint64_t seed,
                        const PlanOptions& opts, const std::vector<int>& leasable_global) {
  SubPlan sp;
  sp.fields = fields;
  if (fields.empty()) return sp;
  PlanOptions o = opts;
  o.clusters.reset();
  o.agronomic = {};
  o.leasable.clear();
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (contains(leasable_global, fields[i])) o.leasable.push_back(static_cast<int>(i));
  const Instance sub = inst.restricted_to(fields);
  sp.plan = plan(sub, n, std::min<int>(k_tilde, static_cast<int>(fields.size())), seed, o);
  sp.converged = sp.plan.converged;
  sp.profit = sp.plan.profit;
  return sp;
}

}  // namespace detail

/// Lease decision: which candidate fields to take on and which owned fields to rent out.
///
/// A relaxed plan over own + ptl may leave pro and ptl fields unserved. Unserved
/// ptl fields are not taken, unserved pro fields are rented out. Standard plans on
/// the resulting field set and on the owned fields give the bound delta_j.
inline LeasingDecision decide_leasing(const std::vector<int>& own, const std::vector<int>& pro,
                                      const std::vector<int>& ptl, const Instance& inst, int n, int k_tilde,
                                      std::uint64_t seed, const PlanOptions& opts = {}) {
  LeasingDecision d;
  d.own = detail::sorted_unique(own);
  d.pro = detail::sorted_unique(pro);
  d.ptl = detail::sorted_unique(ptl);
  const int L = static_cast<int>(inst.num_fields());
  for (const auto* set : {&d.own, &d.ptl})
    for (int f : *set)
      if (f < 0 || f >= L) throw ValidationError("unknown field id " + std::to_string(f));
  for (int f : d.pro)
    if (!detail::contains(d.own, f)) throw ValidationError("field " + std::to_string(f) + " is offered for rent but not owned");
  for (int f : d.ptl)
    if (detail::contains(d.own, f)) throw ValidationError("field " + std::to_string(f) + " is both owned and a lease candidate");

  std::vector<int> all = d.own;
  all.insert(all.end(), d.ptl.begin(), d.ptl.end());
  all = detail::sorted_unique(all);
  std::vector<int> leasable = d.pro;
  leasable.insert(leasable.end(), d.ptl.begin(), d.ptl.end());
  leasable = detail::sorted_unique(leasable);

  d.relaxed = detail::sub_plan(inst, all, n, k_tilde, seed, opts, leasable);
  std::vector<int> dropped;
  if (!all.empty()) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (d.relaxed.plan.has_solution && d.relaxed.plan.assignment[i] >= 0) continue;
      if (!d.relaxed.plan.has_solution) continue;
      if (detail::contains(d.ptl, all[i])) d.ntl.push_back(all[i]);
      if (detail::contains(d.pro, all[i])) d.ro.push_back(all[i]);
      dropped.push_back(all[i]);
    }
  }
  for (int f : all)
    if (!detail::contains(dropped, f)) d.l1.push_back(f);

  d.with_l1 = detail::sub_plan(inst, d.l1, n, k_tilde, seed, opts, {});
  d.with_own = detail::sub_plan(inst, d.own, n, k_tilde, seed, opts, {});
  d.delta_j = d.with_l1.profit - d.with_own.profit;
  d.advisory = !d.relaxed.converged || !d.with_l1.converged || !d.with_own.converged;
  d.negative_bound = d.delta_j < 0.0;
  return d;
}

/// Upper bounds on the rent worth paying for a depot.
struct RentBound {
  int reference = 0;                  // 2 or 7
  double reference_profit = 0.0;
  std::map<int, double> profit;       // J per requested variant
  std::map<int, double> bound;        // J^{ref} - J^{n}
  std::vector<double> per_depot;      // J^{ref} - J with each depot as the designated basis
};

/// Profit differences between the reference variant and the requested ones.
///
/// The per-depot entries pin the single-depot variant of the family (1 or 5)
/// to each depot in turn.
inline RentBound depot_rent_bound(const Instance& inst, const std::vector<int>& variants, int k_tilde, std::uint64_t seed,
                                  const PlanOptions& opts = {}) {
  if (variants.empty()) throw ValidationError("rent bound needs at least one variant");
  const bool low = variants.front() <= 4;
  for (int n : variants) {
    check_variant(n);
    if ((n <= 4) != low) throw ValidationError("rent bound variants must all be in 1..4 or all in 5..8");
  }
  RentBound rb;
  rb.reference = low ? 2 : 7;
  auto run = [&](int n, int depot) {
    PlanOptions o = opts;
    o.designated_depot = depot;
    return plan(inst, n, k_tilde, seed, o).profit;
  };
  rb.reference_profit = run(rb.reference, opts.designated_depot);
  for (int n : variants) {
    const double j = n == rb.reference ? rb.reference_profit : run(n, opts.designated_depot);
    rb.profit[n] = j;
    if (n != rb.reference) rb.bound[n] = rb.reference_profit - j;
  }
  const int single = low ? 1 : 5;
  for (std::size_t dep = 0; dep < inst.num_depots(); ++dep)
    rb.per_depot.push_back(rb.reference_profit - run(single, static_cast<int>(dep)));
  return rb;
}

inline json sub_plan_to_json(const SubPlan& s) {
  json j{{"fields", s.fields}, {"profit_eur", s.profit}, {"converged", s.converged}};
  if (!s.fields.empty()) j["plan"] = plan_to_json(s.plan);
  return j;
}

inline json decision_to_json(const LeasingDecision& d) {
  return {{"L_own", d.own},
          {"L_pro", d.pro},
          {"L_ptl", d.ptl},
          {"L_ntl", d.ntl},
          {"L_ro", d.ro},
          {"L_1", d.l1},
          {"J_L1_eur", d.j_l1()},
          {"J_own_eur", d.j_own()},
          {"delta_J_eur", d.delta_j},
          {"advisory", d.advisory},
          {"negative_bound", d.negative_bound},
          {"plans", {{"relaxed", sub_plan_to_json(d.relaxed)}, {"L_1", sub_plan_to_json(d.with_l1)}, {"L_own", sub_plan_to_json(d.with_own)}}}};
}

}  // namespace harvest
