#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "harvest/clustering.hpp"
#include "harvest/formulations.hpp"
#include "harvest/instance.hpp"
#include "harvest/instance_io.hpp"
#include "harvest/routing.hpp"

namespace harvest {

/// Side constraints cannot all hold; `groups` names the offending constraint groups.
class InfeasibleError : public ValidationError {
 public:
  InfeasibleError(const std::string& msg, std::vector<std::string> groups)
      : ValidationError(msg), groups(std::move(groups)) {}
  std::vector<std::string> groups;
};

struct RunMetrics {
  long n_z = 0;
  int n_eq = 0;
  int n_ineq_nosec = 0;
  int n_ineq_final = 0;
  int iter_sec = 0;  // solves, the initial SEC-free one included
  double cpu_s = 0.0;
  int tsp_iter = 0;
  double tsp_cpu_s = 0.0;
  bool converged = false;
  double j_eur = std::numeric_limits<double>::quiet_NaN();
};

struct PlanOptions {
  int max_sec_iterations = 200;
  int designated_depot = 0;              // variants 1 and 5
  AgronomicSpec agronomic;               // indexed by field
  std::vector<int> leasable;             // fields that may stay unserved
  std::optional<std::vector<int>> clusters;  // manual field -> cluster map, overrides k-means
  milp::SolveLimits limits;
  std::function<void(const milp::IntegerProgram&)> on_final_model;  // clustered model incl. SEC cuts
};

struct HarvestPlan {
  int variant = 0;
  int k_tilde = 0;
  int depot = -1;  // basis depot; -1 when harvesters start from their own depots
  std::vector<int> active_crops;
  std::vector<int> assignment;            // crop per field, -1 when unserved
  std::vector<std::vector<int>> tours;    // [k] ordered field ids
  std::vector<int> clusters;              // cluster per field
  std::vector<std::string> directions;    // [k] "forward" or "flipped" stitching; empty at k_tilde = L
  double profit = std::numeric_limits<double>::quiet_NaN();
  double ip_objective = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool relaxed = false;
  bool has_solution = false;
  RunMetrics metrics;
};

/// Profit of a plan re-derived from the instance alone.
///
/// Revenues of served fields, minus every crop-tour's legs and edges, minus the
/// depot maintenance the variant charges, minus m per active crop.
inline double evaluate_profit(const HarvestPlan& plan, const Instance& inst) {
  check_variant(plan.variant);
  const int n = plan.variant;
  const std::size_t L = inst.num_fields();
  const std::size_t K = inst.num_crops();
  if (plan.assignment.size() != L) throw IntegrityError("assignment needs one entry per field");
  if (plan.tours.size() != K) throw IntegrityError("plan needs one tour slot per crop");
  std::vector<int> seen(L, -1);
  for (std::size_t k = 0; k < K; ++k)
    for (int f : plan.tours[k]) {
      if (f < 0 || static_cast<std::size_t>(f) >= L) throw IntegrityError("tour visits unknown field " + std::to_string(f));
      if (seen[static_cast<std::size_t>(f)] >= 0) throw IntegrityError("field " + std::to_string(f) + " visited twice");
      seen[static_cast<std::size_t>(f)] = static_cast<int>(k);
    }
  for (std::size_t l = 0; l < L; ++l) {
    const int c = plan.assignment[l];
    if (c < -1 || c >= static_cast<int>(K)) throw IntegrityError("field " + std::to_string(l) + " has an unknown crop");
    if (c != seen[l]) throw IntegrityError("field " + std::to_string(l) + " is not on the tour of its assigned crop");
    if (c < 0 && !plan.relaxed) throw IntegrityError("field " + std::to_string(l) + " unserved in a plan without relaxation");
  }
  if (!uses_virtual_depot(n) && (plan.depot < 0 || static_cast<std::size_t>(plan.depot) >= inst.num_depots()))
    throw IntegrityError("plan needs a basis depot for variant " + std::to_string(n));

  const CostModel cm = build_cost_model(inst);
  int first = -1, last = -1, active = 0;
  for (std::size_t k = 0; k < K; ++k)
    if (!plan.tours[k].empty()) {
      if (first < 0) first = static_cast<int>(k);
      last = static_cast<int>(k);
      ++active;
    }
  double j = 0.0;
  for (std::size_t l = 0; l < L; ++l)
    if (plan.assignment[l] >= 0) j += inst.fields[l].revenue_eur.at(static_cast<std::size_t>(plan.assignment[l]));
  for (std::size_t k = 0; k < K; ++k) {
    const auto& t = plan.tours[k];
    if (t.empty()) continue;
    const auto uf = static_cast<std::size_t>(t.front());
    const auto ub = static_cast<std::size_t>(t.back());
    j -= out_leg_cost(cm, n, plan.depot, k, uf, static_cast<int>(k) == first);
    j -= in_leg_cost(cm, n, plan.depot, k, ub, static_cast<int>(k) == last);
    for (std::size_t s = 0; s + 1 < t.size(); ++s)
      j -= cm.field_field(k, static_cast<std::size_t>(t[s]), static_cast<std::size_t>(t[s + 1]));
  }
  j -= uses_virtual_depot(n) ? virtual_depot_maintenance(inst) : inst.depots[static_cast<std::size_t>(plan.depot)].maintenance_eur;
  j -= inst.crops.fixed_cost_eur * active;
  return j;
}

namespace detail {

/// Loops of crop k in visiting order, followed by any depot-free cycles of a non-converged incumbent.
inline std::vector<int> crop_sequence(const milp::Solution& sol, const ModelArtifacts& a, int k) {
  std::vector<int> seq;
  std::vector<char> used(static_cast<std::size_t>(a.num_fields), 0);
  for (const auto& loop : crop_loops(sol, a, k))
    for (int f : loop) {
      seq.push_back(f);
      used[static_cast<std::size_t>(f)] = 1;
    }
  for (int start = 0; start < a.num_fields; ++start) {
    if (used[static_cast<std::size_t>(start)]) continue;
    if (value_of(sol, a.delta[static_cast<std::size_t>(start)][static_cast<std::size_t>(k)]) <= 0.5) continue;
    int cur = start;
    while (cur >= 0) {
      used[static_cast<std::size_t>(cur)] = 1;
      seq.push_back(cur);
      int next = -1;
      for (int o = 0; o < a.num_fields && next < 0; ++o)
        if (o != cur && !used[static_cast<std::size_t>(o)] && edge_value(sol, a, k, cur, o) > 0.5) next = o;
      cur = next;
    }
  }
  return seq;
}

inline AgronomicSpec cluster_agronomics(const AgronomicSpec& spec, const Clustering& c, const Instance& inst) {
  if (c.is_identity()) return spec;
  if (!spec.priority.empty()) throw ValidationError("priority constraints require one cluster per field (k_tilde = L)");
  AgronomicSpec out;
  std::set<std::pair<int, int>> rot;
  for (const auto& [l, k] : spec.rotation_forbidden) {
    if (l < 0 || static_cast<std::size_t>(l) >= c.assignment.size())
      throw ValidationError("rotation constraint references unknown field " + std::to_string(l));
    rot.insert({c.assignment[static_cast<std::size_t>(l)], k});
  }
  out.rotation_forbidden.assign(rot.begin(), rot.end());
  const std::size_t K = inst.num_crops();
  const auto Z = static_cast<std::size_t>(c.k);
  if (!spec.diversification_bounds.empty()) {
    if (spec.diversification_weights.size() != c.assignment.size())
      throw ShapeError("diversification weights need one row per field");
    out.diversification_bounds = spec.diversification_bounds;
    out.diversification_weights.assign(Z, std::vector<double>(K, 0.0));
    for (std::size_t l = 0; l < c.assignment.size(); ++l)
      for (std::size_t k = 0; k < K; ++k)
        out.diversification_weights[static_cast<std::size_t>(c.assignment[l])][k] += spec.diversification_weights[l].at(k);
  }
  if (spec.time) {
    const TimeSpec& t = *spec.time;
    TimeSpec ct;
    ct.speed_kmh = t.speed_kmh;
    ct.window_h = t.window_h;
    if (t.harvest_h.size() != c.assignment.size()) throw ShapeError("harvest times need one row per field");
    ct.harvest_h.assign(Z, std::vector<double>(K, 0.0));
    for (std::size_t l = 0; l < c.assignment.size(); ++l)
      for (std::size_t k = 0; k < K; ++k) ct.harvest_h[static_cast<std::size_t>(c.assignment[l])][k] += t.harvest_h[l].at(k);
    // Explicit time matrices are averaged over members, like explicit cost matrices.
    if (!t.field_field_h.empty() || !t.depot_field_h.empty()) {
      Instance proxy = inst;
      MatrixCost mc;
      mc.field_field = t.field_field_h;
      mc.depot_field = t.depot_field_h;
      proxy.cost = mc;
      const Instance agg = aggregate(c, proxy);
      const auto& amc = std::get<MatrixCost>(agg.cost);
      ct.field_field_h = amc.field_field;
      ct.depot_field_h = amc.depot_field;
    }
    out.time = ct;
  }
  return out;
}

inline std::vector<std::pair<int, int>> priority_pairs(const AgronomicSpec& spec) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& p : spec.priority) {
    pairs.emplace_back(p.c, p.a);
    pairs.emplace_back(p.a, p.b);
  }
  return pairs;
}

inline std::vector<std::string> agronomic_groups(const AgronomicSpec& s) {
  std::vector<std::string> g;
  if (!s.rotation_forbidden.empty()) g.push_back("rotation");
  if (!s.diversification_bounds.empty()) g.push_back("diversification");
  if (s.time) g.push_back("time");
  if (!s.priority.empty()) g.push_back("priority");
  return g;
}

inline AgronomicSpec only_group(const AgronomicSpec& s, const std::string& g) {
  AgronomicSpec o;
  if (g == "rotation") o.rotation_forbidden = s.rotation_forbidden;
  if (g == "diversification") {
    o.diversification_bounds = s.diversification_bounds;
    o.diversification_weights = s.diversification_weights;
  }
  if (g == "time") o.time = s.time;
  if (g == "priority") o.priority = s.priority;
  return o;
}

}  // namespace detail

/// Algorithm 1: cluster the fields, solve IP-n on the clusters, expand each
/// crop's cluster sequence into a field sequence and account the profit.
inline HarvestPlan plan(const Instance& inst, int n, int k_tilde, std::uint64_t seed, const PlanOptions& opts = {}) {
  check_variant(n);
  const auto diags = validate_instance(inst);
  if (!diags.empty()) {
    std::string msg = "invalid instance:";
    for (const auto& d : diags) msg += "\n  " + d.code + ": " + d.message;
    throw ValidationError(msg);
  }
  const int L = static_cast<int>(inst.num_fields());
  const int K = static_cast<int>(inst.num_crops());
  if (k_tilde < 1) throw ValidationError("cluster count must be at least 1");
  if (opts.designated_depot < 0 || static_cast<std::size_t>(opts.designated_depot) >= inst.num_depots())
    throw ValidationError("designated depot out of range");
  for (int l : opts.leasable)
    if (l < 0 || l >= L) throw ValidationError("unknown field id " + std::to_string(l) + " in leasable set");

  const Clustering cl = opts.clusters ? clustering_from_assignment(inst.fields, *opts.clusters) : kmeans(inst.fields, k_tilde, seed);
  const Instance cinst = cl.is_identity() ? inst : aggregate(cl, inst);
  const CostModel ccm = build_cost_model(cinst);
  const AgronomicSpec cspec = detail::cluster_agronomics(opts.agronomic, cl, inst);
  std::vector<int> cleasable;
  for (int z = 0; z < cl.k; ++z) {
    const auto& mem = cl.members[static_cast<std::size_t>(z)];
    const bool all = std::all_of(mem.begin(), mem.end(), [&](int l) {
      return std::find(opts.leasable.begin(), opts.leasable.end(), l) != opts.leasable.end();
    });
    if (all) cleasable.push_back(z);
  }

  BuildOptions bo;
  bo.designated_depot = opts.designated_depot;
  bo.asymmetric_pairs = detail::priority_pairs(cspec);
  auto build = [&](const AgronomicSpec& spec) {
    auto built = build_ip(n, cinst, ccm, bo);
    add_agronomic_constraints(built.first, built.second, cinst, spec);
    relax_service(built.first, built.second, cleasable);
    return built;
  };
  auto [model, art] = build(cspec);

  HarvestPlan out;
  out.variant = n;
  out.k_tilde = cl.k;
  out.clusters = cl.assignment;
  out.relaxed = !opts.leasable.empty();
  out.assignment.assign(static_cast<std::size_t>(L), -1);
  out.tours.assign(static_cast<std::size_t>(K), {});
  RunMetrics& mt = out.metrics;
  mt.n_z = model.num_variables();
  mt.n_eq = model.num_equalities();
  mt.n_ineq_nosec = model.num_inequalities();

  const auto t0 = std::chrono::steady_clock::now();
  SecResult r = solve_with_secs(model, art, opts.max_sec_iterations, opts.limits);
  mt.cpu_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  mt.iter_sec = r.iterations;
  mt.n_ineq_final = r.final_inequalities;
  mt.converged = r.converged;
  out.converged = r.converged;
  if (opts.on_final_model) opts.on_final_model(model);

  if (r.solution.status == milp::SolveStatus::Infeasible) {
    std::vector<std::string> culprits;
    for (const auto& g : detail::agronomic_groups(cspec)) {
      auto [m1, a1] = build(detail::only_group(cspec, g));
      milp::SolveLimits lim;
      lim.max_nodes = 20000;
      if (milp::solve(m1, lim).status == milp::SolveStatus::Infeasible) culprits.push_back(g);
    }
    if (culprits.empty()) culprits = detail::agronomic_groups(cspec);
    std::string msg = "no feasible plan";
    if (!culprits.empty()) {
      msg += "; infeasible constraint groups:";
      for (const auto& g : culprits) msg += " " + g;
    }
    throw InfeasibleError(msg, culprits);
  }
  if (!r.solution.has_values()) return out;

  const milp::Solution& sol = r.solution;
  out.has_solution = true;
  out.ip_objective = sol.objective;
  const int slot = chosen_slot(sol, art);
  out.depot = art.slot_depot[static_cast<std::size_t>(slot)];

  const std::vector<int> ccrop = field_crops(sol, art);
  for (int l = 0; l < L; ++l) out.assignment[static_cast<std::size_t>(l)] = ccrop[static_cast<std::size_t>(cl.assignment[static_cast<std::size_t>(l)])];
  for (int k = 0; k < K; ++k) {
    const std::vector<int> cseq = detail::crop_sequence(sol, art, k);
    if (cseq.empty()) continue;
    out.active_crops.push_back(k);
    if (cl.is_identity()) out.tours[static_cast<std::size_t>(k)] = cseq;
  }
  if (!cl.is_identity()) {
    const CostModel cm = build_cost_model(inst);
    const int first = out.active_crops.empty() ? -1 : out.active_crops.front();
    const int last = out.active_crops.empty() ? -1 : out.active_crops.back();
    for (int k : out.active_crops) {
      const auto uk = static_cast<std::size_t>(k);
      StitchCosts sc;
      sc.field_field = &cm.field_field_matrix(uk);
      sc.out_leg.resize(static_cast<std::size_t>(L));
      sc.in_leg.resize(static_cast<std::size_t>(L));
      for (int j = 0; j < L; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        sc.out_leg[uj] = out_leg_cost(cm, n, out.depot, uk, uj, k == first);
        sc.in_leg[uj] = in_leg_cost(cm, n, out.depot, uk, uj, k == last);
      }
      const std::vector<int> cseq = detail::crop_sequence(sol, art, k);
      const StitchedTour fwd = stitch_crop_tour(cseq, false, cl.members, sc);
      const StitchedTour flp = stitch_crop_tour(cseq, true, cl.members, sc);
      mt.tsp_iter += fwd.tsp_iterations + flp.tsp_iterations;
      mt.tsp_cpu_s += fwd.tsp_cpu_s + flp.tsp_cpu_s;
      const StitchedTour& best = pick_direction(fwd, flp);
      out.tours[uk] = best.fields;
      out.directions.resize(static_cast<std::size_t>(K));
      out.directions[uk] = &best == &fwd ? "forward" : "flipped";
    }
  }
  out.profit = evaluate_profit(out, inst);
  mt.j_eur = out.profit;
  return out;
}

inline json metrics_to_json(const RunMetrics& m) {
  return {{"N_z", m.n_z},           {"N_eq", m.n_eq},       {"N_ineq_nosec", m.n_ineq_nosec},
          {"N_ineq_final", m.n_ineq_final}, {"iter_sec", m.iter_sec}, {"cpu_s", m.cpu_s},
          {"tsp_iter", m.tsp_iter}, {"tsp_cpu_s", m.tsp_cpu_s}, {"converged", m.converged},
          {"J_eur", std::isfinite(m.j_eur) ? json(m.j_eur) : json(nullptr)}};
}

inline json plan_to_json(const HarvestPlan& p) {
  json j;
  j["method"] = "CApR-" + std::to_string(p.variant);
  j["k_tilde"] = p.k_tilde;
  j["depot"] = p.depot;
  j["active_crops"] = p.active_crops;
  j["assignment"] = json::array();
  for (std::size_t l = 0; l < p.assignment.size(); ++l) j["assignment"].push_back({{"field", l}, {"crop", p.assignment[l]}});
  j["tours"] = json::object();
  for (std::size_t k = 0; k < p.tours.size(); ++k) j["tours"]["crop " + std::to_string(k)] = p.tours[k];
  j["profit_eur"] = std::isfinite(p.profit) ? json(p.profit) : json(nullptr);
  j["converged"] = p.converged;
  j["relaxed"] = p.relaxed;
  j["clusters"] = p.clusters;
  if (!p.directions.empty()) {
    j["directions"] = json::object();
    for (std::size_t k = 0; k < p.directions.size(); ++k)
      if (!p.directions[k].empty()) j["directions"]["crop " + std::to_string(k)] = p.directions[k];
  }
  j["metrics"] = metrics_to_json(p.metrics);
  return j;
}

inline HarvestPlan plan_from_json(const json& j) {
  HarvestPlan p;
  try {
    const std::string method = j.at("method").get<std::string>();
    if (method.rfind("CApR-", 0) != 0) throw ValidationError("plan method must be CApR-n, got " + method);
    p.variant = std::stoi(method.substr(5));
    check_variant(p.variant);
    p.k_tilde = j.at("k_tilde").get<int>();
    p.depot = j.at("depot").get<int>();
    p.active_crops = j.at("active_crops").get<std::vector<int>>();
    const auto& as = j.at("assignment");
    p.assignment.assign(as.size(), -1);
    for (const auto& e : as) {
      const auto f = e.at("field").get<std::size_t>();
      if (f >= p.assignment.size()) throw ShapeError("assignment field index out of range");
      p.assignment[f] = e.at("crop").get<int>();
    }
    int K = 0;
    for (const auto& [key, val] : j.at("tours").items()) {
      if (key.rfind("crop ", 0) != 0) throw ShapeError("tour keys must read \"crop k\"");
      K = std::max(K, std::stoi(key.substr(5)) + 1);
    }
    p.tours.assign(static_cast<std::size_t>(K), {});
    for (const auto& [key, val] : j.at("tours").items())
      p.tours[static_cast<std::size_t>(std::stoi(key.substr(5)))] = val.get<std::vector<int>>();
    p.profit = j.at("profit_eur").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("profit_eur").get<double>();
    p.converged = j.at("converged").get<bool>();
    p.relaxed = j.value("relaxed", false);
    if (j.contains("clusters")) p.clusters = j.at("clusters").get<std::vector<int>>();
    if (j.contains("directions")) {
      p.directions.assign(static_cast<std::size_t>(K), "");
      for (const auto& [key, val] : j.at("directions").items()) {
        const int k = std::stoi(key.substr(5));
        if (k < 0 || k >= K) throw ShapeError("direction for unknown crop " + key);
        p.directions[static_cast<std::size_t>(k)] = val.get<std::string>();
      }
    }
    p.has_solution = std::isfinite(p.profit);
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      p.metrics.n_z = m.value("N_z", 0L);
      p.metrics.n_eq = m.value("N_eq", 0);
      p.metrics.n_ineq_nosec = m.value("N_ineq_nosec", 0);
      p.metrics.n_ineq_final = m.value("N_ineq_final", 0);
      p.metrics.iter_sec = m.value("iter_sec", 0);
      p.metrics.cpu_s = m.value("cpu_s", 0.0);
      p.metrics.tsp_iter = m.value("tsp_iter", 0);
      p.metrics.tsp_cpu_s = m.value("tsp_cpu_s", 0.0);
      p.metrics.converged = m.value("converged", false);
      p.metrics.j_eur = p.profit;
    }
  } catch (const json::exception& e) {
    throw ShapeError(std::string("plan JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ShapeError("plan JSON: malformed crop index");
  }
  return p;
}

/// Agronomic side-constraint files. Each reader takes the JSON object of one file.
inline void rotation_from_json(const json& j, AgronomicSpec& s) {
  try {
    for (const auto& e : j.at("forbidden")) s.rotation_forbidden.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  } catch (const json::exception& e) {
    throw ShapeError(std::string("rotation JSON: ") + e.what());
  }
}

inline void diversification_from_json(const json& j, AgronomicSpec& s) {
  try {
    s.diversification_weights = j.at("weights").get<std::vector<std::vector<double>>>();
    s.diversification_bounds = j.at("bounds").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ShapeError(std::string("diversification JSON: ") + e.what());
  }
}

inline void time_from_json(const json& j, AgronomicSpec& s) {
  try {
    TimeSpec t;
    t.speed_kmh = j.value("speed_kmh", 0.0);
    t.window_h = j.at("window_h").get<std::vector<double>>();
    t.harvest_h = j.at("harvest_h").get<std::vector<std::vector<double>>>();
    if (j.contains("field_field_h"))
      for (const auto& m : j.at("field_field_h")) t.field_field_h.push_back(detail::matrix_from_json(m, "field_field_h"));
    if (j.contains("depot_field_h"))
      for (const auto& m : j.at("depot_field_h")) t.depot_field_h.push_back(detail::matrix_from_json(m, "depot_field_h"));
    s.time = std::move(t);
  } catch (const json::exception& e) {
    throw ShapeError(std::string("time JSON: ") + e.what());
  }
}

inline void priority_from_json(const json& j, AgronomicSpec& s) {
  try {
    for (const auto& e : j.at("triples"))
      s.priority.push_back({e.at("crop").get<int>(), e.at("c").get<int>(), e.at("a").get<int>(), e.at("b").get<int>()});
  } catch (const json::exception& e) {
    throw ShapeError(std::string("priority JSON: ") + e.what());
  }
}

}  // namespace harvest
