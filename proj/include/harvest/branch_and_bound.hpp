#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "harvest/milp.hpp"
#include "harvest/simplex.hpp"

namespace harvest::milp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

/// One processed node, reported to SolveLimits::observer.
struct NodeEvent {
  long node = 0;
  int depth = 0;
  double lp_bound = kInf;  // +inf when the relaxation was infeasible or cut off
  double incumbent = kInf;
  bool integral = false;
  bool branched = false;
};

struct SolveLimits {
  long max_nodes = 2'000'000;
  double time_limit_s = kInf;
  std::function<void(const NodeEvent&)> observer;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = kInf;
  double best_bound = -kInf;
  long nodes = 0;
  long lp_iterations = 0;

  bool has_values() const { return !values.empty(); }
  double value(int var) const { return values.at(static_cast<std::size_t>(var)); }
};

inline constexpr double kIntegralityTol = 1e-6;

/// LP relaxation of `model` (integrality dropped).
inline Solution solve_lp_relaxation(const IntegerProgram& model) {
  model.validate();
  DualSimplex lp(model);
  Solution out;
  const LpStatus st = lp.solve();
  out.lp_iterations = lp.iterations();
  if (st == LpStatus::Optimal) {
    out.status = SolveStatus::Optimal;
    out.values = lp.primal();
    out.objective = model.objective_value(out.values);
    out.best_bound = out.objective;
  } else if (st == LpStatus::Infeasible) {
    out.status = SolveStatus::Infeasible;
  } else {
    out.status = SolveStatus::IterationLimit;
  }
  return out;
}

/// Minimises the model by LP-based branch and bound.
///
/// Open nodes are taken best bound first, ties in creation order. Branching is
/// on the most fractional integer variable, ties to the lowest index.
inline Solution solve(const IntegerProgram& model, const SolveLimits& limits = {}) {
  model.validate();
  const auto start = std::chrono::steady_clock::now();
  const int n = model.num_variables();

  struct Change {
    int var;
    double lower;
    double upper;
  };
  struct Node {
    double bound;
    long seq;
    int depth;
    std::vector<Change> changes;
    DualSimplex::Basis basis;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

  DualSimplex lp(model);
  std::vector<double> root_lower(static_cast<std::size_t>(n)), root_upper(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    root_lower[static_cast<std::size_t>(j)] = model.variable(j).lower;
    root_upper[static_cast<std::size_t>(j)] = model.variable(j).upper;
    if (model.variable(j).integer) {
      root_lower[static_cast<std::size_t>(j)] = std::ceil(root_lower[static_cast<std::size_t>(j)] - kIntegralityTol);
      root_upper[static_cast<std::size_t>(j)] = std::floor(root_upper[static_cast<std::size_t>(j)] + kIntegralityTol);
    }
  }

  Solution out;
  double incumbent = kInf;
  long seq = 0;
  open.push(Node{-kInf, seq++, 0, {}, lp.basis()});
  bool limit_hit = false;

  auto prune_threshold = [&]() {
    return std::isfinite(incumbent) ? incumbent - 1e-9 * std::max(1.0, std::abs(incumbent)) : kInf;
  };

  while (!open.empty()) {
    if (out.nodes >= limits.max_nodes) {
      limit_hit = true;
      break;
    }
    if (std::isfinite(limits.time_limit_s)) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > limits.time_limit_s) {
        limit_hit = true;
        break;
      }
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= prune_threshold()) continue;
    ++out.nodes;

    for (int j = 0; j < n; ++j)
      lp.set_bounds(j, root_lower[static_cast<std::size_t>(j)], root_upper[static_cast<std::size_t>(j)]);
    bool empty_box = false;
    for (const auto& c : node.changes) {
      lp.set_bounds(c.var, c.lower, c.upper);
      if (c.lower > c.upper) empty_box = true;
    }
    NodeEvent ev;
    ev.node = out.nodes;
    ev.depth = node.depth;
    if (empty_box) {
      ev.incumbent = incumbent;
      if (limits.observer) limits.observer(ev);
      continue;
    }
    lp.set_basis(node.basis);
    const LpStatus st = lp.solve(prune_threshold());
    if (st == LpStatus::IterationLimit) {
      limit_hit = true;
      break;
    }
    if (st != LpStatus::Optimal) {
      ev.incumbent = incumbent;
      if (limits.observer) limits.observer(ev);
      continue;
    }
    std::vector<double> x = lp.primal();
    const double bound = lp.objective();
    ev.lp_bound = bound;
    if (bound >= prune_threshold()) {
      ev.incumbent = incumbent;
      if (limits.observer) limits.observer(ev);
      continue;
    }

    int branch_var = -1;
    double best_frac = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!model.variable(j).integer) continue;
      const double v = x[static_cast<std::size_t>(j)];
      const double frac = std::abs(v - std::round(v));
      if (frac > kIntegralityTol && frac > best_frac + 1e-12) {
        best_frac = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      for (int j = 0; j < n; ++j)
        if (model.variable(j).integer) x[static_cast<std::size_t>(j)] = std::round(x[static_cast<std::size_t>(j)]);
      const double obj = model.objective_value(x);
      if (obj < incumbent) {
        incumbent = obj;
        out.values = x;
        out.objective = obj;
      }
      ev.integral = true;
      ev.incumbent = incumbent;
      if (limits.observer) limits.observer(ev);
      continue;
    }
    ev.incumbent = incumbent;
    ev.branched = true;
    if (limits.observer) limits.observer(ev);

    const double v = x[static_cast<std::size_t>(branch_var)];
    const DualSimplex::Basis basis = lp.basis();
    double cur_lo = root_lower[static_cast<std::size_t>(branch_var)];
    double cur_up = root_upper[static_cast<std::size_t>(branch_var)];
    for (const auto& c : node.changes)
      if (c.var == branch_var) {
        cur_lo = c.lower;
        cur_up = c.upper;
      }
    Node down{bound, seq++, node.depth + 1, node.changes, basis};
    down.changes.push_back({branch_var, cur_lo, std::floor(v)});
    Node up{bound, seq++, node.depth + 1, std::move(node.changes), basis};
    up.changes.push_back({branch_var, std::ceil(v), cur_up});
    open.push(std::move(down));
    open.push(std::move(up));
  }
  out.lp_iterations = lp.iterations();

  if (limit_hit) {
    out.status = SolveStatus::IterationLimit;
    double lb = incumbent;
    while (!open.empty()) {
      lb = std::min(lb, open.top().bound);
      open.pop();
    }
    out.best_bound = lb;
    return out;
  }
  if (out.has_values()) {
    out.status = SolveStatus::Optimal;
    out.best_bound = out.objective;
  } else {
    out.status = SolveStatus::Infeasible;
  }
  return out;
}

}  // namespace harvest::milp
