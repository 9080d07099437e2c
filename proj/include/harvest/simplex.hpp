#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "harvest/milp.hpp"

namespace harvest::milp {

enum class LpStatus { Optimal, Infeasible, IterationLimit, Cutoff };

/// Bounded-variable dual simplex over the rows of an IntegerProgram.
///
/// Every row gets a slack s_i with a_i x + s_i = b_i; the slack's bounds encode
/// the relation. Structural variables must be boxed, so any basis can be made
/// dual feasible by placing nonbasic structurals at the bound matching the sign
/// of their reduced cost. The basis inverse is kept explicitly and refactored
/// from the structural part only, which stays small in the routing models.
class DualSimplex {
 public:
  enum class State : std::int8_t { Basic, AtLower, AtUpper };

  struct Basis {
    std::vector<int> head;
    std::vector<State> state;
  };

  explicit DualSimplex(const IntegerProgram& model) : n_(model.num_variables()), m_(model.num_constraints()) {
    const int total = n_ + m_;
    cols_.assign(static_cast<std::size_t>(n_), {});
    for (int i = 0; i < m_; ++i)
      for (const auto& t : model.constraint(i).terms) cols_[static_cast<std::size_t>(t.var)].push_back({i, t.coef});
    lb_.assign(static_cast<std::size_t>(total), 0.0);
    ub_.assign(static_cast<std::size_t>(total), 0.0);
    cost_.assign(static_cast<std::size_t>(total), 0.0);
    rhs_.assign(static_cast<std::size_t>(m_), 0.0);
    double cmax = 0.0;
    for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(model.objective()[static_cast<std::size_t>(j)]));
    scale_ = cmax > 0.0 ? cmax : 1.0;
    for (int j = 0; j < n_; ++j) {
      lb_[static_cast<std::size_t>(j)] = model.variable(j).lower;
      ub_[static_cast<std::size_t>(j)] = model.variable(j).upper;
      cost_[static_cast<std::size_t>(j)] = model.objective()[static_cast<std::size_t>(j)] / scale_;
    }
    for (int i = 0; i < m_; ++i) {
      const auto& c = model.constraint(i);
      rhs_[static_cast<std::size_t>(i)] = c.rhs;
      const auto s = static_cast<std::size_t>(n_ + i);
      switch (c.relation) {
        case Relation::LessEqual: lb_[s] = 0.0; ub_[s] = kInf; break;
        case Relation::GreaterEqual: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case Relation::Equal: lb_[s] = 0.0; ub_[s] = 0.0; break;
      }
    }
    offset_ = model.objective_constant();
    reset_basis();
  }

  int num_structurals() const { return n_; }
  int num_rows() const { return m_; }

  void set_bounds(int j, double lower, double upper) {
    lb_[static_cast<std::size_t>(j)] = lower;
    ub_[static_cast<std::size_t>(j)] = upper;
  }
  double lower(int j) const { return lb_[static_cast<std::size_t>(j)]; }
  double upper(int j) const { return ub_[static_cast<std::size_t>(j)]; }

  Basis basis() const { return {head_, state_}; }
  /// Keeps the current factorization when `b` has the same basic set.
  void set_basis(const Basis& b) {
    if (b.head != head_) factor_valid_ = false;
    head_ = b.head;
    state_ = b.state;
  }

  /// Slack basis with every structural at the bound favoured by its cost.
  void reset_basis() {
    factor_valid_ = false;
    const int total = n_ + m_;
    head_.resize(static_cast<std::size_t>(m_));
    state_.assign(static_cast<std::size_t>(total), State::AtLower);
    for (int i = 0; i < m_; ++i) {
      head_[static_cast<std::size_t>(i)] = n_ + i;
      state_[static_cast<std::size_t>(n_ + i)] = State::Basic;
    }
    for (int j = 0; j < n_; ++j)
      state_[static_cast<std::size_t>(j)] = cost_[static_cast<std::size_t>(j)] >= 0.0 ? State::AtLower : State::AtUpper;
  }

  long iterations() const { return iterations_; }

  /// Objective of the current basic solution (the dual bound while primal infeasible).
  double objective() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return v * scale_ + offset_;
  }

  std::vector<double> primal() const {
    return {x_.begin(), x_.begin() + n_};
  }

  /// Runs dual simplex from the current basis. Stops early with Cutoff once the
  /// dual bound exceeds `cutoff`.
  LpStatus solve(double cutoff = kInf, long max_iterations = 200000) {
    if (m_ == 0) return solve_unconstrained(cutoff);
    const double scaled_cutoff = std::isfinite(cutoff) ? (cutoff - offset_) / scale_ : kInf;
    if (!prepare(true)) {
      reset_basis();
      if (!prepare()) return LpStatus::IterationLimit;
    }
    weights_.assign(static_cast<std::size_t>(m_), 1.0);
    long& since_refactor = pivots_since_factor_;
    bool fresh = true;
    for (long it = 0; it < max_iterations; ++it) {
      if (since_refactor >= kRefactorInterval) {
        if (!prepare()) {
          reset_basis();
          if (!prepare()) return LpStatus::IterationLimit;
        }
        since_refactor = 0;
        fresh = true;
      }
      if (std::isfinite(scaled_cutoff) && (it % 8 == 0) && scaled_objective() > scaled_cutoff + 1e-9 * (1.0 + std::abs(scaled_cutoff)))
        return LpStatus::Cutoff;

      const int r = choose_leaving_row();
      if (r < 0) {
        if (!fresh) {
          // Recompute duals and basic values from the updated inverse before
          // declaring optimality.
          if (!prepare(true)) {
            reset_basis();
            if (!prepare()) return LpStatus::IterationLimit;
          }
          fresh = true;
          if (choose_leaving_row() >= 0) continue;
        }
        return LpStatus::Optimal;
      }
      const int leaving = head_[static_cast<std::size_t>(r)];
      const double xr = x_[static_cast<std::size_t>(leaving)];
      const bool to_lower = xr < lb_[static_cast<std::size_t>(leaving)];
      const double target = to_lower ? lb_[static_cast<std::size_t>(leaving)] : ub_[static_cast<std::size_t>(leaving)];
      const double delta = xr - target;

      // Row r of the basis inverse, and its nonzero pattern.
      const double* rho = &binv_[static_cast<std::size_t>(r) * static_cast<std::size_t>(m_)];
      rho_nz_.clear();
      for (int i = 0; i < m_; ++i)
        if (rho[i] != 0.0) rho_nz_.push_back(i);

      const int q = ratio_test(rho, delta < 0.0 ? -1.0 : 1.0);
      if (q < 0) {
        if (!fresh) {
          if (!prepare()) return LpStatus::IterationLimit;
          since_refactor = 0;
          fresh = true;
          continue;
        }
        return LpStatus::Infeasible;
      }

      compute_column(q);
      const double alpha_rq = col_[static_cast<std::size_t>(r)];
      const double alpha_row = row_alpha(rho, q);
      if (std::abs(alpha_rq) < 1e-11 || std::abs(alpha_rq - alpha_row) > 1e-7 * (1.0 + std::abs(alpha_rq))) {
        if (fresh) return LpStatus::IterationLimit;
        if (!prepare()) return LpStatus::IterationLimit;
        since_refactor = 0;
        fresh = true;
        continue;
      }
      pivot(r, q, alpha_rq, delta, to_lower);
      ++iterations_;
      ++since_refactor;
      fresh = false;
    }
    return LpStatus::IterationLimit;
  }

 private:
  struct Entry {
    int row;
    double val;
  };

  static constexpr long kRefactorInterval = 80;
  static constexpr double kPrimalTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;

  bool is_fixed(int j) const { return lb_[static_cast<std::size_t>(j)] == ub_[static_cast<std::size_t>(j)]; }

  double scaled_objective() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return v;
  }

  LpStatus solve_unconstrained(double cutoff) {
    x_.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) {
      const auto u = static_cast<std::size_t>(j);
      x_[u] = cost_[u] >= 0.0 ? lb_[u] : ub_[u];
    }
    if (objective() > cutoff) return LpStatus::Cutoff;
    return LpStatus::Optimal;
  }

  /// Refactors the basis (or reuses a recent factorization of it), places
  /// nonbasics on their bounds consistently with the reduced costs, and
  /// recomputes primal and dual values.
  bool prepare(bool reuse = false) {
    if (!(reuse && factor_valid_ && pivots_since_factor_ < kRefactorInterval)) {
      factor_valid_ = false;
      if (!refactor()) return false;
      factor_valid_ = true;
      pivots_since_factor_ = 0;
    }
    compute_duals();
    const int total = n_ + m_;
    x_.resize(static_cast<std::size_t>(total));
    for (int j = 0; j < total; ++j) {
      const auto u = static_cast<std::size_t>(j);
      if (state_[u] == State::Basic) continue;
      if (j < n_) {
        if (d_[u] < -kDualTol && state_[u] == State::AtLower) state_[u] = State::AtUpper;
        else if (d_[u] > kDualTol && state_[u] == State::AtUpper) state_[u] = State::AtLower;
      } else {
        // Slacks carry one infinite bound; keep them on the finite one.
        if (!std::isfinite(lb_[u])) state_[u] = State::AtUpper;
        if (!std::isfinite(ub_[u])) state_[u] = State::AtLower;
        const bool wrong = (state_[u] == State::AtLower && d_[u] < -1e-7) || (state_[u] == State::AtUpper && d_[u] > 1e-7);
        if (wrong && !is_fixed(j)) return false;
      }
      x_[u] = state_[u] == State::AtLower ? lb_[u] : ub_[u];
    }
    compute_basic_values();
    return true;
  }

  bool refactor() {
    const auto m = static_cast<std::size_t>(m_);
    binv_.assign(m * m, 0.0);
    std::vector<int> slack_pos(m, -1);  // row -> basis position of its basic slack
    std::vector<int> struct_pos;
    for (int p = 0; p < m_; ++p) {
      const int v = head_[static_cast<std::size_t>(p)];
      if (v >= n_)
        slack_pos[static_cast<std::size_t>(v - n_)] = p;
      else
        struct_pos.push_back(p);
    }
    std::vector<int> free_rows;
    std::vector<int> row_index(m, -1);
    for (int i = 0; i < m_; ++i)
      if (slack_pos[static_cast<std::size_t>(i)] < 0) {
        row_index[static_cast<std::size_t>(i)] = static_cast<int>(free_rows.size());
        free_rows.push_back(i);
      }
    const std::size_t s = struct_pos.size();
    if (free_rows.size() != s) return false;

    // Dense inverse of the structural block restricted to rows without a basic slack.
    std::vector<double> a(s * s, 0.0);
    std::vector<double> inv(s * s, 0.0);
    for (std::size_t c = 0; c < s; ++c) {
      const int var = head_[static_cast<std::size_t>(struct_pos[c])];
      for (const auto& e : cols_[static_cast<std::size_t>(var)]) {
        const int ri = row_index[static_cast<std::size_t>(e.row)];
        if (ri >= 0) a[static_cast<std::size_t>(ri) * s + c] = e.val;
      }
      inv[c * s + c] = 1.0;
    }
    // Gauss-Jordan with row pivoting; afterwards a(perm[c], c) = 1.
    std::vector<std::size_t> perm(s), nz;
    nz.reserve(s);
    for (std::size_t i = 0; i < s; ++i) perm[i] = i;
    for (std::size_t c = 0; c < s; ++c) {
      std::size_t best = c;
      double best_val = std::abs(a[perm[c] * s + c]);
      for (std::size_t i = c + 1; i < s; ++i) {
        const double v = std::abs(a[perm[i] * s + c]);
        if (v > best_val) {
          best_val = v;
          best = i;
        }
      }
      if (best_val < 1e-11) return false;
      std::swap(perm[c], perm[best]);
      const std::size_t pr = perm[c];
      const double piv = a[pr * s + c];
      // Columns left of c are already eliminated; inv rows stay sparse for a while.
      nz.clear();
      for (std::size_t k = c; k < s; ++k) a[pr * s + k] /= piv;
      for (std::size_t k = 0; k < s; ++k)
        if (inv[pr * s + k] != 0.0) {
          inv[pr * s + k] /= piv;
          nz.push_back(k);
        }
      for (std::size_t i = 0; i < s; ++i) {
        const std::size_t row = perm[i];
        if (row == pr) continue;
        const double f = a[row * s + c];
        if (f == 0.0) continue;
        for (std::size_t k = c; k < s; ++k) a[row * s + k] -= f * a[pr * s + k];
        for (std::size_t k : nz) inv[row * s + k] -= f * inv[pr * s + k];
      }
    }
    // B11 y = v  =>  y_c = sum_i inv[perm[c]][i] v_i.
    for (std::size_t c = 0; c < s; ++c) {
      const std::size_t p = static_cast<std::size_t>(struct_pos[c]);
      const std::size_t src = perm[c];
      for (std::size_t i = 0; i < s; ++i) binv_[p * m + static_cast<std::size_t>(free_rows[i])] = inv[src * s + i];
    }
    for (int i = 0; i < m_; ++i) {
      const int p = slack_pos[static_cast<std::size_t>(i)];
      if (p >= 0) binv_[static_cast<std::size_t>(p) * m + static_cast<std::size_t>(i)] = 1.0;
    }
    for (std::size_t c = 0; c < s; ++c) {
      const std::size_t q = static_cast<std::size_t>(struct_pos[c]);
      const int var = head_[q];
      for (const auto& e : cols_[static_cast<std::size_t>(var)]) {
        const int p = slack_pos[static_cast<std::size_t>(e.row)];
        if (p < 0) continue;
        double* dst = &binv_[static_cast<std::size_t>(p) * m];
        const double* src = &binv_[q * m];
        for (int fr : free_rows) dst[fr] -= e.val * src[fr];
      }
    }
    return true;
  }

  void compute_duals() {
    const auto m = static_cast<std::size_t>(m_);
    std::vector<double> y(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
      const double cb = cost_[static_cast<std::size_t>(head_[p])];
      if (cb == 0.0) continue;
      const double* row = &binv_[p * m];
      for (std::size_t i = 0; i < m; ++i) y[i] += cb * row[i];
    }
    d_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == State::Basic) continue;
      double v = cost_[static_cast<std::size_t>(j)];
      for (const auto& e : cols_[static_cast<std::size_t>(j)]) v -= y[static_cast<std::size_t>(e.row)] * e.val;
      d_[static_cast<std::size_t>(j)] = v;
    }
    for (int i = 0; i < m_; ++i)
      if (state_[static_cast<std::size_t>(n_ + i)] != State::Basic) d_[static_cast<std::size_t>(n_ + i)] = -y[static_cast<std::size_t>(i)];
  }

  void compute_basic_values() {
    const auto m = static_cast<std::size_t>(m_);
    std::vector<double> r(rhs_);
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == State::Basic) continue;
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (const auto& e : cols_[static_cast<std::size_t>(j)]) r[static_cast<std::size_t>(e.row)] -= e.val * xj;
    }
    for (int i = 0; i < m_; ++i) {
      const auto s = static_cast<std::size_t>(n_ + i);
      if (state_[s] != State::Basic) r[static_cast<std::size_t>(i)] -= x_[s];
    }
    for (std::size_t p = 0; p < m; ++p) {
      const double* row = &binv_[p * m];
      double v = 0.0;
      for (std::size_t i = 0; i < m; ++i) v += row[i] * r[i];
      x_[static_cast<std::size_t>(head_[p])] = v;
    }
  }

  int choose_leaving_row() const {
    int best = -1;
    double best_score = 0.0;
    for (int p = 0; p < m_; ++p) {
      const auto v = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
      double infeas = 0.0;
      if (x_[v] < lb_[v] - kPrimalTol)
        infeas = lb_[v] - x_[v];
      else if (x_[v] > ub_[v] + kPrimalTol)
        infeas = x_[v] - ub_[v];
      if (infeas == 0.0) continue;
      const double score = infeas * infeas / weights_[static_cast<std::size_t>(p)];
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }
    return best;
  }

  double row_alpha(const double* rho, int j) const {
    if (j >= n_) return rho[j - n_];
    double a = 0.0;
    for (const auto& e : cols_[static_cast<std::size_t>(j)]) a += rho[e.row] * e.val;
    return a;
  }

  /// Harris two-pass ratio test; `dir` is the sign of the leaving variable's infeasibility.
  int ratio_test(const double* rho, double dir) {
    touched_.clear();
    const int total = n_ + m_;
    mark_.assign(static_cast<std::size_t>(total), 0);
    auto consider = [&](int j) {
      const auto u = static_cast<std::size_t>(j);
      if (mark_[u] || state_[u] == State::Basic || is_fixed(j)) return;
      mark_[u] = 1;
      const double a = row_alpha(rho, j);
      if (a != 0.0) touched_.push_back({j, a, 0.0});
    };
    for (int i : rho_nz_) {
      consider(n_ + i);
      for (int j : row_cols(i)) consider(j);
    }
    double tmax = kInf;
    bool any = false;
    for (auto& c : touched_) {
      const auto u = static_cast<std::size_t>(c.var);
      const bool at_lower = state_[u] == State::AtLower;
      if (std::abs(c.alpha) < kPivotTol) continue;
      if (!((at_lower && dir * c.alpha > 0.0) || (!at_lower && dir * c.alpha < 0.0))) continue;
      c.dj = at_lower ? std::max(d_[u], 0.0) : std::max(-d_[u], 0.0);
      tmax = std::min(tmax, (c.dj + kDualTol) / std::abs(c.alpha));
      any = true;
    }
    if (!any) return -1;
    int best = -1;
    double best_alpha = 0.0;
    for (const auto& c : touched_) {
      const auto u = static_cast<std::size_t>(c.var);
      const bool at_lower = state_[u] == State::AtLower;
      if (std::abs(c.alpha) < kPivotTol) continue;
      if (!((at_lower && dir * c.alpha > 0.0) || (!at_lower && dir * c.alpha < 0.0))) continue;
      if (c.dj / std::abs(c.alpha) > tmax) continue;
      const double aa = std::abs(c.alpha);
      if (aa > best_alpha || (aa == best_alpha && c.var < best)) {
        best_alpha = aa;
        best = c.var;
      }
    }
    return best;
  }

  const std::vector<int>& row_cols(int i) {
    if (rows_.empty()) {
      rows_.assign(static_cast<std::size_t>(m_), {});
      for (int j = 0; j < n_; ++j)
        for (const auto& e : cols_[static_cast<std::size_t>(j)]) rows_[static_cast<std::size_t>(e.row)].push_back(j);
    }
    return rows_[static_cast<std::size_t>(i)];
  }

  void compute_column(int q) {
    const auto m = static_cast<std::size_t>(m_);
    col_.assign(m, 0.0);
    if (q >= n_) {
      const auto i = static_cast<std::size_t>(q - n_);
      for (std::size_t p = 0; p < m; ++p) col_[p] = binv_[p * m + i];
      return;
    }
    for (const auto& e : cols_[static_cast<std::size_t>(q)]) {
      const auto i = static_cast<std::size_t>(e.row);
      for (std::size_t p = 0; p < m; ++p) col_[p] += binv_[p * m + i] * e.val;
    }
  }

  void pivot(int r, int q, double alpha_rq, double delta, bool to_lower) {
    const auto m = static_cast<std::size_t>(m_);
    const auto uq = static_cast<std::size_t>(q);
    const int leaving = head_[static_cast<std::size_t>(r)];
    const auto ul = static_cast<std::size_t>(leaving);

    // Dual update over all columns touched by rho.
    const bool q_lower = state_[uq] == State::AtLower;
    const double dq = q_lower ? std::max(d_[uq], 0.0) : std::min(d_[uq], 0.0);
    const double theta_d = dq / alpha_rq;
    if (theta_d != 0.0)
      for (const auto& c : touched_) d_[static_cast<std::size_t>(c.var)] -= theta_d * c.alpha;
    d_[uq] = 0.0;
    d_[ul] = -theta_d;

    // Primal update.
    const double theta_p = delta / alpha_rq;
    for (std::size_t p = 0; p < m; ++p)
      if (col_[p] != 0.0) x_[static_cast<std::size_t>(head_[p])] -= theta_p * col_[p];
    x_[uq] += theta_p;
    x_[ul] = to_lower ? lb_[ul] : ub_[ul];

    // Basis inverse update.
    double* prow = &binv_[static_cast<std::size_t>(r) * m];
    for (int i : rho_nz_) prow[i] /= alpha_rq;
    for (std::size_t p = 0; p < m; ++p) {
      if (p == static_cast<std::size_t>(r) || col_[p] == 0.0) continue;
      double* row = &binv_[p * m];
      const double f = col_[p];
      for (int i : rho_nz_) row[i] -= f * prow[i];
    }

    // Dual Devex weights.
    const double wr = weights_[static_cast<std::size_t>(r)];
    for (std::size_t p = 0; p < m; ++p) {
      if (p == static_cast<std::size_t>(r) || col_[p] == 0.0) continue;
      const double ratio = col_[p] / alpha_rq;
      weights_[p] = std::max(weights_[p], ratio * ratio * wr);
    }
    weights_[static_cast<std::size_t>(r)] = std::max(wr / (alpha_rq * alpha_rq), 1.0);

    head_[static_cast<std::size_t>(r)] = q;
    state_[uq] = State::Basic;
    state_[ul] = to_lower ? State::AtLower : State::AtUpper;
    if (is_fixed(leaving)) state_[ul] = State::AtLower;
  }

  int n_;
  int m_;
  double scale_ = 1.0;
  double offset_ = 0.0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<std::vector<int>> rows_;
  std::vector<double> lb_, ub_, cost_, rhs_;
  std::vector<int> head_;
  std::vector<State> state_;
  std::vector<double> x_, d_, binv_, col_, weights_;
  std::vector<int> rho_nz_;
  struct Candidate {
    int var;
    double alpha;
    double dj;
  };
  std::vector<Candidate> touched_;
  std::vector<char> mark_;
  long iterations_ = 0;
  bool factor_valid_ = false;
  long pivots_since_factor_ = 0;
};

}  // namespace harvest::milp
