#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "harvest/errors.hpp"

namespace harvest::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool integer = true;
};

enum class Relation { LessEqual, Equal, GreaterEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

/// Affine expression sum(coef * var) + constant.
struct LinearExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  LinearExpr() = default;
  LinearExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)

  static LinearExpr var(int index, double coef = 1.0) {
    LinearExpr e;
    e.terms.push_back({index, coef});
    return e;
  }

  LinearExpr& add(int index, double coef) {
    terms.push_back({index, coef});
    return *this;
  }
  LinearExpr& operator+=(const LinearExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }
  LinearExpr& operator-=(const LinearExpr& o) { return *this += o * -1.0; }
  LinearExpr& operator*=(double s) {
    for (auto& t : terms) t.coef *= s;
    constant *= s;
    return *this;
  }
  friend LinearExpr operator*(LinearExpr e, double s) { return e *= s; }
  friend LinearExpr operator*(double s, LinearExpr e) { return e *= s; }
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }

  /// Merges duplicate variables and drops zero coefficients.
  LinearExpr normalized() const {
    LinearExpr out;
    out.constant = constant;
    std::vector<Term> sorted = terms;
    std::sort(sorted.begin(), sorted.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    for (const auto& t : sorted) {
      if (!out.terms.empty() && out.terms.back().var == t.var)
        out.terms.back().coef += t.coef;
      else
        out.terms.push_back(t);
    }
    std::erase_if(out.terms, [](const Term& t) { return t.coef == 0.0; });
    return out;
  }

  double evaluate(const std::vector<double>& x) const {
    double v = constant;
    for (const auto& t : terms) v += t.coef * x[static_cast<std::size_t>(t.var)];
    return v;
  }
};

struct Constraint {
  std::vector<Term> terms;  // normalized, no constant
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  std::string group;

  double activity(const std::vector<double>& x) const {
    double v = 0.0;
    for (const auto& t : terms) v += t.coef * x[static_cast<std::size_t>(t.var)];
    return v;
  }
  bool satisfied(const std::vector<double>& x, double tol) const {
    const double a = activity(x);
    switch (relation) {
      case Relation::LessEqual: return a <= rhs + tol;
      case Relation::GreaterEqual: return a >= rhs - tol;
      case Relation::Equal: return std::abs(a - rhs) <= tol;
    }
    return false;
  }
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounded-integer linear program, minimization sense.
class IntegerProgram {
 public:
  int add_variable(std::string name, double lower, double upper, bool integer) {
    vars_.push_back({std::move(name), lower, upper, integer});
    objective_.push_back(0.0);
    return static_cast<int>(vars_.size()) - 1;
  }
  int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, true); }
  int add_integer(std::string name, double lower, double upper) {
    return add_variable(std::move(name), lower, upper, true);
  }
  int add_continuous(std::string name, double lower, double upper) {
    return add_variable(std::move(name), lower, upper, false);
  }

  /// Adds lhs (rel) rhs; constants on the left are moved to the right. Returns the row index.
  int add_constraint(const LinearExpr& lhs, Relation rel, double rhs, std::string group = {}) {
    const LinearExpr e = lhs.normalized();
    for (const auto& t : e.terms)
      if (t.var < 0 || t.var >= num_variables()) throw ModelError("constraint references unknown variable");
    rows_.push_back({e.terms, rel, rhs - e.constant, std::move(group)});
    return static_cast<int>(rows_.size()) - 1;
  }

  void set_objective(int var, double coef) { objective_.at(static_cast<std::size_t>(var)) = coef; }
  void add_objective(int var, double coef) { objective_.at(static_cast<std::size_t>(var)) += coef; }
  void add_objective_constant(double c) { objective_constant_ += c; }

  void set_bounds(int var, double lower, double upper) {
    auto& v = vars_.at(static_cast<std::size_t>(var));
    v.lower = lower;
    v.upper = upper;
  }
  void set_relation(int row, Relation rel) { rows_.at(static_cast<std::size_t>(row)).relation = rel; }
  void set_rhs(int row, double rhs) { rows_.at(static_cast<std::size_t>(row)).rhs = rhs; }
  /// Overwrites the coefficient of var in a row; 0 removes the term.
  void set_coefficient(int row, int var, double coef) {
    auto& terms = rows_.at(static_cast<std::size_t>(row)).terms;
    if (var < 0 || var >= num_variables()) throw ModelError("constraint references unknown variable");
    const auto it = std::find_if(terms.begin(), terms.end(), [&](const Term& t) { return t.var == var; });
    if (coef == 0.0) {
      if (it != terms.end()) terms.erase(it);
    } else if (it != terms.end()) {
      it->coef = coef;
    } else {
      terms.push_back({var, coef});
    }
  }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_equalities() const {
    return static_cast<int>(std::count_if(rows_.begin(), rows_.end(), [](const Constraint& c) { return c.relation == Relation::Equal; }));
  }
  int num_inequalities() const { return num_constraints() - num_equalities(); }

  const Variable& variable(int i) const { return vars_.at(static_cast<std::size_t>(i)); }
  const std::vector<Variable>& variables() const { return vars_; }
  const Constraint& constraint(int i) const { return rows_.at(static_cast<std::size_t>(i)); }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  double objective_value(const std::vector<double>& x) const {
    double v = objective_constant_;
    for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
    return v;
  }

  /// Interval bounds of an expression from the variable bounds.
  Interval bounds(const LinearExpr& e) const {
    Interval b{e.constant, e.constant};
    for (const auto& t : e.terms) {
      const auto& v = vars_.at(static_cast<std::size_t>(t.var));
      if (t.coef >= 0) {
        b.lower += t.coef * v.lower;
        b.upper += t.coef * v.upper;
      } else {
        b.lower += t.coef * v.upper;
        b.upper += t.coef * v.lower;
      }
    }
    return b;
  }

  /// Throws ModelError when an invariant of the model is violated.
  void validate() const {
    for (const auto& v : vars_) {
      if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) throw ModelError("variable " + v.name + " is unbounded");
      if (v.lower > v.upper) throw ModelError("variable " + v.name + " has empty domain");
    }
    for (const auto& r : rows_)
      for (const auto& t : r.terms)
        if (t.var < 0 || t.var >= num_variables()) throw ModelError("constraint references unknown variable");
  }

  /// True if x satisfies bounds, integrality and every constraint within tol.
  bool is_feasible(const std::vector<double>& x, double tol = 1e-6) const {
    if (x.size() != vars_.size()) return false;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      if (x[j] < vars_[j].lower - tol || x[j] > vars_[j].upper + tol) return false;
      if (vars_[j].integer && std::abs(x[j] - std::round(x[j])) > tol) return false;
    }
    return std::all_of(rows_.begin(), rows_.end(), [&](const Constraint& c) { return c.satisfied(x, tol); });
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
};

namespace detail {

inline void require_binary(const IntegerProgram& model, int var, const char* role) {
  const auto& v = model.variable(var);
  if (!v.integer || v.lower < 0.0 || v.upper > 1.0)
    throw ModelError(std::string(role) + " must be a binary variable, got " + v.name);
}

inline Interval finite_bounds(const IntegerProgram& model, const LinearExpr& f) {
  const Interval b = model.bounds(f);
  if (!std::isfinite(b.lower) || !std::isfinite(b.upper))
    throw ModelError("expression has no finite bounds; big-M linearization needs them");
  return b;
}

}  // namespace detail

/// b = 1 iff f <= 0:  f <= fmax (1 - b),  f >= eps + (fmin - eps) b.
inline void add_reified_leq(IntegerProgram& model, int b, const LinearExpr& f, double epsilon = 0.5,
                            const std::string& group = "logic") {
  detail::require_binary(model, b, "indicator");
  if (!(epsilon > 0.0)) throw ModelError("epsilon must be positive");
  const Interval fb = detail::finite_bounds(model, f);
  model.add_constraint(f + LinearExpr::var(b, fb.upper), Relation::LessEqual, fb.upper, group);
  model.add_constraint(f - LinearExpr::var(b, fb.lower - epsilon), Relation::GreaterEqual, epsilon, group);
}

/// b3 = b1 * b2:  b1 + b2 - b3 <= 1,  b3 <= b1,  b3 <= b2.
inline void add_binary_and(IntegerProgram& model, int b1, int b2, int b3, const std::string& group = "logic") {
  detail::require_binary(model, b1, "b1");
  detail::require_binary(model, b2, "b2");
  detail::require_binary(model, b3, "b3");
  model.add_constraint(LinearExpr::var(b1) + LinearExpr::var(b2) - LinearExpr::var(b3), Relation::LessEqual, 1.0, group);
  model.add_constraint(LinearExpr::var(b3) - LinearExpr::var(b1), Relation::LessEqual, 0.0, group);
  model.add_constraint(LinearExpr::var(b3) - LinearExpr::var(b2), Relation::LessEqual, 0.0, group);
}

/// y = b * f:  y <= fmax b,  y >= fmin b,  y <= f - fmin (1 - b),  y >= f - fmax (1 - b).
inline void add_conditional_value(IntegerProgram& model, int y, int b, const LinearExpr& f,
                                  const std::string& group = "logic") {
  detail::require_binary(model, b, "indicator");
  const Interval fb = detail::finite_bounds(model, f);
  const LinearExpr yv = LinearExpr::var(y);
  model.add_constraint(yv - LinearExpr::var(b, fb.upper), Relation::LessEqual, 0.0, group);
  model.add_constraint(yv - LinearExpr::var(b, fb.lower), Relation::GreaterEqual, 0.0, group);
  // y - f - fmin b <= -fmin
  model.add_constraint(yv - f - LinearExpr::var(b, fb.lower), Relation::LessEqual, -fb.lower, group);
  // y - f - fmax b >= -fmax
  model.add_constraint(yv - f - LinearExpr::var(b, fb.upper), Relation::GreaterEqual, -fb.upper, group);
}

/// Writes the model in CPLEX LP text format for cross-checking with third-party solvers.
inline void write_lp_format(const IntegerProgram& model, std::ostream& os) {
  auto name = [&](int j) {
    std::string n = model.variable(j).name;
    for (char& c : n)
      if (c == ',' || c == ' ' || c == '[' || c == ']' || c == '(' || c == ')') c = '_';
    return n;
  };
  auto write_terms = [&](const std::vector<Term>& terms) {
    if (terms.empty()) {
      os << " 0 " << name(0);
      return;
    }
    for (const auto& t : terms) os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << ' ' << name(t.var);
  };
  os.precision(17);
  os << "\\ objective constant: " << model.objective_constant() << "\nMinimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < model.num_variables(); ++j)
    if (model.objective()[static_cast<std::size_t>(j)] != 0.0) obj.push_back({j, model.objective()[static_cast<std::size_t>(j)]});
  write_terms(obj);
  os << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraint(i);
    os << ' ' << (c.group.empty() ? "c" : c.group) << '_' << i << ':';
    write_terms(c.terms);
    os << (c.relation == Relation::LessEqual ? " <= " : c.relation == Relation::Equal ? " = " : " >= ") << c.rhs << '\n';
  }
  os << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j)
    os << ' ' << model.variable(j).lower << " <= " << name(j) << " <= " << model.variable(j).upper << '\n';
  os << "General\n";
  for (int j = 0; j < model.num_variables(); ++j)
    if (model.variable(j).integer) os << ' ' << name(j) << '\n';
  os << "End\n";
}

}  // namespace harvest::milp
