#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "harvest/errors.hpp"
#include "harvest/matrix.hpp"

namespace harvest {

struct Point {
  double x_km = 0.0;
  double y_km = 0.0;
};

inline double distance_km(const Point& a, const Point& b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

struct Field {
  int id = 0;
  Point position;
  double size_ha = 1.0;
  std::vector<double> revenue_eur;  // one entry per crop
};

struct Depot {
  int id = 0;
  Point position;
  double maintenance_eur = 0.0;
  std::vector<int> harvesters;  // one count per crop
};

/// Crops ordered by harvest time: lower index is harvested earlier.
struct CropCatalog {
  std::vector<std::string> names;
  double fixed_cost_eur = 0.0;
};

/// Per-harvester travel cost proportional to planar Euclidean distance.
struct RateCost {
  double eur_per_km = 30.0;
  std::vector<double> crop_offset_eur;  // optional additive offset per crop, empty means zero
};

/// Explicit per-harvester travel costs, one symmetric matrix family per crop.
struct MatrixCost {
  std::vector<Matrix> field_field;  // K matrices of size L x L
  std::vector<Matrix> depot_field;  // K matrices of size D x L
};

using CostSpec = std::variant<RateCost, MatrixCost>;

struct Instance {
  CropCatalog crops;
  std::vector<Depot> depots;
  std::vector<Field> fields;
  CostSpec cost = RateCost{};

  std::size_t num_crops() const { return crops.names.size(); }
  std::size_t num_depots() const { return depots.size(); }
  std::size_t num_fields() const { return fields.size(); }

  /// N^{harv,k}: harvesters for crop k summed over all depots.
  int total_harvesters(std::size_t crop) const {
    int total = 0;
    for (const auto& d : depots)
      if (crop < d.harvesters.size()) total += d.harvesters[crop];
    return total;
  }

  /// Copy of this instance restricted to the given fields, renumbered 0..n-1 in the given order.
  Instance restricted_to(const std::vector<int>& field_indices) const {
    Instance out;
    out.crops = crops;
    out.depots = depots;
    out.fields.reserve(field_indices.size());
    for (std::size_t i = 0; i < field_indices.size(); ++i) {
      Field f = fields.at(static_cast<std::size_t>(field_indices[i]));
      f.id = static_cast<int>(i);
      out.fields.push_back(std::move(f));
    }
    if (const auto* m = std::get_if<MatrixCost>(&cost)) {
      MatrixCost sub;
      for (const auto& ff : m->field_field) sub.field_field.push_back(ff.submatrix(field_indices));
      for (const auto& df : m->depot_field) {
        Matrix s(df.rows(), field_indices.size());
        for (std::size_t d = 0; d < df.rows(); ++d)
          for (std::size_t j = 0; j < field_indices.size(); ++j)
            s(d, j) = df(d, static_cast<std::size_t>(field_indices[j]));
        sub.depot_field.push_back(std::move(s));
      }
      out.cost = std::move(sub);
    } else {
      out.cost = cost;
    }
    return out;
  }
};

/// All travel-cost coefficient families for one instance.
///
/// base_*: per-harvester costs c~. Scaled families multiply by N^{harv,k}, the
/// total harvester count for crop k. The assembly family sums each depot's own
/// harvesters times its own leg cost and is used when harvesters start from
/// (or return to) several depots. Immutable after construction.
class CostModel {
 public:
  CostModel() = default;

  CostModel(std::vector<Matrix> base_field_field, std::vector<Matrix> base_depot_field,
            std::vector<std::vector<int>> harvesters_by_depot)
      : base_ff_(std::move(base_field_field)),
        base_df_(std::move(base_depot_field)),
        harvesters_(std::move(harvesters_by_depot)) {
    const std::size_t k_count = base_ff_.size();
    if (base_df_.size() != k_count) throw ShapeError("depot-field cost family needs one matrix per crop");
    total_.assign(k_count, 0);
    for (std::size_t k = 0; k < k_count; ++k)
      for (const auto& h : harvesters_) {
        if (h.size() != k_count) throw ShapeError("harvester vector length must equal crop count");
        total_[k] += h[k];
      }
    for (std::size_t k = 0; k < k_count; ++k) {
      const double n = total_[k];
      ff_.push_back(base_ff_[k].scaled(n));
      df_.push_back(base_df_[k].scaled(n));
      const std::size_t depots = base_df_[k].rows();
      const std::size_t fields = base_df_[k].cols();
      std::vector<double> agg(fields, 0.0);
      for (std::size_t j = 0; j < fields; ++j)
        for (std::size_t d = 0; d < depots; ++d) agg[j] += harvesters_[d][k] * base_df_[k](d, j);
      assembly_.push_back(std::move(agg));
    }
  }

  std::size_t num_crops() const { return base_ff_.size(); }
  std::size_t num_fields() const { return base_ff_.empty() ? 0 : base_ff_[0].rows(); }
  std::size_t num_depots() const { return base_df_.empty() ? 0 : base_df_[0].rows(); }

  int total_harvesters(std::size_t k) const { return total_[k]; }
  int harvesters_at(std::size_t d, std::size_t k) const { return harvesters_[d][k]; }

  const Matrix& base_field_field(std::size_t k) const { return base_ff_[k]; }
  const Matrix& base_depot_field(std::size_t k) const { return base_df_[k]; }
  const Matrix& field_field_matrix(std::size_t k) const { return ff_[k]; }

  /// c_ij^k
  double field_field(std::size_t k, std::size_t i, std::size_t j) const { return ff_[k](i, j); }
  /// c_dj^k
  double depot_field(std::size_t k, std::size_t d, std::size_t j) const { return df_[k](d, j); }
  /// c_jd^k
  double field_depot(std::size_t k, std::size_t j, std::size_t d) const { return df_[k](d, j); }
  /// c_dj^{k,kmin}: harvesters assemble at field j from every depot.
  double assembly(std::size_t k, std::size_t j) const { return assembly_[k][j]; }
  /// c_jd^{k,kmax}: harvesters disperse from field j to their home depots.
  double dispersal(std::size_t k, std::size_t j) const { return assembly_[k][j]; }

 private:
  std::vector<Matrix> base_ff_;
  std::vector<Matrix> base_df_;
  std::vector<std::vector<int>> harvesters_;
  std::vector<int> total_;
  std::vector<Matrix> ff_;
  std::vector<Matrix> df_;
  std::vector<std::vector<double>> assembly_;
};

namespace detail {

inline bool is_symmetric(const Matrix& m, double tol = 1e-9) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

}  // namespace detail

/// Derives every cost family of the instance, in rate-based or explicit-matrix mode
/// depending on the instance's cost specification.
inline CostModel build_cost_model(const Instance& inst) {
  const std::size_t K = inst.num_crops();
  const std::size_t D = inst.num_depots();
  const std::size_t L = inst.num_fields();
  if (K == 0) throw ShapeError("instance has no crops");

  std::vector<std::vector<int>> harvesters;
  for (const auto& d : inst.depots) {
    if (d.harvesters.size() != K)
      throw ShapeError("depot " + std::to_string(d.id) + " harvester vector has length " +
                       std::to_string(d.harvesters.size()) + ", expected " + std::to_string(K));
    harvesters.push_back(d.harvesters);
  }

  std::vector<Matrix> ff;
  std::vector<Matrix> df;
  if (const auto* rate = std::get_if<RateCost>(&inst.cost)) {
    if (!(rate->eur_per_km >= 0.0) || !std::isfinite(rate->eur_per_km))
      throw ValidationError("travel rate must be a finite nonnegative number");
    if (!rate->crop_offset_eur.empty() && rate->crop_offset_eur.size() != K)
      throw ShapeError("crop offset vector must have one entry per crop");
    for (std::size_t k = 0; k < K; ++k) {
      const double offset = rate->crop_offset_eur.empty() ? 0.0 : rate->crop_offset_eur[k];
      if (offset < 0.0) throw ValidationError("crop offsets must be nonnegative");
      Matrix f(L, L);
      for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j)
          if (i != j)
            f(i, j) = rate->eur_per_km * distance_km(inst.fields[i].position, inst.fields[j].position) + offset;
      Matrix g(D, L);
      for (std::size_t d = 0; d < D; ++d)
        for (std::size_t j = 0; j < L; ++j)
          g(d, j) = rate->eur_per_km * distance_km(inst.depots[d].position, inst.fields[j].position) + offset;
      ff.push_back(std::move(f));
      df.push_back(std::move(g));
    }
  } else {
    const auto& m = std::get<MatrixCost>(inst.cost);
    if (m.field_field.size() != K || m.depot_field.size() != K)
      throw ShapeError("explicit cost matrices must be given for each of the " + std::to_string(K) + " crops");
    for (std::size_t k = 0; k < K; ++k) {
      const auto& f = m.field_field[k];
      const auto& g = m.depot_field[k];
      if (f.rows() != L || f.cols() != L) throw ShapeError("field-field matrix of crop " + std::to_string(k) + " must be L x L");
      if (g.rows() != D || g.cols() != L) throw ShapeError("depot-field matrix of crop " + std::to_string(k) + " must be D x L");
      if (!detail::is_symmetric(f)) throw ValidationError("field-field matrix of crop " + std::to_string(k) + " is not symmetric");
      for (double v : f.data())
        if (!(v >= 0.0)) throw ValidationError("explicit costs must be nonnegative");
      for (double v : g.data())
        if (!(v >= 0.0)) throw ValidationError("explicit costs must be nonnegative");
      ff.push_back(f);
      df.push_back(g);
    }
  }
  return CostModel(std::move(ff), std::move(df), std::move(harvesters));
}

struct Diagnostic {
  std::string code;
  std::string message;
};

namespace detail {

inline void check_triangle(const Matrix& ff, const Matrix& df, std::size_t crop, std::vector<Diagnostic>& out) {
  constexpr double tol = 1e-9;
  const std::size_t L = ff.rows();
  auto report = [&](const std::string& what) {
    out.push_back({"triangle", "crop " + std::to_string(crop) + ": " + what});
  };
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i + 1; j < L; ++j)
      for (std::size_t m = 0; m < L; ++m) {
        if (m == i || m == j) continue;
        if (ff(i, j) > ff(i, m) + ff(m, j) + tol)
          report("c(" + std::to_string(i) + "," + std::to_string(j) + ") exceeds path via field " + std::to_string(m));
      }
  for (std::size_t d = 0; d < df.rows(); ++d)
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j) {
        if (i == j) continue;
        if (df(d, j) > df(d, i) + ff(i, j) + tol)
          report("depot " + std::to_string(d) + " leg to field " + std::to_string(j) + " exceeds path via field " +
                 std::to_string(i));
        if (j > i && ff(i, j) > df(d, i) + df(d, j) + tol)
          report("c(" + std::to_string(i) + "," + std::to_string(j) + ") exceeds path via depot " + std::to_string(d));
      }
}

}  // namespace detail

/// Lists every violated instance invariant; an empty result means the instance is valid.
inline std::vector<Diagnostic> validate_instance(const Instance& inst) {
  std::vector<Diagnostic> out;
  const std::size_t K = inst.num_crops();
  if (K == 0) out.push_back({"shape", "no crops defined"});
  if (!(inst.crops.fixed_cost_eur >= 0.0)) out.push_back({"crop_cost", "fixed crop cost must be nonnegative"});

  for (const auto& f : inst.fields) {
    const std::string tag = "field " + std::to_string(f.id);
    if (!(f.size_ha > 0.0)) out.push_back({"size", tag + " has nonpositive size"});
    if (f.revenue_eur.size() != K) out.push_back({"shape", tag + " revenue vector length differs from crop count"});
    for (double r : f.revenue_eur)
      if (!std::isfinite(r)) out.push_back({"revenue", tag + " has a non-finite revenue"});
    if (!std::isfinite(f.position.x_km) || !std::isfinite(f.position.y_km))
      out.push_back({"position", tag + " has a non-finite position"});
  }
  for (const auto& d : inst.depots) {
    const std::string tag = "depot " + std::to_string(d.id);
    if (!(d.maintenance_eur >= 0.0)) out.push_back({"maintenance", tag + " has negative maintenance cost"});
    if (d.harvesters.size() != K) out.push_back({"shape", tag + " harvester vector length differs from crop count"});
    for (int h : d.harvesters)
      if (h < 0) out.push_back({"harvesters", tag + " has a negative harvester count"});
  }
  if (inst.depots.empty()) out.push_back({"shape", "no depots defined"});
  for (std::size_t k = 0; k < K; ++k)
    if (inst.total_harvesters(k) < 1)
      out.push_back({"harvesters", "crop " + std::to_string(k) + " has no harvester at any depot"});

  if (!out.empty()) return out;  // cost checks need consistent shapes

  try {
    const CostModel cm = build_cost_model(inst);
    for (std::size_t k = 0; k < K; ++k) detail::check_triangle(cm.base_field_field(k), cm.base_depot_field(k), k, out);
  } catch (const ShapeError& e) {
    out.push_back({"shape", e.what()});
  } catch (const ValidationError& e) {
    out.push_back({"cost", e.what()});
  }
  return out;
}

}  // namespace harvest
