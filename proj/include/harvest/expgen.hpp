#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "harvest/instance.hpp"
#include "harvest/instance_io.hpp"

namespace harvest {

struct GenParams {
  std::uint64_t seed = 0;
  int fields = 50;
  int depots = 3;
  int crops = 3;
  double sigma_depot_km = 10.0;
  double sigma_field_km = 15.0;
  double rate_eur_per_km = 30.0;
  double fixed_crop_cost_eur = 1000.0;
  double maintenance_eur = 0.0;
  std::vector<double> base_revenue_eur_per_ha{570.0, 600.0, 750.0};
  int revenue_setting = 1;
};

/// mt19937_64 with explicit uniform and Box-Muller normal transforms, so streams
/// are identical across standard libraries.
class GenRng {
 public:
  static constexpr const char* kName = "mt19937_64/u53/box-muller";

  explicit GenRng(std::uint64_t seed) : engine_(seed) {}

  /// Standard uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline void validate_params(const GenParams& p) {
  if (p.fields < 1 || p.depots < 1 || p.crops < 1) throw ValidationError("generator needs L, D, K >= 1");
  if (!(p.sigma_depot_km > 0.0) || !(p.sigma_field_km > 0.0)) throw ValidationError("standard deviations must be positive");
  if (!(p.rate_eur_per_km > 0.0)) throw ValidationError("travel rate must be positive");
  if (!(p.fixed_crop_cost_eur > 0.0)) throw ValidationError("crop cost must be positive");
  if (p.maintenance_eur < 0.0) throw ValidationError("maintenance must be nonnegative");
  if (p.base_revenue_eur_per_ha.size() != static_cast<std::size_t>(p.crops))
    throw ShapeError("base revenue needs one entry per crop");
  for (double r : p.base_revenue_eur_per_ha)
    if (!(r > 0.0)) throw ValidationError("base revenues must be positive");
  if (p.revenue_setting != 1 && p.revenue_setting != 2) throw ValidationError("revenue setting must be 1 or 2");
}

inline std::vector<std::string> default_crop_names(int K) {
  if (K == 3) return {"barley", "rapeseed", "wheat"};
  std::vector<std::string> names;
  for (int k = 0; k < K; ++k) names.push_back("crop" + std::to_string(k));
  return names;
}

/// Random instance: Gaussian depot and field positions around the origin,
/// max(1, floor(5u)) harvesters per depot, and one of two revenue settings.
inline Instance generate_instance(const GenParams& p) {
  validate_params(p);
  GenRng rng(p.seed);
  Instance inst;
  inst.crops.names = default_crop_names(p.crops);
  inst.crops.fixed_cost_eur = p.fixed_crop_cost_eur;
  for (int d = 0; d < p.depots; ++d) {
    Depot dep;
    dep.id = d;
    dep.position.x_km = p.sigma_depot_km * rng.normal();
    dep.position.y_km = p.sigma_depot_km * rng.normal();
    dep.maintenance_eur = p.maintenance_eur;
    const int n = std::max(1, static_cast<int>(std::floor(5.0 * rng.uniform())));
    dep.harvesters.assign(static_cast<std::size_t>(p.crops), n);
    inst.depots.push_back(std::move(dep));
  }
  for (int l = 0; l < p.fields; ++l) {
    Field f;
    f.id = l;
    f.position.x_km = p.sigma_field_km * rng.normal();
    f.position.y_km = p.sigma_field_km * rng.normal();
    f.size_ha = std::max(20.0 + 10.0 * rng.normal(), 1.0);
    f.revenue_eur.resize(static_cast<std::size_t>(p.crops));
    for (int k = 0; k < p.crops; ++k) {
      const double base = p.base_revenue_eur_per_ha[static_cast<std::size_t>(k)];
      f.revenue_eur[static_cast<std::size_t>(k)] =
          p.revenue_setting == 1 ? f.size_ha * base : std::max(20.0 + 10.0 * rng.normal(), 1.0) * base;
    }
    inst.fields.push_back(std::move(f));
  }
  inst.cost = RateCost{p.rate_eur_per_km, {}};
  return inst;
}

inline json generation_record(const GenParams& p) {
  return {{"seed", p.seed},
          {"rng", GenRng::kName},
          {"fields", p.fields},
          {"depots", p.depots},
          {"crops", p.crops},
          {"sigma_depot_km", p.sigma_depot_km},
          {"sigma_field_km", p.sigma_field_km},
          {"rate_eur_per_km", p.rate_eur_per_km},
          {"fixed_crop_cost_eur", p.fixed_crop_cost_eur},
          {"maintenance_eur", p.maintenance_eur},
          {"base_revenue_eur_per_ha", p.base_revenue_eur_per_ha},
          {"revenue_setting", p.revenue_setting}};
}

/// Instance JSON with the generator block appended.
inline json generated_instance_json(const GenParams& p) {
  json j = instance_to_json(generate_instance(p));
  j["_gen"] = generation_record(p);
  return j;
}

}  // namespace harvest
