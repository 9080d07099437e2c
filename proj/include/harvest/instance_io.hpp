#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "harvest/instance.hpp"

namespace harvest {

using json = nlohmann::json;

namespace detail {

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ShapeError(std::string(what) + " must be a 2-d array");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ShapeError(std::string(what) + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace detail

inline json instance_to_json(const Instance& inst) {
  json j;
  j["crops"] = {{"names", inst.crops.names}, {"fixed_cost_eur", inst.crops.fixed_cost_eur}};
  j["depots"] = json::array();
  for (const auto& d : inst.depots)
    j["depots"].push_back({{"id", d.id},
                           {"x_km", d.position.x_km},
                           {"y_km", d.position.y_km},
                           {"maintenance_eur", d.maintenance_eur},
                           {"harvesters", d.harvesters}});
  j["fields"] = json::array();
  for (const auto& f : inst.fields)
    j["fields"].push_back({{"id", f.id},
                           {"x_km", f.position.x_km},
                           {"y_km", f.position.y_km},
                           {"size_ha", f.size_ha},
                           {"revenue_eur", f.revenue_eur}});
  if (const auto* rate = std::get_if<RateCost>(&inst.cost)) {
    j["cost"] = {{"rate_eur_per_km", rate->eur_per_km}};
    if (!rate->crop_offset_eur.empty()) j["cost"]["crop_offset_eur"] = rate->crop_offset_eur;
  } else {
    const auto& m = std::get<MatrixCost>(inst.cost);
    json ff = json::array();
    json df = json::array();
    for (const auto& x : m.field_field) ff.push_back(detail::matrix_to_json(x));
    for (const auto& x : m.depot_field) df.push_back(detail::matrix_to_json(x));
    j["cost"] = {{"matrices", {{"field_field", ff}, {"depot_field", df}}}};
  }
  return j;
}

/// Parses the instance schema; structural problems raise ShapeError, bad values ValidationError.
inline Instance instance_from_json(const json& j) {
  Instance inst;
  try {
    const auto& crops = j.at("crops");
    inst.crops.names = crops.at("names").get<std::vector<std::string>>();
    inst.crops.fixed_cost_eur = crops.at("fixed_cost_eur").get<double>();
    for (const auto& d : j.at("depots")) {
      Depot depot;
      depot.id = d.at("id").get<int>();
      depot.position = {d.at("x_km").get<double>(), d.at("y_km").get<double>()};
      depot.maintenance_eur = d.at("maintenance_eur").get<double>();
      depot.harvesters = d.at("harvesters").get<std::vector<int>>();
      inst.depots.push_back(std::move(depot));
    }
    for (const auto& f : j.at("fields")) {
      Field field;
      field.id = f.at("id").get<int>();
      field.position = {f.at("x_km").get<double>(), f.at("y_km").get<double>()};
      field.size_ha = f.at("size_ha").get<double>();
      field.revenue_eur = f.at("revenue_eur").get<std::vector<double>>();
      inst.fields.push_back(std::move(field));
    }
    const auto& cost = j.at("cost");
    if (cost.contains("rate_eur_per_km")) {
      RateCost rate;
      rate.eur_per_km = cost.at("rate_eur_per_km").get<double>();
      if (cost.contains("crop_offset_eur")) rate.crop_offset_eur = cost.at("crop_offset_eur").get<std::vector<double>>();
      inst.cost = rate;
    } else if (cost.contains("matrices")) {
      MatrixCost m;
      for (const auto& x : cost.at("matrices").at("field_field")) m.field_field.push_back(detail::matrix_from_json(x, "field_field"));
      for (const auto& x : cost.at("matrices").at("depot_field")) m.depot_field.push_back(detail::matrix_from_json(x, "depot_field"));
      inst.cost = std::move(m);
    } else {
      throw ShapeError("cost block needs either rate_eur_per_km or matrices");
    }
  } catch (const json::exception& e) {
    throw ShapeError(std::string("instance JSON: ") + e.what());
  }
  for (std::size_t i = 0; i < inst.fields.size(); ++i)
    if (inst.fields[i].id != static_cast<int>(i)) throw ShapeError("field ids must be 0..L-1 in order");
  for (std::size_t i = 0; i < inst.depots.size(); ++i)
    if (inst.depots[i].id != static_cast<int>(i)) throw ShapeError("depot ids must be 0..D-1 in order");
  return inst;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace harvest
