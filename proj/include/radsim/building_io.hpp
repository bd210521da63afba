#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsim/building.hpp"
#include "radsim/errors.hpp"
#include "radsim/weather.hpp"

namespace radsim {

/// Inclusive cell rectangle [row0, col0, row1, col1].
struct Rect {
  std::size_t row0{0}, col0{0}, row1{0}, col1{0};

  bool contains(Cell c) const { return c.row >= row0 && c.row <= row1 && c.col >= col0 && c.col <= col1; }
  bool on_outline(Cell c) const {
    return contains(c) && (c.row == row0 || c.row == row1 || c.col == col0 || c.col == col1);
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct ZoneDecl {
  CvType type{CvType::InteriorAir};
  Rect rect;
  bool outline{false};  // only the rectangle's perimeter ring
  friend bool operator==(const ZoneDecl&, const ZoneDecl&) = default;
};

struct MaterialDecl {
  MaterialProps props;
  std::optional<CvType> cv_type;  // applies to every CV of this type
  std::optional<Rect> rect;       // or to a rectangle (later declarations win)
  friend bool operator==(const MaterialDecl&, const MaterialDecl&) = default;
};

struct HeatSourceDecl {
  Rect rect;
  double watts_per_cell{0.0};
  friend bool operator==(const HeatSourceDecl&, const HeatSourceDecl&) = default;
};

/// Declarative building description as written in the config document.
struct BuildingDocument {
  std::size_t rows{0};
  std::size_t cols{0};
  double z{3.0};
  double cell_dx{0.5};
  double cell_dy{0.5};
  CvType fill{CvType::InteriorAir};
  std::vector<ZoneDecl> zones;
  std::vector<MaterialDecl> materials;
  std::vector<HeatSourceDecl> heat_sources;
  SimulationConfig simulation;
  std::optional<std::string> radiation_matrix;  // path to an imported exchange matrix

  friend bool operator==(const BuildingDocument&, const BuildingDocument&) = default;
};

namespace detail {

using nlohmann::json;

inline ParseError field_error(const std::string& path, const std::string& what) {
  return ParseError("building config: field '" + path + "': " + what);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw field_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw field_error(path, "expected a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : get_number(*it, path + "." + key);
}

inline bool flag_or(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw field_error(path + "." + key, "expected true/false");
  return it->get<bool>();
}

inline std::size_t get_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw field_error(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

inline CvType get_cv_type(const json& v, const std::string& path) {
  if (!v.is_string()) throw field_error(path, "expected a CV type name");
  const auto t = cv_type_from_string(v.get<std::string>());
  if (!t)
    throw field_error(path, "unknown CV type '" + v.get<std::string>() +
                                "' (interior_air, exterior_wall, interior_wall, boundary, window)");
  return *t;
}

inline Rect get_rect(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) throw field_error(path, "expected [row0, col0, row1, col1]");
  Rect r{get_count(v[0], path + "[0]"), get_count(v[1], path + "[1]"), get_count(v[2], path + "[2]"),
         get_count(v[3], path + "[3]")};
  if (r.row1 < r.row0 || r.col1 < r.col0) throw field_error(path, "rectangle corners out of order");
  return r;
}

inline json rect_json(const Rect& r) { return json::array({r.row0, r.col0, r.row1, r.col1}); }

}  // namespace detail

inline BuildingDocument parse_building_document(std::string_view text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("building config: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("building config: top level must be an object");

  BuildingDocument doc;
  const json& grid = detail::require(root, "grid", "");
  doc.rows = detail::get_count(detail::require(grid, "rows", "grid"), "grid.rows");
  doc.cols = detail::get_count(detail::require(grid, "cols", "grid"), "grid.cols");
  doc.z = detail::get_number(detail::require(grid, "z", "grid"), "grid.z");
  const json& size = detail::require(grid, "cell_size", "grid");
  if (size.is_array()) {
    if (size.size() != 2) throw detail::field_error("grid.cell_size", "expected a number or [dx, dy]");
    doc.cell_dx = detail::get_number(size[0], "grid.cell_size[0]");
    doc.cell_dy = detail::get_number(size[1], "grid.cell_size[1]");
  } else {
    doc.cell_dx = doc.cell_dy = detail::get_number(size, "grid.cell_size");
  }
  if (const auto it = grid.find("fill"); it != grid.end()) doc.fill = detail::get_cv_type(*it, "grid.fill");

  if (const auto it = root.find("zones"); it != root.end()) {
    if (!it->is_array()) throw detail::field_error("zones", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = "zones[" + std::to_string(i) + "]";
      const json& z = (*it)[i];
      ZoneDecl decl;
      decl.type = detail::get_cv_type(detail::require(z, "type", path), path + ".type");
      decl.rect = detail::get_rect(detail::require(z, "rect", path), path + ".rect");
      decl.outline = detail::flag_or(z, "outline", path, false);
      doc.zones.push_back(decl);
    }
  }

  const json& mats = detail::require(root, "materials", "");
  if (!mats.is_array()) throw detail::field_error("materials", "expected an array");
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const auto path = "materials[" + std::to_string(i) + "]";
    const json& m = mats[i];
    MaterialDecl decl;
    const json& name = detail::require(m, "name", path);
    if (!name.is_string()) throw detail::field_error(path + ".name", "expected a string");
    decl.props.name = name.get<std::string>();
    decl.props.conductivity = detail::get_number(detail::require(m, "conductivity", path), path + ".conductivity");
    decl.props.convection = detail::get_number(detail::require(m, "convection", path), path + ".convection");
    decl.props.specific_heat = detail::get_number(detail::require(m, "specific_heat", path), path + ".specific_heat");
    decl.props.density = detail::get_number(detail::require(m, "density", path), path + ".density");
    decl.props.emissivity = detail::number_or(m, "emissivity", path, 0.9);
    decl.props.absorptivity = detail::number_or(m, "absorptivity", path, 0.0);
    decl.props.transmissivity = detail::number_or(m, "transmissivity", path, 0.0);
    decl.props.tilt = detail::number_or(m, "tilt", path, 90.0);
    const json& applies = detail::require(m, "applies_to", path);
    if (const auto t = applies.find("cv_type"); t != applies.end())
      decl.cv_type = detail::get_cv_type(*t, path + ".applies_to.cv_type");
    if (const auto r = applies.find("rect"); r != applies.end())
      decl.rect = detail::get_rect(*r, path + ".applies_to.rect");
    if (decl.cv_type.has_value() == decl.rect.has_value())
      throw detail::field_error(path + ".applies_to", "give exactly one of cv_type or rect");
    doc.materials.push_back(std::move(decl));
  }

  if (const auto it = root.find("heat_sources"); it != root.end()) {
    if (!it->is_array()) throw detail::field_error("heat_sources", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = "heat_sources[" + std::to_string(i) + "]";
      HeatSourceDecl h;
      h.rect = detail::get_rect(detail::require((*it)[i], "rect", path), path + ".rect");
      h.watts_per_cell = detail::get_number(detail::require((*it)[i], "watts_per_cell", path), path + ".watts_per_cell");
      doc.heat_sources.push_back(h);
    }
  }

  const json& sim = detail::require(root, "simulation", "");
  auto& cfg = doc.simulation;
  cfg.dt = detail::get_number(detail::require(sim, "dt", "simulation"), "simulation.dt");
  cfg.convergence_epsilon = detail::number_or(sim, "epsilon", "simulation", cfg.convergence_epsilon);
  if (const auto it = sim.find("max_inner_iterations"); it != sim.end())
    cfg.max_inner_iterations = static_cast<int>(detail::get_count(*it, "simulation.max_inner_iterations"));
  cfg.enable_interior_lw = detail::flag_or(sim, "enable_interior_lw", "simulation", cfg.enable_interior_lw);
  cfg.enable_exterior_lw = detail::flag_or(sim, "enable_exterior_lw", "simulation", cfg.enable_exterior_lw);
  cfg.enable_solar = detail::flag_or(sim, "enable_solar", "simulation", cfg.enable_solar);
  cfg.enable_interior_mass = detail::flag_or(sim, "enable_interior_mass", "simulation", cfg.enable_interior_mass);
  cfg.envelope_layer_divisor = detail::number_or(sim, "envelope_layer_divisor", "simulation", 0.0);
  cfg.initial_temperature = detail::number_or(sim, "initial_temperature", "simulation", cfg.initial_temperature);
  if (const auto it = sim.find("mass_params"); it != sim.end()) {
    cfg.mass_params.k_mass = detail::get_number(detail::require(*it, "k_mass", "simulation.mass_params"),
                                                "simulation.mass_params.k_mass");
    cfg.mass_params.rho_mass = detail::get_number(detail::require(*it, "rho_mass", "simulation.mass_params"),
                                                  "simulation.mass_params.rho_mass");
    cfg.mass_params.c_mass = detail::get_number(detail::require(*it, "c_mass", "simulation.mass_params"),
                                                "simulation.mass_params.c_mass");
  }
  if (const auto it = sim.find("start_time"); it != sim.end()) {
    if (!it->is_string()) throw detail::field_error("simulation.start_time", "expected an ISO-8601 string");
    const auto t = parse_timestamp(it->get<std::string>());
    if (!t) throw detail::field_error("simulation.start_time", "bad ISO-8601 timestamp");
    cfg.start_time = *t;
  }
  if (const auto it = sim.find("site"); it != sim.end()) {
    cfg.site.latitude = detail::number_or(*it, "latitude", "simulation.site", 0.0);
    cfg.site.longitude = detail::number_or(*it, "longitude", "simulation.site", 0.0);
    cfg.site.albedo = detail::number_or(*it, "albedo", "simulation.site", cfg.site.albedo);
  }
  if (const auto it = sim.find("radiation_matrix"); it != sim.end()) {
    if (!it->is_string()) throw detail::field_error("simulation.radiation_matrix", "expected a path");
    doc.radiation_matrix = it->get<std::string>();
  }
  return doc;
}

inline nlohmann::json building_document_json(const BuildingDocument& doc) {
  using detail::json;
  json root;
  root["grid"] = {{"rows", doc.rows}, {"cols", doc.cols}, {"z", doc.z},
                  {"cell_size", json::array({doc.cell_dx, doc.cell_dy})}, {"fill", to_string(doc.fill)}};
  root["zones"] = json::array();
  for (const auto& z : doc.zones)
    root["zones"].push_back({{"type", to_string(z.type)}, {"rect", detail::rect_json(z.rect)}, {"outline", z.outline}});
  root["materials"] = json::array();
  for (const auto& m : doc.materials) {
    json applies;
    if (m.cv_type) applies["cv_type"] = to_string(*m.cv_type);
    if (m.rect) applies["rect"] = detail::rect_json(*m.rect);
    root["materials"].push_back({{"name", m.props.name},
                                 {"conductivity", m.props.conductivity},
                                 {"convection", m.props.convection},
                                 {"specific_heat", m.props.specific_heat},
                                 {"density", m.props.density},
                                 {"emissivity", m.props.emissivity},
                                 {"absorptivity", m.props.absorptivity},
                                 {"transmissivity", m.props.transmissivity},
                                 {"tilt", m.props.tilt},
                                 {"applies_to", applies}});
  }
  root["heat_sources"] = json::array();
  for (const auto& h : doc.heat_sources)
    root["heat_sources"].push_back({{"rect", detail::rect_json(h.rect)}, {"watts_per_cell", h.watts_per_cell}});
  const auto& c = doc.simulation;
  json sim = {{"dt", c.dt},
              {"epsilon", c.convergence_epsilon},
              {"max_inner_iterations", c.max_inner_iterations},
              {"enable_interior_lw", c.enable_interior_lw},
              {"enable_exterior_lw", c.enable_exterior_lw},
              {"enable_solar", c.enable_solar},
              {"enable_interior_mass", c.enable_interior_mass},
              {"envelope_layer_divisor", c.envelope_layer_divisor},
              {"initial_temperature", c.initial_temperature},
              {"mass_params",
               {{"k_mass", c.mass_params.k_mass}, {"rho_mass", c.mass_params.rho_mass}, {"c_mass", c.mass_params.c_mass}}},
              {"site", {{"latitude", c.site.latitude}, {"longitude", c.site.longitude}, {"albedo", c.site.albedo}}}};
  if (c.start_time) sim["start_time"] = format_timestamp(*c.start_time);
  if (doc.radiation_matrix) sim["radiation_matrix"] = *doc.radiation_matrix;
  root["simulation"] = sim;
  return root;
}

inline std::string dump_building_document(const BuildingDocument& doc) {
  return building_document_json(doc).dump(2) + "\n";
}

/// Realizes the CV-type map, per-CV properties and heat sources, then
/// classifies exposure and validates everything.
inline Building realize(const BuildingDocument& doc) {
  if (!(doc.cell_dx > 0.0) || !(doc.cell_dy > 0.0)) throw ValidationError("grid.cell_size must be positive");
  BuildingGrid grid(doc.rows, doc.cols, doc.cell_dx, doc.cell_dy, doc.z, doc.fill);
  auto check_rect = [&](const Rect& r, const std::string& what) {
    if (r.row1 >= doc.rows || r.col1 >= doc.cols) throw ValidationError(what + " rectangle extends past the grid");
  };
  for (const auto& z : doc.zones) {
    check_rect(z.rect, "zone");
    for (std::size_t r = z.rect.row0; r <= z.rect.row1; ++r)
      for (std::size_t c = z.rect.col0; c <= z.rect.col1; ++c)
        if (!z.outline || z.rect.on_outline({r, c})) grid.cv_type(r, c) = z.type;
  }

  Grid2D<std::optional<MaterialProps>> assigned(doc.rows, doc.cols);
  for (const auto& m : doc.materials) {
    if (m.rect) check_rect(*m.rect, "material '" + m.props.name + "'");
    for (std::size_t r = 0; r < doc.rows; ++r)
      for (std::size_t c = 0; c < doc.cols; ++c) {
        const bool hit = m.cv_type ? grid.cv_type(r, c) == *m.cv_type : m.rect->contains({r, c});
        if (hit) assigned(r, c) = m.props;
      }
  }
  Grid2D<MaterialProps> props(doc.rows, doc.cols);
  for (std::size_t r = 0; r < doc.rows; ++r)
    for (std::size_t c = 0; c < doc.cols; ++c) {
      if (assigned(r, c)) {
        props(r, c) = *assigned(r, c);
      } else if (grid.cv_type(r, c) != CvType::Boundary) {
        throw ValidationError("cell " + cell_name({r, c}) + ": no material assigned");
      }
    }

  Field heat(doc.rows, doc.cols, 0.0);
  for (const auto& h : doc.heat_sources) {
    check_rect(h.rect, "heat source");
    for (std::size_t r = h.rect.row0; r <= h.rect.row1; ++r)
      for (std::size_t c = h.rect.col0; c <= h.rect.col1; ++c) heat(r, c) += h.watts_per_cell;
  }
  return make_building(std::move(grid), props, doc.simulation, std::move(heat));
}

inline Building load_building(std::string_view text) { return realize(parse_building_document(text)); }

}  // namespace radsim
