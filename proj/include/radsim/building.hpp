#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radsim/errors.hpp"
#include "radsim/field.hpp"
#include "radsim/solar.hpp"

namespace radsim {

/// Control-volume type. Codes 0, 1 and 4 follow the radiative flux
/// assignment; InteriorWall marks partitions, Boundary a fixed-temperature pad.
enum class CvType : std::uint8_t {
  InteriorAir = 0,
  ExteriorWall = 1,
  InteriorWall = 2,
  Boundary = 3,
  Window = 4,
};

inline bool is_envelope(CvType t) { return t == CvType::ExteriorWall || t == CvType::Window; }
inline bool is_solid(CvType t) {
  return t == CvType::ExteriorWall || t == CvType::Window || t == CvType::InteriorWall;
}

inline const char* to_string(CvType t) {
  switch (t) {
    case CvType::InteriorAir: return "interior_air";
    case CvType::ExteriorWall: return "exterior_wall";
    case CvType::InteriorWall: return "interior_wall";
    case CvType::Boundary: return "boundary";
    case CvType::Window: return "window";
  }
  return "?";
}

inline std::optional<CvType> cv_type_from_string(const std::string& s) {
  for (CvType t : {CvType::InteriorAir, CvType::ExteriorWall, CvType::InteriorWall, CvType::Boundary, CvType::Window})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

/// Face directions in the order of the update's shifted fields T1..T4:
/// East/West are x-faces (spacing U, area V*z), North/South are y-faces
/// (spacing V, area U*z). Row 0 is the north edge.
enum class Face : std::uint8_t { East = 0, North = 1, West = 2, South = 3 };

inline constexpr std::array<Face, 4> kFaces{Face::East, Face::North, Face::West, Face::South};

inline constexpr int face_index(Face f) { return static_cast<int>(f); }
inline constexpr bool is_x_face(Face f) { return f == Face::East || f == Face::West; }
inline constexpr Orientation face_orientation(Face f) { return static_cast<Orientation>(face_index(f)); }
inline constexpr Face opposite(Face f) { return static_cast<Face>((face_index(f) + 2) % 4); }

inline const char* to_string(Face f) {
  switch (f) {
    case Face::East: return "E";
    case Face::North: return "N";
    case Face::West: return "W";
    case Face::South: return "S";
  }
  return "?";
}

struct BuildingGrid {
  std::size_t rows{0};
  std::size_t cols{0};
  Grid2D<CvType> cv_type;
  Field U;        // x extent [m]
  Field V;        // y extent [m]
  double z{3.0};  // floor height [m]
  Field delta_x;  // exposed face length [m]
  Grid2D<int> exposed_faces;
  Grid2D<std::uint8_t> exposed_mask;  // bit face_index(f) set when face f is exposed

  BuildingGrid() = default;
  BuildingGrid(std::size_t r, std::size_t c, double dx, double dy, double height, CvType fill = CvType::InteriorAir)
      : rows(r), cols(c), cv_type(r, c, fill), U(r, c, dx), V(r, c, dy), z(height), delta_x(r, c, dx),
        exposed_faces(r, c, 0), exposed_mask(r, c, 0) {}

  CvType type(Cell c) const { return cv_type[c]; }

  std::optional<Cell> neighbor(Cell c, Face f) const {
    switch (f) {
      case Face::East: if (c.col + 1 < cols) return Cell{c.row, c.col + 1}; break;
      case Face::North: if (c.row > 0) return Cell{c.row - 1, c.col}; break;
      case Face::West: if (c.col > 0) return Cell{c.row, c.col - 1}; break;
      case Face::South: if (c.row + 1 < rows) return Cell{c.row + 1, c.col}; break;
    }
    return std::nullopt;
  }

  /// A face is exterior when it borders the outside of the grid or a Boundary CV.
  bool is_exterior_face(Cell c, Face f) const {
    const auto nb = neighbor(c, f);
    return !nb || cv_type[*nb] == CvType::Boundary;
  }

  bool is_exposed(Cell c, Face f) const { return (exposed_mask[c] >> face_index(f)) & 1u; }

  double face_length(Cell c, Face f) const { return is_x_face(f) ? V[c] : U[c]; }
  double face_area(Cell c, Face f) const { return face_length(c, f) * z; }
  double spacing(Cell c, Face f) const { return is_x_face(f) ? U[c] : V[c]; }
  double plan_area(Cell c) const { return U[c] * V[c]; }

  friend bool operator==(const BuildingGrid&, const BuildingGrid&) = default;
};

inline std::string cell_name(Cell c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

/// Populates exposed_faces, exposed_mask and delta_x.
///
/// Envelope CVs (ExteriorWall, Window) expose at most two faces; inner
/// layers of a thick envelope expose none. Any other non-Boundary CV exposed
/// to the exterior is rejected, which is also how a plan without an envelope
/// fails. delta_x on an envelope CV is the
/// mean length of its exposed faces, so 2*delta_x at a corner equals the
/// total exposed length. Elsewhere it is the length of the face shared with
/// an adjacent envelope CV, or U when there is none.
inline BuildingGrid classify_exposure(BuildingGrid grid) {
  if (grid.rows * grid.cols < 4) throw ValidationError("grid must contain at least 4 cells");
  if (!(grid.z > 0.0)) throw ValidationError("floor height z must be positive");
  grid.exposed_faces = Grid2D<int>(grid.rows, grid.cols, 0);
  grid.exposed_mask = Grid2D<std::uint8_t>(grid.rows, grid.cols, 0);
  grid.delta_x = grid.U;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Cell cell{r, c};
      if (!(grid.U[cell] > 0.0) || !(grid.V[cell] > 0.0))
        throw ValidationError("cell " + cell_name(cell) + ": U and V must be positive");
      const CvType t = grid.cv_type[cell];
      if (t == CvType::Boundary) continue;
      int count = 0;
      double length = 0.0;
      std::uint8_t mask = 0;
      for (Face f : kFaces) {
        if (grid.is_exterior_face(cell, f)) {
          ++count;
          length += grid.face_length(cell, f);
          mask |= static_cast<std::uint8_t>(1u << face_index(f));
        }
      }
      if (is_envelope(t) && count > 0) {
        if (count > 2)
          throw ValidationError("cell " + cell_name(cell) + ": envelope CV with " + std::to_string(count) +
                                " exterior faces is unsupported geometry");
        grid.exposed_faces[cell] = count;
        grid.exposed_mask[cell] = mask;
        grid.delta_x[cell] = length / count;
      } else if (count > 0) {
        throw ValidationError("cell " + cell_name(cell) + ": " + to_string(t) +
                              " faces the exterior; an envelope is required");
      } else {
        double shared = 0.0;
        int n = 0;
        for (Face f : kFaces) {
          const auto nb = grid.neighbor(cell, f);
          if (nb && is_envelope(grid.cv_type[*nb])) {
            shared += grid.face_length(cell, f);
            ++n;
          }
        }
        if (n > 0) grid.delta_x[cell] = shared / n;
      }
    }
  }
  return grid;
}

/// Connected InteriorAir regions (4-connectivity), numbered in row-major
/// order of their first cell.
struct ZoneMap {
  Grid2D<int> zone_of;                  // -1 outside air
  std::vector<std::vector<Cell>> cells;  // row-major within each zone

  std::size_t count() const { return cells.size(); }

  friend bool operator==(const ZoneMap&, const ZoneMap&) = default;
};

inline ZoneMap label_zones(const BuildingGrid& grid) {
  ZoneMap zones{Grid2D<int>(grid.rows, grid.cols, -1), {}};
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      if (grid.cv_type(r, c) != CvType::InteriorAir || zones.zone_of(r, c) >= 0) continue;
      const int id = static_cast<int>(zones.cells.size());
      std::vector<Cell> stack{{r, c}};
      std::vector<Cell> members;
      zones.zone_of(r, c) = id;
      while (!stack.empty()) {
        const Cell cur = stack.back();
        stack.pop_back();
        members.push_back(cur);
        for (Face f : kFaces) {
          const auto nb = grid.neighbor(cur, f);
          if (nb && grid.cv_type[*nb] == CvType::InteriorAir && zones.zone_of[*nb] < 0) {
            zones.zone_of[*nb] = id;
            stack.push_back(*nb);
          }
        }
      }
      std::sort(members.begin(), members.end(),
                [](Cell a, Cell b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
      zones.cells.push_back(std::move(members));
    }
  }
  return zones;
}

/// Bulk physical properties of one CV before face coefficients are derived.
struct MaterialProps {
  std::string name;
  double conductivity{0.0};   // W/(m K)
  double convection{0.0};     // W/(m^2 K): exterior film for solids, surface film for air
  double specific_heat{0.0};  // J/(kg K)
  double density{0.0};        // kg/m^3
  double emissivity{0.9};
  double absorptivity{0.0};
  double transmissivity{0.0};
  double tilt{90.0};  // deg from horizontal

  friend bool operator==(const MaterialProps&, const MaterialProps&) = default;
};

/// Per-CV coefficient fields entering the energy balance. K[d] and H[d] are
/// indexed by face_index(); K[d]/spacing is the face conductance per unit
/// area shared with the neighbor, H[d] the film coefficient to ambient.
struct MaterialField {
  std::array<Field, 4> K;
  std::array<Field, 4> H;
  Field C;
  Field rho;
  Field emissivity;
  Field absorptivity;
  Field transmissivity;
  Field tilt;

  MaterialField() = default;
  MaterialField(std::size_t r, std::size_t c)
      : K{Field(r, c), Field(r, c), Field(r, c), Field(r, c)},
        H{Field(r, c), Field(r, c), Field(r, c), Field(r, c)},
        C(r, c), rho(r, c), emissivity(r, c), absorptivity(r, c), transmissivity(r, c), tilt(r, c, 90.0) {}

  friend bool operator==(const MaterialField&, const MaterialField&) = default;
};

/// Derives face coefficients from per-cell bulk properties.
///
///  - exterior face: K = 0, H = the CV's film coefficient.
///  - interior face: H = 0, K = spacing * G with G the series conductance of
///    the two half-cells plus, on air/solid faces, the air-side surface film.
///  - Boundary CVs carry zero coefficients.
///
/// G is shared by both sides of a face, so conduction is conservative.
inline MaterialField build_material_field(const BuildingGrid& grid, const Grid2D<MaterialProps>& props) {
  MaterialField m(grid.rows, grid.cols);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Cell cell{r, c};
      const auto& p = props[cell];
      m.C[cell] = p.specific_heat;
      m.rho[cell] = p.density;
      m.emissivity[cell] = p.emissivity;
      m.absorptivity[cell] = p.absorptivity;
      m.transmissivity[cell] = p.transmissivity;
      m.tilt[cell] = p.tilt;
      const CvType t = grid.cv_type[cell];
      if (t == CvType::Boundary) continue;
      for (Face f : kFaces) {
        const int d = face_index(f);
        if (grid.is_exterior_face(cell, f)) {
          m.H[d][cell] = p.convection;
          continue;
        }
        const Cell nb = *grid.neighbor(cell, f);
        const auto& q = props[nb];
        if (p.conductivity <= 0.0 || q.conductivity <= 0.0) continue;
        const double d_self = grid.spacing(cell, f);
        const double d_nb = grid.spacing(nb, opposite(f));
        double resistance = d_self / (2.0 * p.conductivity) + d_nb / (2.0 * q.conductivity);
        const CvType tn = grid.cv_type[nb];
        const bool self_air = t == CvType::InteriorAir;
        const bool nb_air = tn == CvType::InteriorAir;
        if (self_air != nb_air) {
          const double film = self_air ? p.convection : q.convection;
          if (film <= 0.0) continue;
          resistance += 1.0 / film;
        }
        m.K[d][cell] = d_self / resistance;
      }
    }
  }
  return m;
}

inline void validate_materials(const BuildingGrid& grid, const MaterialField& m) {
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Cell cell{r, c};
      const auto where = [&](const char* what) {
        return ValidationError("cell " + cell_name(cell) + ": " + what);
      };
      const double eps = m.emissivity[cell], a = m.absorptivity[cell], tau = m.transmissivity[cell];
      if (!(eps >= 0.0 && eps <= 1.0)) throw where("emissivity outside [0,1]");
      if (!(a >= 0.0 && a <= 1.0)) throw where("absorptivity outside [0,1]");
      if (!(tau >= 0.0 && tau <= 1.0)) throw where("transmissivity outside [0,1]");
      if (a + tau > 1.0) throw where("absorptivity + transmissivity exceeds 1");
      const CvType t = grid.cv_type[cell];
      if (t != CvType::Window && tau != 0.0) throw where("transmissivity must be 0 on an opaque CV");
      if (!(m.tilt[cell] >= 0.0 && m.tilt[cell] <= 180.0)) throw where("tilt outside [0,180] degrees");
      for (int d = 0; d < 4; ++d)
        if (!(m.K[d][cell] >= 0.0) || !(m.H[d][cell] >= 0.0)) throw where("negative conductivity or convection");
      if (!(m.C[cell] >= 0.0) || !(m.rho[cell] >= 0.0)) throw where("negative heat capacity or density");
      if (t != CvType::Boundary && !(m.C[cell] * m.rho[cell] > 0.0))
        throw where("C * rho must be positive");
    }
  }
}

struct MassParams {
  double k_mass{1.0};    // W/(m K)
  double rho_mass{0.0};  // kg/m^3
  double c_mass{0.0};    // J/(kg K)

  friend bool operator==(const MassParams&, const MassParams&) = default;
};

struct SimulationConfig {
  double dt{300.0};
  double convergence_epsilon{1e-3};  // K
  int max_inner_iterations{500};
  bool enable_interior_lw{true};
  bool enable_exterior_lw{true};
  bool enable_solar{true};
  bool enable_interior_mass{true};
  MassParams mass_params{};
  /// Divisor k for the (delta_x / k) exterior flux on interior-envelope
  /// CVs (partitions touching the envelope). 0 leaves them without flux.
  double envelope_layer_divisor{0.0};
  double initial_temperature{293.15};
  std::optional<Clock> start_time;
  SitePosition site{};

  void validate() const {
    if (!(dt > 0.0)) throw ValidationError("simulation.dt must be positive");
    if (!(convergence_epsilon > 0.0)) throw ValidationError("simulation.epsilon must be positive");
    if (max_inner_iterations < 1) throw ValidationError("simulation.max_inner_iterations must be >= 1");
    if (!(envelope_layer_divisor >= 0.0)) throw ValidationError("simulation.envelope_layer_divisor must be >= 0");
    if (!(initial_temperature > 0.0)) throw ValidationError("simulation.initial_temperature must be positive");
    if (enable_interior_mass) {
      if (!(mass_params.k_mass > 0.0)) throw ValidationError("mass_params.k_mass must be positive when mass is enabled");
      if (!(mass_params.rho_mass > 0.0) || !(mass_params.c_mass > 0.0))
        throw ValidationError("mass_params.rho_mass and c_mass must be positive when mass is enabled");
    }
    site.validate();
  }

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

/// Fully realized building: geometry, coefficient fields, run settings and
/// the external heat source Q_x [W per CV].
struct Building {
  BuildingGrid grid;
  MaterialField materials;
  SimulationConfig config;
  Field heat_source;
  ZoneMap zones;

  /// Windows must open onto an air zone so transmitted solar has a receiver.
  void validate() const {
    config.validate();
    validate_materials(grid, materials);
    if (!heat_source.same_shape(grid.rows, grid.cols)) throw ValidationError("heat source field has wrong shape");
    for (std::size_t r = 0; r < grid.rows; ++r)
      for (std::size_t c = 0; c < grid.cols; ++c)
        if (grid.cv_type(r, c) == CvType::Window && window_zone(Cell{r, c}) < 0)
          throw ValidationError("cell " + cell_name({r, c}) + ": window does not border an interior air zone");
  }

  /// Zone receiving a window's transmitted solar: the first air neighbor in face order.
  int window_zone(Cell window) const {
    for (Face f : kFaces) {
      const auto nb = grid.neighbor(window, f);
      if (nb && grid.cv_type[*nb] == CvType::InteriorAir) return zones.zone_of[*nb];
    }
    return -1;
  }

  friend bool operator==(const Building&, const Building&) = default;
};

/// Classifies exposure, labels zones, derives coefficients and validates.
inline Building make_building(BuildingGrid grid, const Grid2D<MaterialProps>& props, SimulationConfig config,
                              Field heat_source = {}) {
  Building b;
  b.grid = classify_exposure(std::move(grid));
  b.materials = build_material_field(b.grid, props);
  b.config = std::move(config);
  b.heat_source = heat_source.empty() ? Field(b.grid.rows, b.grid.cols, 0.0) : std::move(heat_source);
  b.zones = label_zones(b.grid);
  b.validate();
  return b;
}

}  // namespace radsim
