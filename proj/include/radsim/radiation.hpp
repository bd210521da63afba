#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "radsim/building.hpp"
#include "radsim/errors.hpp"
#include "radsim/field.hpp"
#include "radsim/weather.hpp"

namespace radsim {

/// Stefan-Boltzmann constant [W/(m^2 K^4)], CODATA 2018.
inline constexpr double kStefanBoltzmann = 5.670374419e-8;

struct ViewFactorSet {
  double f_gnd{0.0};
  double f_sky{0.0};
  double beta{0.0};  // sky correction
  double f_air{0.0};
  double tilt{0.0};
};

inline ViewFactorSet view_factors(double tilt_deg) {
  if (!(tilt_deg >= 0.0 && tilt_deg <= 180.0)) throw std::invalid_argument("tilt must lie in [0, 180] degrees");
  ViewFactorSet vf;
  vf.tilt = tilt_deg;
  if (tilt_deg == 90.0) {
    // cos(pi/2) is not exactly zero in floating point
    vf.f_gnd = 0.5;
    vf.f_sky = 0.5;
  } else {
    const double c = std::cos(tilt_deg * detail::kDeg);
    vf.f_gnd = 0.5 * (1.0 - c);
    vf.f_sky = 0.5 * (1.0 + c);
  }
  vf.beta = std::sqrt(vf.f_sky);
  vf.f_air = vf.f_sky * (1.0 - vf.beta);
  return vf;
}

/// Net long-wave gain [W/m^2] of an exterior surface exchanging with ground, sky and air.
inline double exterior_lw_flux(double eps, const ViewFactorSet& vf, double t_surf, double t_gnd, double t_sky,
                               double t_air) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("emissivity must lie in [0, 1]");
  if (!(t_surf > 0.0 && t_gnd > 0.0 && t_sky > 0.0 && t_air > 0.0))
    throw std::invalid_argument("temperatures must be positive kelvin");
  const auto p4 = [](double t) { return (t * t) * (t * t); };
  const double s4 = p4(t_surf);
  return eps * kStefanBoltzmann *
         (vf.f_gnd * (p4(t_gnd) - s4) + vf.beta * vf.f_sky * (p4(t_sky) - s4) + vf.f_air * (p4(t_air) - s4));
}

struct ExteriorTemperatures {
  double t_air{0.0};
  double t_gnd{0.0};
  double t_sky{0.0};
};

/// Exposure scale [m^2] applied to an exterior flux density on each CV:
/// exposed_faces * delta_x * z on envelope CVs; on an interior-envelope CV
/// (partition touching the envelope) the contact-face length / divisor * z,
/// only when the divisor is positive; zero elsewhere.
inline Field exterior_exposure_area(const BuildingGrid& grid, double envelope_layer_divisor) {
  Field area(grid.rows, grid.cols, 0.0);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Cell cell{r, c};
      const CvType t = grid.cv_type[cell];
      if (is_envelope(t)) {
        area[cell] = grid.exposed_faces[cell] * grid.delta_x[cell] * grid.z;
      } else if (t == CvType::InteriorWall && envelope_layer_divisor > 0.0) {
        for (Face f : kFaces) {
          const auto nb = grid.neighbor(cell, f);
          if (nb && is_envelope(grid.cv_type[*nb]))
            area[cell] += grid.face_length(cell, f) / envelope_layer_divisor * grid.z;
        }
      }
    }
  }
  return area;
}

/// Exterior LW tensor in the linear-in-T^4 form Q = gain * (env - T^4).
///
/// Since F_gnd + beta F_sky + F_air = 1 the flux is eps sigma (env - T^4),
/// env being the view-factor-weighted T^4 of ground, sky and air. Built once
/// per step, applied once per inner iteration.
class ExteriorLwOperator {
 public:
  ExteriorLwOperator() = default;
  ExteriorLwOperator(const BuildingGrid& grid, const MaterialField& mats, const ExteriorTemperatures& ext,
                     double envelope_layer_divisor)
      : gain_(grid.rows, grid.cols, 0.0), env_(grid.rows, grid.cols, 0.0) {
    const Field area = exterior_exposure_area(grid, envelope_layer_divisor);
    const auto p4 = [](double t) { return (t * t) * (t * t); };
    for (std::size_t i = 0; i < area.size(); ++i) {
      if (area.flat()[i] == 0.0) continue;
      const auto vf = view_factors(mats.tilt.flat()[i]);
      gain_.flat()[i] = area.flat()[i] * mats.emissivity.flat()[i] * kStefanBoltzmann;
      env_.flat()[i] = vf.f_gnd * p4(ext.t_gnd) + vf.beta * vf.f_sky * p4(ext.t_sky) + vf.f_air * p4(ext.t_air);
    }
  }

  void apply(const Field& T, Field& out) const {
    const auto g = gain_.flat();
    const auto e = env_.flat();
    const auto t = T.flat();
    auto o = out.flat();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double t2 = t[i] * t[i];
      o[i] = g[i] * (e[i] - t2 * t2);
    }
  }

  Field apply(const Field& T) const {
    Field out(T.rows(), T.cols(), 0.0);
    apply(T, out);
    return out;
  }

 private:
  Field gain_;
  Field env_;
};

/// Q_lwr [W] with each CV's own temperature standing in for its exterior face.
inline Field assemble_exterior_lw_tensor(const BuildingGrid& grid, const MaterialField& mats, const Field& T,
                                         const ExteriorTemperatures& ext, double envelope_layer_divisor = 0.0) {
  return ExteriorLwOperator(grid, mats, ext, envelope_layer_divisor).apply(T);
}

/// One interior radiating surface: the face of a solid CV looking into an air zone.
struct RadiatingSurface {
  Cell cell;
  Face face{Face::East};
  int zone{0};
  double area{0.0};  // m^2

  friend bool operator==(const RadiatingSurface&, const RadiatingSurface&) = default;
};

/// Dense interior exchange coefficients: q_i = sigma * sum_j c_ij (T_j^4 - T_i^4).
struct RadiationExchangeMatrix {
  std::vector<RadiatingSurface> surfaces;
  std::vector<double> coefficients;  // row-major n x n

  std::size_t n_surfaces() const { return surfaces.size(); }
  double operator()(std::size_t i, std::size_t j) const { return coefficients[i * surfaces.size() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return coefficients[i * surfaces.size() + j]; }

  double max_row_sum() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_surfaces(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_surfaces(); ++j) s += (*this)(i, j);
      m = std::max(m, s);
    }
    return m;
  }

  /// max |A_i c_ij - A_j c_ji| / max(A_i c_ij).
  double reciprocity_error() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n_surfaces(); ++i)
      for (std::size_t j = 0; j < n_surfaces(); ++j) {
        const double a = surfaces[i].area * (*this)(i, j);
        const double b = surfaces[j].area * (*this)(j, i);
        worst = std::max(worst, std::abs(a - b));
        scale = std::max(scale, std::abs(a));
      }
    return scale > 0.0 ? worst / scale : 0.0;
  }

  void validate() const {
    if (coefficients.size() != surfaces.size() * surfaces.size())
      throw ValidationError("exchange matrix: coefficient count does not match surface count");
    for (double v : coefficients)
      if (!(v >= 0.0)) throw ValidationError("exchange matrix: coefficients must be non-negative");
    if (max_row_sum() > 1.0 + 1e-9) throw ValidationError("exchange matrix: a row sums above 1");
  }

  friend bool operator==(const RadiationExchangeMatrix&, const RadiationExchangeMatrix&) = default;
};

/// Net interior LW flux density [W/m^2] on each surface.
inline std::vector<double> apply_interior_lw(const RadiationExchangeMatrix& m, std::span<const double> temps) {
  const std::size_t n = m.n_surfaces();
  if (temps.size() != n)
    throw std::invalid_argument("apply_interior_lw: " + std::to_string(temps.size()) + " temperatures for " +
                                std::to_string(n) + " surfaces");
  std::vector<double> t4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t2 = temps[i] * temps[i];
    t4[i] = t2 * t2;
  }
  std::vector<double> q(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &m.coefficients[i * n];
    double gain = 0.0, rowsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      gain += row[j] * t4[j];
      rowsum += row[j];
    }
    q[i] = kStefanBoltzmann * (gain - rowsum * t4[i]);
  }
  return q;
}

/// Interior LW operator bound to a grid: gathers surface temperatures from
/// the CV field and scatters area-weighted fluxes back into Q_lwx [W].
class InteriorLwOperator {
 public:
  InteriorLwOperator() = default;
  explicit InteriorLwOperator(const RadiationExchangeMatrix& m) : matrix_(&m), temps_(m.n_surfaces()) {}

  void apply(const Field& T, Field& out) const {
    out.fill(0.0);
    if (!matrix_) return;
    const auto& surfaces = matrix_->surfaces;
    for (std::size_t i = 0; i < surfaces.size(); ++i) temps_[i] = T[surfaces[i].cell];
    const auto q = apply_interior_lw(*matrix_, temps_);
    for (std::size_t i = 0; i < surfaces.size(); ++i) out[surfaces[i].cell] += surfaces[i].area * q[i];
  }

 private:
  const RadiationExchangeMatrix* matrix_{nullptr};
  mutable std::vector<double> temps_;
};

/// 2D view factor between two straight strips by Hottel's crossed strings.
/// Strips lie on the boundary of one convex cavity.
struct Point2 {
  double x{0.0};
  double y{0.0};
};

inline double crossed_strings_factor(Point2 a, Point2 b, Point2 c, Point2 d) {
  const auto dist = [](Point2 p, Point2 q) { return std::hypot(p.x - q.x, p.y - q.y); };
  const double len = dist(a, b);
  const double s1 = dist(a, d) + dist(b, c);
  const double s2 = dist(a, c) + dist(b, d);
  return (std::max(s1, s2) - std::min(s1, s2)) / (2.0 * len);
}

/// Convenience builder: per air zone (must be a full rectangle), the solid
/// faces lining it are strips of a closed 2D cavity. View factors come from
/// crossed strings, rows are renormalized to close exactly, and emissivity
/// enters through the gray parallel-surface factor 1/(1/e_i + 1/e_j - 1),
/// which is symmetric and so preserves reciprocity.
inline RadiationExchangeMatrix build_exchange_matrix_2d(const BuildingGrid& grid, const MaterialField& mats,
                                                        const ZoneMap& zones) {
  // Rectilinear coordinates of cell edges.
  std::vector<double> x_edge(grid.cols + 1, 0.0), y_edge(grid.rows + 1, 0.0);
  for (std::size_t c = 0; c < grid.cols; ++c) x_edge[c + 1] = x_edge[c] + grid.U(0, c);
  for (std::size_t r = 0; r < grid.rows; ++r) y_edge[r + 1] = y_edge[r] + grid.V(r, 0);
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      if (grid.U(r, c) != grid.U(0, c) || grid.V(r, c) != grid.V(r, 0))
        throw ValidationError("exchange matrix builder requires a rectilinear grid");

  RadiationExchangeMatrix m;
  struct Strip {
    Point2 a, b;
    int side;
  };
  std::vector<Strip> strips;
  std::vector<std::size_t> zone_begin;

  for (std::size_t z = 0; z < zones.count(); ++z) {
    const auto& cells = zones.cells[z];
    std::size_t r0 = grid.rows, r1 = 0, c0 = grid.cols, c1 = 0;
    for (Cell cell : cells) {
      r0 = std::min(r0, cell.row);
      r1 = std::max(r1, cell.row);
      c0 = std::min(c0, cell.col);
      c1 = std::max(c1, cell.col);
    }
    if ((r1 - r0 + 1) * (c1 - c0 + 1) != cells.size())
      throw ValidationError("zone " + std::to_string(z) + " is not a rectangular cavity");
    zone_begin.push_back(m.surfaces.size());

    auto add = [&](Cell air, Face toward, int side, Point2 a, Point2 b) {
      const auto nb = grid.neighbor(air, toward);
      if (!nb || !is_solid(grid.cv_type[*nb]))
        throw ValidationError("open cavity: zone " + std::to_string(z) + " at " + cell_name(air) +
                              " is not closed by a solid CV");
      const Face f = opposite(toward);
      m.surfaces.push_back({*nb, f, static_cast<int>(z), grid.face_area(*nb, f)});
      strips.push_back({a, b, side});
    };
    // Walk the perimeter counter-clockwise in plan so every strip is oriented consistently.
    for (std::size_t c = c0; c <= c1; ++c)
      add({r0, c}, Face::North, 0, {x_edge[c + 1], y_edge[r0]}, {x_edge[c], y_edge[r0]});
    for (std::size_t r = r0; r <= r1; ++r)
      add({r, c0}, Face::West, 1, {x_edge[c0], y_edge[r]}, {x_edge[c0], y_edge[r + 1]});
    for (std::size_t c = c0; c <= c1; ++c)
      add({r1, c}, Face::South, 2, {x_edge[c], y_edge[r1 + 1]}, {x_edge[c + 1], y_edge[r1 + 1]});
    for (std::size_t r = r1 + 1; r-- > r0;)
      add({r, c1}, Face::East, 3, {x_edge[c1 + 1], y_edge[r + 1]}, {x_edge[c1 + 1], y_edge[r]});
  }
  zone_begin.push_back(m.surfaces.size());

  const std::size_t n = m.surfaces.size();
  m.coefficients.assign(n * n, 0.0);
  for (std::size_t z = 0; z + 1 < zone_begin.size(); ++z) {
    const std::size_t b = zone_begin[z], e = zone_begin[z + 1];
    for (std::size_t i = b; i < e; ++i) {
      double rowsum = 0.0;
      for (std::size_t j = b; j < e; ++j) {
        if (strips[i].side == strips[j].side) continue;  // coplanar
        const double f = crossed_strings_factor(strips[i].a, strips[i].b, strips[j].a, strips[j].b);
        m(i, j) = f;
        rowsum += f;
      }
      for (std::size_t j = b; j < e; ++j) m(i, j) /= rowsum;
    }
    for (std::size_t i = b; i < e; ++i) {
      const double ei = mats.emissivity[m.surfaces[i].cell];
      for (std::size_t j = b; j < e; ++j) {
        const double ej = mats.emissivity[m.surfaces[j].cell];
        m(i, j) = (ei > 0.0 && ej > 0.0) ? m(i, j) / (1.0 / ei + 1.0 / ej - 1.0) : 0.0;
      }
    }
  }
  return m;
}

/// Text form: a `surfaces,<n>` header, n lines `row,col,face,zone,area`,
/// then n rows of comma-separated coefficients. Round-trips exactly.
inline std::string write_exchange_matrix(const RadiationExchangeMatrix& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# radsim radiation exchange matrix\n";
  out << "surfaces," << m.n_surfaces() << "\n";
  for (const auto& s : m.surfaces)
    out << s.cell.row << "," << s.cell.col << "," << to_string(s.face) << "," << s.zone << "," << s.area << "\n";
  for (std::size_t i = 0; i < m.n_surfaces(); ++i) {
    for (std::size_t j = 0; j < m.n_surfaces(); ++j) out << (j ? "," : "") << m(i, j);
    out << "\n";
  }
  return out.str();
}

inline RadiationExchangeMatrix read_exchange_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = detail::trim(line);
      if (!t.empty() && t.front() != '#') return true;
    }
    throw ParseError("exchange matrix: unexpected end of document");
  };
  auto fail = [&](const std::string& what) {
    return ParseError("exchange matrix line " + std::to_string(line_no) + ": " + what);
  };
  next();
  auto head = detail::split_csv(line);
  if (head.size() != 2 || head[0] != "surfaces") throw fail("expected 'surfaces,<n>' header");
  const auto n_opt = detail::parse_double(head[1]);
  if (!n_opt || *n_opt < 0 || *n_opt != std::floor(*n_opt)) throw fail("bad surface count");
  const auto n = static_cast<std::size_t>(*n_opt);

  RadiationExchangeMatrix m;
  for (std::size_t i = 0; i < n; ++i) {
    next();
    const auto f = detail::split_csv(line);
    if (f.size() != 5) throw fail("expected row,col,face,zone,area");
    const auto r = detail::parse_double(f[0]), c = detail::parse_double(f[1]);
    const auto zone = detail::parse_double(f[3]), area = detail::parse_double(f[4]);
    if (!r || !c || !zone || !area || *r < 0 || *c < 0) throw fail("bad surface entry");
    std::optional<Face> face;
    for (Face cand : kFaces)
      if (f[2] == to_string(cand)) face = cand;
    if (!face) throw fail("face must be one of E,N,W,S");
    m.surfaces.push_back({{static_cast<std::size_t>(*r), static_cast<std::size_t>(*c)}, *face,
                          static_cast<int>(*zone), *area});
  }
  m.coefficients.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    next();
    const auto f = detail::split_csv(line);
    if (f.size() != n) throw fail("expected " + std::to_string(n) + " coefficients");
    for (auto v : f) {
      const auto x = detail::parse_double(v);
      if (!x) throw fail("bad coefficient");
      m.coefficients.push_back(*x);
    }
  }
  m.validate();
  return m;
}

/// Checks an imported matrix refers to solid CVs of this grid.
inline void check_matrix_against_grid(const RadiationExchangeMatrix& m, const BuildingGrid& grid) {
  for (const auto& s : m.surfaces) {
    if (s.cell.row >= grid.rows || s.cell.col >= grid.cols)
      throw ValidationError("exchange matrix surface " + cell_name(s.cell) + " lies outside the grid");
    if (grid.cv_type[s.cell] == CvType::Boundary)
      throw ValidationError("exchange matrix surface " + cell_name(s.cell) + " is a Boundary CV");
  }
}

/// Solar flux tensors [W] plus the transmitted power before routing.
struct SolarTensors {
  Field absorbed;           // Q_sol,alpha
  Field transmitted;        // Q_sol,tau entering the air balance (zero when routed to mass)
  Field transmitted_power;  // transmitted power deposited per air CV, whichever route
  std::vector<double> zone_power;  // per zone, summed in window row-major, face order
};

/// Assembles solar tensors. `poa(cell, face)` yields G_Ts [W/m^2] for that
/// exposed face. Absorbed solar uses the exterior exposure scaling, per
/// exposed face. Transmitted power of each window face (tau * G * area) is
/// spread uniformly over the zone behind the window; the last CV of the
/// zone takes the remainder so the zone total is reproduced exactly.
template <typename PoaFn>
  requires std::invocable<PoaFn&, Cell, Face>
SolarTensors assemble_solar_tensors(const Building& b, PoaFn&& poa, bool mass_enabled) {
  const auto& grid = b.grid;
  const auto& mats = b.materials;
  SolarTensors s{Field(grid.rows, grid.cols, 0.0), Field(grid.rows, grid.cols, 0.0),
                 Field(grid.rows, grid.cols, 0.0), std::vector<double>(b.zones.count(), 0.0)};
  const double divisor = b.config.envelope_layer_divisor;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const Cell cell{r, c};
      const CvType t = grid.cv_type[cell];
      if (is_envelope(t)) {
        for (Face f : kFaces) {
          if (!grid.is_exposed(cell, f)) continue;
          const double g = poa(cell, f);
          const double area = grid.face_area(cell, f);
          const auto flux = solar_fluxes(g, mats.absorptivity[cell], mats.transmissivity[cell]);
          s.absorbed[cell] += flux.absorbed * area;
          if (t == CvType::Window && flux.transmitted > 0.0) {
            const int zone = b.window_zone(cell);
            if (zone < 0) throw ValidationError("window " + cell_name(cell) + " has no receiving zone");
            s.zone_power[static_cast<std::size_t>(zone)] += flux.transmitted * area;
          }
        }
      } else if (t == CvType::InteriorWall && divisor > 0.0) {
        for (Face f : kFaces) {
          const auto nb = grid.neighbor(cell, f);
          if (!nb || !is_envelope(grid.cv_type[*nb])) continue;
          s.absorbed[cell] += mats.absorptivity[cell] * poa(cell, f) * grid.face_length(cell, f) / divisor * grid.z;
        }
      }
    }
  }
  for (std::size_t z = 0; z < b.zones.count(); ++z) {
    const auto& cells = b.zones.cells[z];
    const double total = s.zone_power[z];
    if (total == 0.0 || cells.empty()) continue;
    const double share = total / static_cast<double>(cells.size());
    double placed = 0.0;
    for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
      s.transmitted_power[cells[k]] = share;
      placed += share;
    }
    s.transmitted_power[cells.back()] = total - placed;
  }
  if (!mass_enabled) s.transmitted = s.transmitted_power;
  return s;
}

inline SolarTensors assemble_solar_tensors(const Building& b, const PoaIrradiance& poa, bool mass_enabled) {
  return assemble_solar_tensors(
      b, [&](Cell, Face f) { return poa[face_orientation(f)]; }, mass_enabled);
}

}  // namespace radsim
