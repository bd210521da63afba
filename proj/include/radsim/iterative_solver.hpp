#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "radsim/building.hpp"
#include "radsim/errors.hpp"
#include "radsim/field.hpp"
#include "radsim/simulation.hpp"

// Reference solver. Deliberately naive: every node's balance is rebuilt from
// the grid and material data on every sweep, and no numerical kernel of the
// tensorized path (shifts, radiation operators, solar assembly, mass update)
// is reused. Only the data types are shared.

namespace radsim {

enum class SweepOrder { Forward, Reverse };

namespace oracle {

inline constexpr double kSigma = 5.670374419e-8;
inline constexpr double kPi = 3.14159265358979323846;

/// Per-node exterior LW gain [W/m^2] written out term by term.
inline double exterior_lw(double eps, double tilt_deg, double t_surf, double t_gnd, double t_sky, double t_air) {
  double cos_tilt = std::cos(tilt_deg * kPi / 180.0);
  if (tilt_deg == 90.0) cos_tilt = 0.0;
  const double f_gnd = (1.0 - cos_tilt) / 2.0;
  const double f_sky = (1.0 + cos_tilt) / 2.0;
  const double beta = std::sqrt(f_sky);
  const double f_air = f_sky * (1.0 - beta);
  const double ts4 = std::pow(t_surf, 4);
  return eps * kSigma *
         (f_gnd * (std::pow(t_gnd, 4) - ts4) + beta * f_sky * (std::pow(t_sky, 4) - ts4) +
          f_air * (std::pow(t_air, 4) - ts4));
}

/// Area [m^2] over which a node receives exterior fluxes.
inline double exterior_area(const Building& b, Cell cell) {
  const auto& g = b.grid;
  const CvType t = g.cv_type[cell];
  double area = 0.0;
  for (Face f : kFaces) {
    const auto nb = g.neighbor(cell, f);
    const bool outside = !nb || g.cv_type[*nb] == CvType::Boundary;
    const double len = (f == Face::East || f == Face::West) ? g.V[cell] : g.U[cell];
    if (is_envelope(t) && outside) area += len * g.z;
    if (t == CvType::InteriorWall && b.config.envelope_layer_divisor > 0.0 && nb && is_envelope(g.cv_type[*nb]))
      area += len * g.z / b.config.envelope_layer_divisor;
  }
  return area;
}

/// Solar gains [W] of a node: absorbed on its exterior faces plus, for an
/// air node, its equal share of the power transmitted by the zone's windows.
struct NodeSolar {
  double absorbed{0.0};
  double transmitted{0.0};
};

inline NodeSolar node_solar(const Building& b, const StepInputs& in, Cell cell) {
  const auto& g = b.grid;
  const auto& m = b.materials;
  NodeSolar s;
  const CvType t = g.cv_type[cell];
  for (Face f : kFaces) {
    const auto nb = g.neighbor(cell, f);
    const bool outside = !nb || g.cv_type[*nb] == CvType::Boundary;
    const double len = (f == Face::East || f == Face::West) ? g.V[cell] : g.U[cell];
    const double G = in.irradiance[face_index(f)][cell];
    if (is_envelope(t) && outside) s.absorbed += m.absorptivity[cell] * G * len * g.z;
    if (t == CvType::InteriorWall && b.config.envelope_layer_divisor > 0.0 && nb && is_envelope(g.cv_type[*nb]))
      s.absorbed += m.absorptivity[cell] * G * len * g.z / b.config.envelope_layer_divisor;
  }
  if (t != CvType::InteriorAir) return s;
  const int zone = b.zones.zone_of[cell];
  double zone_power = 0.0;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      const Cell w{r, c};
      if (g.cv_type[w] != CvType::Window || b.window_zone(w) != zone) continue;
      for (Face f : kFaces) {
        const auto nb = g.neighbor(w, f);
        if (nb && g.cv_type[*nb] != CvType::Boundary) continue;
        const double len = (f == Face::East || f == Face::West) ? g.V[w] : g.U[w];
        zone_power += m.transmissivity[w] * in.irradiance[face_index(f)][w] * len * g.z;
      }
    }
  s.transmitted = zone_power / static_cast<double>(b.zones.cells[static_cast<std::size_t>(zone)].size());
  return s;
}

/// Net interior LW gain [W] of a node, summed over the matrix surfaces it owns.
inline double interior_lw(const RadiationExchangeMatrix& mx, const Field& T, Cell cell) {
  double gain = 0.0;
  const std::size_t n = mx.surfaces.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mx.surfaces[i].cell == cell)) continue;
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      q += mx.coefficients[i * n + j] * (std::pow(T[mx.surfaces[j].cell], 4) - std::pow(T[cell], 4));
    gain += mx.surfaces[i].area * kSigma * q;
  }
  return gain;
}

}  // namespace oracle

/// Gauss-Seidel sweeps over the nodes, each node solving its own scalar
/// balance with the freshest neighbor values, until the largest change in a
/// sweep drops below epsilon. Mass nodes update once after convergence.
class IterativeSolver final : public Solver {
 public:
  explicit IterativeSolver(SweepOrder order = SweepOrder::Forward) : order_(order) {}

  std::string name() const override { return "iterative"; }

  StepReport advance(ThermalState& state, const Problem& problem, const StepInputs& in) const override {
    const Building& b = problem.building;
    const auto& g = b.grid;
    const auto& m = b.materials;
    const auto& cfg = b.config;
    const double t_inf = in.exterior.t_air;
    const bool mass_on = cfg.enable_interior_mass && state.mass.has_value();
    const bool int_on = cfg.enable_interior_lw && problem.exchange.has_value();

    for (std::size_t r = 0; r < g.rows; ++r)
      for (std::size_t c = 0; c < g.cols; ++c)
        if (g.cv_type(r, c) == CvType::Boundary) state.T(r, c) = state.T_prev_step(r, c) = t_inf;

    Field solar_gain(g.rows, g.cols, 0.0);
    Field transmitted(g.rows, g.cols, 0.0);
    if (cfg.enable_solar) {
      for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c) {
          const auto s = oracle::node_solar(b, in, {r, c});
          transmitted(r, c) = s.transmitted;
          solar_gain(r, c) = s.absorbed + (mass_on ? 0.0 : s.transmitted);
        }
    }

    Field& T = state.T;
    StepReport report;
    const std::size_t count = g.rows * g.cols;
    while (report.inner_iterations < cfg.max_inner_iterations) {
      double delta = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t idx = order_ == SweepOrder::Forward ? k : count - 1 - k;
        const Cell cell{idx / g.cols, idx % g.cols};
        if (g.cv_type[cell] == CvType::Boundary) continue;

        const double volume = g.U[cell] * g.V[cell] * g.z;
        const double cap = m.C[cell] * m.rho[cell] * volume / cfg.dt;
        double num = b.heat_source[cell] + cap * state.T_prev_step[cell] + solar_gain[cell];
        double den = cap;
        for (Face f : kFaces) {
          const int d = face_index(f);
          const bool x = f == Face::East || f == Face::West;
          const double area = (x ? g.V[cell] : g.U[cell]) * g.z;
          const double dist = x ? g.U[cell] : g.V[cell];
          const auto nb = g.neighbor(cell, f);
          const double t_nb = nb ? T[*nb] : t_inf;
          num += area * (m.K[d][cell] / dist * t_nb + m.H[d][cell] * t_inf);
          den += area * (m.K[d][cell] / dist + m.H[d][cell]);
        }
        if (mass_on && g.cv_type[cell] == CvType::InteriorAir) {
          const double gm = state.mass->k_mass[cell] * g.U[cell] * g.V[cell] / g.z;
          num += gm * state.mass->t_mass[cell];
          den += gm;
        }
        if (cfg.enable_exterior_lw) {
          const double area = oracle::exterior_area(b, cell);
          if (area > 0.0)
            num += area * oracle::exterior_lw(m.emissivity[cell], m.tilt[cell], T[cell], in.exterior.t_gnd,
                                              in.exterior.t_sky, in.exterior.t_air);
        }
        if (int_on) num += oracle::interior_lw(*problem.exchange, T, cell);
        if (!(den > 0.0)) throw NumericalError("non-positive node balance denominator at cell " + cell_name(cell));

        const double updated = num / den;
        delta = std::max(delta, std::abs(updated - T[cell]));
        T[cell] = updated;
      }
      ++report.inner_iterations;
      report.max_delta = delta;
      if (delta < cfg.convergence_epsilon) {
        report.converged = true;
        break;
      }
    }

    if (mass_on) {
      auto& mass = *state.mass;
      for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c) {
          if (g.cv_type(r, c) != CvType::InteriorAir) continue;
          const double q = transmitted(r, c) / (g.U(r, c) * g.V(r, c));
          const double t0 = mass.t0_mass(r, c);
          const double k = mass.k_mass(r, c);
          mass.t_mass(r, c) = (T(r, c) + q * g.z / k + t0 * mass.t_mass(r, c)) / (1.0 + t0);
        }
    }
    state.T_prev_step = T;
    return report;
  }

 private:
  SweepOrder order_;
};

/// Whole-building energy balance of a completed step, evaluated at the final
/// temperatures: stored = sum C rho U V z (T - T_prev) / dt against the
/// exchanges with the exterior, radiation, solar, mass coupling and Q_x.
/// Conduction between active CVs is left out; it cancels when conservative.
struct EnergyAudit {
  double stored{0.0};     // W
  double sources{0.0};    // W
  double magnitude{0.0};  // sum of |terms|, W

  double relative_imbalance() const {
    const double scale = std::max(magnitude, std::abs(stored));
    return scale > 0.0 ? std::abs(stored - sources) / scale : 0.0;
  }
};

inline EnergyAudit audit_step(const Problem& problem, const StepInputs& in, const Field& T_prev,
                              const std::optional<MassState>& mass_before, const Field& T) {
  const Building& b = problem.building;
  const auto& g = b.grid;
  const auto& m = b.materials;
  const auto& cfg = b.config;
  const double t_inf = in.exterior.t_air;
  const bool mass_on = cfg.enable_interior_mass && mass_before.has_value();
  const bool int_on = cfg.enable_interior_lw && problem.exchange.has_value();
  EnergyAudit a;
  auto add = [&](double term) {
    a.sources += term;
    a.magnitude += std::abs(term);
  };
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c) {
      const Cell cell{r, c};
      if (g.cv_type[cell] == CvType::Boundary) continue;
      a.stored += m.C[cell] * m.rho[cell] * g.U[cell] * g.V[cell] * g.z * (T[cell] - T_prev[cell]) / cfg.dt;
      add(b.heat_source[cell]);
      for (Face f : kFaces) {
        const int d = face_index(f);
        const auto nb = g.neighbor(cell, f);
        const bool x = f == Face::East || f == Face::West;
        const double area = (x ? g.V[cell] : g.U[cell]) * g.z;
        const double dist = x ? g.U[cell] : g.V[cell];
        const bool outside = !nb || g.cv_type[*nb] == CvType::Boundary;
        add(area * m.H[d][cell] * (t_inf - T[cell]));
        if (outside) add(area * m.K[d][cell] / dist * (t_inf - T[cell]));
      }
      if (mass_on && g.cv_type[cell] == CvType::InteriorAir)
        add(mass_before->k_mass[cell] * g.U[cell] * g.V[cell] / g.z * (mass_before->t_mass[cell] - T[cell]));
      if (cfg.enable_exterior_lw) {
        const double area = oracle::exterior_area(b, cell);
        if (area > 0.0)
          add(area * oracle::exterior_lw(m.emissivity[cell], m.tilt[cell], T[cell], in.exterior.t_gnd,
                                         in.exterior.t_sky, in.exterior.t_air));
      }
      if (int_on) add(oracle::interior_lw(*problem.exchange, T, cell));
      if (cfg.enable_solar) {
        const auto s = oracle::node_solar(b, in, cell);
        add(s.absorbed + (mass_on ? 0.0 : s.transmitted));
      }
    }
  a.magnitude += std::abs(a.stored);
  return a;
}

}  // namespace radsim
