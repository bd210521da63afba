#pragma once

#include <optional>

#include "radsim/building.hpp"
#include "radsim/errors.hpp"
#include "radsim/field.hpp"

namespace radsim {

/// Sub-grid mass nodes, one behind every InteriorAir CV.
struct MassState {
  Field t_mass;   // K
  Field t0_mass;  // rho c z^2 / (k dt), zero off air CVs
  Field k_mass;   // coupling conductivity, zero off air CVs

  friend bool operator==(const MassState&, const MassState&) = default;
};

/// Mass temporal parameter rho c z^2 / (k dt).
inline double mass_temporal_parameter(const MassParams& p, double z, double dt) {
  return p.rho_mass * p.c_mass * z * z / (p.k_mass * dt);
}

/// Explicit mass update for one node: (T + q z / k + t0 T_mass_prev) / (1 + t0).
inline double mass_update(double t_air, double q_flux, double z, double k_mass, double t0, double t_mass_prev) {
  return (t_air + q_flux * z / k_mass + t0 * t_mass_prev) / (1.0 + t0);
}

/// Returns nullopt when mass is disabled. T_mass starts at the air field.
inline std::optional<MassState> init_mass(const BuildingGrid& grid, const SimulationConfig& config,
                                          const Field& t_initial) {
  if (!config.enable_interior_mass) return std::nullopt;
  const auto& p = config.mass_params;
  if (!(p.k_mass > 0.0)) throw ValidationError("mass_params.k_mass must be positive when mass is enabled");
  if (!(config.dt > 0.0)) throw ValidationError("simulation.dt must be positive");
  MassState m{t_initial, Field(grid.rows, grid.cols, 0.0), Field(grid.rows, grid.cols, 0.0)};
  const double t0 = mass_temporal_parameter(p, grid.z, config.dt);
  for (std::size_t i = 0; i < m.t0_mass.size(); ++i) {
    if (grid.cv_type.flat()[i] != CvType::InteriorAir) continue;
    m.t0_mass.flat()[i] = t0;
    m.k_mass.flat()[i] = p.k_mass;
  }
  return m;
}

/// Post-convergence update of every mass node. `q_sol_tau` is the
/// transmitted solar flux density [W/m^2] over each air CV's plan area.
inline MassState update_mass(MassState state, const Field& t_converged, const Field& q_sol_tau, double z) {
  auto tm = state.t_mass.flat();
  const auto t = t_converged.flat();
  const auto q = q_sol_tau.flat();
  const auto t0 = state.t0_mass.flat();
  const auto k = state.k_mass.flat();
  for (std::size_t i = 0; i < tm.size(); ++i) {
    if (k[i] <= 0.0) continue;
    tm[i] = mass_update(t[i], q[i], z, k[i], t0[i], tm[i]);
  }
  return state;
}

}  // namespace radsim
