#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "radsim/building.hpp"
#include "radsim/errors.hpp"
#include "radsim/field.hpp"
#include "radsim/mass.hpp"
#include "radsim/radiation.hpp"
#include "radsim/solar.hpp"
#include "radsim/weather.hpp"

namespace radsim {

struct ThermalState {
  Field T;
  Field T_prev_step;
  std::optional<MassState> mass;
  std::size_t step_index{0};
  Clock sim_clock{};

  friend bool operator==(const ThermalState&, const ThermalState&) = default;
};

struct StepReport {
  int inner_iterations{0};
  double max_delta{0.0};  // K, last iteration
  bool converged{false};
  double wall_time{0.0};  // s
};

/// Boundary conditions of one step, shared verbatim by every solver.
struct StepInputs {
  Clock time{};
  ExteriorTemperatures exterior;  // exterior.t_air is the far-field T_inf
  /// Plane-of-array irradiance [W/m^2] seen through each face of each CV,
  /// indexed by face_index(); only filled on solid CVs.
  std::array<Field, 4> irradiance;
};

/// Everything needed to step a building through time.
struct Problem {
  Building building;
  std::vector<WeatherRecord> weather;
  std::optional<RadiationExchangeMatrix> exchange;

  Clock start_time() const {
    if (building.config.start_time) return *building.config.start_time;
    if (weather.empty()) throw ValidationError("no weather records");
    return weather.front().timestamp;
  }

  std::chrono::seconds step_duration() const {
    return std::chrono::seconds{std::llround(building.config.dt)};
  }

  /// Zero-order-hold weather at `t`, sky temperature, sun position and per-face POA.
  StepInputs inputs_at(Clock t) const {
    if (weather.empty() || t > weather.back().timestamp)
      throw ValidationError("weather does not cover " + format_timestamp(t));
    const auto& rec = weather_at(weather, t);
    const auto& grid = building.grid;
    const auto& site = building.config.site;
    StepInputs in;
    in.time = t;
    in.exterior = {rec.t_air, rec.t_gnd, sky_temperature(rec)};
    const auto geom = solar_position(site, t);
    for (auto& f : in.irradiance) f = Field(grid.rows, grid.cols, 0.0);
    for (std::size_t r = 0; r < grid.rows; ++r)
      for (std::size_t c = 0; c < grid.cols; ++c) {
        if (!is_solid(grid.cv_type(r, c))) continue;
        const double tilt = building.materials.tilt(r, c);
        for (Face f : kFaces)
          in.irradiance[face_index(f)](r, c) =
              poa_irradiance(rec, geom, tilt, orientation_azimuth(face_orientation(f)), site.albedo);
      }
    return in;
  }

  ThermalState initial_state() const {
    const auto& grid = building.grid;
    ThermalState s;
    s.T = Field(grid.rows, grid.cols, building.config.initial_temperature);
    s.sim_clock = start_time();
    const double t_inf = weather_at(weather, s.sim_clock).t_air;
    for (std::size_t i = 0; i < s.T.size(); ++i)
      if (grid.cv_type.flat()[i] == CvType::Boundary) s.T.flat()[i] = t_inf;
    s.T_prev_step = s.T;
    s.mass = init_mass(grid, building.config, s.T);
    return s;
  }
};

/// Builds the exchange matrix from the grid when interior LW is on and none was imported.
inline Problem make_problem(Building building, std::vector<WeatherRecord> weather,
                            std::optional<RadiationExchangeMatrix> exchange = std::nullopt) {
  Problem p{std::move(building), std::move(weather), std::move(exchange)};
  if (p.weather.empty()) throw ValidationError("no weather records");
  if (p.building.config.enable_interior_lw && !p.exchange)
    p.exchange = build_exchange_matrix_2d(p.building.grid, p.building.materials, p.building.zones);
  if (p.exchange) {
    p.exchange->validate();
    check_matrix_against_grid(*p.exchange, p.building.grid);
  }
  if (p.start_time() < p.weather.front().timestamp)
    throw ValidationError("simulation start precedes the first weather record");
  return p;
}

/// Common interface of the tensorized solver and the iterative oracle.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual std::string name() const = 0;
  /// Advances `state` by one timestep under `inputs`; clock bookkeeping is the caller's.
  virtual StepReport advance(ThermalState& state, const Problem& problem, const StepInputs& inputs) const = 0;
};

/// One timestep including per-step assembly of boundary inputs, timed.
inline StepReport step(const Solver& solver, ThermalState& state, const Problem& problem) {
  const auto t0 = std::chrono::steady_clock::now();
  const Clock next = state.sim_clock + problem.step_duration();
  const StepInputs inputs = problem.inputs_at(next);
  StepReport report = solver.advance(state, problem, inputs);
  state.sim_clock = next;
  ++state.step_index;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

struct EpisodeResult {
  std::vector<ThermalState> snapshots;
  std::vector<StepReport> reports;

  double total_time() const {
    double t = 0.0;
    for (const auto& r : reports) t += r.wall_time;
    return t;
  }
};

/// Runs n_steps; keeps a snapshot after every `snapshot_every`-th step and the last.
inline EpisodeResult run_episode(const Solver& solver, const Problem& problem, ThermalState state,
                                 std::size_t n_steps, std::size_t snapshot_every = 1) {
  if (n_steps == 0) throw std::invalid_argument("run_episode: n_steps must be at least 1");
  if (snapshot_every == 0) snapshot_every = 1;
  const Clock horizon = state.sim_clock + problem.step_duration() * static_cast<long>(n_steps);
  if (horizon > problem.weather.back().timestamp)
    throw ValidationError("weather ends at " + format_timestamp(problem.weather.back().timestamp) +
                          " before the episode horizon " + format_timestamp(horizon));
  EpisodeResult out;
  out.reports.reserve(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    try {
      out.reports.push_back(step(solver, state, problem));
    } catch (const std::exception& e) {
      throw StepError(k + 1, e.what());
    }
    if ((k + 1) % snapshot_every == 0 || k + 1 == n_steps) out.snapshots.push_back(state);
  }
  return out;
}

}  // namespace radsim
