#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "radsim/building.hpp"
#include "radsim/errors.hpp"
#include "radsim/field.hpp"
#include "radsim/mass.hpp"
#include "radsim/radiation.hpp"
#include "radsim/simulation.hpp"

namespace radsim {

/// Neighbor temperature fields T1..T4, indexed by face_index().
struct ShiftedFields {
  std::array<Field, 4> T;

  const Field& operator[](Face f) const { return T[face_index(f)]; }
};

/// One-cell shifts in each cardinal direction; cells shifted in from
/// outside the grid take `t_inf`.
inline void shift_fields_into(const Field& T, double t_inf, ShiftedFields& out) {
  const std::size_t rows = T.rows(), cols = T.cols();
  for (auto& f : out.T)
    if (!f.same_shape(T)) f = Field(rows, cols);
  auto& east = out.T[face_index(Face::East)];
  auto& north = out.T[face_index(Face::North)];
  auto& west = out.T[face_index(Face::West)];
  auto& south = out.T[face_index(Face::South)];
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = &T(r, 0);
    double* e = &east(r, 0);
    double* w = &west(r, 0);
    std::copy(src + 1, src + cols, e);
    e[cols - 1] = t_inf;
    std::copy(src, src + cols - 1, w + 1);
    w[0] = t_inf;
  }
  const auto t = T.flat();
  auto n = north.flat();
  auto s = south.flat();
  std::fill(n.begin(), n.begin() + static_cast<std::ptrdiff_t>(cols), t_inf);
  std::copy(t.begin(), t.end() - static_cast<std::ptrdiff_t>(cols), n.begin() + static_cast<std::ptrdiff_t>(cols));
  std::copy(t.begin() + static_cast<std::ptrdiff_t>(cols), t.end(), s.begin());
  std::fill(s.end() - static_cast<std::ptrdiff_t>(cols), s.end(), t_inf);
}

inline ShiftedFields shift_fields(const Field& T, double t_inf) {
  ShiftedFields out;
  shift_fields_into(T, t_inf, out);
  return out;
}

/// Whole-grid fixed-point update. Per step the linear coefficients are
/// assembled once as fields; each inner iteration recomputes the radiation
/// tensors from the current iterate (Picard lagging) and applies
///
///   T = [Q_x + sum_d a_d T_d + h T_inf + g_m T_mass + Q_lwx + Q_lwr
///        + Q_sol,a + Q_sol,t + cap T_prev] / [sum_d a_d + h + g_m + cap]
///
/// element-wise, with a_d = face area * K_d / spacing, h the summed
/// face-area-weighted film coefficients, g_m = K_mass U V / z and
/// cap = C rho U V z / dt. Boundary CVs are pinned to T_inf.
class TensorSolver final : public Solver {
 public:
  std::string name() const override { return "tensor"; }

  StepReport advance(ThermalState& state, const Problem& problem, const StepInputs& inputs) const override {
    const Building& b = problem.building;
    const BuildingGrid& grid = b.grid;
    const MaterialField& m = b.materials;
    const SimulationConfig& cfg = b.config;
    const std::size_t rows = grid.rows, cols = grid.cols, n = rows * cols;
    const double t_inf = inputs.exterior.t_air;
    const double z = grid.z;
    if (!state.T.same_shape(rows, cols) || !state.T_prev_step.same_shape(rows, cols))
      throw std::invalid_argument("state shape does not match the building grid");

    const auto type = grid.cv_type.flat();
    const auto U = grid.U.flat();
    const auto V = grid.V.flat();

    std::vector<unsigned char> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = type[i] != CvType::Boundary;
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i]) state.T.flat()[i] = state.T_prev_step.flat()[i] = t_inf;

    std::array<Field, 4> a;
    for (Face f : kFaces) {
      const int d = face_index(f);
      a[d] = Field(rows, cols);
      const auto K = m.K[d].flat();
      auto out = a[d].flat();
      if (is_x_face(f))
        for (std::size_t i = 0; i < n; ++i) out[i] = V[i] * z * K[i] / U[i];
      else
        for (std::size_t i = 0; i < n; ++i) out[i] = U[i] * z * K[i] / V[i];
    }

    const bool mass_on = cfg.enable_interior_mass && state.mass.has_value();
    const SolarTensors solar =
        cfg.enable_solar
            ? assemble_solar_tensors(
                  b, [&](Cell c, Face f) { return inputs.irradiance[face_index(f)][c]; }, mass_on)
            : SolarTensors{Field(rows, cols, 0.0), Field(rows, cols, 0.0), Field(rows, cols, 0.0), {}};

    Field fixed(rows, cols), denom(rows, cols);
    {
      const auto qx = b.heat_source.flat();
      const auto C = m.C.flat();
      const auto rho = m.rho.flat();
      const auto sa = solar.absorbed.flat();
      const auto st = solar.transmitted.flat();
      const auto tp = state.T_prev_step.flat();
      auto num0 = fixed.flat();
      auto den = denom.flat();
      for (std::size_t i = 0; i < n; ++i) {
        const double cap = C[i] * rho[i] * U[i] * V[i] * z / cfg.dt;
        const double h = V[i] * z * (m.H[0].flat()[i] + m.H[2].flat()[i]) +
                         U[i] * z * (m.H[1].flat()[i] + m.H[3].flat()[i]);
        double gm = 0.0, gm_t = 0.0;
        if (mass_on) {
          gm = state.mass->k_mass.flat()[i] * U[i] * V[i] / z;
          gm_t = gm * state.mass->t_mass.flat()[i];
        }
        num0[i] = qx[i] + h * t_inf + gm_t + sa[i] + st[i] + cap * tp[i];
        den[i] = a[0].flat()[i] + a[1].flat()[i] + a[2].flat()[i] + a[3].flat()[i] + h + gm + cap;
        if (active[i] && !(den[i] > 0.0))
          throw NumericalError("non-positive update denominator at cell " + cell_name({i / cols, i % cols}));
      }
    }

    const bool ext_on = cfg.enable_exterior_lw;
    const bool int_on = cfg.enable_interior_lw && problem.exchange.has_value();
    ExteriorLwOperator ext_op;
    if (ext_on) ext_op = ExteriorLwOperator(grid, m, inputs.exterior, cfg.envelope_layer_divisor);
    InteriorLwOperator int_op;
    if (int_on) int_op = InteriorLwOperator(*problem.exchange);

    Field q_lwr(rows, cols, 0.0), q_lwx(rows, cols, 0.0);
    Field next(rows, cols);
    ShiftedFields sh;
    StepReport report;
    while (report.inner_iterations < cfg.max_inner_iterations) {
      shift_fields_into(state.T, t_inf, sh);
      if (ext_on) ext_op.apply(state.T, q_lwr);
      if (int_on) int_op.apply(state.T, q_lwx);

      const auto t = state.T.flat();
      const auto t1 = sh.T[0].flat(), t2 = sh.T[1].flat(), t3 = sh.T[2].flat(), t4 = sh.T[3].flat();
      const auto a1 = a[0].flat(), a2 = a[1].flat(), a3 = a[2].flat(), a4 = a[3].flat();
      const auto num0 = fixed.flat();
      const auto den = denom.flat();
      const auto lr = q_lwr.flat();
      const auto lx = q_lwx.flat();
      auto out = next.flat();
      double delta = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double num = num0[i] + a1[i] * t1[i] + a2[i] * t2[i] + a3[i] * t3[i] + a4[i] * t4[i] + lr[i] + lx[i];
        out[i] = active[i] ? num / den[i] : t_inf;
        delta = std::max(delta, std::abs(out[i] - t[i]));
      }
      std::swap(state.T, next);
      ++report.inner_iterations;
      report.max_delta = delta;
      if (delta < cfg.convergence_epsilon) {
        report.converged = true;
        break;
      }
    }

    if (mass_on) {
      Field q_flux(rows, cols, 0.0);
      const auto p = solar.transmitted_power.flat();
      auto q = q_flux.flat();
      for (std::size_t i = 0; i < n; ++i) q[i] = p[i] / (U[i] * V[i]);
      state.mass = update_mass(std::move(*state.mass), state.T, q_flux, z);
    }
    state.T_prev_step = state.T;
    return report;
  }
};

}  // namespace radsim
