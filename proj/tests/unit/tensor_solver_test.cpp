#include <gtest/gtest.h>

#include <random>

#include "radsim/iterative_solver.hpp"
#include "radsim/tensor_solver.hpp"
#include "test_support.hpp"

using namespace radsim;
using namespace radsim::testing;

namespace {

// 5x5 ring with a 3x3 air core, constant dark weather at t_inf
Problem small_problem(SimulationConfig cfg, double t_inf, std::chrono::hours span = std::chrono::hours{2}) {
  BuildingGrid g(5, 5, 1.0, 1.0, 3.0);
  Grid2D<MaterialProps> p(5, 5, air_props());
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c)
      if (r == 0 || c == 0 || r == 4 || c == 4) {
        g.cv_type(r, c) = CvType::ExteriorWall;
        p(r, c) = wall_props();
      }
  const Clock start = utc(2021, 1, 10);
  cfg.start_time = start;
  Building b = make_building(g, p, cfg);
  return make_problem(std::move(b), constant_weather(start, span, dark_record(t_inf)));
}

}  // namespace

TEST(ShiftFields, UniformFieldInjectsFarField) {
  const Field T(3, 4, 7.0);
  const auto sh = shift_fields(T, -1.0);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(sh[Face::East](r, c), c == 3 ? -1.0 : 7.0);
      EXPECT_EQ(sh[Face::West](r, c), c == 0 ? -1.0 : 7.0);
      EXPECT_EQ(sh[Face::North](r, c), r == 0 ? -1.0 : 7.0);
      EXPECT_EQ(sh[Face::South](r, c), r == 2 ? -1.0 : 7.0);
    }
}

TEST(ShiftFields, TwoByTwoByHand) {
  Field T(2, 2);
  T(0, 0) = 1;
  T(0, 1) = 2;
  T(1, 0) = 3;
  T(1, 1) = 4;
  const auto sh = shift_fields(T, 9.0);
  const auto& e = sh[Face::East];
  const auto& n = sh[Face::North];
  const auto& w = sh[Face::West];
  const auto& s = sh[Face::South];
  EXPECT_EQ(e(0, 0), 2);
  EXPECT_EQ(e(0, 1), 9);
  EXPECT_EQ(e(1, 0), 4);
  EXPECT_EQ(e(1, 1), 9);
  EXPECT_EQ(w(0, 0), 9);
  EXPECT_EQ(w(0, 1), 1);
  EXPECT_EQ(w(1, 0), 9);
  EXPECT_EQ(w(1, 1), 3);
  EXPECT_EQ(n(0, 0), 9);
  EXPECT_EQ(n(0, 1), 9);
  EXPECT_EQ(n(1, 0), 1);
  EXPECT_EQ(n(1, 1), 2);
  EXPECT_EQ(s(0, 0), 3);
  EXPECT_EQ(s(0, 1), 4);
  EXPECT_EQ(s(1, 0), 9);
  EXPECT_EQ(s(1, 1), 9);
}

TEST(ShiftFields, HomogeneousEverywhere) {
  const Field T(4, 3, 5.5);
  const auto sh = shift_fields(T, 5.5);
  for (const auto& f : sh.T) EXPECT_EQ(f, T);
}

TEST(TensorSolver, EquilibriumNeedsOneIteration) {
  const Problem p = small_problem(features_off(SimulationConfig{}), 293.15);
  ThermalState s = p.initial_state();
  const Field before = s.T;
  const auto rep = step(TensorSolver{}, s, p);
  EXPECT_EQ(rep.inner_iterations, 1);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(max_abs_diff(s.T, before), 1e-12);
}

TEST(TensorSolver, OneIterationIsThePlainAirBalance) {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 20; ++k) {
    auto rb = random_layout(rng);
    auto cfg = features_off(random_config(rng, utc(2021, 3, 1)));
    cfg.max_inner_iterations = 1;
    const Problem p = make_problem(make_building(rb.grid, rb.props, cfg, rb.heat),
                                   constant_weather(utc(2021, 3, 1), std::chrono::hours{1}, dark_record(277.0)));
    ThermalState s = p.initial_state();
    s.T = random_field(rng, rb.grid.rows, rb.grid.cols, 260, 320);
    s.T_prev_step = random_field(rng, rb.grid.rows, rb.grid.cols, 260, 320);
    const Field expected = direct_balance(p.building, s.T, s.T_prev_step, 277.0);
    TensorSolver{}.advance(s, p, p.inputs_at(utc(2021, 3, 1, 0, 5)));
    EXPECT_LE(max_rel_diff(s.T, expected), 1e-12);
  }
}

TEST(TensorSolver, NonPositiveDenominatorRaises) {
  Problem p = small_problem(features_off(SimulationConfig{}), 290.0);
  auto& m = p.building.materials;
  m.C(2, 2) = 0.0;
  for (int d = 0; d < 4; ++d) m.K[d](2, 2) = m.H[d](2, 2) = 0.0;
  ThermalState s = p.initial_state();
  try {
    step(TensorSolver{}, s, p);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("(2,2)"), std::string::npos);
  }
}

TEST(TensorSolver, ReportsNonConvergence) {
  auto cfg = SimulationConfig{};
  cfg.enable_interior_mass = false;
  cfg.max_inner_iterations = 2;
  cfg.convergence_epsilon = 1e-14;
  const Problem p = small_problem(cfg, 260.0);
  ThermalState s = p.initial_state();
  const auto rep = step(TensorSolver{}, s, p);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.inner_iterations, 2);
  EXPECT_GT(rep.max_delta, 1e-14);
}

TEST(TensorSolver, Deterministic) {
  const Problem p = canonical_problem();
  const auto a = run_episode(TensorSolver{}, p, p.initial_state(), 5);
  const auto b = run_episode(TensorSolver{}, p, p.initial_state(), 5);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(a.snapshots[k], b.snapshots[k]);
}

TEST(TensorSolver, TenStepsGiveTenReports) {
  const Problem p = canonical_problem();
  const auto ep = run_episode(TensorSolver{}, p, p.initial_state(), 10);
  ASSERT_EQ(ep.reports.size(), 10u);
  ASSERT_EQ(ep.snapshots.size(), 10u);
  for (const auto& r : ep.reports) {
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.wall_time, 0.0);
  }
  EXPECT_EQ(ep.snapshots.back().step_index, 10u);
  EXPECT_EQ(ep.snapshots.back().sim_clock, p.start_time() + std::chrono::minutes{50});
}

TEST(TensorSolver, ZeroStepsRejected) {
  const Problem p = canonical_problem();
  EXPECT_THROW(run_episode(TensorSolver{}, p, p.initial_state(), 0), std::invalid_argument);
}

TEST(TensorSolver, HorizonPastWeatherRejected) {
  const Problem p = canonical_problem();
  EXPECT_THROW(run_episode(TensorSolver{}, p, p.initial_state(), 100), ValidationError);
}

TEST(TensorSolver, FailuresCarryTheStepNumber) {
  Problem p = small_problem(features_off(SimulationConfig{}), 290.0);
  auto& m = p.building.materials;
  m.C(2, 2) = 0.0;
  for (int d = 0; d < 4; ++d) m.K[d](2, 2) = m.H[d](2, 2) = 0.0;
  try {
    run_episode(TensorSolver{}, p, p.initial_state(), 3);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(TensorSolver, BoundaryCellsPinnedToFarField) {
  BuildingGrid g(5, 5, 1.0, 1.0, 3.0);
  Grid2D<MaterialProps> p(5, 5, air_props());
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) {
      if (r == 0) g.cv_type(r, c) = CvType::Boundary;
      else if (r == 1 || c == 0 || r == 4 || c == 4) {
        g.cv_type(r, c) = CvType::ExteriorWall;
        p(r, c) = wall_props();
      }
    }
  auto cfg = features_off(SimulationConfig{});
  cfg.start_time = utc(2021, 1, 10);
  const Problem pr = make_problem(make_building(g, p, cfg),
                                  constant_weather(utc(2021, 1, 10), std::chrono::hours{1}, dark_record(271.0)));
  ThermalState s = pr.initial_state();
  step(TensorSolver{}, s, pr);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(s.T(0, c), 271.0);
}

TEST(TensorSolver, HotCellDecaysSymmetricallyLikeTheOracle) {
  auto cfg = features_off(SimulationConfig{});
  cfg.convergence_epsilon = 1e-11;
  cfg.max_inner_iterations = 10000;
  cfg.initial_temperature = 290.0;
  const Problem p = small_problem(cfg, 290.0);
  ThermalState s0 = p.initial_state();
  s0.T(2, 2) = s0.T_prev_step(2, 2) = 320.0;
  const auto a = run_episode(TensorSolver{}, p, s0, 6);
  const auto b = run_episode(IterativeSolver{}, p, s0, 6);
  for (std::size_t k = 0; k < 6; ++k) {
    const Field& t = a.snapshots[k].T;
    EXPECT_LT(max_abs_diff(t, b.snapshots[k].T), 1e-8);
    EXPECT_NEAR(t(1, 2), t(3, 2), 1e-9);
    EXPECT_NEAR(t(2, 1), t(2, 3), 1e-9);
    EXPECT_NEAR(t(1, 2), t(2, 1), 1e-9);
    EXPECT_NEAR(t(1, 1), t(3, 3), 1e-9);
    EXPECT_GT(t(2, 2), t(1, 2));
    EXPECT_GT(t(1, 2), t(1, 1));
  }
  EXPECT_LT(a.snapshots[5].T(2, 2), a.snapshots[0].T(2, 2));
}

TEST(TensorSolver, ConstantWeatherSettlesToSteadyState) {
  SimulationConfig cfg;
  cfg.enable_interior_mass = false;
  cfg.dt = 3600.0;
  cfg.convergence_epsilon = 1e-10;
  cfg.max_inner_iterations = 5000;
  cfg.initial_temperature = 300.0;
  const int steps = 500;
  Problem p = small_problem(cfg, 275.0, std::chrono::hours{steps + 1});
  p.building.heat_source(2, 2) = 150.0;
  const auto ep = run_episode(TensorSolver{}, p, p.initial_state(), steps);

  std::vector<double> change;
  Field prev = p.initial_state().T;
  for (const auto& snap : ep.snapshots) {
    change.push_back(max_abs_diff(snap.T, prev));
    prev = snap.T;
  }
  for (std::size_t k = 50; k < change.size(); ++k) EXPECT_LE(change[k], change[k - 1] * (1 + 1e-9) + 1e-9) << k;

  // steady state: one oracle step with negligible heat capacity
  Problem steady = p;
  steady.building.config.dt = 1e12;
  steady.building.config.max_inner_iterations = 200000;
  steady.building.config.convergence_epsilon = 1e-11;
  ThermalState s = p.initial_state();
  IterativeSolver{}.advance(s, steady, steady.inputs_at(p.start_time() + std::chrono::hours{1}));
  EXPECT_LT(max_abs_diff(ep.snapshots.back().T, s.T), 1e-3);
  EXPECT_GT(s.T(2, 2), 275.0);
}
