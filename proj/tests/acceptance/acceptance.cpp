// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "radsim/radsim.hpp"
#include "test_support.hpp"

using namespace radsim;
using namespace radsim::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[256];

const char* fmt(const char* f, double a, double b = 0.0) {
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome canonical_equivalence() {
  const Problem p = canonical_problem();
  const auto& cfg = p.building.config;
  if (p.building.grid.rows * p.building.grid.cols != 276 || cfg.dt != 300.0 || cfg.convergence_epsilon != 1e-3 ||
      !cfg.enable_interior_lw || !cfg.enable_exterior_lw || !cfg.enable_solar || !cfg.enable_interior_mass)
    return {false, "bundled building does not match the required configuration"};
  const auto rep = compare_solvers(TensorSolver{}, p, IterativeSolver{}, p, 10);
  double worst = 0.0;
  for (const auto& s : rep.steps) worst = std::max(worst, s.max_rel_diff);
  return {rep.pass && rep.steps.size() == 10,
          fmt("max rel diff %.3e over 10 steps, %.0f significant figures", worst, rep.sig_figs_agreement)};
}

Outcome random_equivalence() {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < 50; ++k) {
    const Problem p = random_problem(rng, 8);
    const auto rep = compare_solvers(TensorSolver{}, p, IterativeSolver{}, p, 5);
    worst = std::max(worst, rep.per_cell_max_rel_diff);
    if (!rep.pass) ++failures;
  }
  return {failures == 0, fmt("%.0f of 50 buildings over tolerance, worst rel diff %.3e", failures, worst)};
}

Outcome speedup() {
  const Problem p = canonical_problem();
  const auto rep = benchmark(IterativeSolver{}, TensorSolver{}, p, 10, 3);
  return {rep.speedup >= 2.0 && rep.tensorized.total_time < rep.iterative.total_time,
          fmt("speedup %.2fx (reference machine %.2fx)", rep.speedup, kReferenceSpeedup)};
}

Outcome reduction() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto rb = random_layout(rng, 8);
    auto cfg = features_off(random_config(rng, utc(2021, 3, 1)));
    cfg.max_inner_iterations = 1;
    Building b = make_building(rb.grid, rb.props, cfg, rb.heat);
    const Problem p = make_problem(std::move(b), constant_weather(utc(2021, 3, 1), std::chrono::hours{1}, dark_record(280.0)));
    const auto& g = p.building.grid;
    ThermalState s = p.initial_state();
    s.T = random_field(rng, g.rows, g.cols, 260.0, 320.0);
    s.T_prev_step = random_field(rng, g.rows, g.cols, 260.0, 320.0);
    const Field expected = direct_balance(p.building, s.T, s.T_prev_step, 280.0);
    TensorSolver{}.advance(s, p, p.inputs_at(utc(2021, 3, 1) + std::chrono::minutes{5}));
    worst = std::max(worst, max_rel_diff(s.T, expected));
  }
  return {worst <= 1e-12, fmt("worst rel diff %.3e on 100 random fields", worst)};
}

Outcome view_factor_identity() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> tilt(0.0, 180.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto vf = view_factors(tilt(rng));
    worst = std::max(worst, std::abs(vf.f_gnd + vf.beta * vf.f_sky + vf.f_air - 1.0));
  }
  const auto v = view_factors(90.0);
  const bool exact = v.f_gnd == 0.5 && v.f_sky == 0.5;
  return {worst <= 1e-12 && exact, fmt("worst identity error %.3e, vertical exact=%.0f", worst, exact ? 1 : 0)};
}

Outcome equilibrium() {
  const double t0 = 291.5;
  auto b = canonical_building();
  b.heat_source.fill(0.0);
  b.config.initial_temperature = t0;
  const Clock start = utc(2021, 6, 21);
  b.config.start_time = start;
  const Problem p = make_problem(std::move(b), constant_weather(start, std::chrono::hours{10}, dark_record(t0)));
  double worst = 0.0;
  const TensorSolver tensor;
  const IterativeSolver iterative;
  for (const Solver* s : {static_cast<const Solver*>(&tensor), static_cast<const Solver*>(&iterative)}) {
    ThermalState st = p.initial_state();
    for (int k = 0; k < 100; ++k) {
      const Field before = st.T;
      step(*s, st, p);
      worst = std::max(worst, max_abs_diff(st.T, before));
      if (st.mass) worst = std::max(worst, max_abs_diff(st.mass->t_mass, Field(st.T.rows(), st.T.cols(), t0)));
    }
  }
  return {worst <= 1e-9, fmt("worst per-step drift %.3e K over 100 steps", worst)};
}

Outcome energy_audit() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Problem p = random_problem(rng, 8);
    p.building.config.convergence_epsilon = 1e-10;
    p.building.config.max_inner_iterations = 20000;
    ThermalState s = p.initial_state();
    for (int n = 0; n < 3; ++n) {
      const Clock next = s.sim_clock + p.step_duration();
      const StepInputs in = p.inputs_at(next);
      const Field T_prev = s.T_prev_step;
      const auto mass_before = s.mass;
      IterativeSolver{}.advance(s, p, in);
      s.sim_clock = next;
      worst = std::max(worst, audit_step(p, in, T_prev, mass_before, s.T).relative_imbalance());
    }
  }
  return {worst <= 1e-6, fmt("worst relative imbalance %.3e on 20 configurations", worst)};
}

Outcome mass_limits() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> T(250.0, 330.0), q(0.0, 500.0), z(2.0, 4.0), k(0.2, 5.0), t0(0.0, 1e5);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double t = T(rng);
    worst = std::max(worst, std::abs(mass_update(t, 0.0, z(rng), k(rng), t0(rng), t) - t) / t);
    const double qq = q(rng), zz = z(rng), kk = k(rng);
    const double lim = t + qq * zz / kk;
    worst = std::max(worst, std::abs(mass_update(t, qq, zz, kk, 0.0, T(rng)) - lim) / lim);
  }
  return {worst <= 1e-10, fmt("worst rel error %.3e", worst)};
}

Outcome solar_conservation() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> G(0.0, 900.0);
  int mismatches = 0;
  for (int n = 0; n < 20; ++n) {
    auto rb = random_layout(rng, 8, 0.5);
    Building b = make_building(rb.grid, rb.props, random_config(rng, utc(2021, 6, 1)), rb.heat);
    Grid2D<std::array<double, 4>> poa(b.grid.rows, b.grid.cols);
    for (auto& a : poa.flat())
      for (auto& v : a) v = G(rng);
    const auto s = assemble_solar_tensors(
        b, [&](Cell c, Face f) { return poa[c][face_index(f)]; }, n % 2 == 0);
    std::vector<double> expected(b.zones.count(), 0.0);
    for (std::size_t r = 0; r < b.grid.rows; ++r)
      for (std::size_t c = 0; c < b.grid.cols; ++c) {
        if (b.grid.cv_type(r, c) != CvType::Window) continue;
        for (Face f : kFaces)
          if (b.grid.is_exterior_face({r, c}, f))
            expected[b.window_zone({r, c})] +=
                b.materials.transmissivity(r, c) * poa(r, c)[face_index(f)] * b.grid.face_area({r, c}, f);
      }
    for (std::size_t zi = 0; zi < b.zones.count(); ++zi) {
      double deposited = 0.0;
      for (Cell c : b.zones.cells[zi]) deposited += s.transmitted_power[c];
      if (deposited != expected[zi]) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%.0f zone totals differ from the window sum", mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence, bundled 23x12 building, 10 steps", canonical_equivalence},
      {"oracle equivalence, 50 random buildings, 5 steps", random_equivalence},
      {"tensorized speedup >= 2x", speedup},
      {"reduction to the plain air balance, 100 random fields", reduction},
      {"exterior view-factor identity, 1000 tilts", view_factor_identity},
      {"isothermal dark equilibrium, 100 steps, both solvers", equilibrium},
      {"iterative energy audit, 20 random configurations", energy_audit},
      {"mass node fixed point and steady-state limit", mass_limits},
      {"transmitted solar conservation, 20 window layouts", solar_conservation},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %s  (%s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
