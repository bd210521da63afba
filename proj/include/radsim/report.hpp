#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radsim/building.hpp"
#include "radsim/simulation.hpp"

namespace radsim {

inline std::string format_fixed(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// `row,col,type,T[,T_mass]`, one line per CV in row-major order.
inline std::string snapshot_csv(const BuildingGrid& grid, const ThermalState& s) {
  std::ostringstream out;
  const bool mass = s.mass.has_value();
  out << "row,col,type,T" << (mass ? ",T_mass" : "") << "\n";
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c) {
      out << r << "," << c << "," << static_cast<int>(grid.cv_type(r, c)) << "," << format_fixed(s.T(r, c));
      if (mass) out << "," << (grid.cv_type(r, c) == CvType::InteriorAir ? format_fixed(s.mass->t_mass(r, c)) : "");
      out << "\n";
    }
  return out.str();
}

/// `step,inner_iterations,max_delta,converged,wall_time`.
inline std::string trace_csv(const std::vector<StepReport>& reports) {
  std::ostringstream out;
  out << "step,inner_iterations,max_delta,converged,wall_time\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%d,%.6e,%d,%.6e\n", k + 1, r.inner_iterations, r.max_delta,
                  r.converged ? 1 : 0, r.wall_time);
    out << buf;
  }
  return out.str();
}

inline constexpr double kAgreementTolerance = 1e-5;

struct StepComparison {
  std::size_t step{0};
  double max_rel_diff{0.0};
  double max_abs_diff{0.0};
  Cell worst;
};

struct ComparisonReport {
  std::string solver_a;
  std::string solver_b;
  std::vector<StepComparison> steps;
  double per_cell_max_rel_diff{0.0};
  double per_cell_max_abs_diff{0.0};  // K
  int sig_figs_agreement{0};
  bool pass{false};
};

/// Digits of agreement implied by a relative difference, capped at 15.
inline int significant_figures(double rel_diff) {
  if (rel_diff <= 0.0) return 15;
  return std::clamp(static_cast<int>(std::floor(-std::log10(rel_diff))), 0, 15);
}

/// Steps two solvers side by side (each on its own problem, normally the
/// same one) and compares every CV after every step.
inline ComparisonReport compare_solvers(const Solver& a, const Problem& pa, const Solver& b, const Problem& pb,
                                        std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("compare: steps must be at least 1");
  ComparisonReport rep;
  rep.solver_a = a.name();
  rep.solver_b = b.name();
  const auto ea = run_episode(a, pa, pa.initial_state(), steps);
  const auto eb = run_episode(b, pb, pb.initial_state(), steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const Field& ta = ea.snapshots[k].T;
    const Field& tb = eb.snapshots[k].T;
    if (!ta.same_shape(tb)) throw ValidationError("compare: solvers produced different grid shapes");
    StepComparison sc;
    sc.step = k + 1;
    for (std::size_t r = 0; r < ta.rows(); ++r)
      for (std::size_t c = 0; c < ta.cols(); ++c) {
        const double abs_diff = std::abs(ta(r, c) - tb(r, c));
        const double rel = abs_diff / std::max(std::abs(tb(r, c)), std::numeric_limits<double>::min());
        if (rel > sc.max_rel_diff) sc.worst = {r, c};
        sc.max_rel_diff = std::max(sc.max_rel_diff, rel);
        sc.max_abs_diff = std::max(sc.max_abs_diff, abs_diff);
      }
    rep.per_cell_max_rel_diff = std::max(rep.per_cell_max_rel_diff, sc.max_rel_diff);
    rep.per_cell_max_abs_diff = std::max(rep.per_cell_max_abs_diff, sc.max_abs_diff);
    rep.steps.push_back(sc);
  }
  rep.sig_figs_agreement = significant_figures(rep.per_cell_max_rel_diff);
  rep.pass = rep.per_cell_max_rel_diff <= kAgreementTolerance;
  return rep;
}

inline nlohmann::json to_json(const ComparisonReport& rep) {
  nlohmann::json j = {{"solver_a", rep.solver_a},
                      {"solver_b", rep.solver_b},
                      {"per_cell_max_rel_diff", rep.per_cell_max_rel_diff},
                      {"per_cell_max_abs_diff", rep.per_cell_max_abs_diff},
                      {"sig_figs_agreement", rep.sig_figs_agreement},
                      {"tolerance", kAgreementTolerance},
                      {"pass", rep.pass}};
  j["steps"] = nlohmann::json::array();
  for (const auto& s : rep.steps)
    j["steps"].push_back({{"step", s.step},
                          {"max_rel_diff", s.max_rel_diff},
                          {"max_abs_diff", s.max_abs_diff},
                          {"worst_cell", {s.worst.row, s.worst.col}}});
  return j;
}

/// Speedup measured on the authors' reference machine for the 23x12 case.
inline constexpr double kReferenceSpeedup = 4.19;

struct SolverTiming {
  std::string solver_name;
  std::vector<double> repeat_totals;  // s, one per repeat
  std::vector<double> per_step_times;  // s, from the best repeat
  double total_time{0.0};              // s, best repeat
  double mean_per_step{0.0};
};

struct BenchmarkReport {
  SolverTiming iterative;
  SolverTiming tensorized;
  double speedup{0.0};  // iterative.total / tensorized.total
  std::size_t steps{0};
  std::size_t repeats{0};
};

/// Best-of-`repeats` wall clock of an episode. Timing covers per-step
/// input assembly and solving, not loading.
inline SolverTiming time_solver(const Solver& s, const Problem& p, std::size_t steps, std::size_t repeats) {
  if (repeats == 0) throw std::invalid_argument("bench: repeats must be at least 1");
  SolverTiming t;
  t.solver_name = s.name();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < repeats; ++k) {
    const auto ep = run_episode(s, p, p.initial_state(), steps, steps);
    const double total = ep.total_time();
    t.repeat_totals.push_back(total);
    if (total < best) {
      best = total;
      t.per_step_times.clear();
      for (const auto& r : ep.reports) t.per_step_times.push_back(r.wall_time);
    }
  }
  t.total_time = best;
  t.mean_per_step = best / static_cast<double>(steps);
  return t;
}

inline BenchmarkReport benchmark(const Solver& iterative, const Solver& tensorized, const Problem& p,
                                 std::size_t steps, std::size_t repeats) {
  BenchmarkReport rep;
  rep.steps = steps;
  rep.repeats = repeats;
  rep.iterative = time_solver(iterative, p, steps, repeats);
  rep.tensorized = time_solver(tensorized, p, steps, repeats);
  rep.speedup = rep.iterative.total_time / rep.tensorized.total_time;
  return rep;
}

inline nlohmann::json to_json(const SolverTiming& t) {
  return {{"solver", t.solver_name},
          {"total_time", t.total_time},
          {"mean_per_step", t.mean_per_step},
          {"per_step_times", t.per_step_times},
          {"repeat_totals", t.repeat_totals}};
}

inline nlohmann::json to_json(const BenchmarkReport& rep) {
  return {{"steps", rep.steps},
          {"repeats", rep.repeats},
          {"iterative", to_json(rep.iterative)},
          {"tensorized", to_json(rep.tensorized)},
          {"speedup", rep.speedup},
          {"reference_speedup", kReferenceSpeedup}};
}

/// Table with rows total / mean per step / speedup.
inline std::string benchmark_table(const BenchmarkReport& rep) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-20s %14s %14s\n"
                "%-20s %14.6f %14.6f\n"
                "%-20s %14.6f %14.6f\n"
                "%-20s %29.2fx\n"
                "%-20s %29.2fx\n",
                "Metric", "Iterative", "Tensorized", "Total time (s)", rep.iterative.total_time,
                rep.tensorized.total_time, "Mean per step (s)", rep.iterative.mean_per_step,
                rep.tensorized.mean_per_step, "Speedup", rep.speedup, "Reference speedup", kReferenceSpeedup);
  return buf;
}

}  // namespace radsim
