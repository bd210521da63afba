// radsim command-line driver: run / compare / bench.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "radsim/radsim.hpp"

namespace fs = std::filesystem;
using namespace radsim;

namespace {

enum Exit { kOk = 0, kCompareFailed = 1, kUsage = 2, kInput = 3, kRuntime = 4 };

struct Common {
  std::string building;
  std::string weather;
  std::size_t steps{10};
  std::string out{"out"};
};

struct Loaded {
  BuildingDocument doc;
  Problem problem;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Loaded load(const Common& c) {
  BuildingDocument doc;
  try {
    doc = parse_building_document(read_file(c.building));
  } catch (const ParseError& e) {
    throw ParseError(c.building + ": " + e.what());
  }
  std::vector<WeatherRecord> weather;
  try {
    weather = load_weather(read_file(c.weather));
  } catch (const std::runtime_error& e) {
    throw ParseError(c.weather + ": " + e.what());
  }
  std::optional<RadiationExchangeMatrix> matrix;
  if (doc.radiation_matrix) {
    // relative to the building file
    fs::path mp = *doc.radiation_matrix;
    if (mp.is_relative()) mp = fs::path(c.building).parent_path() / mp;
    matrix = read_exchange_matrix(read_file(mp.string()));
  }
  Building b = realize(doc);
  return {std::move(doc), make_problem(std::move(b), std::move(weather), std::move(matrix))};
}

std::unique_ptr<Solver> make_solver(const std::string& name) {
  if (name == "tensor") return std::make_unique<TensorSolver>();
  return std::make_unique<IterativeSolver>();
}

nlohmann::json manifest(const Common& c, const Loaded& l, const std::string& solver, const EpisodeResult& ep) {
  const auto& cfg = l.problem.building.config;
  nlohmann::json j;
  j["building_path"] = c.building;
  j["weather_path"] = c.weather;
  j["solver"] = solver;
  j["steps"] = c.steps;
  j["start_time"] = format_timestamp(l.problem.start_time());
  j["features"] = {{"interior_lw", cfg.enable_interior_lw},
                   {"exterior_lw", cfg.enable_exterior_lw},
                   {"solar", cfg.enable_solar},
                   {"interior_mass", cfg.enable_interior_mass}};
  j["exchange_surfaces"] = l.problem.exchange ? l.problem.exchange->n_surfaces() : 0;
  j["total_time"] = ep.total_time();
  j["all_converged"] = std::all_of(ep.reports.begin(), ep.reports.end(), [](const StepReport& r) { return r.converged; });
  j["config"] = building_document_json(l.doc);
  return j;
}

int cmd_run(const Common& c, const std::string& solver_name, std::size_t snapshot_every) {
  const Loaded l = load(c);
  const auto solver = make_solver(solver_name);
  const auto ep = run_episode(*solver, l.problem, l.problem.initial_state(), c.steps, snapshot_every);
  const fs::path out = c.out;
  fs::create_directories(out / "snapshots");
  for (const auto& s : ep.snapshots) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%04zu.csv", s.step_index);
    write_file(out / "snapshots" / name, snapshot_csv(l.problem.building.grid, s));
  }
  write_file(out / "trace.csv", trace_csv(ep.reports));
  write_file(out / "manifest.json", manifest(c, l, solver->name(), ep).dump(2) + "\n");
  std::printf("%s: %zu steps, %zu snapshots, %.6f s -> %s\n", solver->name().c_str(), c.steps, ep.snapshots.size(),
              ep.total_time(), out.string().c_str());
  return kOk;
}

int cmd_compare(const Common& c) {
  const Loaded l = load(c);
  const auto rep = compare_solvers(TensorSolver{}, l.problem, IterativeSolver{}, l.problem, c.steps);
  const fs::path out = c.out;
  fs::create_directories(out);
  write_file(out / "comparison.json", to_json(rep).dump(2) + "\n");
  std::ostringstream csv;
  csv << "step,max_rel_diff,max_abs_diff,worst_row,worst_col\n";
  for (const auto& s : rep.steps) {
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%.6e,%.6e,%zu,%zu\n", s.step, s.max_rel_diff, s.max_abs_diff, s.worst.row,
                  s.worst.col);
    csv << line;
  }
  write_file(out / "comparison.csv", csv.str());
  std::printf("max rel diff %.3e, max abs diff %.3e K, %d significant figures: %s\n", rep.per_cell_max_rel_diff,
              rep.per_cell_max_abs_diff, rep.sig_figs_agreement, rep.pass ? "PASS" : "FAIL");
  return rep.pass ? kOk : kCompareFailed;
}

int cmd_bench(const Common& c, std::size_t repeats) {
  const Loaded l = load(c);
  const auto rep = benchmark(IterativeSolver{}, TensorSolver{}, l.problem, c.steps, repeats);
  const fs::path out = c.out;
  fs::create_directories(out);
  const auto table = benchmark_table(rep);
  write_file(out / "bench.json", to_json(rep).dump(2) + "\n");
  write_file(out / "bench.txt", table);
  std::fputs(table.c_str(), stdout);
  return kOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--building", c.building, "building config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--weather", c.weather, "weather CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--steps", c.steps, "number of timesteps")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D building thermal simulation with radiation: tensorized solver and iterative reference"};
  app.require_subcommand(1);

  Common common;
  std::string solver = "tensor";
  std::size_t snapshot_every = 1;
  std::size_t repeats = 3;

  auto* run = app.add_subcommand("run", "simulate and write snapshots, trace and manifest");
  add_common(run, common);
  run->add_option("--solver", solver, "tensor or iterative")->check(CLI::IsMember({"tensor", "iterative"}));
  run->add_option("--snapshot-every", snapshot_every, "write every n-th snapshot")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "run both solvers and compare every CV after every step");
  add_common(compare, common);

  auto* bench = app.add_subcommand("bench", "time both solvers, best of --repeats");
  add_common(bench, common);
  bench->add_option("--repeats", repeats, "repeats (best-of)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(common, solver, snapshot_every);
    if (*compare) return cmd_compare(common);
    if (*bench) return cmd_bench(common, repeats);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
