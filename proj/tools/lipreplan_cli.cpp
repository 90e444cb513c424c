// lipreplan: command-line front end.
//
// Exit codes: 0 success, 1 usage or invalid configuration, 2 boundary state
// rejected by the structure classification, 3 infeasible warm-start guess,
// 4 any other failure (including violated invariants).

#include "alloc_counter.hpp"
#include "lipreplan/config.hpp"
#include "lipreplan/gait_sim.hpp"
#include "lipreplan/replanner.hpp"
#include "lipreplan/structure.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef LIPREPLAN_GIT_REVISION
#define LIPREPLAN_GIT_REVISION "unknown"
#endif

using namespace lipreplan;

namespace {

enum Exit { kOk = 0, kUsage = 1, kBoundary = 2, kInfeasibleGuess = 3, kFailure = 4 };

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_num(double v) { return std::isfinite(v) ? num(v) : "null"; }

std::string json_array(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + json_num(v[i]);
  return s + "]";
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

// A state given as "x1,x2" (one axis, the other at rest) or "x1,x2,y1,y2".
struct StateArg {
  PlanarState state;
  bool planar = false;
};

StateArg parse_state(const std::string& text) {
  const auto v = parse_numbers(text);
  if (v.size() == 2) return {lift_x({v[0], v[1]}), false};
  if (v.size() == 4) return {{{v[0], v[1]}, {v[2], v[3]}}, true};
  throw std::invalid_argument("a state needs 2 or 4 comma-separated numbers: '" + text + "'");
}

std::string describe(const TSetStructure& s) {
  std::string out = to_string(s.kind);
  switch (s.kind) {
    case TSetStructure::Kind::empty:
      break;
    case TSetStructure::Kind::bounded:
      out += " t_min=" + num(s.t_min) + " t_max=" + num(s.t_max);
      break;
    case TSetStructure::Kind::half_line:
      out += " t_min=" + num(s.t_min);
      if (s.t_min_is_infimum) out += " (infimum)";
      break;
    case TSetStructure::Kind::two_components:
      out += " t_min=" + num(s.t_min) + " A=" + num(s.a) + " B=" + num(s.b);
      break;
  }
  return out;
}

// Flags shared by every command: a config file and key=value overrides.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
  std::string out_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "Configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", overrides, "Override a configuration key: key=value");
    cmd->add_option("-o,--out", out_dir, "Output directory (overrides output_dir)");
  }

  RunConfig resolve() const {
    RunConfig c = file.empty() ? RunConfig{} : RunConfig::load(file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value: " + kv);
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out_dir.empty()) c.output_dir = out_dir;
    c.validate();
    return c;
  }
};

std::string output_path(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.output_dir);
  return (std::filesystem::path(c.output_dir) / name).string();
}

void write_sidecar(const RunConfig& c, const std::string& name, const std::string& command) {
  write_metadata_json(output_path(c, name), {c.seed, c.serialize(), LIPREPLAN_GIT_REVISION, command});
}

int cmd_scan(const RunConfig& c, const std::string& x0_text, const std::string& xf_text,
             double t_max, double dt) {
  const StateArg x0 = parse_state(x0_text);
  const StateArg xf = parse_state(xf_text);
  if (x0.planar != xf.planar) throw std::invalid_argument("x0 and xf must have the same size");
  if (!(t_max > 0.0) || !(dt > 0.0) || dt > t_max) {
    throw std::invalid_argument("need 0 < dt <= tmax");
  }
  const PendulumParams p = c.pendulum();
  PlanarBounds bounds = c.bounds();
  if (!x0.planar) bounds.y = lift_bounds(bounds.x).y;

  std::string report = "x: " + describe(t_structure({x0.state.x, xf.state.x}, bounds.x, p)) + "\n";
  if (x0.planar) {
    report += "y: " + describe(t_structure({x0.state.y, xf.state.y}, bounds.y, p)) + "\n";
  }
  std::cout << report;

  FeasibilityChecker checker(bounds, p, c.foh());
  const auto grid = uniform_grid(dt, t_max, dt);
  const auto pattern = exhaustive_scan(x0.state, xf.state, checker, grid);
  const auto runs = feasible_runs(pattern);
  std::cout << "scan: runs=" << runs.size();
  for (const auto& [lo, hi] : runs) std::cout << " [" << num(grid[lo]) << ", " << num(grid[hi]) << "]";
  std::cout << "\n";

  std::ofstream csv(output_path(c, "scan.csv"), std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write scan.csv");
  csv << "t,feasible\n";
  for (std::size_t i = 0; i < grid.size(); ++i) csv << num(grid[i]) << "," << int(pattern[i]) << "\n";
  return kOk;
}

int cmd_replan(const RunConfig& c, const std::string& x0_text, const std::string& xf_text,
               double t_target, double t_guess) {
  const StateArg x0 = parse_state(x0_text);
  const StateArg xf = parse_state(xf_text);
  if (x0.planar != xf.planar) throw std::invalid_argument("x0 and xf must have the same size");
  PlanarBounds bounds = c.bounds();
  if (!x0.planar) bounds.y = lift_bounds(bounds.x).y;
  FeasibilityChecker checker(bounds, c.pendulum(), c.foh());
  const auto r =
      project_duration({x0.state, xf.state, t_target, t_guess, c.bisection_iters}, checker);
  std::cout << "{\n"
            << "  \"t_target\": " << json_num(t_target) << ",\n"
            << "  \"t_star\": " << json_num(r.t_star) << ",\n"
            << "  \"target_was_feasible\": " << (r.target_was_feasible ? "true" : "false") << ",\n"
            << "  \"iterations_used\": " << r.iterations_used << ",\n"
            << "  \"qp_solves\": " << checker.solves() << ",\n"
            << "  \"nodes\": " << json_array(r.plan.nodes) << ",\n"
            << "  \"cop_x\": " << json_array(r.plan.values_x) << ",\n"
            << "  \"cop_y\": " << json_array(r.plan.values_y) << "\n"
            << "}\n";
  return kOk;
}

int cmd_fig1(const RunConfig& c, const std::string& command) {
  const NominalStep step = make_nominal_step(c.step);
  const SimReport r = run_fig1_scenario(step, c.signal, c.fig1_options());
  write_fig1_csv(output_path(c, "fig1.csv"), r);
  write_sidecar(c, "fig1.json", command);
  std::size_t untouched = 0;
  while (untouched < r.rows.size() && r.rows[untouched].feasible) ++untouched;
  std::cout << "fig1: ticks=" << r.rows.size() << " untouched=" << untouched
            << " interventions=" << r.interventions << " frozen=" << r.frozen_ticks
            << " max_plan_residual=" << num(r.max_plan_residual) << "\n";
  if (r.max_plan_residual > kPlanTolerance) {
    std::cerr << "error: an adopted plan misses the terminal state by "
              << num(r.max_plan_residual) << " m\n";
    return kFailure;
  }
  return kOk;
}

int cmd_heatmap(const RunConfig& c, const std::string& mode, int jobs, const std::string& command) {
  const NominalStep step = make_nominal_step(c.step);
  HeatmapResult r = run_heatmap(step, c.heatmap_options(jobs));
  if (mode != "both") {
    const Mode keep = mode == "naive" ? Mode::naive : Mode::replan;
    std::erase_if(r.cells, [&](const HeatmapCell& cell) { return cell.mode != keep; });
  }
  write_heatmap_csv(output_path(c, "heatmap.csv"), r);
  write_sidecar(c, "heatmap.json", command);
  for (Mode m : {Mode::naive, Mode::replan}) {
    if (mode != "both" && mode != to_string(m)) continue;
    std::cout << to_string(m) << ": failure_rate=" << num(r.failure_rate(m)) << "\n";
  }
  return kOk;
}

int cmd_bench(const RunConfig& c, const std::string& command) {
  const NominalStep step = make_nominal_step(c.step);
  const BenchStats s = run_bench(step, c.bench_options(), &heap_allocations);
  write_bench_csv(output_path(c, "bench.csv"), s);
  write_sidecar(c, "bench.json", command);
  std::cout << "min_ms,max_ms,mean_ms,p99_ms,allocs_per_call\n"
            << num(s.min_ms) << "," << num(s.max_ms) << "," << num(s.mean_ms) << ","
            << num(s.p99_ms) << "," << num(s.allocs_per_call) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-duration replanning for a linear inverted pendulum"};
  app.require_subcommand(1);

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  ConfigArgs scan_cfg, replan_cfg, fig1_cfg, heat_cfg, bench_cfg, show_cfg;
  std::string x0, xf;
  double t_max = 10.0, dt = 0.01, t_target = 0.0, t_guess = 0.0;
  std::string mode = "both";
  int jobs = 1;

  auto* scan = app.add_subcommand("scan", "Classify the feasible durations of a pair and scan them");
  scan->add_option("--x0", x0, "Initial diagonal state x1,x2[,y1,y2]")->required();
  scan->add_option("--xf", xf, "Final diagonal state x1,x2[,y1,y2]")->required();
  scan->add_option("--tmax", t_max, "Largest scanned duration, s");
  scan->add_option("--dt", dt, "Scan step, s");
  scan_cfg.attach(scan);

  auto* replan = app.add_subcommand("replan", "Project a requested duration onto the feasible set");
  replan->add_option("--x0", x0, "Initial diagonal state x1,x2[,y1,y2]")->required();
  replan->add_option("--xf", xf, "Final diagonal state x1,x2[,y1,y2]")->required();
  replan->add_option("--t-target", t_target, "Requested duration, s")->required();
  replan->add_option("--t-guess", t_guess, "Feasible warm-start duration, s")->required();
  replan_cfg.attach(replan);

  auto* fig1 = app.add_subcommand("fig1", "Replan one step under a time-varying velocity request");
  fig1_cfg.attach(fig1);

  auto* heat = app.add_subcommand("heatmap", "Closed-loop success rates over square-wave requests");
  heat->add_option("--mode", mode, "naive, replan or both")
      ->check(CLI::IsMember({"naive", "replan", "both"}));
  heat->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  heat_cfg.attach(heat);

  auto* bench = app.add_subcommand("bench", "Time the duration projection on the nominal step");
  bench_cfg.attach(bench);

  auto* show = app.add_subcommand("config", "Print the resolved configuration");
  show_cfg.attach(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*scan) return cmd_scan(scan_cfg.resolve(), x0, xf, t_max, dt);
    if (*replan) return cmd_replan(replan_cfg.resolve(), x0, xf, t_target, t_guess);
    if (*fig1) return cmd_fig1(fig1_cfg.resolve(), command);
    if (*heat) return cmd_heatmap(heat_cfg.resolve(), mode, jobs, command);
    if (*bench) return cmd_bench(bench_cfg.resolve(), command);
    if (*show) {
      std::cout << show_cfg.resolve().serialize();
      return kOk;
    }
  } catch (const BoundaryStateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBoundary;
  } catch (const InfeasibleGuess& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasibleGuess;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
