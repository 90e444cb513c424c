#pragma once

// Flat key = value run configuration shared by the command-line tool and the
// experiment drivers. Lines starting with '#' are comments; unknown keys and
// malformed values are rejected with std::invalid_argument.
//
// The scan and replan commands use `omega` and the per-axis bounds
// directly. The gait experiments derive both from the step geometry.

#include "lipreplan/gait_sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipreplan {

struct RunConfig {
  // Pendulum and CoP bounds for single-pair commands.
  double omega = 1.0;
  double x_lower = -1.0;
  double x_upper = 2.0;
  double y_lower = -1.0;
  double y_upper = 2.0;

  StepConfig step;

  VelocitySignal signal = VelocitySignal::sinusoid(0.5, 0.8);

  int qp_nodes = 4;
  NodeSpacing node_spacing = NodeSpacing::uniform;
  double geometric_ratio = 1.5;
  int bisection_iters = 10;

  double tick = 1e-3;
  double scan_step = 5e-3;
  double horizon = 10.0;
  double k_xi = 3.0;
  double fall_margin = 0.15;
  double fall_window = 0.2;

  std::vector<double> heatmap_magnitudes;
  std::vector<double> heatmap_durations;
  int starts_per_cell = 29;
  int bench_iterations = 10000;

  std::uint64_t seed = 1;
  std::string output_dir = ".";

  RunConfig();

  /// Re-checks every module-level invariant; throws std::invalid_argument.
  void validate() const;

  PendulumParams pendulum() const { return {omega}; }
  PlanarBounds bounds() const { return {{x_lower, x_upper}, {y_lower, y_upper}}; }
  FohOptions foh() const { return {qp_nodes, node_spacing, geometric_ratio}; }
  Fig1Options fig1_options() const;
  ClosedLoopOptions closed_loop_options() const;
  HeatmapOptions heatmap_options(int jobs) const;
  BenchOptions bench_options() const;

  /// Sets one key from its text form.
  void set(const std::string& key, const std::string& value);
  /// Every key in a fixed order, values printed with 17 significant digits.
  std::string serialize() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  static const std::vector<std::string>& keys();
};

}  // namespace lipreplan
