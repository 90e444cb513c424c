#pragma once

// Reduced-model walking experiments: a synthetic LIP gait, patient velocity
// signals, a saturated DCM tracking law and three experiments (open-loop
// replanning of a single step, closed-loop success rates, timing).
//
// Every step is expressed in the frame of its stance foot: x sagittal
// (forward), y lateral, with the next foot at (L, -W). After each support
// change the frame moves to the new foot and is reflected about the
// sagittal axis, so every step is the same nominal step.

#include "lipreplan/foh.hpp"
#include "lipreplan/replanner.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lipreplan {

struct StepConfig {
  double step_length = 0.2;    // L, m
  double step_width = 0.2;     // W, lateral distance between feet, m
  double duration = 0.9;       // s
  double com_height = 0.9;     // m
  double gravity = 9.81;       // m/s^2
  double foot_length = 0.20;   // m
  double foot_width = 0.10;    // m
  double heel_toe_ratio = 0.2; // CoP rolls from -r L/2 to +r L/2
  int path_samples = 101;

  void validate() const;
};

/// Periodic single step: the CoP is constant on each half of the step, heel
/// then toe along x and at the foot center along y.
struct NominalStep {
  double duration_nom = 0.0;
  double omega = 0.0;
  PendulumParams params;
  PlanarBounds support;  // stance foot, centered at the origin
  PlanarState x0;
  PlanarState xf;
  double step_length = 0.0;
  double step_width = 0.0;
  double cop_heel = 0.0;
  double cop_toe = 0.0;
  std::vector<double> com_x;  // CoM at phase k / (path_samples - 1)
  std::vector<double> com_y;

  /// Nominal CoP at phase s (the toe value from s = 1/2 on).
  double cop_x(double s) const { return s < 0.5 ? cop_heel : cop_toe; }
  double cop_y(double /*s*/) const { return 0.0; }
  /// Exact nominal state at phase s in [0, 1].
  PlanarState state_at(double s) const;
  /// State of the next step's frame for a state given in this one.
  PlanarState to_next_frame(const PlanarState& x) const;

  /// Terminal condition and CoP-in-polygon checks; throws std::logic_error.
  void check_invariants() const;
};

/// Throws std::invalid_argument for configurations whose nominal CoP leaves
/// the foot.
NominalStep make_nominal_step(const StepConfig& config);

/// Remaining duration requested by a patient at phase s walking at
/// `velocity` times the nominal speed.
double phase_to_target(const NominalStep& step, double phase, double velocity);

struct VelocitySignal {
  enum class Kind { constant, sinusoid, square_wave };
  Kind kind = Kind::constant;
  double magnitude = 1.0;  // constant value, square-wave level, sinusoid mean
  double amplitude = 0.5;  // sinusoid: relative swing around the mean
  double period = 0.8;     // sinusoid, s
  double start = 0.0;      // s
  double duration = 0.0;   // square wave, s

  double operator()(double t) const;
  void validate() const;

  static VelocitySignal constant(double v);
  static VelocitySignal sinusoid(double amplitude, double period);
  static VelocitySignal square_wave(double magnitude, double start, double duration);
};

const char* to_string(VelocitySignal::Kind kind);

/// CoP command for the DCM law  u = xi_ref - xi_ref_dot / omega + (1 + k / omega)(xi - xi_ref),
/// saturated into `bounds`. Unsaturated, the error obeys e' = -k e.
double dcm_track_control(double xi, double xi_ref, double xi_ref_dot, double k_xi,
                         const PendulumParams& params, const ControlBounds& bounds);

struct SimRow {
  double t = 0.0;
  double v_request = 1.0;
  double t_target = 0.0;
  double t_star = 0.0;
  bool feasible = true;  // the target was kept as requested
  double scan_lo = 0.0;
  double scan_hi = 0.0;
  double dcm_error = 0.0;
  double cop_x = 0.0;
  double cop_y = 0.0;
  PlanarState state;  // at the start of the tick, in the stance frame
};

struct SimReport {
  enum class Outcome { completed, fell };
  std::vector<SimRow> rows;
  Outcome outcome = Outcome::completed;
  std::optional<double> fall_time;
  int steps = 0;
  long interventions = 0;        // ticks where t_star differs from the target
  long infeasible_guesses = 0;   // warm starts found infeasible
  long frozen_ticks = 0;         // ticks without any feasible duration, plan kept
  long qp_solves = 0;
  double max_plan_residual = 0.0;  // worst re-simulation error of an adopted plan, m
};

const char* to_string(SimReport::Outcome outcome);

struct Fig1Options {
  double tick = 1e-3;
  FohOptions foh{4};
  int bisection_iters = 10;
  double scan_step = 5e-3;
  double scan_cap_factor = 2.0;  // scan up to this multiple of the nominal duration
};

/// One step replanned every tick from the state reached by following the
/// previous plan, with the feasible band of the same predicate scanned from
/// that state for reference.
SimReport run_fig1_scenario(const NominalStep& step, const VelocitySignal& signal,
                            const Fig1Options& options = {});

enum class Mode { naive, replan };
const char* to_string(Mode mode);

struct ClosedLoopOptions {
  double tick = 1e-3;
  double horizon = 10.0;
  double k_xi = 3.0;
  double fall_margin = 0.15;  // m, inflation of the foot
  double fall_window = 0.2;   // s
  FohOptions foh{4};
  int bisection_iters = 10;
  bool record = false;  // keep the per-tick series
};

/// Exact LIP plant driven at every tick by the saturated DCM law. The naive
/// mode replays the nominal step with its phase advanced at the requested
/// velocity; the replan mode tracks the plan returned by project_duration
/// from the measured state. A fall is declared when the DCM stays outside
/// the inflated foot with the CoP saturated for `fall_window` seconds.
SimReport run_closed_loop(const NominalStep& step, const VelocitySignal& signal, Mode mode,
                          const ClosedLoopOptions& options = {});

struct HeatmapOptions {
  std::vector<double> magnitudes;  // default 0.1 .. 2.0 step 0.1
  std::vector<double> durations;   // default 0.2 .. 2.0 step 0.2
  int starts_per_cell = 29;
  std::uint64_t seed = 1;
  int jobs = 1;
  ClosedLoopOptions sim;

  static HeatmapOptions defaults();
};

struct HeatmapRun {
  double duration = 0.0;
  double magnitude = 0.0;
  double start_phase = 0.0;
  Mode mode = Mode::naive;
  bool fell = false;
};

struct HeatmapCell {
  double duration = 0.0;
  double magnitude = 0.0;
  Mode mode = Mode::naive;
  bool valid = false;  // false: the disturbance cannot end within the step
  double success_rate = 0.0;
  int n_runs = 0;
};

struct HeatmapResult {
  std::vector<HeatmapCell> cells;
  std::vector<HeatmapRun> runs;

  double failure_rate(Mode mode) const;
};

/// A square wave of magnitude m and duration D starting at phase s0 of the
/// first step is valid when s0 + m D / T_nom < 1. Start phases are drawn
/// uniformly in the valid range, seeded per cell.
HeatmapResult run_heatmap(const NominalStep& step, const HeatmapOptions& options);

struct BenchOptions {
  FohOptions foh{4};
  int bisection_iters = 10;
  int iterations = 10000;
  std::uint64_t seed = 1;
};

struct BenchStats {
  double min_ms = 0.0;
  double max_ms = 0.0;
  double mean_ms = 0.0;
  double p99_ms = 0.0;
  double allocs_per_call = 0.0;  // negative when no counter is available
  long qp_solves = 0;
  int calls = 0;
};

/// Times project_duration on requests drawn along the nominal step, with
/// targets from velocities in [0.25, 2.5]. `alloc_count`, when given,
/// returns the process-wide number of heap allocations so far.
BenchStats run_bench(const NominalStep& step, const BenchOptions& options,
                     long (*alloc_count)() = nullptr);

// ---------------------------------------------------------------------------
// Output files.

void write_fig1_csv(const std::string& path, const SimReport& report);
void write_heatmap_csv(const std::string& path, const HeatmapResult& result);
void write_bench_csv(const std::string& path, const BenchStats& stats);

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string config_text;  // serialized configuration, hashed into the sidecar
  std::string git_revision;
  std::string command;
};

/// FNV-1a 64-bit hash, printed as 16 hex digits.
std::string config_hash(const std::string& text);
void write_metadata_json(const std::string& path, const RunMetadata& meta);

}  // namespace lipreplan
