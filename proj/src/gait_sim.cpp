#include "lipreplan/gait_sim.hpp"

#include "lipreplan/structure.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace lipreplan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Affine map x -> a x + b of one diagonal coordinate over a sequence of
// constant-CoP arcs, extracted by propagating two probe states.
struct Affine {
  double a1, b1;  // x1
  double a2, b2;  // x2
};

Affine step_map(const std::vector<std::pair<double, double>>& arcs, const PendulumParams& p) {
  auto run = [&](DiagonalState x) {
    for (const auto& [u, dt] : arcs) x = propagate_const(x, u, dt, p);
    return x;
  };
  const DiagonalState zero = run({0.0, 0.0});
  const DiagonalState one = run({1.0, 1.0});
  return {one.x1 - zero.x1, zero.x1, one.x2 - zero.x2, zero.x2};
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

bool saturated(double u, const ControlBounds& b) { return u <= b.lower || u >= b.upper; }

bool outside(double xi, const ControlBounds& b, double margin) {
  return xi < b.lower - margin || xi > b.upper + margin;
}

double remaining_target(const NominalStep& step, double phase, double v) {
  if (phase >= 1.0) return kMinHorizon;
  return std::max(phase_to_target(step, phase, v), kMinHorizon);
}

// Exact feasible durations of both axes, intersected; unbounded ends are
// capped at `cap`. Empty when a state sits on a region boundary.
std::vector<std::pair<double, double>> exact_durations(const NominalStep& step,
                                                       const PlanarState& x, double cap) {
  auto axis = [&](const DiagonalState& a, const DiagonalState& b, const ControlBounds& bounds) {
    const TSetStructure s = t_structure({a, b}, bounds, step.params);
    std::vector<std::pair<double, double>> out;
    switch (s.kind) {
      case TSetStructure::Kind::empty: break;
      case TSetStructure::Kind::bounded: out.push_back({s.t_min, s.t_max}); break;
      case TSetStructure::Kind::half_line: out.push_back({s.t_min, cap}); break;
      case TSetStructure::Kind::two_components:
        out.push_back({s.t_min, s.a});
        out.push_back({s.b, cap});
        break;
    }
    return out;
  };
  std::vector<std::pair<double, double>> both;
  try {
    for (const auto& [lo1, hi1] : axis(x.x, step.xf.x, step.support.x)) {
      for (const auto& [lo2, hi2] : axis(x.y, step.xf.y, step.support.y)) {
        const double lo = std::max(lo1, lo2);
        const double hi = std::min(hi1, hi2);
        if (lo <= hi) both.push_back({lo, hi});
      }
    }
  } catch (const BoundaryStateError&) {
    both.clear();
  }
  return both;
}

// A feasible warm start when none is known: multiples of `around` first,
// then durations spread over the exact feasible set (the FOH set is a
// subset, often a narrow one), then multiples of the nominal duration.
std::optional<double> search_guess(const NominalStep& step, const PlanarState& x, double around,
                                   FeasibilityChecker& checker) {
  static constexpr double kFactors[] = {1.0, 0.9, 1.1, 0.75, 1.25, 0.5, 1.5, 2.0, 0.3, 3.0};
  static constexpr int kSamples = 16;
  auto probe = [&](double t) { return checker.feasible(x, step.xf, std::max(t, kMinHorizon)); };
  if (around > 0.0) {
    for (double f : kFactors) {
      if (probe(f * around)) return std::max(f * around, kMinHorizon);
    }
  }
  for (const auto& [lo, hi] : exact_durations(step, x, 3.0 * step.duration_nom)) {
    for (int k = 0; k <= kSamples; ++k) {
      const double t = lo + (hi - lo) * (k + 0.5) / (kSamples + 1);
      if (probe(t)) return std::max(t, kMinHorizon);
    }
  }
  for (double f : kFactors) {
    if (probe(f * step.duration_nom)) return std::max(f * step.duration_nom, kMinHorizon);
  }
  return std::nullopt;
}

// project_duration with the shifted warm start, falling back to a searched
// one when the shift is no longer feasible. Returns nullptr when no
// feasible duration was found.
const ReplanResult* replan_tick(Replanner& replanner, const NominalStep& step,
                                const PlanarState& x, double t_target, std::optional<double> guess,
                                int iters, SimReport& report) {
  if (guess) {
    try {
      return &replanner.project({x, step.xf, t_target, *guess, iters});
    } catch (const InfeasibleGuess&) {
      ++report.infeasible_guesses;
    }
  }
  const auto fresh =
      search_guess(step, x, guess.value_or(step.duration_nom), replanner.checker());
  if (!fresh) return nullptr;
  return &replanner.project({x, step.xf, t_target, *fresh, iters});
}

}  // namespace

// ---------------------------------------------------------------------------
// Nominal step.

void StepConfig::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("step duration must be positive");
  if (!(com_height > 0.0) || !(gravity > 0.0)) {
    throw std::invalid_argument("CoM height and gravity must be positive");
  }
  if (!(step_length >= 0.0) || !(step_width >= 0.0)) {
    throw std::invalid_argument("step length and width must be non-negative");
  }
  if (!(foot_length > 0.0) || !(foot_width > 0.0)) {
    throw std::invalid_argument("foot dimensions must be positive");
  }
  if (!(heel_toe_ratio >= 0.0)) throw std::invalid_argument("heel-toe ratio must be >= 0");
  if (heel_toe_ratio * step_length > foot_length) {
    throw std::invalid_argument("nominal CoP roll leaves the foot");
  }
  if (path_samples < 2) throw std::invalid_argument("need at least 2 path samples");
}

NominalStep make_nominal_step(const StepConfig& config) {
  config.validate();
  NominalStep s;
  s.duration_nom = config.duration;
  s.params = PendulumParams::from_com_height(config.com_height, config.gravity);
  s.omega = s.params.omega;
  s.support = {{-0.5 * config.foot_length, 0.5 * config.foot_length},
               {-0.5 * config.foot_width, 0.5 * config.foot_width}};
  s.support.validate();
  s.step_length = config.step_length;
  s.step_width = config.step_width;
  s.cop_heel = -0.5 * config.heel_toe_ratio * config.step_length;
  s.cop_toe = -s.cop_heel;

  const double half = 0.5 * config.duration;
  const double l = config.step_length;
  const double w = config.step_width;

  // Sagittal periodicity: x1(T) - L = x1(0), x2(T) + L = x2(0).
  const Affine mx = step_map({{s.cop_heel, half}, {s.cop_toe, half}}, s.params);
  s.x0.x = {(l - mx.b1) / (mx.a1 - 1.0), (mx.b2 + l) / (1.0 - mx.a2)};
  // Lateral periodicity with reflection: -x1(T) - W = x1(0), -x2(T) + W = x2(0).
  const Affine my = step_map({{0.0, config.duration}}, s.params);
  s.x0.y = {-(my.b1 + w) / (1.0 + my.a1), (w - my.b2) / (1.0 + my.a2)};
  s.xf = s.state_at(1.0);

  s.com_x.resize(config.path_samples);
  s.com_y.resize(config.path_samples);
  for (int k = 0; k < config.path_samples; ++k) {
    const PlanarState st = s.state_at(static_cast<double>(k) / (config.path_samples - 1));
    s.com_x[k] = from_diagonal(st.x, s.params).c;
    s.com_y[k] = from_diagonal(st.y, s.params).c;
  }
  s.check_invariants();
  return s;
}

PlanarState NominalStep::state_at(double s) const {
  const double t = std::clamp(s, 0.0, 1.0) * duration_nom;
  const double half = 0.5 * duration_nom;
  PlanarState out;
  if (t <= half) {
    out.x = propagate_const(x0.x, cop_heel, t, params);
  } else {
    out.x = propagate_const(propagate_const(x0.x, cop_heel, half, params), cop_toe, t - half,
                            params);
  }
  out.y = propagate_const(x0.y, 0.0, t, params);
  return out;
}

PlanarState NominalStep::to_next_frame(const PlanarState& x) const {
  return {{x.x.x1 - step_length, x.x.x2 + step_length},
          {-x.y.x1 - step_width, -x.y.x2 + step_width}};
}

void NominalStep::check_invariants() const {
  const PlanarState end = state_at(1.0);
  const PlanarState next = to_next_frame(end);
  const double scale = 1.0 + step_length + step_width;
  const double gap = std::max({distance_inf(end.x, xf.x), distance_inf(end.y, xf.y),
                               distance_inf(next.x, x0.x), distance_inf(next.y, x0.y)});
  if (gap > 1e-9 * scale) throw std::logic_error("nominal step is not periodic");
  if (!support.x.contains(cop_heel) || !support.x.contains(cop_toe) ||
      !support.y.contains(cop_y(0.0))) {
    throw std::logic_error("nominal CoP outside the support polygon");
  }
}

double phase_to_target(const NominalStep& step, double phase, double velocity) {
  if (!(velocity > 0.0)) throw std::invalid_argument("velocity request must be positive");
  return (1.0 - phase) * step.duration_nom / velocity;
}

// ---------------------------------------------------------------------------
// Signals and control.

double VelocitySignal::operator()(double t) const {
  switch (kind) {
    case Kind::constant:
      return magnitude;
    case Kind::sinusoid:
      return magnitude * (1.0 + amplitude * std::sin(2.0 * std::numbers::pi * (t - start) / period));
    case Kind::square_wave:
      return (t >= start && t < start + duration) ? magnitude : 1.0;
  }
  return magnitude;
}

void VelocitySignal::validate() const {
  if (!(magnitude > 0.0)) throw std::invalid_argument("signal magnitude must be positive");
  if (kind == Kind::sinusoid) {
    if (!(amplitude >= 0.0 && amplitude < 1.0)) {
      throw std::invalid_argument("sinusoid amplitude must lie in [0, 1)");
    }
    if (!(period > 0.0)) throw std::invalid_argument("sinusoid period must be positive");
  }
  if (kind == Kind::square_wave && !(duration >= 0.0)) {
    throw std::invalid_argument("square-wave duration must be non-negative");
  }
}

VelocitySignal VelocitySignal::constant(double v) {
  VelocitySignal s;
  s.kind = Kind::constant;
  s.magnitude = v;
  return s;
}

VelocitySignal VelocitySignal::sinusoid(double amplitude, double period) {
  VelocitySignal s;
  s.kind = Kind::sinusoid;
  s.amplitude = amplitude;
  s.period = period;
  return s;
}

VelocitySignal VelocitySignal::square_wave(double magnitude, double start, double duration) {
  VelocitySignal s;
  s.kind = Kind::square_wave;
  s.magnitude = magnitude;
  s.start = start;
  s.duration = duration;
  return s;
}

const char* to_string(VelocitySignal::Kind kind) {
  switch (kind) {
    case VelocitySignal::Kind::constant: return "constant";
    case VelocitySignal::Kind::sinusoid: return "sinusoid";
    case VelocitySignal::Kind::square_wave: return "square_wave";
  }
  return "?";
}

double dcm_track_control(double xi, double xi_ref, double xi_ref_dot, double k_xi,
                         const PendulumParams& params, const ControlBounds& bounds) {
  if (!(k_xi > 0.0)) throw std::invalid_argument("DCM gain must be positive");
  const double w = params.omega;
  const double u = xi_ref - xi_ref_dot / w + (1.0 + k_xi / w) * (xi - xi_ref);
  return std::clamp(u, bounds.lower, bounds.upper);
}

const char* to_string(SimReport::Outcome outcome) {
  return outcome == SimReport::Outcome::completed ? "completed" : "fell";
}

const char* to_string(Mode mode) { return mode == Mode::naive ? "naive" : "replan"; }

// ---------------------------------------------------------------------------
// Open-loop single-step scenario.

SimReport run_fig1_scenario(const NominalStep& step, const VelocitySignal& signal,
                            const Fig1Options& options) {
  signal.validate();
  if (!(options.tick > 0.0)) throw std::invalid_argument("tick must be positive");
  Replanner replanner(step.support, step.params, options.foh);
  FeasibilityChecker scanner(step.support, step.params, options.foh);
  const auto grid =
      uniform_grid(options.scan_step, options.scan_cap_factor * step.duration_nom, options.scan_step);

  SimReport report;
  ReplanResult plan;
  PlanarState state = step.x0;
  PlanarState plan_x0 = state;
  double clock = 0.0;
  double phase = 0.0;
  std::optional<double> guess = step.duration_nom;
  bool have_plan = false;
  const long max_ticks = static_cast<long>(std::ceil(20.0 * step.duration_nom / options.tick));

  for (long k = 0; k < max_ticks; ++k) {
    const double t = k * options.tick;
    SimRow row;
    row.t = t;
    row.state = state;
    row.v_request = signal(t);
    row.t_target = remaining_target(step, phase, row.v_request);
    if (const ReplanResult* r = replan_tick(replanner, step, state, row.t_target, guess,
                                            options.bisection_iters, report)) {
      plan = *r;
      report.max_plan_residual = std::max(report.max_plan_residual,
                                          plan_residual(plan.plan, state, step.xf, step.params));
      plan_x0 = state;
      clock = 0.0;
      have_plan = true;
      row.feasible = r->target_was_feasible;
    } else {
      if (!have_plan) throw std::runtime_error("no feasible FOH plan from the initial state");
      ++report.frozen_ticks;
      row.feasible = false;
    }
    row.t_star = plan.t_star - clock;
    if (!row.feasible) ++report.interventions;
    row.cop_x = plan.plan.value_x(clock);
    row.cop_y = plan.plan.value_y(clock);

    // Reference band from the same predicate. The run holding t_star is
    // reported, or the closest one when t_star falls between grid cells.
    const auto runs = feasible_runs(exhaustive_scan(state, step.xf, scanner, grid));
    row.scan_lo = row.scan_hi = kNaN;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : runs) {
      const double d = row.t_star < grid[lo] ? grid[lo] - row.t_star
                       : row.t_star > grid[hi] ? row.t_star - grid[hi]
                                               : 0.0;
      if (d < best) {
        best = d;
        row.scan_lo = grid[lo];
        row.scan_hi = grid[hi];
      }
    }
    report.rows.push_back(row);

    clock += options.tick;
    phase += row.v_request * options.tick / step.duration_nom;
    const double remaining = plan.t_star - clock;
    if (remaining < kMinHorizon) {
      state = plan.plan.simulate(plan_x0, plan.t_star, step.params);
      break;
    }
    state = plan.plan.simulate(plan_x0, clock, step.params);
    guess = update_guess(plan, clock);
  }
  report.steps = 1;
  report.qp_solves = replanner.checker().solves() + scanner.solves();
  return report;
}

// ---------------------------------------------------------------------------
// Closed loop.

SimReport run_closed_loop(const NominalStep& step, const VelocitySignal& signal, Mode mode,
                          const ClosedLoopOptions& options) {
  signal.validate();
  if (!(options.tick > 0.0) || !(options.horizon > 0.0)) {
    throw std::invalid_argument("tick and horizon must be positive");
  }
  const PendulumParams& p = step.params;
  const double w = p.omega;
  const double tick = options.tick;
  const long ticks = std::lround(options.horizon / tick);

  std::optional<Replanner> replanner;
  if (mode == Mode::replan) replanner.emplace(step.support, p, options.foh);

  SimReport report;
  PlanarState x = step.x0;
  double phase = 0.0;  // naive: nominal phase; replan: patient phase in the step
  double out_time = 0.0;

  ReplanResult plan;
  PlanarState plan_x0;
  double clock = 0.0;
  bool have_plan = false;
  bool finalizing = false;
  std::optional<double> guess;

  for (long k = 0; k < ticks; ++k) {
    const double t = k * tick;
    const double v = signal(t);
    SimRow row;
    row.t = t;
    row.state = x;
    row.v_request = v;
    double ux = 0.0, uy = 0.0, err = 0.0;

    if (mode == Mode::naive) {
      const double s = std::min(phase, 1.0);
      const PlanarState ref = step.state_at(s);
      const double rx_dot = v * w * (ref.x.x1 - step.cop_x(s));
      const double ry_dot = v * w * (ref.y.x1 - step.cop_y(s));
      ux = dcm_track_control(x.x.x1, ref.x.x1, rx_dot, options.k_xi, p, step.support.x);
      uy = dcm_track_control(x.y.x1, ref.y.x1, ry_dot, options.k_xi, p, step.support.y);
      err = std::max(std::abs(x.x.x1 - ref.x.x1), std::abs(x.y.x1 - ref.y.x1));
      row.t_target = row.t_star = remaining_target(step, phase, v);
    } else {
      row.t_target = remaining_target(step, phase, v);
      if (!finalizing) {
        if (const ReplanResult* r = replan_tick(*replanner, step, x, row.t_target, guess,
                                                options.bisection_iters, report)) {
          plan.t_star = r->t_star;
          plan.target_was_feasible = r->target_was_feasible;
          plan.iterations_used = r->iterations_used;
          plan.plan.nodes.assign(r->plan.nodes.begin(), r->plan.nodes.end());
          plan.plan.values_x.assign(r->plan.values_x.begin(), r->plan.values_x.end());
          plan.plan.values_y.assign(r->plan.values_y.begin(), r->plan.values_y.end());
          report.max_plan_residual =
              std::max(report.max_plan_residual, plan_residual(plan.plan, x, step.xf, p));
          plan_x0 = x;
          clock = 0.0;
          have_plan = true;
          row.feasible = r->target_was_feasible;
        } else {
          ++report.frozen_ticks;
          row.feasible = false;
        }
        if (!row.feasible) ++report.interventions;
      }
      if (have_plan) {
        const PlanarState ref = plan.plan.simulate(plan_x0, clock, p);
        const double cx = plan.plan.value_x(clock);
        const double cy = plan.plan.value_y(clock);
        ux = dcm_track_control(x.x.x1, ref.x.x1, w * (ref.x.x1 - cx), options.k_xi, p,
                               step.support.x);
        uy = dcm_track_control(x.y.x1, ref.y.x1, w * (ref.y.x1 - cy), options.k_xi, p,
                               step.support.y);
        err = std::max(std::abs(x.x.x1 - ref.x.x1), std::abs(x.y.x1 - ref.y.x1));
        row.t_star = plan.t_star - clock;
      } else {
        // No feasible plan for this step at all: hold the CoP where the DCM
        // law would put it to stop the divergence, saturated.
        ux = dcm_track_control(x.x.x1, x.x.x1, 0.0, options.k_xi, p, step.support.x);
        uy = dcm_track_control(x.y.x1, x.y.x1, 0.0, options.k_xi, p, step.support.y);
        row.t_star = kNaN;
      }
    }
    row.dcm_error = err;
    row.cop_x = ux;
    row.cop_y = uy;
    if (options.record) report.rows.push_back(row);

    x.x = propagate_const(x.x, ux, tick, p);
    x.y = propagate_const(x.y, uy, tick, p);

    const bool bad =
        (outside(x.x.x1, step.support.x, options.fall_margin) && saturated(ux, step.support.x)) ||
        (outside(x.y.x1, step.support.y, options.fall_margin) && saturated(uy, step.support.y));
    out_time = bad ? out_time + tick : 0.0;
    if (out_time >= options.fall_window - 0.5 * tick) {
      report.outcome = SimReport::Outcome::fell;
      report.fall_time = t + tick;
      break;
    }

    phase += v * tick / step.duration_nom;
    // Keep the half and full step boundaries exact despite accumulated
    // rounding, so the heel-to-toe switch happens on the intended tick.
    if (const double half = std::round(2.0 * phase) / 2.0; std::abs(phase - half) < 1e-9) {
      phase = half;
    }
    if (mode == Mode::naive) {
      if (phase >= 1.0) {
        phase -= 1.0;
        x = step.to_next_frame(x);
        ++report.steps;
      }
      continue;
    }
    clock += tick;
    const bool plan_done = have_plan && plan.t_star - clock <= 0.5 * tick;
    const bool stuck = !have_plan && phase >= 1.0;
    if (plan_done || stuck) {
      x = step.to_next_frame(x);
      ++report.steps;
      phase = 0.0;
      have_plan = false;
      finalizing = false;
      guess.reset();
      continue;
    }
    if (have_plan) {
      finalizing = plan.t_star - clock < kMinHorizon;
      guess = update_guess(plan, clock);
    }
  }
  if (replanner) report.qp_solves = replanner->checker().solves();
  return report;
}

// ---------------------------------------------------------------------------
// Heatmap.

HeatmapOptions HeatmapOptions::defaults() {
  HeatmapOptions o;
  for (int i = 1; i <= 20; ++i) o.magnitudes.push_back(0.1 * i);
  for (int i = 1; i <= 10; ++i) o.durations.push_back(0.2 * i);
  return o;
}

double HeatmapResult::failure_rate(Mode mode) const {
  long n = 0, f = 0;
  for (const auto& r : runs) {
    if (r.mode != mode) continue;
    ++n;
    f += r.fell;
  }
  return n == 0 ? 0.0 : static_cast<double>(f) / n;
}

HeatmapResult run_heatmap(const NominalStep& step, const HeatmapOptions& options) {
  if (options.starts_per_cell < 1) throw std::invalid_argument("need at least one start per cell");
  struct Job {
    std::size_t cell;  // index of the naive cell; the replan cell follows it
    double start_phase;
    std::size_t run;   // index of the naive run; the replan run follows it
  };
  HeatmapResult result;
  std::vector<Job> jobs;
  for (double d : options.durations) {
    for (double m : options.magnitudes) {
      const double span = m * d / step.duration_nom;
      const bool valid = span < 1.0;
      const std::size_t cell = result.cells.size();
      for (Mode mode : {Mode::naive, Mode::replan}) {
        result.cells.push_back({d, m, mode, valid, 0.0, 0});
      }
      if (!valid) continue;
      std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * (cell / 2 + 1));
      std::uniform_real_distribution<double> start(0.0, 1.0 - span);
      for (int i = 0; i < options.starts_per_cell; ++i) {
        const double s0 = start(rng);
        jobs.push_back({cell, s0, result.runs.size()});
        for (Mode mode : {Mode::naive, Mode::replan}) {
          result.runs.push_back({d, m, s0, mode, false});
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      HeatmapRun& naive = result.runs[job.run];
      const auto signal = VelocitySignal::square_wave(
          naive.magnitude, job.start_phase * step.duration_nom, naive.duration);
      for (int m = 0; m < 2; ++m) {
        HeatmapRun& run = result.runs[job.run + m];
        run.fell = run_closed_loop(step, signal, run.mode, options.sim).outcome ==
                   SimReport::Outcome::fell;
      }
    }
  };
  const int n_threads = std::max(1, options.jobs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const Job& job : jobs) {
    for (int m = 0; m < 2; ++m) {
      HeatmapCell& c = result.cells[job.cell + m];
      ++c.n_runs;
      c.success_rate += result.runs[job.run + m].fell ? 0.0 : 1.0;
    }
  }
  for (auto& c : result.cells) {
    if (c.n_runs > 0) c.success_rate /= c.n_runs;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Timing.

BenchStats run_bench(const NominalStep& step, const BenchOptions& options,
                     long (*alloc_count)()) {
  if (options.iterations < 1) throw std::invalid_argument("bench needs at least one iteration");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> phase(0.0, 0.95);
  std::uniform_real_distribution<double> velocity(0.25, 2.5);

  // Requests are drawn and their warm starts checked before timing.
  FeasibilityChecker probe(step.support, step.params, options.foh);
  std::vector<ReplanRequest> requests;
  requests.reserve(options.iterations);
  while (static_cast<int>(requests.size()) < options.iterations) {
    const double s = phase(rng);
    const double v = velocity(rng);
    const PlanarState x0 = step.state_at(s);
    const double guess = phase_to_target(step, s, 1.0);
    if (!probe.feasible(x0, step.xf, guess)) continue;
    requests.push_back({x0, step.xf, phase_to_target(step, s, v), guess, options.bisection_iters});
  }

  Replanner replanner(step.support, step.params, options.foh);
  replanner.project(requests.front());  // sizes every buffer
  replanner.checker().reset_solve_count();
  std::vector<double> times(options.iterations);

  const long allocs_before = alloc_count ? alloc_count() : 0;
  for (int i = 0; i < options.iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    replanner.project(requests[i]);
    const auto t1 = std::chrono::steady_clock::now();
    times[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  const long allocs_after = alloc_count ? alloc_count() : 0;

  BenchStats stats;
  stats.calls = options.iterations;
  stats.qp_solves = replanner.checker().solves();
  stats.allocs_per_call =
      alloc_count ? static_cast<double>(allocs_after - allocs_before) / options.iterations : -1.0;
  double sum = 0.0;
  stats.min_ms = std::numeric_limits<double>::infinity();
  for (double t : times) {
    sum += t;
    stats.min_ms = std::min(stats.min_ms, t);
    stats.max_ms = std::max(stats.max_ms, t);
  }
  stats.mean_ms = sum / options.iterations;
  const auto k = static_cast<std::size_t>(std::ceil(0.99 * options.iterations)) - 1;
  std::nth_element(times.begin(), times.begin() + static_cast<long>(k), times.end());
  stats.p99_ms = times[k];
  return stats;
}

// ---------------------------------------------------------------------------
// Output files.

void write_fig1_csv(const std::string& path, const SimReport& report) {
  auto out = open_out(path);
  out << "tick,v_request,t_target,t_star,feasible,scan_lo,scan_hi\n";
  for (const auto& r : report.rows) {
    out << fmt17(r.t) << ',' << fmt17(r.v_request) << ',' << fmt17(r.t_target) << ','
        << fmt17(r.t_star) << ',' << (r.feasible ? 1 : 0) << ',' << fmt17(r.scan_lo) << ','
        << fmt17(r.scan_hi) << '\n';
  }
}

void write_heatmap_csv(const std::string& path, const HeatmapResult& result) {
  auto out = open_out(path);
  out << "duration,magnitude,mode,success_rate,n_runs\n";
  for (const auto& c : result.cells) {
    out << fmt17(c.duration) << ',' << fmt17(c.magnitude) << ',' << to_string(c.mode) << ','
        << (c.valid ? fmt17(c.success_rate) : std::string()) << ',' << c.n_runs << '\n';
  }
}

void write_bench_csv(const std::string& path, const BenchStats& stats) {
  auto out = open_out(path);
  out << "min_ms,max_ms,mean_ms,p99_ms,allocs_per_call\n";
  out << fmt17(stats.min_ms) << ',' << fmt17(stats.max_ms) << ',' << fmt17(stats.mean_ms) << ','
      << fmt17(stats.p99_ms) << ',' << fmt17(stats.allocs_per_call) << '\n';
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_metadata_json(const std::string& path, const RunMetadata& meta) {
  nlohmann::ordered_json j;
  j["seed"] = meta.seed;
  j["config_hash"] = config_hash(meta.config_text);
  j["git_revision"] = meta.git_revision;
  j["command"] = meta.command;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace lipreplan
