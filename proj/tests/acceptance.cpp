// Acceptance checks. Each criterion prints one PASS/FAIL line (plus
// supplementary INFO lines) and the process exits non-zero when any selected
// criterion fails. Run with --criterion N to select one.

#include "alloc_counter.hpp"
#include "lipreplan/foh.hpp"
#include "lipreplan/gait_sim.hpp"
#include "lipreplan/replanner.hpp"
#include "lipreplan/structure.hpp"
#include "oracles.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace lipreplan;

namespace {

const ControlBounds kBounds{-1.0, 2.0};
const PendulumParams kUnit{1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();

bool report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  return pass;
}

void info(int id, const std::string& detail) {
  std::printf("INFO criterion %d: %s\n", id, detail.c_str());
  std::fflush(stdout);
}

template <class... A>
std::string format(const char* fmt, A... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Maximal intervals of a feasible-duration set (upper end +inf allowed).
std::vector<std::pair<double, double>> intervals(const TSetStructure& s) {
  using K = TSetStructure::Kind;
  switch (s.kind) {
    case K::empty: return {};
    case K::bounded: return {{s.t_min, s.t_max}};
    case K::half_line: return {{s.t_min, kInf}};
    case K::two_components: return {{s.t_min, s.a}, {s.b, kInf}};
  }
  return {};
}

std::vector<std::pair<double, double>> intersect(const std::vector<std::pair<double, double>>& a,
                                                 const std::vector<std::pair<double, double>>& b) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [lo1, hi1] : a) {
    for (const auto& [lo2, hi2] : b) {
      const double lo = std::max(lo1, lo2);
      const double hi = std::min(hi1, hi2);
      if (lo <= hi) out.push_back({lo, hi});
    }
  }
  return out;
}

// Distance from t to the nearest finite endpoint of the set.
double distance_to_edge(double t, const std::vector<std::pair<double, double>>& set) {
  double best = kInf;
  for (const auto& [lo, hi] : set) {
    best = std::min(best, std::abs(t - lo));
    if (std::isfinite(hi)) best = std::min(best, std::abs(t - hi));
  }
  return best;
}

bool member(double t, const std::vector<std::pair<double, double>>& set) {
  for (const auto& [lo, hi] : set) {
    if (t >= lo && t <= hi) return true;
  }
  return false;
}

DiagonalState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d1(-3.0, 4.0);
  std::uniform_real_distribution<double> d2(-4.0, 3.0);
  return {d1(rng), d2(rng)};
}

std::pair<double, double> scan_edge_pair(FeasibilityChecker& checker, const BoundaryPair& pair,
                                         const std::vector<double>& grid,
                                         const std::vector<std::pair<int, int>>& runs) {
  const auto pred = [&](double t) { return checker.feasible(lift_x(pair.x0), lift_x(pair.xf), t); };
  const double a = refine_edge(pred, grid[runs[0].second], grid[runs[0].second + 1], 1e-4).first;
  const double b = refine_edge(pred, grid[runs[1].first], grid[runs[1].first - 1], 1e-4).first;
  return {a, b};
}

// ---------------------------------------------------------------------------

bool criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double cell = 0.01;
  const auto grid = uniform_grid(0.01, 10.0, cell);
  FeasibilityChecker checker(lift_bounds(kBounds), kUnit, FohOptions{8});
  std::mt19937_64 rng(20240501);

  int pairs = 0, too_many_runs = 0, bad_two_run = 0, misclassified = 0, unsound = 0;
  std::map<std::string, int> kinds;
  double worst_gap = 0.0;
  while (pairs < 500) {
    const BoundaryPair pair{random_state(rng), random_state(rng)};
    TSetStructure s;
    try {
      s = t_structure(pair, kBounds, kUnit);
    } catch (const BoundaryStateError&) {
      continue;
    }
    ++pairs;
    ++kinds[to_string(s.kind)];
    const auto pattern = exhaustive_scan(lift_x(pair.x0), lift_x(pair.xf), checker, grid);
    const auto runs = feasible_runs(pattern);
    if (runs.size() > 2) ++too_many_runs;
    if (runs.size() == 2) {
      const bool reaches_end = runs[1].second + 1 == static_cast<int>(grid.size());
      if (!in_J(pair, kBounds, kUnit) || !reaches_end) ++bad_two_run;
    }
    const auto exact = intervals(s);
    bool ok = true;
    bool spurious = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (bool(pattern[i]) == s.contains(grid[i])) continue;
      spurious = spurious || pattern[i];
      const double d = distance_to_edge(grid[i], exact);
      worst_gap = std::max(worst_gap, d);
      if (d > cell + 1e-9) ok = false;
    }
    if (!ok) ++misclassified;
    if (spurious) ++unsound;
  }
  const double elapsed = seconds_since(t0);
  std::string mix;
  for (const auto& [k, n] : kinds) mix += format(" %s=%d", k.c_str(), n);
  info(1, "classes:" + mix);
  info(1, format("pairs with a scan-feasible duration outside the exact set: %d", unsound));
  return report(1, "structure suite", too_many_runs == 0 && bad_two_run == 0 && misclassified == 0 &&
                                          elapsed <= 600.0,
                format("%d pairs, >2 runs: %d, two-run pattern outside J or not reaching the grid "
                       "end: %d, scan/structure disagreement beyond one cell: %d (worst %.4f s), "
                       "%.1f s",
                       pairs, too_many_runs, bad_two_run, misclassified, worst_gap, elapsed));
}

// Two-run check with A, B refined at P = 8 and P = 16.
struct TwoRunResult {
  int runs8 = 0;
  int runs16 = 0;
  double a8 = 0, b8 = 0, a16 = 0, b16 = 0;
};

TwoRunResult two_run_scan(const BoundaryPair& pair) {
  const auto grid = uniform_grid(0.01, 10.0, 0.01);
  TwoRunResult r;
  for (int p : {8, 16}) {
    FeasibilityChecker checker(lift_bounds(kBounds), kUnit, FohOptions{p});
    const auto runs = feasible_runs(exhaustive_scan(lift_x(pair.x0), lift_x(pair.xf), checker, grid));
    (p == 8 ? r.runs8 : r.runs16) = static_cast<int>(runs.size());
    if (runs.size() != 2) continue;
    const auto [a, b] = scan_edge_pair(checker, pair, grid, runs);
    (p == 8 ? r.a8 : r.a16) = a;
    (p == 8 ? r.b8 : r.b16) = b;
  }
  return r;
}

std::string describe_two_run(const BoundaryPair& pair, const TwoRunResult& r) {
  const auto s = t_structure(pair, kBounds, kUnit);
  std::string out = format("(%g,%g)->(%g,%g): structure %s, runs P=8: %d, P=16: %d", pair.x0.x1,
                           pair.x0.x2, pair.xf.x1, pair.xf.x2, to_string(s.kind), r.runs8, r.runs16);
  if (r.runs8 == 2 && r.runs16 == 2) {
    out += format(", A=%.4f B=%.4f (P=8), A=%.4f B=%.4f (P=16)", r.a8, r.b8, r.a16, r.b16);
  }
  if (s.kind == TSetStructure::Kind::two_components) {
    out += format(", analytic A=%.6f B=%.6f", s.a, s.b);
  }
  return out;
}

bool two_run_ok(const TwoRunResult& r) {
  return r.runs8 == 2 && r.runs16 == 2 && std::abs(r.a8 - r.a16) <= 5e-3 &&
         std::abs(r.b8 - r.b16) <= 5e-3;
}

bool criterion_2() {
  const BoundaryPair witness{{1.0, 2.0}, {1.25, 0.0}};
  const auto w = two_run_scan(witness);
  const BoundaryPair genuine{{1.307, 2.026}, {2.022, 0.707}};
  const auto g = two_run_scan(genuine);
  info(2, "supplementary two-component pair " + describe_two_run(genuine, g) +
              (two_run_ok(g) ? ": two runs, A and B stable within 5e-3 s"
                             : ": two-run or stability check not met"));
  return report(2, "J witness", two_run_ok(w), describe_two_run(witness, w));
}

bool criterion_3() {
  std::mt19937_64 rng(77);
  const double cell = 0.01;
  FeasibilityChecker checker(lift_bounds(kBounds), kUnit, FohOptions{8});
  int pairs = 0, endpoint_misses = 0, resim_misses = 0, solutions = 0, wider = 0;
  double worst_lo = 0.0, worst_hi = 0.0, worst_resim = 0.0;
  while (pairs < 200) {
    const BoundaryPair pair{random_state(rng), random_state(rng)};
    TSetStructure s;
    try {
      s = t_structure(pair, kBounds, kUnit);
    } catch (const BoundaryStateError&) {
      continue;
    }
    if (s.kind != TSetStructure::Kind::bounded || s.t_max > 9.5) continue;
    ++pairs;
    const auto mm = min_max_time(pair, kBounds, kUnit);
    const auto grid = uniform_grid(cell, s.t_max + 0.5, cell);
    const auto runs =
        feasible_runs(exhaustive_scan(lift_x(pair.x0), lift_x(pair.xf), checker, grid));
    bool ok = runs.size() == 1;
    if (ok) {
      const double d_lo = std::abs(grid[runs[0].first] - mm.min->total_time);
      const double d_hi = std::abs(grid[runs[0].second] - mm.max->total_time);
      worst_lo = std::max(worst_lo, d_lo);
      worst_hi = std::max(worst_hi, d_hi);
      ok = d_lo <= cell + 1e-9 && d_hi <= cell + 1e-9;
      if (grid[runs[0].first] < mm.min->total_time - cell - 1e-9 ||
          grid[runs[0].second] > mm.max->total_time + cell + 1e-9) {
        ++wider;
      }
    }
    if (!ok) ++endpoint_misses;

    // Every one-switch solution, re-simulated by the independent integrator.
    for (const auto& sol : bang_bang_solutions(pair, kBounds, kUnit)) {
      ++solutions;
      std::vector<double> breaks;
      double acc = 0.0;
      for (double d : sol.seq.durations) breaks.push_back(acc += d);
      const auto u = [&](double t) {
        double edge = 0.0;
        for (std::size_t i = 0; i < sol.seq.durations.size(); ++i) {
          edge += sol.seq.durations[i];
          if (t < edge) return sol.seq.value_of_arc(i);
        }
        return sol.seq.value_of_arc(sol.seq.durations.size() - 1);
      };
      const auto end = oracle::integrate({pair.x0.x1, pair.x0.x2}, kUnit.omega, u,
                                         sol.total_time, breaks, 1e-14);
      const double err = std::max(std::abs(end[0] - pair.xf.x1), std::abs(end[1] - pair.xf.x2));
      worst_resim = std::max(worst_resim, err);
      if (err > 1e-9) ++resim_misses;
    }
  }
  info(3, format("scan runs extending beyond [T_min, T_max] by more than one cell: %d", wider));
  return report(3, "bang-bang oracle equivalence", endpoint_misses == 0 && resim_misses == 0,
                format("%d Bounded pairs, endpoints beyond one cell: %d (worst T_min %.4f s, "
                       "T_max %.4f s); %d one-switch solutions, re-simulation beyond 1e-9: %d "
                       "(worst %.2e)",
                       pairs, endpoint_misses, worst_lo, worst_hi, solutions, resim_misses,
                       worst_resim));
}

bool criterion_4() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> state(-0.3, 0.3);
  std::uniform_real_distribution<double> horizon(0.3, 1.5);
  std::uniform_real_distribution<double> cop(0.0, 1.0);
  const PendulumParams p{3.3};
  const PlanarBounds bounds{{-0.1, 0.1}, {-0.05, 0.05}};
  const FohOptions opt{4};
  FeasibilityChecker checker(bounds, p, opt);
  DualActiveSetSolver solver;
  QpProblem qp;
  std::vector<double> nodes;

  int instances = 0, attempts = 0, objective_misses = 0, kkt_misses = 0, resim_misses = 0;
  double worst_obj = 0.0, worst_kkt = 0.0, worst_resim = 0.0;
  while (instances < 100 && attempts < 1000) {
    ++attempts;
    // Feasible by construction: xf is reached by a random in-box FOH plan.
    const PlanarState x0{{state(rng), state(rng)}, {state(rng), state(rng)}};
    const double t = horizon(rng);
    FohPlan witness;
    foh_nodes(t, opt, witness.nodes);
    for (std::size_t k = 0; k < witness.nodes.size(); ++k) {
      witness.values_x.push_back(bounds.x.lower + (bounds.x.upper - bounds.x.lower) * cop(rng));
      witness.values_y.push_back(bounds.y.lower + (bounds.y.upper - bounds.y.lower) * cop(rng));
    }
    const PlanarState xf = witness.simulate(x0, t, p);
    foh_transcribe(x0, xf, t, bounds, p, opt, qp, nodes);

    // Independent reference: the inequality rows of the transcription are
    // the CoP boxes, recovered here as bounds on each variable.
    const int n = qp.num_variables();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -kInf);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, kInf);
    for (int r = 0; r < qp.num_inequalities(); ++r) {
      int col = -1;
      for (int j = 0; j < n; ++j) {
        if (qp.ineq_matrix(r, j) != 0.0) col = j;
      }
      const double coef = qp.ineq_matrix(r, col);
      if (coef > 0) lo[col] = std::max(lo[col], qp.ineq_rhs[r] / coef);
      else hi[col] = std::min(hi[col], qp.ineq_rhs[r] / coef);
    }
    const auto ref = oracle::box_qp_by_enumeration(qp.hessian, qp.linear, qp.eq_matrix,
                                                   qp.eq_rhs, lo, hi);
    if (!ref.feasible) continue;
    if (solver.solve(qp) != QpStatus::optimal) {
      ++objective_misses;
      ++instances;
      continue;
    }
    ++instances;
    const Eigen::VectorXd& z = solver.solution();
    const double obj = qp.objective(z);
    const double rel = std::abs(obj - ref.objective) / std::max(1.0, std::abs(ref.objective));
    worst_obj = std::max(worst_obj, rel);
    if (rel > 1e-6) ++objective_misses;

    // KKT: stationarity, primal feasibility, dual feasibility, complementarity.
    const Eigen::VectorXd& lam = solver.eq_multipliers();
    const Eigen::VectorXd& mu = solver.ineq_multipliers();
    const Eigen::VectorXd stat = qp.hessian * z + qp.linear - qp.eq_matrix.transpose() * lam -
                                 qp.ineq_matrix.transpose() * mu;
    const Eigen::VectorXd slack = qp.ineq_matrix * z - qp.ineq_rhs;
    double kkt = stat.lpNorm<Eigen::Infinity>();
    kkt = std::max(kkt, (qp.eq_matrix * z - qp.eq_rhs).lpNorm<Eigen::Infinity>());
    for (int r = 0; r < slack.size(); ++r) {
      kkt = std::max({kkt, -slack[r], -mu[r], std::abs(mu[r] * slack[r])});
    }
    worst_kkt = std::max(worst_kkt, kkt);
    if (kkt > 1e-8) ++kkt_misses;

    // The checker's plan, re-simulated by the integrator, with the CoP
    // sampled densely against the box.
    const auto& out = checker.check(x0, xf, t);
    double err = kInf;
    if (out.feasible) {
      std::vector<double> breaks(out.plan.nodes.begin() + 1, out.plan.nodes.end());
      const auto ex = oracle::integrate({x0.x.x1, x0.x.x2}, p.omega,
                                        [&](double s) { return out.plan.value_x(s); }, t, breaks);
      const auto ey = oracle::integrate({x0.y.x1, x0.y.x2}, p.omega,
                                        [&](double s) { return out.plan.value_y(s); }, t, breaks);
      err = std::max({std::abs(ex[0] - xf.x.x1), std::abs(ex[1] - xf.x.x2),
                      std::abs(ey[0] - xf.y.x1), std::abs(ey[1] - xf.y.x2)});
      for (int k = 0; k <= 1000; ++k) {
        const double s = t * k / 1000.0;
        if (!bounds.x.contains(out.plan.value_x(s)) || !bounds.y.contains(out.plan.value_y(s))) {
          err = kInf;
        }
      }
    }
    worst_resim = std::max(worst_resim, err);
    if (!(err <= 1e-7)) ++resim_misses;
  }
  return report(4, "QP correctness",
                instances == 100 && objective_misses == 0 && kkt_misses == 0 && resim_misses == 0,
                format("%d feasible instances (of %d drawn), objective beyond 1e-6 rel: %d "
                       "(worst %.2e), KKT beyond 1e-8: %d (worst %.2e), re-simulation beyond 1e-7 "
                       "or CoP out of box: %d (worst %.2e)",
                       instances, attempts, objective_misses, worst_obj, kkt_misses, worst_kkt,
                       resim_misses, worst_resim));
}

bool criterion_5() {
  const NominalStep step = make_nominal_step({});
  const Fig1Options opt;
  const SimReport r = run_fig1_scenario(step, VelocitySignal::sinusoid(0.5, 0.8), opt);
  FeasibilityChecker checker(step.support, step.params, opt.foh);
  const double cell = opt.scan_step;
  const auto grid = uniform_grid(cell, opt.scan_cap_factor * step.duration_nom, cell);

  long a_checked = 0, a_violations = 0, b_violations = 0, empty_band = 0, empty_ok = 0;
  double widest_empty = 0.0;
  std::size_t first_intervention = r.rows.size();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const SimRow& row = r.rows[i];
    if (!row.feasible && first_intervention == r.rows.size()) first_intervention = i;
    // (a) the request itself passes the scan predicate.
    if (checker.feasible(row.state, step.xf, row.t_target)) {
      ++a_checked;
      if (row.t_star != row.t_target) ++a_violations;
    }
    // (b) the returned duration lies in the scan band, up to one cell.
    const auto pattern = exhaustive_scan(row.state, step.xf, checker, grid);
    const auto runs = feasible_runs(pattern);
    bool inside = false;
    for (const auto& [lo, hi] : runs) {
      inside = inside || (row.t_star >= grid[lo] - cell && row.t_star <= grid[hi] + cell);
    }
    if (runs.empty()) {
      // No grid duration is feasible: the exact set has collapsed below the
      // grid resolution. Accept a duration that lies in the exact set.
      ++empty_band;
      const auto exact = intersect(
          intervals(t_structure({row.state.x, step.xf.x}, step.support.x, step.params)),
          intervals(t_structure({row.state.y, step.xf.y}, step.support.y, step.params)));
      double width = 0.0;
      for (const auto& [lo, hi] : exact) width = std::max(width, hi - lo);
      widest_empty = std::max(widest_empty, width);
      inside = member(row.t_star, exact) && width < cell;
      if (inside) ++empty_ok;
    }
    if (!inside) ++b_violations;
  }
  info(5, format("%zu ticks, %ld interventions, %ld frozen ticks, %ld infeasible warm starts, "
                 "max plan residual %.2e m",
                 r.rows.size(), r.interventions, r.frozen_ticks, r.infeasible_guesses,
                 r.max_plan_residual));
  info(5, format("(b) %ld ticks with an empty scan band; %ld of them return a duration inside "
                 "the exact set, whose width never exceeds %.2e s",
                 empty_band, empty_ok, widest_empty));
  const bool a_ok = a_violations == 0;
  const bool b_ok = b_violations == 0;
  const bool c_ok = first_intervention > 0 && first_intervention < r.rows.size();
  return report(5, "single-step replanning", a_ok && b_ok && c_ok,
                format("(a) %ld/%ld scan-feasible requests kept; (b) %ld ticks outside the band; "
                       "(c) first intervention at tick %zu",
                       a_checked - a_violations, a_checked, b_violations, first_intervention));
}

bool criterion_6() {
  const NominalStep step = make_nominal_step({});
  const auto t0 = std::chrono::steady_clock::now();
  const HeatmapOptions opt = HeatmapOptions::defaults();
  const HeatmapResult h = run_heatmap(step, opt);
  const double naive = h.failure_rate(Mode::naive);
  const double replan = h.failure_rate(Mode::replan);

  // Failure rates inside and outside the regions where they are expected.
  auto rate = [&](Mode mode, auto&& in_region) {
    long n = 0, fails = 0;
    for (const auto& run : h.runs) {
      if (run.mode != mode || !in_region(run)) continue;
      ++n;
      fails += run.fell;
    }
    return std::pair<double, long>{n ? double(fails) / n : 0.0, n};
  };
  const auto far = [](const HeatmapRun& r) { return std::abs(r.magnitude - 1.0) >= 0.5; };
  const auto near = [&](const HeatmapRun& r) { return !far(r); };
  // Late slow-downs: below nominal speed, starting in the second half of
  // the admissible start range.
  const auto late_slow = [&](const HeatmapRun& r) {
    const double range = 1.0 - r.magnitude * r.duration / step.duration_nom;
    return r.magnitude < 1.0 && r.start_phase >= 0.5 * range;
  };
  const auto other = [&](const HeatmapRun& r) { return !late_slow(r); };
  const auto [far_rate, far_n] = rate(Mode::naive, far);
  const auto [near_rate, near_n] = rate(Mode::naive, near);
  const auto [late_rate, late_n] = rate(Mode::naive, late_slow);
  const auto [other_rate, other_n] = rate(Mode::naive, other);

  long replan_fails = 0, replan_confined = 0;
  for (const auto& run : h.runs) {
    if (run.mode != Mode::replan || !run.fell) continue;
    ++replan_fails;
    if (run.magnitude <= 0.5 && run.duration >= 1.0) ++replan_confined;
  }
  info(6, format("naive failure rate |m-1|>=0.5: %.4f (%ld runs), |m-1|<0.5: %.4f (%ld runs); "
                 "late slow-downs: %.4f (%ld runs), other: %.4f (%ld runs); %.1f s",
                 far_rate, far_n, near_rate, near_n, late_rate, late_n, other_rate, other_n,
                 seconds_since(t0)));
  // Soft property, reported only: along each duration column, success should
  // not rise as the magnitude moves away from 1 on either side.
  for (const Mode mode : {Mode::naive, Mode::replan}) {
    long pairs = 0, rises = 0;
    for (const auto& a : h.cells) {
      if (a.mode != mode || !a.valid) continue;
      for (const auto& b : h.cells) {
        if (b.mode != mode || !b.valid || b.duration != a.duration) continue;
        const bool same_side = (a.magnitude - 1.0) * (b.magnitude - 1.0) >= 0.0;
        const double step_away = std::abs(b.magnitude - 1.0) - std::abs(a.magnitude - 1.0);
        if (!same_side || std::abs(step_away - 0.1) > 1e-9) continue;
        ++pairs;
        rises += b.success_rate > a.success_rate;
      }
    }
    info(6, format("%s success rate rises away from m=1 in %ld of %ld adjacent cell pairs",
                   to_string(mode), rises, pairs));
  }
  const bool ok = replan < naive && far_rate > near_rate && late_rate > other_rate &&
                  replan_confined == replan_fails;
  return report(6, "heatmap ordering", ok,
                format("%zu runs, failure rate naive %.4f, replan %.4f; replan failures outside "
                       "low-velocity long-duration cells: %ld of %ld",
                       h.runs.size(), naive, replan, replan_fails - replan_confined, replan_fails));
}

bool criterion_7() {
  const NominalStep step = make_nominal_step({});
  BenchOptions opt;
  opt.foh = FohOptions{4};
  opt.bisection_iters = 10;
  opt.iterations = 10000;
  const BenchStats s = run_bench(step, opt, &heap_allocations);
  return report(7, "timing", s.mean_ms <= 1.0 && s.max_ms <= 5.0 && s.allocs_per_call == 0.0,
                format("%d requests, mean %.4f ms, p99 %.4f ms, max %.4f ms, %.3f allocations "
                       "per call, %ld QP solves",
                       s.calls, s.mean_ms, s.p99_ms, s.max_ms, s.allocs_per_call, s.qp_solves));
}

bool criterion_8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> omega(1.0, 4.0);
  std::uniform_real_distribution<double> dt(0.0, 1.0);
  double ode_err = 0.0, semi_err = 0.0, inv_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const DiagonalState x{unit(rng), unit(rng)};
    const double u = unit(rng);
    const PendulumParams p{omega(rng)};
    const double t = dt(rng);
    const double s = dt(rng);
    const auto exact = propagate_const(x, u, t, p);
    const auto ref = oracle::integrate({x.x1, x.x2}, p.omega, [&](double) { return u; }, t, {}, 1e-15);
    ode_err = std::max({ode_err, std::abs(exact.x1 - ref[0]), std::abs(exact.x2 - ref[1])});
    semi_err = std::max(semi_err, distance_inf(propagate_const(exact, u, s, p),
                                               propagate_const(x, u, t + s, p)));
    inv_err = std::max(inv_err, distance_inf(propagate_const(exact, u, -t, p), x));
  }
  return report(8, "numerical dynamics", ode_err < 1e-9 && semi_err <= 1e-10 && inv_err <= 1e-10,
                format("10000 samples, closed form vs integrator %.2e, semigroup %.2e, inverse %.2e",
                       ode_err, semi_err, inv_err));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Criterion to run (repeatable); default all")
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  bool all = true;
  for (int id : selected) {
    switch (id) {
      case 1: all &= criterion_1(); break;
      case 2: all &= criterion_2(); break;
      case 3: all &= criterion_3(); break;
      case 4: all &= criterion_4(); break;
      case 5: all &= criterion_5(); break;
      case 6: all &= criterion_6(); break;
      case 7: all &= criterion_7(); break;
      case 8: all &= criterion_8(); break;
    }
  }
  return all ? 0 : 1;
}
