#include "lipreplan/gait_sim.hpp"

#include <doctest.h>

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

using namespace lipreplan;

namespace {

const NominalStep& default_step() {
  static const NominalStep step = make_nominal_step({});
  return step;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gait: default nominal step") {
  const auto& s = default_step();
  CHECK(s.omega == doctest::Approx(std::sqrt(9.81 / 0.9)).epsilon(1e-12));
  CHECK(s.omega == doctest::Approx(3.302).epsilon(1e-3));
  CHECK(s.support.x.lower == -0.1);
  CHECK(s.support.y.upper == 0.05);
  // The CoM travels from midway behind the foot to midway before it.
  REQUIRE(s.com_x.size() == 101);
  CHECK(s.com_x.front() == doctest::Approx(-0.1).epsilon(1e-9));
  CHECK(s.com_x.back() == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(s.com_y.front() == doctest::Approx(-0.1).epsilon(1e-9));
  CHECK(s.com_y.back() == doctest::Approx(-0.1).epsilon(1e-9));
  CHECK_NOTHROW(s.check_invariants());

  const PlanarState end = s.state_at(1.0);
  CHECK(distance_inf(end.x, s.xf.x) <= 1e-15);
  const PlanarState next = s.to_next_frame(s.xf);
  CHECK(distance_inf(next.x, s.x0.x) <= 1e-12);
  CHECK(distance_inf(next.y, s.x0.y) <= 1e-12);

  // The nominal horizon is feasible for the planner it is meant for.
  CHECK(check_feasible(s.x0, s.xf, s.duration_nom, s.support, s.params).feasible);
}

TEST_CASE("gait: degenerate configurations") {
  StepConfig still;
  still.step_length = 0.0;
  still.step_width = 0.0;
  const auto s = make_nominal_step(still);
  CHECK(distance_inf(s.x0.x, s.xf.x) == 0.0);
  CHECK(distance_inf(s.x0.y, s.xf.y) == 0.0);

  StepConfig flat;
  flat.foot_length = 0.0;
  CHECK_THROWS_AS(make_nominal_step(flat), std::invalid_argument);
  StepConfig roll;
  roll.heel_toe_ratio = 1.5;
  CHECK_THROWS_AS(make_nominal_step(roll), std::invalid_argument);
  StepConfig timeless;
  timeless.duration = 0.0;
  CHECK_THROWS_AS(make_nominal_step(timeless), std::invalid_argument);
}

TEST_CASE("gait: phase to target") {
  const auto& s = default_step();
  CHECK(phase_to_target(s, 0.0, 1.0) == doctest::Approx(s.duration_nom));
  CHECK(phase_to_target(s, 0.5, 2.0) == doctest::Approx(s.duration_nom / 4.0));
  CHECK(phase_to_target(s, 0.9, 0.5) == doctest::Approx(0.2 * s.duration_nom));
  CHECK_THROWS_AS(phase_to_target(s, 0.2, 0.0), std::invalid_argument);
}

TEST_CASE("gait: velocity signals") {
  const auto c = VelocitySignal::constant(0.7);
  CHECK(c(0.0) == 0.7);
  CHECK(c(5.0) == 0.7);
  const auto sq = VelocitySignal::square_wave(0.3, 1.0, 0.5);
  CHECK(sq(0.99) == 1.0);
  CHECK(sq(1.0) == 0.3);
  CHECK(sq(1.49) == 0.3);
  CHECK(sq(1.5) == 1.0);
  const auto sn = VelocitySignal::sinusoid(0.5, 0.8);
  CHECK(sn(0.0) == doctest::Approx(1.0));
  CHECK(sn(0.2) == doctest::Approx(1.5));
  CHECK(sn(0.6) == doctest::Approx(0.5));
  CHECK_THROWS(VelocitySignal::constant(0.0).validate());
  CHECK_THROWS(VelocitySignal::sinusoid(1.0, 0.8).validate());
}

TEST_CASE("gait: DCM tracking law") {
  const PendulumParams p{3.3};
  const ControlBounds wide{-10.0, 10.0};
  SUBCASE("exact tracking returns the feedforward") {
    const double u_ref = 0.03;
    const double xi_ref = 0.12;
    const double xi_ref_dot = p.omega * (xi_ref - u_ref);
    CHECK(dcm_track_control(xi_ref, xi_ref, xi_ref_dot, 3.0, p, wide) ==
          doctest::Approx(u_ref).epsilon(1e-14));
  }
  SUBCASE("error decays at the gain") {
    // Continuous closed loop integrated by an adaptive Runge-Kutta method,
    // reference with constant CoP u_ref.
    namespace ode = boost::numeric::odeint;
    const double u_ref = 0.02, xi0 = 0.05, k = 3.0;
    auto xi_ref = [&](double t) { return u_ref + (xi0 - u_ref) * std::exp(p.omega * t); };
    std::array<double, 1> xi{xi0 + 0.05};
    auto rhs = [&](const std::array<double, 1>& s, std::array<double, 1>& ds, double t) {
      const double r = xi_ref(t);
      const double u = dcm_track_control(s[0], r, p.omega * (r - u_ref), k, p, wide);
      ds[0] = p.omega * (s[0] - u);
    };
    auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<std::array<double, 1>>());
    ode::integrate_adaptive(stepper, rhs, xi, 0.0, 1.0, 1e-3);
    CHECK(std::abs((xi[0] - xi_ref(1.0)) - 0.05 * std::exp(-3.0)) < 1e-6);
  }
  SUBCASE("saturation") {
    const ControlBounds foot{-0.1, 0.1};
    CHECK(dcm_track_control(5.0, 0.0, 0.0, 3.0, p, foot) == 0.1);
    CHECK(dcm_track_control(-5.0, 0.0, 0.0, 3.0, p, foot) == -0.1);
    CHECK_THROWS(dcm_track_control(0.0, 0.0, 0.0, 0.0, p, foot));
  }
}

TEST_CASE("gait: single-step scenario") {
  const auto& s = default_step();
  SUBCASE("nominal velocity needs no intervention") {
    const auto r = run_fig1_scenario(s, VelocitySignal::constant(1.0));
    REQUIRE(r.rows.size() > 800);
    CHECK(r.interventions == 0);
    CHECK(r.frozen_ticks == 0);
    for (const auto& row : r.rows) CHECK(row.t_star == row.t_target);
    CHECK(r.max_plan_residual <= kPlanTolerance);
  }
  SUBCASE("oscillating request") {
    const auto r = run_fig1_scenario(s, VelocitySignal::sinusoid(0.5, 0.8));
    REQUIRE(!r.rows.empty());
    std::size_t first = 0;
    while (first < r.rows.size() && r.rows[first].feasible) ++first;
    CHECK(first > 100);             // untouched beginning
    CHECK(r.interventions > 50);    // interventions later on
    CHECK(r.max_plan_residual <= kPlanTolerance);
    for (const auto& row : r.rows) {
      if (row.feasible) CHECK(row.t_star == row.t_target);
    }
  }
  SUBCASE("tenfold velocity is clamped at once") {
    const auto r = run_fig1_scenario(s, VelocitySignal::constant(10.0));
    REQUIRE(!r.rows.empty());
    CHECK_FALSE(r.rows.front().feasible);
    CHECK(r.rows.front().t_star > r.rows.front().t_target);
    CHECK(r.rows.front().t_star >= r.rows.front().scan_lo - 5e-3);
    CHECK(r.rows.front().t_star <= r.rows.front().scan_lo + 5e-3);
  }
}

TEST_CASE("gait: closed loop") {
  const auto& s = default_step();
  ClosedLoopOptions opt;
  opt.record = true;
  SUBCASE("nominal walking completes in both modes") {
    const auto naive = run_closed_loop(s, VelocitySignal::constant(1.0), Mode::naive, opt);
    const auto replan = run_closed_loop(s, VelocitySignal::constant(1.0), Mode::replan, opt);
    CHECK(naive.outcome == SimReport::Outcome::completed);
    CHECK(replan.outcome == SimReport::Outcome::completed);
    CHECK(replan.interventions == 0);
    CHECK(naive.steps == 11);
    CHECK(replan.steps == 11);
    for (const auto& row : naive.rows) CHECK(row.dcm_error < 1e-9);
    CHECK(replan.max_plan_residual <= kPlanTolerance);
  }
  SUBCASE("late slow-down") {
    const auto signal = VelocitySignal::square_wave(0.1, 0.7 * s.duration_nom, 2.0);
    const auto naive = run_closed_loop(s, signal, Mode::naive, opt);
    const auto replan = run_closed_loop(s, signal, Mode::replan, opt);
    CHECK(naive.outcome == SimReport::Outcome::fell);
    REQUIRE(naive.fall_time);
    CHECK(*naive.fall_time < 3.0);
    CHECK(replan.outcome == SimReport::Outcome::completed);
    CHECK(replan.interventions > 0);
    for (const auto& row : replan.rows) {
      CHECK(s.support.x.contains(row.cop_x));
      CHECK(s.support.y.contains(row.cop_y));
    }
  }
  SUBCASE("determinism") {
    const auto signal = VelocitySignal::square_wave(0.4, 0.3, 0.8);
    const auto a = run_closed_loop(s, signal, Mode::replan, opt);
    const auto b = run_closed_loop(s, signal, Mode::replan, opt);
    REQUIRE(a.rows.size() == b.rows.size());
    bool same = true;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      same = same && a.rows[i].cop_x == b.rows[i].cop_x && a.rows[i].t_star == b.rows[i].t_star;
    }
    CHECK(same);
  }
}

TEST_CASE("gait: heatmap bookkeeping") {
  const auto& s = default_step();
  HeatmapOptions opt;
  opt.magnitudes = {1.0, 0.2, 2.0};
  opt.durations = {0.2, 1.0};
  opt.starts_per_cell = 3;
  opt.seed = 9;
  opt.sim.horizon = 3.0;
  const auto a = run_heatmap(s, opt);
  REQUIRE(a.cells.size() == 12);
  for (const auto& c : a.cells) {
    const bool valid = c.magnitude * c.duration / s.duration_nom < 1.0;
    CHECK(c.valid == valid);
    CHECK(c.n_runs == (valid ? 3 : 0));
    if (valid && c.magnitude == 1.0) CHECK(c.success_rate == 1.0);
  }
  CHECK(a.runs.size() == 2 * 3 * 4);

  opt.jobs = 2;
  const auto b = run_heatmap(s, opt);
  REQUIRE(b.runs.size() == a.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].start_phase == b.runs[i].start_phase);
    CHECK(a.runs[i].fell == b.runs[i].fell);
  }
}

TEST_CASE("gait: timing harness") {
  BenchOptions opt;
  opt.iterations = 200;
  const auto st = run_bench(default_step(), opt);
  CHECK(st.calls == 200);
  CHECK(st.min_ms > 0.0);
  CHECK(st.min_ms <= st.mean_ms);
  CHECK(st.mean_ms <= st.max_ms);
  CHECK(st.p99_ms <= st.max_ms);
  CHECK(st.allocs_per_call < 0.0);
  CHECK(st.qp_solves >= 200);
}

TEST_CASE("gait: output files") {
  const std::string dir = "gait_io_test_";
  SimReport r;
  SimRow row;
  row.t = 0.001;
  row.v_request = 1.0;
  row.t_target = 0.9;
  row.t_star = 0.9;
  row.scan_lo = 0.55;
  row.scan_hi = std::numeric_limits<double>::quiet_NaN();
  r.rows.push_back(row);
  write_fig1_csv(dir + "fig1.csv", r);
  CHECK(slurp(dir + "fig1.csv") ==
        "tick,v_request,t_target,t_star,feasible,scan_lo,scan_hi\n"
        "0.001,1,0.90000000000000002,0.90000000000000002,1,0.55000000000000004,\n");

  BenchStats b;
  write_bench_csv(dir + "bench.csv", b);
  CHECK(slurp(dir + "bench.csv").rfind("min_ms,max_ms,mean_ms,p99_ms,allocs_per_call\n", 0) == 0);

  HeatmapResult h;
  h.cells.push_back({0.2, 0.1, Mode::naive, true, 0.5, 2});
  h.cells.push_back({2.0, 2.0, Mode::replan, false, 0.0, 0});
  write_heatmap_csv(dir + "heatmap.csv", h);
  CHECK(slurp(dir + "heatmap.csv") ==
        "duration,magnitude,mode,success_rate,n_runs\n"
        "0.20000000000000001,0.10000000000000001,naive,0.5,2\n"
        "2,2,replan,,0\n");

  CHECK(config_hash("") == "cbf29ce484222325");
  CHECK(config_hash("a") == "af63dc4c8601ec8c");
  write_metadata_json(dir + "meta.json", {7, "k=v\n", "abc123", "fig1"});
  const auto j = nlohmann::json::parse(slurp(dir + "meta.json"));
  CHECK(j["seed"] == 7);
  CHECK(j["config_hash"] == config_hash("k=v\n"));
  CHECK(j["git_revision"] == "abc123");
  for (const char* f : {"fig1.csv", "bench.csv", "heatmap.csv", "meta.json"}) {
    std::remove((dir + f).c_str());
  }
  CHECK_THROWS(write_bench_csv("/nonexistent-dir/x.csv", b));
}
