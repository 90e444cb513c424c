// Python bindings: a thin layer over the C++ library for scripting and
// plotting. Everything returns plain values; no library object outlives a
// call except FeasibilityChecker.

#include "lipreplan/config.hpp"
#include "lipreplan/gait_sim.hpp"
#include "lipreplan/replanner.hpp"
#include "lipreplan/structure.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lipreplan;

namespace {

DiagonalState diag(const std::pair<double, double>& v) { return {v.first, v.second}; }

PlanarState planar(const std::vector<double>& v) {
  if (v.size() == 2) return lift_x({v[0], v[1]});
  if (v.size() == 4) return {{v[0], v[1]}, {v[2], v[3]}};
  throw py::value_error("a state needs 2 or 4 components");
}

py::dict structure_dict(const TSetStructure& s) {
  py::dict d;
  d["kind"] = to_string(s.kind);
  d["t_min"] = s.t_min;
  d["t_max"] = s.t_max;
  d["a"] = s.a;
  d["b"] = s.b;
  d["t_min_is_infimum"] = s.t_min_is_infimum;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lipreplan, m) {
  m.doc() = "Step-duration replanning for a linear inverted pendulum";

  py::register_exception<BoundaryStateError>(m, "BoundaryStateError", PyExc_ValueError);
  py::register_exception<InfeasibleGuess>(m, "InfeasibleGuess", PyExc_RuntimeError);

  m.attr("PLAN_TOLERANCE") = kPlanTolerance;
  m.attr("MIN_HORIZON") = kMinHorizon;

  m.def(
      "propagate",
      [](std::pair<double, double> x, double u, double dt, double omega) {
        const auto y = propagate_const(diag(x), u, dt, {omega});
        return std::pair{y.x1, y.x2};
      },
      py::arg("x"), py::arg("u"), py::arg("dt"), py::arg("omega") = 1.0,
      "Exact flow of (x1, x2) under a constant CoP.");

  m.def(
      "region",
      [](std::pair<double, double> x, double lower, double upper) {
        return classify_region(diag(x), {lower, upper}).index();
      },
      py::arg("x"), py::arg("lower") = -1.0, py::arg("upper") = 2.0,
      "Region index 1..9, or 0 on a grid line.");

  m.def(
      "t_structure",
      [](std::pair<double, double> x0, std::pair<double, double> xf, double lower, double upper,
         double omega) {
        return structure_dict(t_structure({diag(x0), diag(xf)}, {lower, upper}, {omega}));
      },
      py::arg("x0"), py::arg("xf"), py::arg("lower") = -1.0, py::arg("upper") = 2.0,
      py::arg("omega") = 1.0);

  m.def(
      "in_j",
      [](std::pair<double, double> x0, std::pair<double, double> xf, double lower, double upper,
         double omega) { return in_J({diag(x0), diag(xf)}, {lower, upper}, {omega}); },
      py::arg("x0"), py::arg("xf"), py::arg("lower") = -1.0, py::arg("upper") = 2.0,
      py::arg("omega") = 1.0);

  py::class_<FeasibilityChecker>(m, "FeasibilityChecker")
      .def(py::init([](double lower, double upper, double omega, int nodes) {
             const ControlBounds b{lower, upper};
             return FeasibilityChecker(lift_bounds(b), {omega}, FohOptions{nodes});
           }),
           py::arg("lower") = -1.0, py::arg("upper") = 2.0, py::arg("omega") = 1.0,
           py::arg("nodes") = 4, "One-axis checker; the other axis is held at rest.")
      .def(
          "feasible",
          [](FeasibilityChecker& c, std::pair<double, double> x0, std::pair<double, double> xf,
             double t) { return c.feasible(lift_x(diag(x0)), lift_x(diag(xf)), t); },
          py::arg("x0"), py::arg("xf"), py::arg("t"))
      .def(
          "scan",
          [](FeasibilityChecker& c, std::pair<double, double> x0, std::pair<double, double> xf,
             const std::vector<double>& grid) {
            const auto pattern = exhaustive_scan(lift_x(diag(x0)), lift_x(diag(xf)), c, grid);
            return std::vector<bool>(pattern.begin(), pattern.end());
          },
          py::arg("x0"), py::arg("xf"), py::arg("grid"))
      .def_property_readonly("solves", &FeasibilityChecker::solves);

  m.def(
      "replan",
      [](const std::vector<double>& x0, const std::vector<double>& xf, double t_target,
         double t_guess, double lower, double upper, double omega, int nodes, int iters) {
        const ControlBounds b{lower, upper};
        FeasibilityChecker checker(lift_bounds(b), {omega}, FohOptions{nodes});
        if (x0.size() == 4) checker = FeasibilityChecker({b, b}, {omega}, FohOptions{nodes});
        const auto r = project_duration({planar(x0), planar(xf), t_target, t_guess, iters}, checker);
        py::dict d;
        d["t_star"] = r.t_star;
        d["target_was_feasible"] = r.target_was_feasible;
        d["iterations_used"] = r.iterations_used;
        d["nodes"] = r.plan.nodes;
        d["cop_x"] = r.plan.values_x;
        d["cop_y"] = r.plan.values_y;
        return d;
      },
      py::arg("x0"), py::arg("xf"), py::arg("t_target"), py::arg("t_guess"),
      py::arg("lower") = -1.0, py::arg("upper") = 2.0, py::arg("omega") = 1.0,
      py::arg("nodes") = 4, py::arg("iters") = 10,
      "Projects t_target onto the feasible durations, bisecting towards t_guess.");

  m.def(
      "fig1",
      [](const std::string& config_text) {
        const RunConfig c = RunConfig::parse(config_text);
        const auto r = run_fig1_scenario(make_nominal_step(c.step), c.signal, c.fig1_options());
        py::dict d;
        std::vector<double> t, v, target, star, lo, hi;
        std::vector<bool> feasible;
        for (const auto& row : r.rows) {
          t.push_back(row.t);
          v.push_back(row.v_request);
          target.push_back(row.t_target);
          star.push_back(row.t_star);
          feasible.push_back(row.feasible);
          lo.push_back(row.scan_lo);
          hi.push_back(row.scan_hi);
        }
        d["tick"] = t;
        d["v_request"] = v;
        d["t_target"] = target;
        d["t_star"] = star;
        d["feasible"] = feasible;
        d["scan_lo"] = lo;
        d["scan_hi"] = hi;
        d["interventions"] = r.interventions;
        return d;
      },
      py::arg("config_text") = "", "Single-step replanning experiment; returns the series.");

  m.def(
      "closed_loop",
      [](double magnitude, double start, double duration, const std::string& mode,
         const std::string& config_text) {
        const RunConfig c = RunConfig::parse(config_text);
        if (mode != "naive" && mode != "replan") throw py::value_error("mode: naive or replan");
        const auto r = run_closed_loop(make_nominal_step(c.step),
                                       VelocitySignal::square_wave(magnitude, start, duration),
                                       mode == "naive" ? Mode::naive : Mode::replan,
                                       c.closed_loop_options());
        py::dict d;
        d["outcome"] = to_string(r.outcome);
        d["steps"] = r.steps;
        d["interventions"] = r.interventions;
        d["fall_time"] = r.fall_time ? py::cast(*r.fall_time) : py::none();
        return d;
      },
      py::arg("magnitude"), py::arg("start"), py::arg("duration"), py::arg("mode") = "replan",
      py::arg("config_text") = "");

  m.def("default_config", [] { return RunConfig{}.serialize(); });
  m.def("config_hash", &config_hash);
}
