#include "lipreplan/replanner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lipreplan {

namespace {

// Copies the checker's plan without reallocating once capacities match.
void store_plan(const FohPlan& from, FohPlan& to) {
  to.nodes.assign(from.nodes.begin(), from.nodes.end());
  to.values_x.assign(from.values_x.begin(), from.values_x.end());
  to.values_y.assign(from.values_y.begin(), from.values_y.end());
}

}  // namespace

void ReplanRequest::validate() const {
  if (!(t_target > 0.0) || !std::isfinite(t_target)) {
    throw std::invalid_argument("replan: target duration must be positive");
  }
  if (!(t_guess > 0.0) || !std::isfinite(t_guess)) {
    throw std::invalid_argument("replan: guess duration must be positive");
  }
  if (max_iters < 1) throw std::invalid_argument("replan: need at least one bisection step");
}

void project_duration(const ReplanRequest& req, FeasibilityChecker& checker, ReplanResult& out) {
  req.validate();
  out.iterations_used = 0;

  const QpOutcome& at_target = checker.check(req.x0, req.xf, req.t_target);
  if (at_target.feasible) {
    out.t_star = req.t_target;
    out.target_was_feasible = true;
    store_plan(at_target.plan, out.plan);
    return;
  }
  out.target_was_feasible = false;

  const QpOutcome& at_guess = checker.check(req.x0, req.xf, req.t_guess);
  if (!at_guess.feasible) {
    throw InfeasibleGuess("replan: warm-start duration " + std::to_string(req.t_guess) +
                          " s is not feasible");
  }
  store_plan(at_guess.plan, out.plan);

  double good = req.t_guess;
  double bad = req.t_target;
  for (int i = 0; i < req.max_iters; ++i) {
    const double mid = 0.5 * (good + bad);
    const QpOutcome& at_mid = checker.check(req.x0, req.xf, mid);
    ++out.iterations_used;
    if (at_mid.feasible) {
      good = mid;
      store_plan(at_mid.plan, out.plan);
    } else {
      bad = mid;
    }
  }
  out.t_star = good;
}

ReplanResult project_duration(const ReplanRequest& req, FeasibilityChecker& checker) {
  ReplanResult out;
  project_duration(req, checker, out);
  return out;
}

double update_guess(const ReplanResult& prev, double tick) {
  return std::max(prev.t_star - tick, kMinHorizon);
}

Replanner::Replanner(const PlanarBounds& bounds, const PendulumParams& params, FohOptions options)
    : checker_(bounds, params, options) {
  const auto p = static_cast<std::size_t>(checker_.options().nodes);
  result_.plan.nodes.reserve(p);
  result_.plan.values_x.reserve(p);
  result_.plan.values_y.reserve(p);
}

const ReplanResult& Replanner::project(const ReplanRequest& req) {
  project_duration(req, checker_, result_);
  return result_;
}

}  // namespace lipreplan
