#include "lipreplan/foh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lipreplan {

namespace {

// phi(z) = int_0^1 e^{z s} ds and psi(z) = int_0^1 s e^{z s} ds. The closed
// forms cancel badly near z = 0, where the Taylor series is used instead.
void segment_moments(double z, double& phi, double& psi) {
  if (std::abs(z) < 0.1) {
    double term = 1.0;  // z^n / n!
    phi = 0.0;
    psi = 0.0;
    for (int n = 0; n < 14; ++n) {
      phi += term / (n + 1);
      psi += term / (n + 2);
      term *= z / (n + 1);
    }
    return;
  }
  const double em1 = std::expm1(z);
  phi = em1 / z;
  psi = (z * (em1 + 1.0) - em1) / (z * z);
}

}  // namespace

void FohOptions::validate() const {
  if (nodes < 2) throw std::invalid_argument("FOH transcription needs at least 2 nodes");
  if (spacing == NodeSpacing::geometric && !(geometric_ratio > 0.0)) {
    throw std::invalid_argument("geometric node ratio must be positive");
  }
}

void foh_nodes(double horizon, const FohOptions& options, std::vector<double>& out) {
  const int p = options.nodes;
  out.resize(p);
  const int segments = p - 1;
  if (options.spacing == NodeSpacing::uniform || options.geometric_ratio == 1.0) {
    for (int k = 0; k < p; ++k) out[k] = horizon * k / segments;
  } else {
    // Segment k has length proportional to ratio^k.
    const double r = options.geometric_ratio;
    double total = 0.0;
    for (int k = 0; k < segments; ++k) total += std::pow(r, k);
    double acc = 0.0;
    out[0] = 0.0;
    for (int k = 0; k < segments; ++k) {
      acc += std::pow(r, k);
      out[k + 1] = horizon * acc / total;
    }
  }
  out[p - 1] = horizon;
  const double min_seg = 1e-6 * horizon;
  for (int k = 0; k + 1 < p; ++k) {
    if (out[k + 1] - out[k] < min_seg) {
      throw std::invalid_argument("FOH segment shorter than 1e-6 T");
    }
  }
}

double FohPlan::interpolate(const std::vector<double>& values, double t) const {
  if (nodes.empty()) return 0.0;
  if (t <= nodes.front()) return values.front();
  if (t >= nodes.back()) return values.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  const auto k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double s = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
  return values[k] + s * (values[k + 1] - values[k]);
}

DiagonalState propagate_foh(const DiagonalState& x0, const std::vector<double>& nodes,
                            const std::vector<double>& values, double t,
                            const PendulumParams& params) {
  DiagonalState x = x0;
  for (std::size_t k = 0; k + 1 < nodes.size() && nodes[k] < t; ++k) {
    const double d = nodes[k + 1] - nodes[k];
    const double slope = (values[k + 1] - values[k]) / d;
    x = propagate_ramp(x, values[k], slope, std::min(d, t - nodes[k]), params);
  }
  return x;
}

PlanarState FohPlan::simulate(const PlanarState& x0, double t,
                              const PendulumParams& params) const {
  return {propagate_foh(x0.x, nodes, values_x, t, params),
          propagate_foh(x0.y, nodes, values_y, t, params)};
}

void foh_transcribe(const PlanarState& x0, const PlanarState& xf, double horizon,
                    const PlanarBounds& bounds, const PendulumParams& params,
                    const FohOptions& options, QpProblem& problem,
                    std::vector<double>& nodes) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("FOH horizon must be positive, got " + std::to_string(horizon));
  }
  options.validate();
  const int p = options.nodes;
  const int n = 2 * p;
  if (problem.num_variables() != n || problem.num_equalities() != 4 ||
      problem.num_inequalities() != 4 * p) {
    problem.resize(n, 4, 4 * p);
  } else {
    problem.hessian.setZero();
    problem.eq_matrix.setZero();
    problem.ineq_matrix.setZero();
  }
  problem.linear.setZero();
  foh_nodes(horizon, options, nodes);

  const double w = params.omega;
  const double decay_total = std::exp(-w * horizon);

  for (int k = 0; k + 1 < p; ++k) {
    const double d = nodes[k + 1] - nodes[k];
    double phi = 0.0, psi = 0.0;
    segment_moments(-w * d, phi, psi);
    const double far = w * d * std::exp(-w * nodes[k]);                // x1 row weight
    const double near = w * d * std::exp(-w * (horizon - nodes[k + 1]));  // x2 row weight
    for (int axis = 0; axis < 2; ++axis) {
      const int off = axis * p;
      const int row = 2 * axis;
      problem.eq_matrix(row, off + k) += far * (phi - psi);
      problem.eq_matrix(row, off + k + 1) += far * psi;
      problem.eq_matrix(row + 1, off + k) += near * psi;
      problem.eq_matrix(row + 1, off + k + 1) += near * (phi - psi);

      // int u^2 = 1/2 z' G z with G = 2 M, M the FOH mass matrix.
      problem.hessian(off + k, off + k) += 2.0 * d / 3.0;
      problem.hessian(off + k + 1, off + k + 1) += 2.0 * d / 3.0;
      problem.hessian(off + k, off + k + 1) += d / 3.0;
      problem.hessian(off + k + 1, off + k) += d / 3.0;
    }
  }

  const DiagonalState* from[2] = {&x0.x, &x0.y};
  const DiagonalState* to[2] = {&xf.x, &xf.y};
  const ControlBounds* box[2] = {&bounds.x, &bounds.y};
  for (int axis = 0; axis < 2; ++axis) {
    problem.eq_rhs[2 * axis] = from[axis]->x1 - decay_total * to[axis]->x1;
    problem.eq_rhs[2 * axis + 1] = decay_total * from[axis]->x2 - to[axis]->x2;
    for (int k = 0; k < p; ++k) {
      const int var = axis * p + k;
      const int row = 2 * var;
      problem.ineq_matrix(row, var) = 1.0;
      problem.ineq_rhs[row] = box[axis]->lower;
      problem.ineq_matrix(row + 1, var) = -1.0;
      problem.ineq_rhs[row + 1] = -box[axis]->upper;
    }
  }
}

QpProblem foh_transcribe(const PlanarState& x0, const PlanarState& xf, double horizon,
                         const PlanarBounds& bounds, const PendulumParams& params,
                         const FohOptions& options) {
  QpProblem problem;
  std::vector<double> nodes;
  foh_transcribe(x0, xf, horizon, bounds, params, options, problem, nodes);
  return problem;
}

double plan_residual(const FohPlan& plan, const PlanarState& x0, const PlanarState& xf,
                     const PendulumParams& params) {
  const double horizon = plan.horizon();
  double worst = 0.0;
  const std::vector<double>* values[2] = {&plan.values_x, &plan.values_y};
  const DiagonalState* from[2] = {&x0.x, &x0.y};
  const DiagonalState* to[2] = {&xf.x, &xf.y};
  for (int axis = 0; axis < 2; ++axis) {
    const auto& v = *values[axis];
    // Stable coordinate forward.
    const DiagonalState fwd = propagate_foh(*from[axis], plan.nodes, v, horizon, params);
    worst = std::max(worst, std::abs(fwd.x2 - to[axis]->x2));
    // DCM coordinate backward from the terminal state.
    DiagonalState back = *to[axis];
    for (std::size_t k = plan.nodes.size() - 1; k > 0; --k) {
      const double d = plan.nodes[k] - plan.nodes[k - 1];
      const double slope = (v[k] - v[k - 1]) / d;
      // u(r) = v[k] + slope r on r in [-d, 0] is the same segment.
      back = propagate_ramp(back, v[k], slope, -d, params);
    }
    worst = std::max(worst, std::abs(back.x1 - from[axis]->x1));
  }
  return worst;
}

FeasibilityChecker::FeasibilityChecker(const PlanarBounds& bounds, const PendulumParams& params,
                                       FohOptions options)
    : bounds_(bounds), params_(params), options_(options) {
  bounds_.validate();
  params_.validate();
  options_.validate();
  const int p = options_.nodes;
  problem_.resize(2 * p, 4, 4 * p);
  solver_.reserve(2 * p, 4, 4 * p);
  outcome_.plan.nodes.reserve(p);
  outcome_.plan.values_x.resize(p);
  outcome_.plan.values_y.resize(p);
}

const QpOutcome& FeasibilityChecker::check(const PlanarState& x0, const PlanarState& xf,
                                           double horizon) {
  foh_transcribe(x0, xf, horizon, bounds_, params_, options_, problem_, outcome_.plan.nodes);
  ++solves_;
  outcome_.feasible = false;
  outcome_.cost = 0.0;
  if (solver_.solve(problem_) != QpStatus::optimal) return outcome_;

  const int p = options_.nodes;
  const auto& z = solver_.solution();
  bool in_box = true;
  for (int k = 0; k < p; ++k) {
    // The dual method reaches the bounds only up to rounding; clip that.
    double ux = std::clamp(z[k], bounds_.x.lower, bounds_.x.upper);
    double uy = std::clamp(z[p + k], bounds_.y.lower, bounds_.y.upper);
    in_box = in_box && std::abs(ux - z[k]) <= kPlanTolerance &&
             std::abs(uy - z[p + k]) <= kPlanTolerance;
    outcome_.plan.values_x[k] = ux;
    outcome_.plan.values_y[k] = uy;
  }
  if (!in_box) return outcome_;
  if (plan_residual(outcome_.plan, x0, xf, params_) > kPlanTolerance) return outcome_;
  outcome_.feasible = true;
  outcome_.cost = solver_.objective();
  return outcome_;
}

QpOutcome check_feasible(const PlanarState& x0, const PlanarState& xf, double horizon,
                         const PlanarBounds& bounds, const PendulumParams& params,
                         const FohOptions& options) {
  FeasibilityChecker checker(bounds, params, options);
  return checker.check(x0, xf, horizon);
}

}  // namespace lipreplan
