#pragma once

// First-order-hold transcription of the fixed-horizon minimum-effort problem
//
//   minimize  int_0^T |u(t)|^2 dt   s.t.  LIP dynamics per axis,
//             x(0) = x0, x(T) = xf, u(t) in [u_m, u_M] per axis,
//
// with u piecewise linear between P nodes. Both the terminal map and the
// cost are exact for such inputs, so the QP has 2P variables (node values,
// x axis first), 4 equality rows and 4P box rows.
//
// Terminal rows, per axis, written so that no coefficient grows with T:
//
//   omega int e^{-omega s} u(s) ds       = x0_1 - e^{-omega T} xf_1
//   omega int e^{-omega (T-s)} u(s) ds   = e^{-omega T} x0_2 - xf_2

#include "lipreplan/lip_core.hpp"
#include "lipreplan/qp_solver.hpp"

#include <vector>

namespace lipreplan {

struct PlanarState {
  DiagonalState x;
  DiagonalState y;
};

struct PlanarBounds {
  ControlBounds x;
  ControlBounds y;
  void validate() const {
    x.validate();
    y.validate();
  }
};

enum class NodeSpacing { uniform, geometric };

struct FohOptions {
  int nodes = 4;  // P, per axis
  NodeSpacing spacing = NodeSpacing::uniform;
  /// Ratio between consecutive segment lengths for geometric spacing; values
  /// above 1 densify the nodes near t = 0.
  double geometric_ratio = 1.5;

  void validate() const;
};

/// Node times 0 = t_0 < ... < t_{P-1} = T. Every segment is at least 1e-6 T.
void foh_nodes(double horizon, const FohOptions& options, std::vector<double>& out);

struct FohPlan {
  std::vector<double> nodes;
  std::vector<double> values_x;
  std::vector<double> values_y;

  double horizon() const { return nodes.empty() ? 0.0 : nodes.back(); }
  /// Interpolated CoP at time t (clamped to [0, horizon]).
  double value_x(double t) const { return interpolate(values_x, t); }
  double value_y(double t) const { return interpolate(values_y, t); }

  /// Exact state reached after following the plan for `t` seconds.
  PlanarState simulate(const PlanarState& x0, double t, const PendulumParams& params) const;

 private:
  double interpolate(const std::vector<double>& values, double t) const;
};

/// Exact flow along one axis under the piecewise-linear CoP given by
/// (nodes, values), from time 0 to min(t, nodes.back()).
DiagonalState propagate_foh(const DiagonalState& x0, const std::vector<double>& nodes,
                            const std::vector<double>& values, double t,
                            const PendulumParams& params);

/// Builds the QP in place (resizing only if the shape changed). Throws
/// std::invalid_argument for T <= 0 or P < 2.
void foh_transcribe(const PlanarState& x0, const PlanarState& xf, double horizon,
                    const PlanarBounds& bounds, const PendulumParams& params,
                    const FohOptions& options, QpProblem& problem, std::vector<double>& nodes);

QpProblem foh_transcribe(const PlanarState& x0, const PlanarState& xf, double horizon,
                         const PlanarBounds& bounds, const PendulumParams& params,
                         const FohOptions& options);

/// Residual of a candidate plan against the boundary conditions, in meters.
/// The DCM coordinate is checked by running the plan backward from xf (the
/// forward map amplifies by e^{omega T}); the stable one forward from x0.
double plan_residual(const FohPlan& plan, const PlanarState& x0, const PlanarState& xf,
                     const PendulumParams& params);

/// Tolerance used to accept a QP solution as a feasible plan.
inline constexpr double kPlanTolerance = 1e-7;

struct QpOutcome {
  bool feasible = false;
  double cost = 0.0;  // int |u|^2 dt, both axes
  FohPlan plan;       // meaningful only when feasible
};

/// Transcription plus solve, with its own workspace. One call at a time per
/// instance; repeated calls with the same node count do not allocate.
class FeasibilityChecker {
 public:
  FeasibilityChecker(const PlanarBounds& bounds, const PendulumParams& params,
                     FohOptions options = {});

  /// Feasibility of horizon T. A QP optimum whose plan fails the residual or
  /// box check is reported infeasible, so a "feasible" answer is always backed
  /// by a verified plan.
  const QpOutcome& check(const PlanarState& x0, const PlanarState& xf, double horizon);
  bool feasible(const PlanarState& x0, const PlanarState& xf, double horizon) {
    return check(x0, xf, horizon).feasible;
  }

  const PlanarBounds& bounds() const { return bounds_; }
  const PendulumParams& params() const { return params_; }
  const FohOptions& options() const { return options_; }
  const QpProblem& last_problem() const { return problem_; }
  long solves() const { return solves_; }
  void reset_solve_count() { solves_ = 0; }

 private:
  PlanarBounds bounds_;
  PendulumParams params_;
  FohOptions options_;
  QpProblem problem_;
  DualActiveSetSolver solver_;
  QpOutcome outcome_;
  long solves_ = 0;
};

/// Convenience wrapper around a temporary FeasibilityChecker.
QpOutcome check_feasible(const PlanarState& x0, const PlanarState& xf, double horizon,
                         const PlanarBounds& bounds, const PendulumParams& params,
                         const FohOptions& options = {});

}  // namespace lipreplan
