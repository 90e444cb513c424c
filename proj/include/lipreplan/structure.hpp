#pragma once

// Structure of the set of feasible durations
//
//   T(x0, xf) = { T > 0 : some admissible u on [0, T] steers x0 to xf },
//
// which is empty, [T_min, T_max], [T_min, inf) or [T_min, A] u [B, inf).
// Every finite endpoint is the duration of a bang-bang control with at most
// one switch (the boundary of the reachable set of a planar system with real
// eigenvalues is traced by such controls), so all of them are obtained by
// solving the two-arc problem for the four orderings of {u_m, u_M}.

#include "lipreplan/foh.hpp"
#include "lipreplan/lip_core.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lipreplan {

struct BoundaryPair {
  DiagonalState x0;
  DiagonalState xf;
};

struct BangBangSolution {
  ControlSequence seq;  // one or two arcs, zero-length arcs allowed
  double total_time = 0.0;
};

/// All (a, b) >= 0 such that u_first for a seconds, then u_second for b
/// seconds, steers x0 to xf. Each returned solution reproduces xf within
/// 1e-9 (checked by re-simulation).
std::vector<BangBangSolution> two_arc_solve(const BoundaryPair& pair, double u_first,
                                            double u_second, const ControlBounds& bounds,
                                            const PendulumParams& params);

/// Solutions of the four orderings, duplicates merged, sorted by time.
std::vector<BangBangSolution> bang_bang_solutions(const BoundaryPair& pair,
                                                  const ControlBounds& bounds,
                                                  const PendulumParams& params);

struct MinMaxTime {
  std::optional<BangBangSolution> min;
  std::optional<BangBangSolution> max;  // present only for bounded sets
  /// x0 = xf is an equilibrium: every T > 0 is feasible, so the minimum
  /// time 0 is an infimum, not attained. `min` then holds an empty sequence.
  bool min_is_infimum = false;
};

MinMaxTime min_max_time(const BoundaryPair& pair, const ControlBounds& bounds,
                        const PendulumParams& params);

enum class Boundedness { empty_candidate, bounded, unbounded };

const char* to_string(Boundedness b);

/// Thrown when x0 or xf lies on a grid line; the case analysis covers open
/// regions only.
class BoundaryStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Decision tree over the regions of x0 and xf. Only meaningful when the
/// feasible set is non-empty; combinations outside the tree are reported as
/// empty_candidate.
Boundedness boundedness_class(const BoundaryPair& pair, const ControlBounds& bounds,
                              double tol = kBoundaryTol);

/// Membership in the exceptional set of pairs whose unbounded feasible set
/// splits in two: x0 in R258, xf in R456, and points x_D, x_d on D inside R5
/// with x_D reached backward from xf under one bound, x_d forward from x0
/// under the other. With u_m ending the path, x_d must lie right of x_D
/// (x_d1 > x_D1); the mirrored branch swaps the bounds and the order.
bool in_J(const BoundaryPair& pair, const ControlBounds& bounds, const PendulumParams& params);

struct TSetStructure {
  enum class Kind { empty, bounded, half_line, two_components };
  Kind kind = Kind::empty;
  double t_min = 0.0;
  double t_max = 0.0;  // bounded
  double a = 0.0;      // two_components: end of the first interval
  double b = 0.0;      // two_components: start of the second interval
  bool t_min_is_infimum = false;

  /// Whether T belongs to the set (closed intervals, t > 0).
  bool contains(double t) const;
};

const char* to_string(TSetStructure::Kind kind);

/// Throws BoundaryStateError for pairs on grid lines.
TSetStructure t_structure(const BoundaryPair& pair, const ControlBounds& bounds,
                          const PendulumParams& params);

// ---------------------------------------------------------------------------
// Scan oracle.

/// Embeds a one-axis pair in the plane with the other axis at rest at the
/// origin; `bounds` is reused for both axes and must contain 0 strictly.
PlanarState lift_x(const DiagonalState& x);
PlanarBounds lift_bounds(const ControlBounds& bounds);

/// Feasibility of every grid duration, as decided by `feasible`.
std::vector<char> exhaustive_scan(const std::vector<double>& t_grid,
                                  const std::function<bool(double)>& feasible);

/// QP-based scan of a planar pair.
std::vector<char> exhaustive_scan(const PlanarState& x0, const PlanarState& xf,
                                  FeasibilityChecker& checker,
                                  const std::vector<double>& t_grid);

/// t_grid = first, first + step, ..., up to last (inclusive, rounding-safe).
std::vector<double> uniform_grid(double first, double last, double step);

/// Maximal runs of true entries, as inclusive index pairs.
std::vector<std::pair<int, int>> feasible_runs(const std::vector<char>& pattern);

/// Bisects the feasibility edge between a feasible and an infeasible
/// duration (either order) until the bracket is narrower than `resolution`.
/// Returns the bracket as (feasible end, infeasible end).
std::pair<double, double> refine_edge(const std::function<bool(double)>& feasible,
                                      double t_feasible, double t_infeasible,
                                      double resolution = 1e-4);

}  // namespace lipreplan
