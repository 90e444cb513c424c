#pragma once

// Projection of a requested step duration onto the set of durations for
// which the FOH transcription is feasible:
//
//   T* = argmin_{T feasible} |T - T_target|
//
// solved by bisection between the target and a duration already known to be
// feasible (the warm start).

#include "lipreplan/foh.hpp"

#include <stdexcept>

namespace lipreplan {

/// Below this horizon the current step is not replanned any more.
inline constexpr double kMinHorizon = 5e-3;

struct ReplanRequest {
  PlanarState x0;
  PlanarState xf;
  double t_target = 0.0;
  double t_guess = 0.0;
  int max_iters = 10;  // N; the bracket shrinks by 2^N

  void validate() const;
};

struct ReplanResult {
  double t_star = 0.0;
  FohPlan plan;
  bool target_was_feasible = false;
  int iterations_used = 0;
};

/// The warm-start duration is not feasible: the step cannot be salvaged
/// under the current boundary conditions.
class InfeasibleGuess : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks t_target first (one QP); on failure checks t_guess and bisects
/// the bracket between them, returning its feasible end. `out` is written in
/// place so that a reused result does not allocate.
void project_duration(const ReplanRequest& req, FeasibilityChecker& checker, ReplanResult& out);
ReplanResult project_duration(const ReplanRequest& req, FeasibilityChecker& checker);

/// Warm start for the next tick: the previous duration minus the elapsed
/// tick, never below kMinHorizon.
double update_guess(const ReplanResult& prev, double tick);

/// A checker and a result buffer bundled for repeated calls.
class Replanner {
 public:
  Replanner(const PlanarBounds& bounds, const PendulumParams& params, FohOptions options = {});

  const ReplanResult& project(const ReplanRequest& req);
  const ReplanResult& last() const { return result_; }
  FeasibilityChecker& checker() { return checker_; }

 private:
  FeasibilityChecker checker_;
  ReplanResult result_;
};

}  // namespace lipreplan
