#pragma once

// Linear Inverted Pendulum along one horizontal axis, written in the
// diagonal coordinates
//
//   x1 = c + c_dot / omega   (the DCM, unstable mode)
//   x2 = -c + c_dot / omega  (stable mode)
//
// in which the dynamics read  x1' = omega (x1 - u),  x2' = -omega (x2 + u).

#include <optional>
#include <vector>

namespace lipreplan {

/// Default half-width of the band treated as "on" a grid line or on the
/// line D = {x2 = -x1}.
inline constexpr double kBoundaryTol = 1e-9;

struct PendulumParams {
  double omega = 1.0;  // 1/s

  static PendulumParams from_com_height(double com_height, double gravity = 9.81);
  void validate() const;
};

/// CoP interval [lower, upper] along one axis (the support polygon slice).
struct ControlBounds {
  double lower = -1.0;  // u_m
  double upper = 1.0;   // u_M

  void validate() const;
  bool contains(double u, double tol = 0.0) const {
    return u >= lower - tol && u <= upper + tol;
  }
  double center() const { return 0.5 * (lower + upper); }
};

struct ComState {
  double c = 0.0;
  double c_dot = 0.0;
};

struct DiagonalState {
  double x1 = 0.0;
  double x2 = 0.0;

  /// Mirror image through D: S x = (-x2, -x1).
  DiagonalState mirrored() const { return {-x2, -x1}; }
  friend bool operator==(const DiagonalState&, const DiagonalState&) = default;
};

double distance_inf(const DiagonalState& a, const DiagonalState& b);

DiagonalState to_diagonal(const ComState& com, const PendulumParams& params);
ComState from_diagonal(const DiagonalState& x, const PendulumParams& params);

/// Exact flow under a constant CoP `u` held for `dt` seconds. Negative `dt`
/// runs the flow backward.
DiagonalState propagate_const(const DiagonalState& x, double u, double dt,
                              const PendulumParams& params);

/// Exact flow under the affine CoP u(r) = u0 + slope * r, r in [0, dt].
DiagonalState propagate_ramp(const DiagonalState& x, double u0, double slope, double dt,
                             const PendulumParams& params);

/// Bang-bang control: arcs alternate between `first_value` and
/// `second_value`, starting with `first_value`.
struct ControlSequence {
  double first_value = 0.0;
  double second_value = 0.0;
  std::vector<double> durations;

  /// Sequence alternating between the two bounds, starting at `first`.
  static ControlSequence alternating(const ControlBounds& bounds, double first,
                                     std::vector<double> durations);

  double value_of_arc(std::size_t i) const { return i % 2 == 0 ? first_value : second_value; }
  double total_duration() const;
  /// Checks the alternation and the duration signs. Zero durations are
  /// tolerated only when `allow_zero_arcs` is set (degenerate solver output).
  void validate(const ControlBounds& bounds, bool allow_zero_arcs = false) const;
};

/// Solution x^S of a control sequence started at x0.
class SequenceTrajectory {
 public:
  SequenceTrajectory(const DiagonalState& x0, ControlSequence seq, const PendulumParams& params);

  const DiagonalState& initial() const { return x0_; }
  const DiagonalState& terminal() const { return knots_.back(); }
  const ControlSequence& sequence() const { return seq_; }
  double duration() const { return seq_.total_duration(); }
  /// State at time tau, clamped into [0, duration()].
  DiagonalState at(double tau) const;

 private:
  DiagonalState x0_;
  ControlSequence seq_;
  PendulumParams params_;
  std::vector<DiagonalState> knots_;  // state at each arc boundary
};

SequenceTrajectory apply_sequence(const DiagonalState& x0, const ControlSequence& seq,
                                  const PendulumParams& params);

// ---------------------------------------------------------------------------
// Phase-plane geometry.

/// One of the nine open cells cut by the lines x1 in {u_m, u_M} and
/// x2 in {-u_m, -u_M}. Columns follow x1 (left, middle, right), rows follow
/// x2 (top: x2 > -u_m, middle, bottom: x2 < -u_M). R1 is top-left, R5 the
/// center, R9 bottom-right.
struct RegionId {
  int column = 1;  // 0..2, -1 when within tol of an x1 grid line
  int row = 1;     // 0..2, -1 when within tol of an x2 grid line

  bool on_x1_line() const { return column < 0; }
  bool on_x2_line() const { return row < 0; }
  bool is_boundary() const { return column < 0 || row < 0; }
  /// 1..9, or 0 for boundary points.
  int index() const { return is_boundary() ? 0 : 3 * row + column + 1; }
  /// True when the point is in the open union of the listed regions, e.g.
  /// in_any({2, 5, 8}).
  bool in_any(std::initializer_list<int> regions) const;
};

RegionId classify_region(const DiagonalState& x, const ControlBounds& bounds,
                         double tol = kBoundaryTol);

enum class DSide { plus, minus, on };
DSide side_of_d(const DiagonalState& x, double tol = kBoundaryTol);

enum class ConeMembership { neither, lower_only, upper_only, both };
/// Open double cones C_m (lower) and C_M (upper).
ConeMembership cone_membership(const DiagonalState& x, const ControlBounds& bounds);
inline bool in_lower_cone(ConeMembership c) {
  return c == ConeMembership::lower_only || c == ConeMembership::both;
}
inline bool in_upper_cone(ConeMembership c) {
  return c == ConeMembership::upper_only || c == ConeMembership::both;
}

struct MirrorTransit {
  double u = 0.0;
  double time = 0.0;
  DiagonalState image;
};

/// Constant-control transit from a cone point to its mirror image S x.
/// Uses u_m when x is in C_m (also when in both cones), u_M otherwise.
/// Throws std::domain_error outside both cones.
MirrorTransit mirror_transit(const DiagonalState& x, const ControlBounds& bounds,
                             const PendulumParams& params);

enum class Flow { forward, backward };

/// Time t > 0 at which the constant-u flow (forward, or backward when
/// `flow` is Flow::backward) from x meets the line D. The crossing is
/// unique when it exists.
std::optional<double> d_crossing_time(const DiagonalState& x, double u, Flow flow,
                                      const PendulumParams& params);

}  // namespace lipreplan
