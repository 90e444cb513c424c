#include "lipreplan/lip_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lipreplan {

PendulumParams PendulumParams::from_com_height(double com_height, double gravity) {
  if (!(com_height > 0.0) || !(gravity > 0.0)) {
    throw std::invalid_argument("CoM height and gravity must be positive");
  }
  return PendulumParams{std::sqrt(gravity / com_height)};
}

void PendulumParams::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("pendulum frequency omega must be positive, got " +
                                std::to_string(omega));
  }
}

void ControlBounds::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw std::invalid_argument("control bounds need lower < upper, got [" +
                                std::to_string(lower) + ", " + std::to_string(upper) + "]");
  }
}

double distance_inf(const DiagonalState& a, const DiagonalState& b) {
  return std::max(std::abs(a.x1 - b.x1), std::abs(a.x2 - b.x2));
}

DiagonalState to_diagonal(const ComState& com, const PendulumParams& params) {
  const double v = com.c_dot / params.omega;
  return {com.c + v, -com.c + v};
}

ComState from_diagonal(const DiagonalState& x, const PendulumParams& params) {
  return {0.5 * (x.x1 - x.x2), 0.5 * params.omega * (x.x1 + x.x2)};
}

DiagonalState propagate_const(const DiagonalState& x, double u, double dt,
                              const PendulumParams& params) {
  const double grow = std::exp(params.omega * dt);
  const double decay = std::exp(-params.omega * dt);
  return {grow * x.x1 + (1.0 - grow) * u, decay * x.x2 + (decay - 1.0) * u};
}

DiagonalState propagate_ramp(const DiagonalState& x, double u0, double slope, double dt,
                             const PendulumParams& params) {
  // Particular solutions: x1p(r) = u(r) + slope/omega, x2p(r) = -u(r) + slope/omega.
  const double w = params.omega;
  const double bias = slope / w;
  const double u_end = u0 + slope * dt;
  const double x1 = u_end + bias + (x.x1 - u0 - bias) * std::exp(w * dt);
  const double x2 = -u_end + bias + (x.x2 + u0 - bias) * std::exp(-w * dt);
  return {x1, x2};
}

ControlSequence ControlSequence::alternating(const ControlBounds& bounds, double first,
                                             std::vector<double> durations) {
  ControlSequence seq;
  seq.first_value = first;
  seq.second_value = first == bounds.lower ? bounds.upper : bounds.lower;
  seq.durations = std::move(durations);
  return seq;
}

double ControlSequence::total_duration() const {
  double total = 0.0;
  for (double d : durations) total += d;
  return total;
}

void ControlSequence::validate(const ControlBounds& bounds, bool allow_zero_arcs) const {
  const bool first_ok = first_value == bounds.lower || first_value == bounds.upper;
  const bool second_ok = second_value == bounds.lower || second_value == bounds.upper;
  if (!first_ok || !second_ok) {
    throw std::invalid_argument("control sequence values must be u_m or u_M");
  }
  if (durations.size() > 1 && first_value == second_value) {
    throw std::invalid_argument("control sequence values must alternate");
  }
  for (double d : durations) {
    if (!std::isfinite(d) || d < 0.0 || (!allow_zero_arcs && d == 0.0)) {
      throw std::invalid_argument("control sequence durations must be positive");
    }
  }
}

SequenceTrajectory::SequenceTrajectory(const DiagonalState& x0, ControlSequence seq,
                                       const PendulumParams& params)
    : x0_(x0), seq_(std::move(seq)), params_(params) {
  knots_.reserve(seq_.durations.size() + 1);
  knots_.push_back(x0_);
  for (std::size_t i = 0; i < seq_.durations.size(); ++i) {
    knots_.push_back(propagate_const(knots_.back(), seq_.value_of_arc(i), seq_.durations[i], params_));
  }
}

DiagonalState SequenceTrajectory::at(double tau) const {
  tau = std::max(0.0, tau);
  double start = 0.0;
  for (std::size_t i = 0; i < seq_.durations.size(); ++i) {
    const double end = start + seq_.durations[i];
    if (tau <= end || i + 1 == seq_.durations.size()) {
      const double local = std::min(tau - start, seq_.durations[i]);
      return propagate_const(knots_[i], seq_.value_of_arc(i), local, params_);
    }
    start = end;
  }
  return x0_;
}

SequenceTrajectory apply_sequence(const DiagonalState& x0, const ControlSequence& seq,
                                  const PendulumParams& params) {
  return SequenceTrajectory(x0, seq, params);
}

bool RegionId::in_any(std::initializer_list<int> regions) const {
  const int id = index();
  if (id == 0) return false;
  return std::find(regions.begin(), regions.end(), id) != regions.end();
}

RegionId classify_region(const DiagonalState& x, const ControlBounds& bounds, double tol) {
  auto cell = [tol](double v, double low_line, double high_line) {
    if (std::abs(v - low_line) <= tol || std::abs(v - high_line) <= tol) return -1;
    if (v < low_line) return 0;
    if (v < high_line) return 1;
    return 2;
  };
  RegionId id;
  id.column = cell(x.x1, bounds.lower, bounds.upper);
  // Rows run top to bottom, i.e. by decreasing x2.
  const int r = cell(x.x2, -bounds.upper, -bounds.lower);
  id.row = r < 0 ? -1 : 2 - r;
  return id;
}

DSide side_of_d(const DiagonalState& x, double tol) {
  const double s = x.x1 + x.x2;
  if (std::abs(s) <= tol) return DSide::on;
  return s > 0.0 ? DSide::plus : DSide::minus;
}

ConeMembership cone_membership(const DiagonalState& x, const ControlBounds& bounds) {
  const double s = x.x1 + x.x2;
  const bool d_plus = s > 0.0;
  const bool d_minus = s < 0.0;
  const bool lower = (d_minus && x.x1 > bounds.lower) || (d_plus && x.x1 < bounds.lower);
  const bool upper = (d_plus && x.x1 < bounds.upper) || (d_minus && x.x1 > bounds.upper);
  if (lower && upper) return ConeMembership::both;
  if (lower) return ConeMembership::lower_only;
  if (upper) return ConeMembership::upper_only;
  return ConeMembership::neither;
}

MirrorTransit mirror_transit(const DiagonalState& x, const ControlBounds& bounds,
                             const PendulumParams& params) {
  const ConeMembership cone = cone_membership(x, bounds);
  if (cone == ConeMembership::neither) {
    throw std::domain_error("mirror transit needs a state inside C_m or C_M");
  }
  const double u = in_lower_cone(cone) ? bounds.lower : bounds.upper;
  const double ratio = (u + x.x2) / (u - x.x1);
  MirrorTransit out;
  out.u = u;
  out.time = std::log(ratio) / params.omega;
  out.image = x.mirrored();
  return out;
}

std::optional<double> d_crossing_time(const DiagonalState& x, double u, Flow flow,
                                      const PendulumParams& params) {
  // Along the flow, x1 + x2 = (x1 - u) s + (x2 + u) / s with s = exp(+-omega t),
  // so s^2 = (x2 + u) / (u - x1) is the only candidate.
  const double a = u - x.x1;
  const double b = x.x2 + u;
  if (a == 0.0 || b == 0.0) return std::nullopt;
  const double ratio = flow == Flow::forward ? b / a : a / b;
  if (!(ratio > 1.0)) return std::nullopt;
  const double t = 0.5 * std::log(ratio) / params.omega;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

}  // namespace lipreplan
