#include "lipreplan/structure.hpp"

#include <algorithm>
#include <cmath>

namespace lipreplan {

namespace {

constexpr double kVerifyTol = 1e-9;
constexpr double kUnitRootTol = 1e-12;

bool reaches(const DiagonalState& x0, double u1, double a, double u2, double b,
             const DiagonalState& xf, const PendulumParams& params) {
  const DiagonalState y = propagate_const(propagate_const(x0, u1, a, params), u2, b, params);
  return distance_inf(y, xf) <= kVerifyTol;
}

BangBangSolution make_solution(double u1, double a, double u2, double b) {
  BangBangSolution s;
  s.seq.first_value = u1;
  s.seq.second_value = u2;
  s.seq.durations = {a, b};
  s.total_time = a + b;
  return s;
}

// Accepts x >= 1 (with the clamp at 1) and returns log(x) / omega.
std::optional<double> log_duration(double x, double omega) {
  if (!std::isfinite(x) || x < 1.0 - kUnitRootTol) return std::nullopt;
  return std::log(std::max(x, 1.0)) / omega;
}

bool is_equilibrium_pair(const BoundaryPair& pair, const ControlBounds& bounds) {
  if (distance_inf(pair.x0, pair.xf) > kVerifyTol) return false;
  const double c = pair.x0.x1;
  return std::abs(pair.x0.x1 + pair.x0.x2) <= kVerifyTol && c > bounds.lower &&
         c < bounds.upper;
}

}  // namespace

std::vector<BangBangSolution> two_arc_solve(const BoundaryPair& pair, double u_first,
                                            double u_second, const ControlBounds& bounds,
                                            const PendulumParams& params) {
  std::vector<BangBangSolution> out;
  const DiagonalState& x0 = pair.x0;
  const DiagonalState& xf = pair.xf;
  const double w = params.omega;
  auto is_bound = [&bounds](double u) { return u == bounds.lower || u == bounds.upper; };
  if (!is_bound(u_first) || !is_bound(u_second)) {
    throw std::invalid_argument("two-arc controls must be u_m or u_M");
  }

  if (u_first == u_second) {
    // p = e^{omega a} from either coordinate; use the better-conditioned one.
    const double u = u_first;
    const double den1 = x0.x1 - u;
    const double den2 = xf.x2 + u;
    double p = 0.0;
    if (std::abs(den1) >= std::abs(den2) && den1 != 0.0) {
      p = (xf.x1 - u) / den1;
    } else if (den2 != 0.0) {
      p = (x0.x2 + u) / den2;
    } else {
      return out;  // x0 and xf both at the equilibrium of u
    }
    if (const auto a = log_duration(p, w); a && reaches(x0, u, *a, u, 0.0, xf, params)) {
      out.push_back(make_solution(u, *a, u, 0.0));
    }
    return out;
  }

  const double u1 = u_first;
  const double u2 = u_second;
  const double alpha = u2 - u1;
  const double beta = x0.x2 + u1;
  const double gamma = x0.x1 - u1;
  const double k = (xf.x1 - u2) * (xf.x2 + u2);
  const double qa = alpha * gamma;
  const double qb = beta * gamma - alpha * alpha - k;
  const double qc = -alpha * beta;

  double roots[2];
  int num_roots = 0;
  if (qa == 0.0) {
    if (qb != 0.0) roots[num_roots++] = -qc / qb;
    else if (qc == 0.0) roots[num_roots++] = 1.0;  // every a works; keep a = 0
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      roots[num_roots++] = q / qa;
      if (q != 0.0) roots[num_roots++] = qc / q;
    }
  }

  for (int i = 0; i < num_roots; ++i) {
    const auto a = log_duration(roots[i], w);
    if (!a) continue;
    const DiagonalState y = propagate_const(x0, u1, *a, params);
    const double den1 = y.x1 - u2;
    const double den2 = xf.x2 + u2;
    double q = 0.0;
    if (std::abs(den1) >= std::abs(den2) && den1 != 0.0) {
      q = (xf.x1 - u2) / den1;
    } else if (den2 != 0.0) {
      q = (y.x2 + u2) / den2;
    } else {
      continue;
    }
    const auto b = log_duration(q, w);
    if (!b || !reaches(x0, u1, *a, u2, *b, xf, params)) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const BangBangSolution& s) {
      return std::abs(s.seq.durations[0] - *a) <= kVerifyTol &&
             std::abs(s.seq.durations[1] - *b) <= kVerifyTol;
    });
    if (!duplicate) out.push_back(make_solution(u1, *a, u2, *b));
  }
  return out;
}

std::vector<BangBangSolution> bang_bang_solutions(const BoundaryPair& pair,
                                                  const ControlBounds& bounds,
                                                  const PendulumParams& params) {
  std::vector<BangBangSolution> all;
  const double values[2] = {bounds.lower, bounds.upper};
  for (double u1 : values) {
    for (double u2 : values) {
      for (auto& s : two_arc_solve(pair, u1, u2, bounds, params)) all.push_back(std::move(s));
    }
  }
  std::sort(all.begin(), all.end(), [](const BangBangSolution& l, const BangBangSolution& r) {
    return l.total_time < r.total_time;
  });
  // The same trajectory shows up under several orderings when an arc has zero
  // length; the durations then coincide.
  std::vector<BangBangSolution> unique;
  for (auto& s : all) {
    if (!unique.empty() && std::abs(unique.back().total_time - s.total_time) <= kVerifyTol) {
      continue;
    }
    unique.push_back(std::move(s));
  }
  return unique;
}

MinMaxTime min_max_time(const BoundaryPair& pair, const ControlBounds& bounds,
                        const PendulumParams& params) {
  MinMaxTime out;
  if (is_equilibrium_pair(pair, bounds)) {
    BangBangSolution rest;
    rest.seq.first_value = bounds.lower;
    rest.seq.second_value = bounds.upper;
    out.min = rest;
    out.min_is_infimum = true;
    return out;
  }
  const auto sols = bang_bang_solutions(pair, bounds, params);
  for (const auto& s : sols) {
    if (s.total_time > 0.0) {
      out.min = s;
      break;
    }
  }
  if (!out.min) return out;

  bool bounded = true;
  try {
    bounded = boundedness_class(pair, bounds) != Boundedness::unbounded;
  } catch (const BoundaryStateError&) {
    bounded = true;  // no tree on the grid lines; report the largest solution
  }
  if (bounded) out.max = sols.back();
  return out;
}

const char* to_string(Boundedness b) {
  switch (b) {
    case Boundedness::empty_candidate: return "EmptyCandidate";
    case Boundedness::bounded: return "Bounded";
    case Boundedness::unbounded: return "Unbounded";
  }
  return "?";
}

Boundedness boundedness_class(const BoundaryPair& pair, const ControlBounds& bounds,
                              double tol) {
  const RegionId r0 = classify_region(pair.x0, bounds, tol);
  const RegionId rf = classify_region(pair.xf, bounds, tol);
  if (r0.is_boundary() || rf.is_boundary()) {
    throw BoundaryStateError("boundary state: x0 or xf lies on a grid line");
  }
  if (!r0.in_any({2, 5, 8})) return Boundedness::bounded;
  if (r0.index() == 5) return Boundedness::unbounded;
  if (rf.in_any({4, 5, 6})) return Boundedness::unbounded;
  if (r0.index() == 2 && rf.in_any({1, 2, 3})) return Boundedness::bounded;
  if (r0.index() == 8 && rf.in_any({7, 8, 9})) return Boundedness::bounded;
  return Boundedness::empty_candidate;
}

bool in_J(const BoundaryPair& pair, const ControlBounds& bounds, const PendulumParams& params) {
  const RegionId r0 = classify_region(pair.x0, bounds);
  const RegionId rf = classify_region(pair.xf, bounds);
  if (!r0.in_any({2, 5, 8}) || !rf.in_any({4, 5, 6})) return false;

  auto branch = [&](double u_end, double u_start, bool fwd_right) {
    const auto t_back = d_crossing_time(pair.xf, u_end, Flow::backward, params);
    const auto t_fwd = d_crossing_time(pair.x0, u_start, Flow::forward, params);
    if (!t_back || !t_fwd) return false;
    const DiagonalState x_back = propagate_const(pair.xf, u_end, -*t_back, params);
    const DiagonalState x_fwd = propagate_const(pair.x0, u_start, *t_fwd, params);
    if (classify_region(x_back, bounds).index() != 5) return false;
    if (classify_region(x_fwd, bounds).index() != 5) return false;
    return fwd_right ? x_fwd.x1 > x_back.x1 : x_fwd.x1 < x_back.x1;
  };
  return branch(bounds.lower, bounds.upper, true) || branch(bounds.upper, bounds.lower, false);
}

bool TSetStructure::contains(double t) const {
  if (!(t > 0.0)) return false;
  switch (kind) {
    case Kind::empty: return false;
    case Kind::bounded: return t >= t_min && t <= t_max;
    case Kind::half_line: return t >= t_min;
    case Kind::two_components: return (t >= t_min && t <= a) || t >= b;
  }
  return false;
}

const char* to_string(TSetStructure::Kind kind) {
  switch (kind) {
    case TSetStructure::Kind::empty: return "Empty";
    case TSetStructure::Kind::bounded: return "Bounded";
    case TSetStructure::Kind::half_line: return "HalfLine";
    case TSetStructure::Kind::two_components: return "TwoComponents";
  }
  return "?";
}

TSetStructure t_structure(const BoundaryPair& pair, const ControlBounds& bounds,
                          const PendulumParams& params) {
  TSetStructure out;
  if (is_equilibrium_pair(pair, bounds)) {
    out.kind = TSetStructure::Kind::half_line;
    out.t_min = 0.0;
    out.t_min_is_infimum = true;
    return out;
  }
  const Boundedness cls = boundedness_class(pair, bounds);
  const auto sols = bang_bang_solutions(pair, bounds, params);
  std::vector<double> times;
  for (const auto& s : sols)
    if (s.total_time > 0.0) times.push_back(s.total_time);
  if (times.empty()) return out;

  out.t_min = times.front();
  if (cls != Boundedness::unbounded) {
    out.kind = TSetStructure::Kind::bounded;
    out.t_max = times.back();
    return out;
  }
  // A gap needs a closing and a reopening time, each a bang-bang duration.
  if (times.size() >= 3 && in_J(pair, bounds, params)) {
    out.kind = TSetStructure::Kind::two_components;
    out.a = times[1];
    out.b = times[2];
    return out;
  }
  out.kind = TSetStructure::Kind::half_line;
  return out;
}

PlanarState lift_x(const DiagonalState& x) { return {x, DiagonalState{0.0, 0.0}}; }

PlanarBounds lift_bounds(const ControlBounds& bounds) {
  if (!(bounds.lower < 0.0 && bounds.upper > 0.0)) {
    throw std::invalid_argument("lifted bounds must contain 0 strictly");
  }
  return {bounds, bounds};
}

std::vector<char> exhaustive_scan(const std::vector<double>& t_grid,
                                  const std::function<bool(double)>& feasible) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw std::invalid_argument("scan grid must be positive and strictly increasing");
    }
  }
  std::vector<char> pattern(t_grid.size(), 0);
  for (std::size_t i = 0; i < t_grid.size(); ++i) pattern[i] = feasible(t_grid[i]) ? 1 : 0;
  return pattern;
}

std::vector<char> exhaustive_scan(const PlanarState& x0, const PlanarState& xf,
                                  FeasibilityChecker& checker,
                                  const std::vector<double>& t_grid) {
  return exhaustive_scan(t_grid, [&](double t) { return checker.feasible(x0, xf, t); });
}

std::vector<double> uniform_grid(double first, double last, double step) {
  if (!(step > 0.0) || last < first) throw std::invalid_argument("bad grid specification");
  const auto count = static_cast<long>(std::floor((last - first) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (long i = 0; i < count; ++i) grid[i] = first + static_cast<double>(i) * step;
  return grid;
}

std::vector<std::pair<int, int>> feasible_runs(const std::vector<char>& pattern) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(pattern.size());
  for (int i = 0; i < n; ++i) {
    if (!pattern[i]) continue;
    int j = i;
    while (j + 1 < n && pattern[j + 1]) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

std::pair<double, double> refine_edge(const std::function<bool(double)>& feasible,
                                      double t_feasible, double t_infeasible,
                                      double resolution) {
  while (std::abs(t_feasible - t_infeasible) > resolution) {
    const double mid = 0.5 * (t_feasible + t_infeasible);
    if (feasible(mid)) t_feasible = mid;
    else t_infeasible = mid;
  }
  return {t_feasible, t_infeasible};
}

}  // namespace lipreplan
