#include "lipreplan/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lipreplan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw std::invalid_argument("config: " + key + ": not a finite number: '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) {
    throw std::invalid_argument("config: " + key + ": not an integer: '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < -2147483647LL || v > 2147483647LL) {
    throw std::invalid_argument("config: " + key + ": out of range");
  }
  return static_cast<int>(v);
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw std::invalid_argument("config: " + key + ": empty list");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class M>
Field real(M member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            member(c) = to_double(k, v);
          },
          [member](const RunConfig& c) { return fmt(member(c)); }};
}

template <class M>
Field integer(M member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) {
            member(c) = to_int(k, v);
          },
          [member](const RunConfig& c) {
            return std::to_string(member(c));
          }};
}

// Ordered table of every recognized key.
const std::vector<std::pair<std::string, Field>>& table() {
  static const std::vector<std::pair<std::string, Field>> t = {
      {"omega", real([](auto& c) -> auto& { return c.omega; })},
      {"x_lower", real([](auto& c) -> auto& { return c.x_lower; })},
      {"x_upper", real([](auto& c) -> auto& { return c.x_upper; })},
      {"y_lower", real([](auto& c) -> auto& { return c.y_lower; })},
      {"y_upper", real([](auto& c) -> auto& { return c.y_upper; })},
      {"step_length", real([](auto& c) -> auto& { return c.step.step_length; })},
      {"step_width", real([](auto& c) -> auto& { return c.step.step_width; })},
      {"step_duration", real([](auto& c) -> auto& { return c.step.duration; })},
      {"com_height", real([](auto& c) -> auto& { return c.step.com_height; })},
      {"gravity", real([](auto& c) -> auto& { return c.step.gravity; })},
      {"foot_length", real([](auto& c) -> auto& { return c.step.foot_length; })},
      {"foot_width", real([](auto& c) -> auto& { return c.step.foot_width; })},
      {"heel_toe_ratio", real([](auto& c) -> auto& { return c.step.heel_toe_ratio; })},
      {"path_samples", integer([](auto& c) -> auto& { return c.step.path_samples; })},
      {"signal",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          const std::string t = trim(v);
          if (t == "constant") {
            c.signal.kind = VelocitySignal::Kind::constant;
          } else if (t == "sinusoid") {
            c.signal.kind = VelocitySignal::Kind::sinusoid;
          } else if (t == "square_wave") {
            c.signal.kind = VelocitySignal::Kind::square_wave;
          } else {
            throw std::invalid_argument("config: " + k + ": unknown signal '" + v + "'");
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.signal.kind)); }}},
      {"signal_magnitude", real([](auto& c) -> auto& { return c.signal.magnitude; })},
      {"signal_amplitude", real([](auto& c) -> auto& { return c.signal.amplitude; })},
      {"signal_period", real([](auto& c) -> auto& { return c.signal.period; })},
      {"signal_start", real([](auto& c) -> auto& { return c.signal.start; })},
      {"signal_duration", real([](auto& c) -> auto& { return c.signal.duration; })},
      {"qp_nodes", integer([](auto& c) -> auto& { return c.qp_nodes; })},
      {"node_spacing",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          const std::string t = trim(v);
          if (t == "uniform") {
            c.node_spacing = NodeSpacing::uniform;
          } else if (t == "geometric") {
            c.node_spacing = NodeSpacing::geometric;
          } else {
            throw std::invalid_argument("config: " + k + ": unknown spacing '" + v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.node_spacing == NodeSpacing::uniform ? "uniform" : "geometric");
        }}},
      {"geometric_ratio", real([](auto& c) -> auto& { return c.geometric_ratio; })},
      {"bisection_iters", integer([](auto& c) -> auto& { return c.bisection_iters; })},
      {"tick", real([](auto& c) -> auto& { return c.tick; })},
      {"scan_step", real([](auto& c) -> auto& { return c.scan_step; })},
      {"horizon", real([](auto& c) -> auto& { return c.horizon; })},
      {"k_xi", real([](auto& c) -> auto& { return c.k_xi; })},
      {"fall_margin", real([](auto& c) -> auto& { return c.fall_margin; })},
      {"fall_window", real([](auto& c) -> auto& { return c.fall_window; })},
      {"heatmap_magnitudes",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.heatmap_magnitudes = to_list(k, v);
        },
        [](const RunConfig& c) { return list_text(c.heatmap_magnitudes); }}},
      {"heatmap_durations",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.heatmap_durations = to_list(k, v);
        },
        [](const RunConfig& c) { return list_text(c.heatmap_durations); }}},
      {"starts_per_cell", integer([](auto& c) -> auto& { return c.starts_per_cell; })},
      {"bench_iterations", integer([](auto& c) -> auto& { return c.bench_iterations; })},
      {"seed",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          const long long s = to_integer(k, v);
          if (s < 0) throw std::invalid_argument("config: seed must be non-negative");
          c.seed = static_cast<std::uint64_t>(s);
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"output_dir",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          c.output_dir = trim(v);
          if (c.output_dir.empty()) throw std::invalid_argument("config: " + k + " is empty");
        },
        [](const RunConfig& c) { return c.output_dir; }}},
  };
  return t;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

RunConfig::RunConfig() {
  const HeatmapOptions h = HeatmapOptions::defaults();
  heatmap_magnitudes = h.magnitudes;
  heatmap_durations = h.durations;
}

void RunConfig::validate() const {
  pendulum().validate();
  bounds().validate();
  step.validate();
  signal.validate();
  foh().validate();
  require(bisection_iters >= 1, "bisection_iters must be at least 1");
  require(tick > 0.0, "tick must be positive");
  require(scan_step > 0.0, "scan_step must be positive");
  require(horizon > 0.0, "horizon must be positive");
  require(k_xi > 0.0, "k_xi must be positive");
  require(fall_margin >= 0.0, "fall_margin must be non-negative");
  require(fall_window > 0.0, "fall_window must be positive");
  require(starts_per_cell >= 1, "starts_per_cell must be at least 1");
  require(bench_iterations >= 1, "bench_iterations must be at least 1");
  for (double m : heatmap_magnitudes) require(m > 0.0, "heatmap magnitudes must be positive");
  for (double d : heatmap_durations) require(d > 0.0, "heatmap durations must be positive");
}

Fig1Options RunConfig::fig1_options() const {
  Fig1Options o;
  o.tick = tick;
  o.foh = foh();
  o.bisection_iters = bisection_iters;
  o.scan_step = scan_step;
  return o;
}

ClosedLoopOptions RunConfig::closed_loop_options() const {
  ClosedLoopOptions o;
  o.tick = tick;
  o.horizon = horizon;
  o.k_xi = k_xi;
  o.fall_margin = fall_margin;
  o.fall_window = fall_window;
  o.foh = foh();
  o.bisection_iters = bisection_iters;
  return o;
}

HeatmapOptions RunConfig::heatmap_options(int jobs) const {
  HeatmapOptions o;
  o.magnitudes = heatmap_magnitudes;
  o.durations = heatmap_durations;
  o.starts_per_cell = starts_per_cell;
  o.seed = seed;
  o.jobs = jobs;
  o.sim = closed_loop_options();
  return o;
}

BenchOptions RunConfig::bench_options() const {
  BenchOptions o;
  o.foh = foh();
  o.bisection_iters = bisection_iters;
  o.iterations = bench_iterations;
  o.seed = seed;
  return o;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : table()) {
    if (name == key) {
      field.set(*this, key, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [name, field] : table()) out += name + " = " + field.get(*this) + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::map<std::string, int> seen;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (seen[key]++) throw std::invalid_argument("config: duplicate key '" + key + "'");
    c.set(key, t.substr(eq + 1));
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& entry : table()) out.push_back(entry.first);
    return out;
  }();
  return k;
}

}  // namespace lipreplan
