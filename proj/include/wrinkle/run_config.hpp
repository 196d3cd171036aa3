#pragma once

/// \file run_config.hpp
/// INI-style run configuration: `[section]` headers and `key = value` lines.
/// Parsed with Boost.PropertyTree; every value is validated before any
/// computation starts, and every problem raises ConfigError.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wrinkle/errors.hpp"
#include "wrinkle/macro_solver.hpp"

namespace wrinkle {

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> c = {"geometry-check", "expand",       "strain-audit",
                                             "cell",           "solve-eps",    "solve-macro",
                                             "solve-coupled",  "two-scale-study", "all"};
  return c;
}

struct RunConfig {
  SurfaceChart chart = SurfaceChart::plate();
  ShapeFunction theta = ShapeFunction::single_sine(1, 0);
  Material material;
  MacroSpace space;
  int cell_N = 2;
  std::vector<double> schedule{0.25, 0.125, 0.0625, 0.03125};
  std::string force = "bump";
  double force_amp = 1.0;
  int coupled_degree = 3;
  int max_cells = 256;  ///< cap on wrinkle-resolved quadrature cells per direction
  std::string command;
  std::uint64_t seed = 20240607;

  MacroProblem problem() const { return {chart, theta, material, space}; }
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  is.imbue(std::locale::classic());
  double x = 0.0;
  if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError("'" + key + "': not a number: '" + v + "'");
  return x;
}

inline int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != static_cast<int>(x)) throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

/// Whitespace or comma separated list; fractions like 1/8 are accepted.
inline std::vector<double> to_list(const std::string& key, std::string v) {
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream is(v);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    const auto slash = tok.find('/');
    if (slash == std::string::npos) {
      out.push_back(to_double(key, tok));
    } else {
      const double den = to_double(key, tok.substr(slash + 1));
      if (den == 0.0) throw ConfigError("'" + key + "': zero denominator");
      out.push_back(to_double(key, tok.substr(0, slash)) / den);
    }
  }
  return out;
}

/// theta modes as "k1 k2 cos_amp sin_amp; ..."
inline std::vector<TrigMode> to_modes(const std::string& v) {
  std::vector<TrigMode> modes;
  std::istringstream all(v);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto nums = to_list("theta.modes", item);
    if (nums.size() != 4) throw ConfigError("theta.modes: each mode needs 'k1 k2 cos_amp sin_amp'");
    if (nums[0] != static_cast<int>(nums[0]) || nums[1] != static_cast<int>(nums[1]))
      throw ConfigError("theta.modes: frequencies must be integers");
    modes.push_back({static_cast<int>(nums[0]), static_cast<int>(nums[1]), nums[2], nums[3]});
  }
  return modes;
}

}  // namespace detail

inline std::uint64_t parse_seed(const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("seed must be a non-negative 64-bit integer, got '" + s + "'");
  return v;
}

inline void validate(const RunConfig& c) {
  if (!(c.material.lambda > 0.0)) throw ConfigError("material.lambda must be positive");
  if (!(c.material.mu > 0.0)) throw ConfigError("material.mu must be positive");
  if (!(c.material.d > 0.0)) throw ConfigError("material.d must be positive");
  if (!(c.space.L1 > 0.0) || !(c.space.L2 > 0.0)) throw ConfigError("domain lengths must be positive");
  if (c.space.m1 < 1 || c.space.m3 < 1) throw ConfigError("macro.m1 and macro.m3 must be at least 1");
  if (c.cell_N < 1) throw ConfigError("cell.N must be at least 1");
  if (c.coupled_degree < 1) throw ConfigError("macro.coupled_degree must be at least 1");
  if (c.max_cells < 1) throw ConfigError("quadrature.max_cells must be at least 1");
  if (c.schedule.empty()) throw ConfigError("study.eps must not be empty");
  for (std::size_t i = 0; i < c.schedule.size(); ++i) {
    if (!(c.schedule[i] > 0.0)) throw ConfigError("study.eps entries must be positive");
    if (i > 0 && !(c.schedule[i] < c.schedule[i - 1])) throw ConfigError("study.eps must be strictly decreasing");
  }
  if (!(c.force_amp == c.force_amp)) throw ConfigError("force.amp is not a number");
  if (c.chart.kind == ChartKind::Cylinder && !(c.chart.param("R") > 0.0))
    throw ConfigError("chart.R must be positive for a cylinder");
  force_catalog(c.force, c.force_amp, c.space.L1, c.space.L2);  // throws on unknown names
  if (!c.command.empty() && std::find(known_commands().begin(), known_commands().end(), c.command) ==
                                known_commands().end())
    throw ConfigError("unknown command '" + c.command + "'");
}

/// Parses an INI stream into a validated RunConfig. Unknown sections or keys are errors.
inline RunConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"chart", {"kind", "R", "c11", "c12", "c22", "t111", "t112", "t122", "t222", "A", "w1", "w2", "p1", "p2"}},
      {"theta", {"preset", "amp", "k1", "k2", "modes"}},
      {"material", {"lambda", "mu", "d"}},
      {"domain", {"L1", "L2"}},
      {"macro", {"m1", "m3", "coupled_degree"}},
      {"cell", {"N"}},
      {"study", {"eps"}},
      {"force", {"name", "amp"}},
      {"quadrature", {"max_cells"}},
      {"run", {"command", "seed"}},
  };
  for (const auto& [sec, body] : tree) {
    const auto it = allowed.find(sec);
    if (it == allowed.end()) throw ConfigError("unknown section [" + sec + "]");
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + sec + "' outside a section");
    for (const auto& [key, val] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + sec + "]");
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  };
  auto num = [&](const std::string& path, double fallback) {
    const auto v = get(path);
    return v ? detail::to_double(path, *v) : fallback;
  };
  auto integer = [&](const std::string& path, int fallback) {
    const auto v = get(path);
    return v ? detail::to_int(path, *v) : fallback;
  };

  RunConfig c;
  const std::string kind = get("chart.kind").value_or("plate");
  if (kind == "plate") {
    c.chart = SurfaceChart::plate();
  } else if (kind == "cylinder") {
    c.chart = SurfaceChart::cylinder(num("chart.R", 1.0));
  } else if (kind == "graph") {
    std::map<std::string, double> coeffs;
    for (const char* k : {"c11", "c12", "c22", "t111", "t112", "t122", "t222"})
      if (get(std::string("chart.") + k)) coeffs[k] = num(std::string("chart.") + k, 0.0);
    c.chart = SurfaceChart::graph(coeffs);
  } else if (kind == "wavy") {
    c.chart = SurfaceChart::wavy(num("chart.A", 0.1), num("chart.w1", 1.0), num("chart.w2", 1.0), num("chart.p1", 0.0),
                                 num("chart.p2", 0.0));
  } else {
    throw ConfigError("chart.kind must be plate, cylinder, graph or wavy");
  }

  const double amp = num("theta.amp", 1.0);
  if (const auto modes = get("theta.modes")) {
    if (get("theta.preset")) throw ConfigError("theta: give either preset or modes, not both");
    c.theta = ShapeFunction(detail::to_modes(*modes));
  } else {
    const std::string preset = get("theta.preset").value_or("sine");
    if (preset == "zero") {
      c.theta = ShapeFunction::zero();
    } else if (preset == "sine") {
      c.theta = ShapeFunction::single_sine(integer("theta.k1", 1), integer("theta.k2", 0), amp);
    } else if (preset == "egg_box") {
      c.theta = ShapeFunction::egg_box(amp);
    } else {
      throw ConfigError("theta.preset must be zero, sine or egg_box");
    }
  }

  c.material = Material{num("material.lambda", 1.0), num("material.mu", 1.0), num("material.d", 0.05)};
  c.space = MacroSpace{num("domain.L1", 1.0), num("domain.L2", 1.0), integer("macro.m1", 4), integer("macro.m3", 4)};
  c.coupled_degree = integer("macro.coupled_degree", 3);
  c.cell_N = integer("cell.N", 2);
  if (const auto e = get("study.eps")) c.schedule = detail::to_list("study.eps", *e);
  c.force = get("force.name").value_or("bump");
  c.force_amp = num("force.amp", 1.0);
  c.max_cells = integer("quadrature.max_cells", 256);
  c.command = get("run.command").value_or("");
  if (const auto s = get("run.seed")) {
    c.seed = parse_seed(*s);
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(is);
}

}  // namespace wrinkle
