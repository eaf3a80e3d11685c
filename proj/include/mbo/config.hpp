#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mbo/errors.hpp"
#include "mbo/grid.hpp"
#include "mbo/tensions.hpp"
#include "mbo/trajectory.hpp"

namespace mbo {

enum class ExperimentKind {
  Evolve,
  CircleTest,
  JunctionTest,
  Consistency,
  OracleCheck,
  ExcessScan,
};

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Evolve: return "evolve";
    case ExperimentKind::CircleTest: return "circle-test";
    case ExperimentKind::JunctionTest: return "junction-test";
    case ExperimentKind::Consistency: return "consistency";
    case ExperimentKind::OracleCheck: return "oracle-check";
    case ExperimentKind::ExcessScan: return "excess-scan";
  }
  return "?";
}

inline std::optional<ExperimentKind> experiment_from_string(const std::string& s) {
  if (s == "evolve") return ExperimentKind::Evolve;
  if (s == "circle-test") return ExperimentKind::CircleTest;
  if (s == "junction-test") return ExperimentKind::JunctionTest;
  if (s == "consistency") return ExperimentKind::Consistency;
  if (s == "oracle-check") return ExperimentKind::OracleCheck;
  if (s == "excess-scan") return ExperimentKind::ExcessScan;
  return std::nullopt;
}

struct InitialData {
  enum class Kind { Disk, Stripe, Sectors, Voronoi, File } kind = Kind::Disk;
  double radius = 0.25;                       // disk
  std::array<double, 3> center{0.5, 0.5, 0.5};  // disk/sectors, Lambda units
  double width = 0.5;                         // stripe
  std::vector<double> angles;                 // sectors, radians
  int seeds = 8;                              // voronoi
  std::string path;                           // file
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Evolve;
  int dim = 2;
  int n_cells = 256;
  double lambda = 1.0;
  int phases = 2;
  std::vector<double> h_list;  // single entry unless a sweep
  double T = 0.0;
  double alpha = 1.0;
  std::vector<std::vector<double>> sigma_raw;
  InitialData init;
  std::string out_dir = "out";
  int stride = 0;  // 0 -> mesoscopic cadence
  TieRule tie_rule = TieRule::SmallestIndex;
  std::uint64_t seed = 1;
  bool allow_underresolved = false;
  double delta = 0.05;              // good-ball threshold
  std::vector<double> r_list;       // excess-scan radii
  int normal_net = 0;               // 0 -> dimension default
  int oracle_instances = 100;
  double junction_tol_deg = 4.0;

  TorusGrid grid() const { return TorusGrid{dim, n_cells, lambda}; }
  double h() const { return h_list.front(); }

  SurfaceTensionMatrix sigma() const { return SurfaceTensionMatrix::validate(sigma_raw); }

  SchemeConfig scheme(double h_value) const {
    SchemeConfig s;
    s.sigma = sigma();
    s.grid = grid();
    s.h = h_value;
    s.T = T;
    s.alpha = alpha;
    s.tie_rule = tie_rule;
    s.snapshot_stride = stride;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_double_list(const std::string& s, int line) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ParseError(line, "empty list entry");
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(item, &pos);
    } catch (...) {
      throw ParseError(line, "not a number: " + item);
    }
    if (pos != item.size()) throw ParseError(line, "trailing junk in number: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(line, "empty list");
  return out;
}

// shape(value, value, ...) descriptors
inline InitialData parse_init(const std::string& s, int line) {
  InitialData init;
  std::size_t open = s.find('(');
  std::string name = trim(open == std::string::npos ? s : s.substr(0, open));
  std::string args;
  if (open != std::string::npos) {
    std::size_t close = s.rfind(')');
    if (close == std::string::npos || close < open) throw ParseError(line, "unbalanced parentheses");
    args = trim(s.substr(open + 1, close - open - 1));
  }
  if (name == "disk") {
    init.kind = InitialData::Kind::Disk;
    if (!args.empty()) {
      auto v = parse_double_list(args, line);
      init.radius = v[0];
      for (std::size_t k = 1; k < v.size() && k <= 3; ++k) init.center[k - 1] = v[k];
    }
  } else if (name == "stripe") {
    init.kind = InitialData::Kind::Stripe;
    if (!args.empty()) init.width = parse_double_list(args, line)[0];
  } else if (name == "sectors") {
    init.kind = InitialData::Kind::Sectors;
    if (args.empty()) throw ParseError(line, "sectors(...) needs opening angles in degrees");
    for (double a : parse_double_list(args, line)) init.angles.push_back(a * M_PI / 180.0);
  } else if (name == "voronoi") {
    init.kind = InitialData::Kind::Voronoi;
    if (!args.empty()) init.seeds = static_cast<int>(parse_double_list(args, line)[0]);
  } else if (name == "file") {
    init.kind = InitialData::Kind::File;
    init.path = args;
    if (init.path.empty()) throw ParseError(line, "file(...) needs a path");
  } else {
    throw ParseError(line, "unknown initial data '" + name + "'");
  }
  return init;
}

}  // namespace detail

// Flat key=value config text, one key per line, '#' comments.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::pair<std::string, int>> kv;
  {
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
      ++lineno;
      std::string line = raw;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
      std::string key = detail::trim(line.substr(0, eq));
      std::string val = detail::trim(line.substr(eq + 1));
      if (key.empty() || val.empty()) throw ParseError(lineno, "expected key = value");
      if (kv.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
      kv[key] = {val, lineno};
    }
  }

  auto take = [&](const std::string& key) -> std::optional<std::pair<std::string, int>> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto number = [&](const std::string& key, double dflt) {
    auto v = take(key);
    if (!v) return dflt;
    return detail::parse_double_list(v->first, v->second)[0];
  };

  if (auto v = take("experiment")) {
    auto k = experiment_from_string(v->first);
    if (!k) throw ParseError(v->second, "unknown experiment '" + v->first + "'");
    cfg.kind = *k;
  }
  cfg.dim = static_cast<int>(number("d", 2));
  cfg.n_cells = static_cast<int>(number("n_cells", 256));
  cfg.lambda = number("Lambda", 1.0);
  cfg.phases = static_cast<int>(number("P", 2));
  if (auto v = take("h_list"))
    cfg.h_list = detail::parse_double_list(v->first, v->second);
  if (auto v = take("h")) {
    if (!cfg.h_list.empty()) throw ParseError(v->second, "give either h or h_list, not both");
    cfg.h_list = {detail::parse_double_list(v->first, v->second)[0]};
  }
  cfg.T = number("T", 0.0);
  cfg.alpha = number("alpha", 1.0);
  if (auto v = take("sigma")) {
    auto entries = detail::parse_double_list(v->first, v->second);
    std::size_t expect = static_cast<std::size_t>(cfg.phases) * (cfg.phases - 1) / 2;
    if (entries.size() != expect)
      throw ParseError(v->second, "sigma needs the strict upper triangle, " +
                                      std::to_string(expect) + " entries");
    cfg.sigma_raw.assign(cfg.phases, std::vector<double>(cfg.phases, 0.0));
    std::size_t k = 0;
    for (int i = 0; i < cfg.phases; ++i)
      for (int j = i + 1; j < cfg.phases; ++j) {
        cfg.sigma_raw[i][j] = cfg.sigma_raw[j][i] = entries[k++];
      }
  } else {
    double s = number("sigma_uniform", 1.0);
    cfg.sigma_raw.assign(cfg.phases, std::vector<double>(cfg.phases, s));
    for (int i = 0; i < cfg.phases; ++i) cfg.sigma_raw[i][i] = 0.0;
  }
  if (auto v = take("init")) cfg.init = detail::parse_init(v->first, v->second);
  if (auto v = take("out")) cfg.out_dir = v->first;
  cfg.stride = static_cast<int>(number("stride", 0));
  if (auto v = take("tie_rule")) {
    if (v->first == "smallest-index")
      cfg.tie_rule = TieRule::SmallestIndex;
    else if (v->first == "largest-index")
      cfg.tie_rule = TieRule::LargestIndex;
    else
      throw ParseError(v->second, "tie_rule must be smallest-index or largest-index");
  }
  cfg.seed = static_cast<std::uint64_t>(number("seed", 1));
  if (auto v = take("allow_underresolved")) {
    if (v->first == "true" || v->first == "1")
      cfg.allow_underresolved = true;
    else if (v->first == "false" || v->first == "0")
      cfg.allow_underresolved = false;
    else
      throw ParseError(v->second, "allow_underresolved must be true or false");
  }
  cfg.delta = number("delta", 0.05);
  if (auto v = take("r_list")) cfg.r_list = detail::parse_double_list(v->first, v->second);
  cfg.normal_net = static_cast<int>(number("normal_net", 0));
  cfg.oracle_instances = static_cast<int>(number("oracle_instances", 100));
  cfg.junction_tol_deg = number("junction_tol", 4.0);

  if (!kv.empty()) {
    auto it = kv.begin();
    throw ParseError(it->second.second, "unknown key '" + it->first + "'");
  }
  return cfg;
}

// Semantic validation; call after CLI overrides are applied.
inline void validate_config(ExperimentConfig& cfg) {
  if (cfg.dim < 1 || cfg.dim > 3) throw ValidationError("d", "dimension must be 1, 2 or 3");
  if (cfg.n_cells < 4) throw ValidationError("n_cells", "need at least 4 cells per axis");
  if (!(cfg.lambda > 0.0)) throw ValidationError("Lambda", "torus length must be positive");
  if (cfg.phases < 2 || cfg.phases > 255) throw ValidationError("P", "phase count out of range");
  if (cfg.h_list.empty()) {
    if (cfg.kind != ExperimentKind::OracleCheck)
      throw ValidationError("h", "a time step (h or h_list) is required");
    cfg.h_list = {1e-4};
  }
  for (double h : cfg.h_list)
    if (!(h > 0.0)) throw ValidationError("h", "time steps must be positive");
  for (std::size_t k = 1; k < cfg.h_list.size(); ++k)
    if (!(cfg.h_list[k] < cfg.h_list[k - 1]))
      throw ValidationError("h_list", "sweep steps must be strictly decreasing");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 2.0))
    throw ValidationError("alpha", "alpha must lie in (0, 2]");
  try {
    (void)cfg.sigma();
  } catch (const Error& e) {
    throw ValidationError("sigma", e.what());
  }
  if (cfg.sigma().phases() != cfg.phases)
    throw ValidationError("sigma", "matrix size does not match P");

  const double dx = cfg.lambda / cfg.n_cells;
  if (!cfg.allow_underresolved && cfg.kind != ExperimentKind::OracleCheck) {
    for (double h : cfg.h_list)
      if (std::sqrt(h) < 3.0 * dx)
        throw ValidationError(
            "h", "sqrt(h) < 3*dx; refine the grid or pass --allow-underresolved");
  }

  switch (cfg.init.kind) {
    case InitialData::Kind::Disk:
      if (!(cfg.init.radius > 0.0) || cfg.init.radius >= 0.5 * cfg.lambda)
        throw ValidationError("init", "disk radius must lie in (0, Lambda/2)");
      break;
    case InitialData::Kind::Stripe:
      if (!(cfg.init.width > 0.0) || cfg.init.width >= cfg.lambda)
        throw ValidationError("init", "stripe width must lie in (0, Lambda)");
      break;
    case InitialData::Kind::Sectors: {
      if (cfg.dim != 2) throw ValidationError("init", "sectors need d = 2");
      if (static_cast<int>(cfg.init.angles.size()) != cfg.phases)
        throw ValidationError("init", "sectors need one angle per phase");
      double sum = 0.0;
      for (double a : cfg.init.angles) sum += a;
      if (std::abs(sum - 2.0 * M_PI) > 1e-9)
        throw ValidationError("init", "sector angles must sum to 360 degrees");
      break;
    }
    case InitialData::Kind::Voronoi:
      if (cfg.init.seeds < cfg.phases)
        throw ValidationError("init", "voronoi needs at least P seeds");
      break;
    case InitialData::Kind::File:
      break;
  }

  if (cfg.kind == ExperimentKind::ExcessScan && cfg.r_list.empty())
    throw ValidationError("r_list", "excess-scan needs a radius list");
  if (cfg.kind == ExperimentKind::CircleTest && cfg.dim < 2)
    throw ValidationError("d", "circle-test needs d >= 2");
  if (cfg.T > 0.0) {
    // every sweep member that actually runs needs an integral step count
    if (cfg.kind == ExperimentKind::Evolve)
      for (double h : cfg.h_list) (void)cfg.scheme(h).num_steps();
    else
      (void)cfg.scheme(cfg.h_list.front()).num_steps();
  }
}

}  // namespace mbo
