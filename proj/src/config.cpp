#include "ahmpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ahmpc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model", "T", "substeps", "x0", "steps", "t0", "u_min", "u_max",
      "reference", "alpha_bar", "epsilon", "N0", "N_hat", "N_min", "N_max",
      "sigma", "estimate_method", "prolong_strategy", "shorten_enabled",
      "solver_tol", "solver_max_iter", "multistart", "seed", "oracle_grid",
      "output_dir", "cap_hit_policy",
      "arp.M", "arp.m", "arp.r", "arp.k1", "arp.b1", "arp.a1", "arp.a2",
      "arp.a3", "arp.a4", "arp.a5", "arp.a6", "arp.p1", "arp.p2", "arp.J",
      "arp.rho", "arp.smoothing",
      "scalar_linear.a", "scalar_linear.b", "scalar_linear.rho"};
  return keys;
}

struct RawConfig {
  std::map<std::string, std::pair<std::string, int>> entries;  // value, line
  std::set<std::string> consumed;

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  const std::string* get(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    consumed.insert(key);
    return &it->second.first;
  }

  int line_of(const std::string& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? -1 : it->second.second;
  }
};

[[noreturn]] void fail(int line, const std::string& msg) {
  if (line < 0) throw ConfigError("config: " + msg);
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(RawConfig& raw, const std::string& key, double fallback,
                    std::vector<std::string>* defaults) {
  const std::string* v = raw.get(key);
  if (v == nullptr) {
    if (defaults) {
      std::ostringstream os;
      os << key << " = " << fallback;
      defaults->push_back(os.str());
    }
    return fallback;
  }
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    fail(raw.line_of(key), key + ": not a number: '" + *v + "'");
  }
}

long parse_int(RawConfig& raw, const std::string& key, long fallback,
               std::vector<std::string>* defaults) {
  const std::string* v = raw.get(key);
  if (v == nullptr) {
    if (defaults) defaults->push_back(key + " = " + std::to_string(fallback));
    return fallback;
  }
  try {
    std::size_t pos = 0;
    const long d = std::stol(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    fail(raw.line_of(key), key + ": not an integer: '" + *v + "'");
  }
}

bool parse_bool(RawConfig& raw, const std::string& key, bool fallback,
                std::vector<std::string>* defaults) {
  const std::string* v = raw.get(key);
  if (v == nullptr) {
    if (defaults)
      defaults->push_back(key + std::string(" = ") + (fallback ? "true" : "false"));
    return fallback;
  }
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail(raw.line_of(key), key + ": expected true/false, got '" + *v + "'");
}

Vector parse_vector(const std::string& text, int line, const std::string& key) {
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream is(normalized);
  std::vector<double> vals;
  double d;
  while (is >> d) vals.push_back(d);
  if (!is.eof()) fail(line, key + ": malformed vector: '" + text + "'");
  if (vals.empty()) fail(line, key + ": empty vector");
  Vector out(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out(static_cast<int>(i)) = vals[i];
  return out;
}

ReferenceSignal parse_inline_reference(const std::string& text, int line) {
  // "t:value, t:value, ..." piecewise-constant from each listed time
  ReferenceSignal ref;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      fail(line, "reference: expected 'time:value' segments, got '" + item + "'");
    }
    try {
      ref.nodes.push_back(
          {std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      fail(line, "reference: malformed segment '" + item + "'");
    }
  }
  if (ref.nodes.empty()) fail(line, "reference: no segments");
  std::stable_sort(
      ref.nodes.begin(), ref.nodes.end(),
      [](const ReferenceSignal::Node& a, const ReferenceSignal::Node& b) {
        return a.t < b.t;
      });
  return ref;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(lineno, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (known_keys().count(key) == 0) {
      fail(lineno, "unknown key '" + key + "'");
    }
    if (raw.entries.count(key) != 0) {
      fail(lineno, "duplicate key '" + key + "' (first seen on line " +
                       std::to_string(raw.entries[key].second) + ")");
    }
    raw.entries[key] = {value, lineno};
  }

  ExperimentConfig cfg;
  auto* defs = &cfg.defaults_applied;

  const std::string* model = raw.get("model");
  if (model == nullptr) throw ConfigError("config: missing required key 'model'");
  if (*model != "arp" && *model != "scalar_linear" && *model != "double_integrator") {
    fail(raw.line_of("model"), "model must be one of arp, scalar_linear, "
                               "double_integrator; got '" + *model + "'");
  }
  cfg.model = *model;

  const std::string* x0 = raw.get("x0");
  if (x0 == nullptr) throw ConfigError("config: missing required key 'x0'");
  cfg.x0 = parse_vector(*x0, raw.line_of("x0"), "x0");

  cfg.steps = static_cast<int>(parse_int(raw, "steps", -1, nullptr));
  if (!raw.has("steps")) throw ConfigError("config: missing required key 'steps'");
  if (cfg.steps < 1) fail(raw.line_of("steps"), "steps must be >= 1");

  cfg.T = parse_double(raw, "T", 0.2, defs);
  if (cfg.T <= 0.0) fail(raw.line_of("T"), "T must be positive");
  cfg.substeps = static_cast<int>(parse_int(raw, "substeps", 10, defs));
  if (cfg.substeps < 1) fail(raw.line_of("substeps"), "substeps must be >= 1");
  cfg.t0 = parse_double(raw, "t0", 0.0, nullptr);

  if (const std::string* v = raw.get("u_min")) {
    cfg.u_min = parse_vector(*v, raw.line_of("u_min"), "u_min");
  }
  if (const std::string* v = raw.get("u_max")) {
    cfg.u_max = parse_vector(*v, raw.line_of("u_max"), "u_max");
  }

  if (const std::string* v = raw.get("reference")) {
    cfg.reference_set = true;
    if (v->rfind("file:", 0) == 0) {
      cfg.reference_file = v->substr(5);
    } else {
      cfg.reference = parse_inline_reference(*v, raw.line_of("reference"));
    }
  }

  cfg.adapt.alpha_bar = parse_double(raw, "alpha_bar", 0.5, defs);
  if (cfg.adapt.alpha_bar <= 0.0 || cfg.adapt.alpha_bar >= 1.0) {
    fail(raw.line_of("alpha_bar"), "alpha_bar must lie in (0, 1)");
  }
  cfg.adapt.epsilon = parse_double(raw, "epsilon", 1e-5, defs);
  if (cfg.adapt.epsilon < 0.0) fail(raw.line_of("epsilon"), "epsilon must be >= 0");

  cfg.adapt.N_hat = static_cast<int>(parse_int(raw, "N_hat", 2, defs));
  if (cfg.adapt.N_hat < 2) fail(raw.line_of("N_hat"), "N_hat must be >= 2");
  cfg.adapt.N_min = static_cast<int>(parse_int(raw, "N_min", 2, defs));
  if (cfg.adapt.N_min < cfg.adapt.N_hat) {
    fail(raw.line_of("N_min"), "N_min must be >= N_hat");
  }
  cfg.adapt.N_max = static_cast<int>(parse_int(raw, "N_max", 30, defs));
  if (cfg.adapt.N_max < cfg.adapt.N_min) {
    fail(raw.line_of("N_max"), "N_max must be >= N_min");
  }
  cfg.adapt.sigma = static_cast<int>(parse_int(raw, "sigma", 5, defs));
  if (cfg.adapt.sigma < 1) fail(raw.line_of("sigma"), "sigma must be >= 1");
  cfg.N0 = static_cast<int>(parse_int(raw, "N0", cfg.adapt.N_min, defs));
  if (cfg.N0 < cfg.adapt.N_min || cfg.N0 > cfg.adapt.N_max) {
    fail(raw.line_of("N0"), "N0 must lie in [N_min, N_max]");
  }

  if (const std::string* v = raw.get("estimate_method")) {
    if (*v == "aposteriori") {
      cfg.adapt.estimate_method = EstimateMethod::APosteriori;
    } else if (*v == "apriori") {
      cfg.adapt.estimate_method = EstimateMethod::APriori;
    } else {
      fail(raw.line_of("estimate_method"),
           "estimate_method must be aposteriori or apriori");
    }
  } else {
    defs->push_back("estimate_method = aposteriori");
  }
  if (const std::string* v = raw.get("prolong_strategy")) {
    if (*v == "simple") {
      cfg.adapt.prolong_strategy = ProlongStrategy::Simple;
    } else if (*v == "fixedpoint") {
      cfg.adapt.prolong_strategy = ProlongStrategy::FixedPoint;
    } else if (*v == "monotone") {
      cfg.adapt.prolong_strategy = ProlongStrategy::Monotone;
    } else {
      fail(raw.line_of("prolong_strategy"),
           "prolong_strategy must be simple, fixedpoint or monotone");
    }
  } else {
    defs->push_back("prolong_strategy = simple");
  }
  cfg.adapt.shorten_enabled = parse_bool(raw, "shorten_enabled", true, defs);

  cfg.solver.tolerance = parse_double(raw, "solver_tol", 1e-6, defs);
  if (cfg.solver.tolerance <= 0.0) {
    fail(raw.line_of("solver_tol"), "solver_tol must be positive");
  }
  cfg.solver.max_iterations =
      static_cast<int>(parse_int(raw, "solver_max_iter", 500, defs));
  if (cfg.solver.max_iterations < 1) {
    fail(raw.line_of("solver_max_iter"), "solver_max_iter must be >= 1");
  }
  cfg.solver.multistart = static_cast<int>(parse_int(raw, "multistart", 0, nullptr));
  cfg.solver.seed = static_cast<unsigned>(parse_int(raw, "seed", 0, nullptr));

  if (const std::string* v = raw.get("oracle_grid")) {
    // lo:hi:count
    std::istringstream os(*v);
    std::string lo, hi, count;
    if (!std::getline(os, lo, ':') || !std::getline(os, hi, ':') ||
        !std::getline(os, count)) {
      fail(raw.line_of("oracle_grid"), "oracle_grid must be lo:hi:count");
    }
    try {
      cfg.oracle_lo = std::stod(lo);
      cfg.oracle_hi = std::stod(hi);
      cfg.oracle_count = std::stoi(count);
    } catch (const std::exception&) {
      fail(raw.line_of("oracle_grid"), "oracle_grid must be lo:hi:count");
    }
    if (cfg.oracle_count < 1) {
      fail(raw.line_of("oracle_grid"), "oracle_grid count must be >= 1");
    }
    cfg.has_oracle_grid = true;
  }

  if (const std::string* v = raw.get("output_dir")) {
    cfg.output_dir = *v;
  } else {
    defs->push_back("output_dir = out");
  }
  if (const std::string* v = raw.get("cap_hit_policy")) {
    if (*v == "abort") {
      cfg.abort_on_cap = true;
    } else if (*v == "continue") {
      cfg.abort_on_cap = false;
    } else {
      fail(raw.line_of("cap_hit_policy"), "cap_hit_policy must be abort or continue");
    }
  } else {
    defs->push_back("cap_hit_policy = abort");
  }

  cfg.arp.M = parse_double(raw, "arp.M", cfg.arp.M, nullptr);
  cfg.arp.m = parse_double(raw, "arp.m", cfg.arp.m, nullptr);
  cfg.arp.r = parse_double(raw, "arp.r", cfg.arp.r, nullptr);
  cfg.arp.k1 = parse_double(raw, "arp.k1", cfg.arp.k1, nullptr);
  cfg.arp.b1 = parse_double(raw, "arp.b1", cfg.arp.b1, nullptr);
  cfg.arp.a1 = parse_double(raw, "arp.a1", cfg.arp.a1, nullptr);
  cfg.arp.a2 = parse_double(raw, "arp.a2", cfg.arp.a2, nullptr);
  cfg.arp.a3 = parse_double(raw, "arp.a3", cfg.arp.a3, nullptr);
  cfg.arp.a4 = parse_double(raw, "arp.a4", cfg.arp.a4, nullptr);
  cfg.arp.a5 = parse_double(raw, "arp.a5", cfg.arp.a5, nullptr);
  cfg.arp.a6 = parse_double(raw, "arp.a6", cfg.arp.a6, nullptr);
  cfg.arp.p1 = parse_double(raw, "arp.p1", cfg.arp.p1, nullptr);
  cfg.arp.p2 = parse_double(raw, "arp.p2", cfg.arp.p2, nullptr);
  cfg.arp.J = parse_double(raw, "arp.J", cfg.arp.J, nullptr);
  if (cfg.arp.M <= 0.0) fail(raw.line_of("arp.M"), "arp.M must be positive");
  if (cfg.arp.J <= 0.0) fail(raw.line_of("arp.J"), "arp.J must be positive");
  cfg.arp_rho = parse_double(raw, "arp.rho", 0.0, nullptr);
  if (cfg.arp_rho < 0.0) {
    fail(raw.line_of("arp.rho"), "arp.rho must be nonnegative");
  }
  cfg.arp_smoothing = parse_double(raw, "arp.smoothing", 0.0, nullptr);
  if (cfg.arp_smoothing < 0.0) {
    fail(raw.line_of("arp.smoothing"), "arp.smoothing must be nonnegative");
  }

  cfg.scalar_a = parse_double(raw, "scalar_linear.a", 1.0, nullptr);
  cfg.scalar_b = parse_double(raw, "scalar_linear.b", 1.0, nullptr);
  cfg.scalar_rho = parse_double(raw, "scalar_linear.rho", 0.0, nullptr);

  const int expected_dim = (cfg.model == "arp") ? 8
                           : (cfg.model == "double_integrator") ? 2 : 1;
  if (cfg.x0.size() != expected_dim) {
    fail(raw.line_of("x0"), "x0 must have " + std::to_string(expected_dim) +
                                " components for model " + cfg.model);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SystemBackend make_backend(const ExperimentConfig& cfg) {
  SampledSystem sys;
  StageCost cost;
  if (cfg.model == "scalar_linear") {
    const double lo = cfg.u_min.size() ? cfg.u_min(0) : -1.0;
    const double hi = cfg.u_max.size() ? cfg.u_max(0) : 1.0;
    sys = make_scalar_linear(cfg.scalar_a, cfg.scalar_b, lo, hi);
    sys.sampling_period = cfg.T;
    cost = make_quadratic_cost(cfg.scalar_rho);
  } else if (cfg.model == "double_integrator") {
    const double lo = cfg.u_min.size() ? cfg.u_min(0) : -1.0;
    const double hi = cfg.u_max.size() ? cfg.u_max(0) : 1.0;
    sys = make_double_integrator(cfg.T, cfg.substeps, lo, hi);
    cost = make_quadratic_cost(0.0);
  } else {
    const double lo = cfg.u_min.size() ? cfg.u_min(0) : -20.0;
    const double hi = cfg.u_max.size() ? cfg.u_max(0) : 20.0;
    sys = make_arp(cfg.arp, cfg.T, cfg.substeps, lo, hi);
    ReferenceSignal ref = cfg.reference;
    if (!cfg.reference_file.empty()) {
      ref = ReferenceSignal::from_file(cfg.reference_file);
    } else if (!cfg.reference_set) {
      ref.nodes = {{0.0, 10.0}, {5.0, 0.0}, {9.0, 10.0}, {10.0, 0.0}};
    }
    if (cfg.arp_rho > 0.0) {
      // The penalty vanishes on the equilibrium manifold (u = 0 there), so it
      // regularizes the tail curvature without lifting the resting stage cost.
      cost = [base = make_tracking_cost(std::move(ref), 4, cfg.arp_smoothing),
              rho = cfg.arp_rho](const Segment& seg, const Vector& u) {
        return base(seg, u) + rho * u.squaredNorm();
      };
    } else {
      cost = make_tracking_cost(std::move(ref), 4, cfg.arp_smoothing);
    }
  }
  return SystemBackend(std::move(sys), std::move(cost), cfg.solver);
}

}  // namespace ahmpc
