#include "mfgprox/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>

namespace mfgprox {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem",
       {"test", "n", "nu", "q", "constrained", "dbar", "radius", "gaussian_width", "coupling",
        "data", "weight", "bound", "bound_value", "bound_inner"}},
      {"solver",
       {"algorithm", "gamma", "tau", "theta", "tol", "max_iter", "seed", "diagnostics",
        "enforce_step_bounds", "linear_solver", "cg_tol", "cg_maxit"}},
      {"output", {"dir", "dump_fields", "history_every"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  std::string required(const std::string& section, const std::string& key) const {
    auto v = raw(section, key);
    if (!v || v->empty()) throw ConfigKeyError("missing required key '" + section + "." + key + "'");
    return *v;
  }

  void get(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }

  void get(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) out = to_double(section, key, *v);
  }

  template <class Int>
    requires std::is_integral_v<Int>
  void get(const std::string& section, const std::string& key, Int& out) const {
    if (auto v = raw(section, key)) out = to_int<Int>(section, key, *v);
  }

  void get_bool(const std::string& section, const std::string& key, bool& out) const {
    auto v = raw(section, key);
    if (!v) return;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
      out = true;
    } else if (s == "false" || s == "0" || s == "no" || s == "off") {
      out = false;
    } else {
      throw ConfigKeyError(section + "." + key + ": expected a boolean, got '" + *v + "'");
    }
  }

  static double to_double(const std::string& section, const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigKeyError(section + "." + key + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  template <class Int>
  static Int to_int(const std::string& section, const std::string& key, const std::string& s) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigKeyError(section + "." + key + ": expected an integer, got '" + s + "'");
    }
    return v;
  }

 private:
  const pt::ptree& tree_;
};

void reject_unknown(const pt::ptree& tree) {
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigKeyError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigKeyError("unknown key '" + section + "." + key + "'");
    }
  }
}

Eigen::VectorXd node_data(const TorusGrid& g, const ProblemConfig& pc) {
  Eigen::VectorXd v(g.size());
  if (pc.data == "zero") {
    v.setZero();
  } else if (pc.data == "one") {
    v.setOnes();
  } else if (pc.data == "sines") {
    for (int j = 0; j < g.n(); ++j) {
      for (int i = 0; i < g.n(); ++i) {
        v[g.index(i, j)] = std::sin(2 * M_PI * g.coordinate(i)) + std::sin(2 * M_PI * g.coordinate(j));
      }
    }
  } else if (pc.data == "gaussian") {
    v = test2_reference(g, pc.gaussian_width).values;
  } else if (pc.data == "potential") {
    v = test3_potential(g);
  } else {
    throw ConfigKeyError("problem.data: unknown value '" + pc.data +
                         "' (zero, one, sines, gaussian, potential)");
  }
  return v;
}

// Shortest text that reads back to the same double.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

int ProblemConfig::test_id() const {
  if (test == "1" || test == "2" || test == "3" || test == "4") return test[0] - '0';
  throw ConfigKeyError("problem.test: expected 1, 2, 3, 4 or custom, got '" + test + "'");
}

RunConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  reject_unknown(tree);
  const Reader r(tree);
  RunConfig cfg;

  ProblemConfig& p = cfg.problem;
  p.test = r.required("problem", "test");
  p.n = Reader::to_int<int>("problem", "n", r.required("problem", "n"));
  if (p.n < 3) throw ConfigKeyError("problem.n must be >= 3");
  if (p.is_benchmark()) p.nu = p.test_id() >= 3 ? 1.0 : 0.0;
  r.get("problem", "nu", p.nu);
  r.get("problem", "q", p.q);
  r.get_bool("problem", "constrained", p.constrained);
  r.get("problem", "dbar", p.dbar);
  r.get("problem", "radius", p.radius);
  r.get("problem", "gaussian_width", p.gaussian_width);
  r.get("problem", "coupling", p.coupling);
  r.get("problem", "data", p.data);
  r.get("problem", "weight", p.weight);
  r.get("problem", "bound", p.bound);
  r.get("problem", "bound_value", p.bound_value);
  r.get("problem", "bound_inner", p.bound_inner);
  if (p.nu < 0.0) throw ConfigKeyError("problem.nu must be >= 0");
  if (!(p.q > 1.0)) throw ConfigKeyError("problem.q must be > 1");

  SolverConfig& s = cfg.solver;
  const std::string algo = r.required("solver", "algorithm");
  try {
    s.algorithm = parse_algorithm(algo);
  } catch (const std::invalid_argument& e) {
    throw ConfigKeyError(std::string("solver.algorithm: ") + e.what());
  }
  r.get("solver", "gamma", s.gamma);
  r.get("solver", "tau", s.tau);
  r.get("solver", "theta", s.theta);
  r.get("solver", "tol", s.tol);
  r.get("solver", "max_iter", s.max_iter);
  r.get("solver", "seed", cfg.seed);
  r.get_bool("solver", "diagnostics", s.diagnostics);
  r.get_bool("solver", "enforce_step_bounds", s.enforce_step_bounds);
  if (auto ls = r.raw("solver", "linear_solver")) {
    try {
      s.linear.method = parse_saddle_method(*ls);
    } catch (const std::invalid_argument& e) {
      throw ConfigKeyError(std::string("solver.linear_solver: ") + e.what());
    }
  }
  r.get("solver", "cg_tol", s.linear.cg_tol);
  r.get("solver", "cg_maxit", s.linear.cg_maxit);
  if (s.max_iter < 1) throw ConfigKeyError("solver.max_iter must be >= 1");
  if (!(s.theta >= 0.0 && s.theta <= 1.0)) throw ConfigKeyError("solver.theta must lie in [0, 1]");

  OutputConfig& o = cfg.output;
  r.get("output", "dir", o.dir);
  r.get_bool("output", "dump_fields", o.dump_fields);
  r.get("output", "history_every", o.history_every);
  if (o.history_every < 1) throw ConfigKeyError("output.history_every must be >= 1");
  s.record_every = o.history_every;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return parse_config(is);
}

void write_config(std::ostream& os, const RunConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  const SolverConfig& s = cfg.solver;
  os << std::boolalpha;
  os << "[problem]\n"
     << "test = " << p.test << '\n'
     << "n = " << p.n << '\n'
     << "nu = " << shortest(p.nu) << '\n'
     << "q = " << shortest(p.q) << '\n'
     << "constrained = " << p.constrained << '\n'
     << "dbar = " << shortest(p.dbar) << '\n'
     << "radius = " << shortest(p.radius) << '\n'
     << "gaussian_width = " << shortest(p.gaussian_width) << '\n';
  if (!p.is_benchmark()) {
    os << "coupling = " << p.coupling << '\n'
       << "data = " << p.data << '\n'
       << "weight = " << shortest(p.weight) << '\n'
       << "bound = " << p.bound << '\n'
       << "bound_value = " << shortest(p.bound_value) << '\n'
       << "bound_inner = " << shortest(p.bound_inner) << '\n';
  }
  os << "\n[solver]\n"
     << "algorithm = " << to_string(s.algorithm) << '\n'
     << "gamma = " << shortest(s.gamma) << '\n'
     << "tau = " << shortest(s.tau) << '\n'
     << "theta = " << shortest(s.theta) << '\n'
     << "tol = " << shortest(s.tol) << '\n'
     << "max_iter = " << s.max_iter << '\n'
     << "seed = " << cfg.seed << '\n'
     << "diagnostics = " << s.diagnostics << '\n'
     << "enforce_step_bounds = " << s.enforce_step_bounds << '\n'
     << "linear_solver = " << to_string(s.linear.method) << '\n'
     << "cg_tol = " << shortest(s.linear.cg_tol) << '\n'
     << "cg_maxit = " << s.linear.cg_maxit << '\n'
     << "\n[output]\n"
     << "dir = " << cfg.output.dir << '\n'
     << "dump_fields = " << cfg.output.dump_fields << '\n'
     << "history_every = " << cfg.output.history_every << '\n';
}

ExperimentSpec to_experiment(const ProblemConfig& pc) {
  ExperimentSpec e;
  e.test = pc.test_id();
  e.n = pc.n;
  e.nu = pc.nu;
  e.q = pc.q;
  e.constrained = pc.constrained;
  e.dbar = pc.dbar;
  e.radius = pc.radius;
  e.gaussian_width = pc.gaussian_width;
  return e;
}

ProblemSpec build_problem(const ProblemConfig& pc) {
  if (pc.is_benchmark()) return make_test_problem(to_experiment(pc));

  const TorusGrid g(pc.n);
  const Eigen::VectorXd data = node_data(g, pc);
  CouplingPtr c;
  if (pc.coupling == "log") {
    c = std::make_shared<LogCoupling>(data);
  } else if (pc.coupling == "quadratic") {
    if (!(pc.weight > 0.0)) throw ConfigKeyError("problem.weight must be > 0");
    c = std::make_shared<QuadraticCoupling>(data, pc.weight);
  } else if (pc.coupling == "cubic") {
    c = std::make_shared<CubicCoupling>(data);
  } else {
    throw ConfigKeyError("problem.coupling: unknown value '" + pc.coupling +
                         "' (log, quadratic, cubic)");
  }

  if (pc.bound == "none") return ProblemSpec(g, pc.nu, pc.q, c);
  ScalarField d(g);
  if (pc.bound == "constant") {
    d.values.setConstant(pc.bound_value);
  } else if (pc.bound == "disc") {
    const ScalarField inside = test3_bound(g, 0.0, pc.radius);
    for (int k = 0; k < g.size(); ++k) d[k] = inside[k] > 0.0 ? pc.bound_inner : pc.bound_value;
  } else {
    throw ConfigKeyError("problem.bound: unknown value '" + pc.bound + "' (none, constant, disc)");
  }
  if (d.values.minCoeff() <= 0.0) throw ConfigKeyError("problem.bound_*: bound must be positive");
  return ProblemSpec(g, pc.nu, pc.q, c, std::move(d));
}

}  // namespace mfgprox
