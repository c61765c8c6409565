#include "mfgprox/runner.hpp"

#include "mfgprox/field_io.hpp"
#include "mfgprox/parallel.hpp"
#include "mfgprox/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mfgprox {

namespace fs = std::filesystem;

namespace {

std::string num(double x, int digits = 10) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return os;
}

std::string status_of(const SolveReport& rep) { return rep.converged ? "converged" : "max_iter"; }

}  // namespace

RunResult run_case(const RunConfig& cfg) {
  ProblemSpec spec = build_problem(cfg.problem);
  SolveReport rep = solve(spec, cfg.solver);
  RunResult r{cfg, std::move(spec), std::move(rep), std::nullopt, std::nullopt};
  if (cfg.problem.is_benchmark()) {
    const int t = cfg.problem.test_id();
    if (t == 1 && cfg.problem.nu == 0.0) {
      const ExactSolution ex = exact_test1(r.spec.grid);
      r.error_l2 = l2_error_continuous(r.report.state.m, ex.density);
      r.lambda_error = std::abs(r.report.state.lambda - ex.lambda);
    } else if (t == 2 && cfg.problem.nu == 0.0) {
      r.error_l2 = l2_error(r.report.state.m, test2_reference(r.spec.grid, cfg.problem.gaussian_width));
    }
  }
  return r;
}

std::vector<std::pair<std::string, std::string>> summary_fields(const RunResult& r) {
  const ProblemConfig& p = r.config.problem;
  const SolveReport& rep = r.report;
  const ScalarField& m = rep.state.m;
  std::vector<std::pair<std::string, std::string>> f = {
      {"test", p.test},
      {"n", std::to_string(p.n)},
      {"nu", num(p.nu)},
      {"q", num(p.q)},
      {"constrained", r.spec.bounded() ? "true" : "false"},
      {"algorithm", to_string(rep.algorithm)},
      {"status", status_of(rep)},
      {"iterations", std::to_string(rep.iterations)},
      {"max_iter", std::to_string(r.config.solver.max_iter)},
      {"final_change", num(rep.final_change)},
      {"tol", num(rep.tol, 17)},
      {"gamma", num(rep.gamma)},
      {"tau", num(rep.tau)},
      {"theta", num(rep.theta)},
      {"xi_norm", num(rep.xi_norm)},
      {"empirical", rep.empirical ? "true" : "false"},
      {"lambda", num(rep.state.lambda, 17)},
  };
  if (p.is_benchmark() && p.test_id() == 1 && p.nu == 0.0) f.emplace_back("lambda_exact", num(test1_lambda(), 17));
  if (r.lambda_error) f.emplace_back("lambda_error", num(*r.lambda_error));
  if (r.error_l2) f.emplace_back("error_l2", num(*r.error_l2));
  f.emplace_back("min_m", num(m.values.minCoeff()));
  f.emplace_back("max_m", num(m.values.maxCoeff()));
  f.emplace_back("mass", num(mass(m), 17));
  f.emplace_back("res_hjb", num(rep.kkt.res_hjb));
  f.emplace_back("res_fp", num(rep.kkt.res_fp));
  f.emplace_back("res_mass", num(rep.kkt.res_mass));
  f.emplace_back("res_compl", num(rep.kkt.res_compl));
  f.emplace_back("kkt_scale", num(rep.kkt.scale));
  f.emplace_back("gap", num(rep.gap));
  f.emplace_back("saddle_solves", std::to_string(rep.saddle_solves));
  f.emplace_back("seed", std::to_string(r.config.seed));
  f.emplace_back("warnings", std::to_string(rep.warnings.size()));
  for (std::size_t i = 0; i < rep.warnings.size(); ++i) {
    f.emplace_back("warning_" + std::to_string(i + 1), rep.warnings[i]);
  }
  return f;
}

void write_history(std::ostream& os, const SolveReport& rep) {
  os << kHistoryHeader << '\n' << std::setprecision(10);
  for (const HistoryRow& h : rep.history) {
    os << h.iter << ',' << num(h.primal_change) << ',' << num(h.kkt.res_hjb) << ','
       << num(h.kkt.res_fp) << ',' << num(h.kkt.res_mass) << ',' << num(h.kkt.res_compl) << ','
       << num(h.gap) << ',' << num(h.lambda, 17) << '\n';
  }
}

void write_summary(std::ostream& os, const RunResult& r) {
  for (const auto& [k, v] : summary_fields(r)) os << k << '=' << v << '\n';
}

void write_outputs(const std::string& dir, const RunResult& r) {
  const fs::path d(dir);
  fs::create_directories(d);
  {
    auto os = open_out(d / "history.csv");
    write_history(os, r.report);
  }
  {
    auto os = open_out(d / "summary.txt");
    write_summary(os, r);
  }
  {
    auto os = open_out(d / "timing.txt");
    os << "wall_seconds=" << num(r.report.wall_seconds, 6) << '\n'
       << "threads=" << thread_count() << '\n';
  }
  {
    auto os = open_out(d / "config.ini");
    write_config(os, r.config);
  }
  if (r.config.output.dump_fields) {
    write_gf1((d / "m.gf1").string(), r.report.state.m);
    write_gf1((d / "w.gf1").string(), r.report.state.w);
    write_gf1((d / "u.gf1").string(), r.report.state.u);
  }
}

std::map<std::string, std::string> read_summary(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

bool kkt_within(const KktResiduals& k, double tol) { return k.max() <= 100.0 * tol; }

bool gap_within(double gap, const KktResiduals& k, double tol) {
  if (std::isnan(gap)) return true;
  return std::abs(gap) <= 100.0 * tol * k.scale;
}

CheckResult check_directory(const std::string& dir) {
  const fs::path d(dir);
  std::vector<std::string> missing;
  for (const char* name : {"config.ini", "summary.txt", "m.gf1", "w.gf1", "u.gf1"}) {
    if (!fs::is_regular_file(d / name)) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "check: missing artifacts in " + dir + ":";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }
  const RunConfig cfg = load_config((d / "config.ini").string());
  const ProblemSpec spec = build_problem(cfg.problem);
  const auto summary = read_summary((d / "summary.txt").string());
  auto field = [&](const std::string& key) {
    const auto it = summary.find(key);
    if (it == summary.end()) throw std::runtime_error("check: summary.txt lacks '" + key + "'");
    return std::stod(it->second);
  };
  const ScalarField m = read_gf1_scalar((d / "m.gf1").string());
  const FluxField w = read_gf1_flux((d / "w.gf1").string());
  const ScalarField u = read_gf1_scalar((d / "u.gf1").string());
  if (m.grid.n() != spec.grid.n()) throw std::runtime_error("check: m.gf1 grid does not match config");

  CheckResult c;
  const double lambda = field("lambda");
  c.tol = field("tol");
  c.threshold = 100.0 * c.tol;
  c.kkt = kkt_residuals(m, w, u, lambda, spec);
  c.gap = spec.coupling->has_conjugate() ? duality_gap(m, w, u, lambda, spec) : std::nan("");
  c.kkt_pass = kkt_within(c.kkt, c.tol);
  c.gap_pass = gap_within(c.gap, c.kkt, c.tol);
  return c;
}

RunConfig bench_config(int test, int n, double nu, double q, Algorithm a, bool constrained) {
  RunConfig cfg;
  cfg.problem.test = std::to_string(test);
  cfg.problem.n = n;
  cfg.problem.nu = nu;
  cfg.problem.q = q;
  cfg.problem.constrained = constrained;
  cfg.solver.algorithm = a;
  cfg.solver.record_every = 1000000;
  cfg.output.history_every = 1000000;
  cfg.output.dump_fields = false;
  if (a == Algorithm::CP_U) {
    // Measured on the benchmark grids: a small dual step against a large
    // primal one for the quadratic-coupling test, the reverse for the cubic one.
    if (test == 2) {
      cfg.solver.gamma = 0.1;
      cfg.solver.tau = 9.5;
    } else if (test == 3) {
      cfg.solver.gamma = 95.0;
      cfg.solver.tau = 0.01;
    }
  }
  return cfg;
}

namespace {

struct Cell {
  std::string status;
  std::optional<RunResult> result;
  double seconds = 0.0;
};

Cell run_cell(const RunConfig& cfg, const fs::path& cell_dir, std::ostream& log) {
  Cell c;
  try {
    RunResult r = run_case(cfg);
    c.status = status_of(r.report);
    c.seconds = r.report.wall_seconds;
    fs::create_directories(cell_dir);
    {
      auto os = open_out(cell_dir / "summary.txt");
      write_summary(os, r);
    }
    {
      auto os = open_out(cell_dir / "history.csv");
      write_history(os, r.report);
    }
    log << cell_dir.filename().string() << ": " << c.status << " after " << r.report.iterations
        << " iterations (" << num(c.seconds, 3) << " s)\n";
    c.result = std::move(r);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    c.status = "error: " + msg;
    log << cell_dir.filename().string() << ": " << c.status << '\n';
  }
  log.flush();
  return c;
}

std::string tag(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) {
    return std::isalnum(ch) ? static_cast<char>(std::tolower(ch)) : '_';
  });
  return t;
}

int bench_test1(const BenchOptions& opt, const fs::path& out, std::ostream& log) {
  const std::vector<Algorithm> algos = opt.algorithms.empty() ? all_algorithms() : opt.algorithms;
  const std::vector<int> sizes = opt.sizes.empty() ? std::vector<int>{20, 40, 60} : opt.sizes;
  auto errs = open_out(out / "test1_errors.csv");
  auto rates = open_out(out / "test1_rates.csv");
  errs << "algorithm,n,status,iterations,error_l2,lambda,lambda_error,kkt_max,gap,saddle_solves,time_s\n";
  rates << "algorithm,rate,points\n";
  int failed = 0;
  for (Algorithm a : algos) {
    std::vector<std::pair<double, double>> pts;
    for (int n : sizes) {
      const RunConfig cfg = bench_config(1, n, 0.0, 2.0, a);
      const Cell c = run_cell(cfg, out / "cells" / ("test1_" + tag(to_string(a)) + "_n" + std::to_string(n)), log);
      if (c.status != "converged") ++failed;
      errs << to_string(a) << ',' << n << ',' << c.status << ',';
      if (c.result) {
        const RunResult& r = *c.result;
        errs << r.report.iterations << ',' << num(*r.error_l2) << ',' << num(r.report.state.lambda) << ','
             << num(*r.lambda_error) << ',' << num(r.report.kkt.max()) << ',' << num(r.report.gap) << ','
             << r.report.saddle_solves << ',' << num(c.seconds, 4);
        if (c.status == "converged") pts.emplace_back(r.spec.grid.h(), *r.error_l2);
      } else {
        errs << ",,,,,,,";
      }
      errs << '\n';
    }
    rates << to_string(a) << ',' << (pts.size() >= 2 ? num(fit_rate(pts)) : "") << ',' << pts.size() << '\n';
  }
  return failed;
}

// Wide table: one row per sweep value, a column group per algorithm.
template <class Value, class MakeCfg>
int bench_wide(const std::string& file, const std::string& key, const std::vector<Value>& values,
               const std::vector<Algorithm>& algos, MakeCfg make_cfg, bool with_error,
               const fs::path& out, std::ostream& log) {
  auto os = open_out(out / file);
  os << key;
  for (Algorithm a : algos) {
    const std::string p = tag(to_string(a));
    os << ',' << p << "_status," << p << "_iterations," << p << "_time_s";
    if (with_error) os << ',' << p << "_error_l2";
  }
  os << '\n';
  int failed = 0;
  for (const Value& v : values) {
    os << num(v);
    for (Algorithm a : algos) {
      const RunConfig cfg = make_cfg(v, a);
      const std::string name = file.substr(0, file.find('.')) + "_" + tag(to_string(a)) + "_" + tag(num(v));
      const Cell c = run_cell(cfg, out / "cells" / name, log);
      if (c.status != "converged") ++failed;
      os << ',' << c.status << ',';
      if (c.result) {
        os << c.result->report.iterations << ',' << num(c.seconds, 4);
        if (with_error) os << ',' << (c.result->error_l2 ? num(*c.result->error_l2) : "");
      } else {
        os << ',' << (with_error ? "," : "");
      }
    }
    os << '\n';
  }
  return failed;
}

int active_nodes(const RunResult& r) {
  if (!r.spec.bounded()) return 0;
  int count = 0;
  const ScalarField& m = r.report.state.m;
  for (int k = 0; k < m.grid.size(); ++k) {
    if (m[k] >= r.spec.bound_at(k) - 1e-6) ++count;
  }
  return count;
}

int bench_test3(const BenchOptions& opt, const fs::path& out, std::ostream& log) {
  const std::vector<Algorithm> algos = opt.algorithms.empty() ? std::vector<Algorithm>{Algorithm::CP_U} : opt.algorithms;
  const int n = opt.sizes.empty() ? 50 : opt.sizes.front();
  auto os = open_out(out / "test3_lambda.csv");
  os << "nu,algorithm,status,iterations,lambda,constrained_status,constrained_iterations,"
        "constrained_lambda,active_nodes,max_violation\n";
  int failed = 0;
  for (double nu : {1.0, 0.1, 1e-2, 1e-3}) {
    for (Algorithm a : algos) {
      const std::string base = "test3_" + tag(to_string(a)) + "_nu" + tag(num(nu));
      const Cell u = run_cell(bench_config(3, n, nu, 2.0, a, false), out / "cells" / base, log);
      const Cell c = run_cell(bench_config(3, n, nu, 2.0, a, true), out / "cells" / (base + "_bounded"), log);
      failed += (u.status != "converged") + (c.status != "converged");
      os << num(nu) << ',' << to_string(a) << ',' << u.status << ',';
      if (u.result) os << u.result->report.iterations << ',' << num(u.result->report.state.lambda);
      else os << ',';
      os << ',' << c.status << ',';
      if (c.result) {
        const RunResult& r = *c.result;
        double viol = -kInf;
        for (int k = 0; k < r.spec.grid.size(); ++k) {
          viol = std::max(viol, r.report.state.m[k] - r.spec.bound_at(k));
        }
        os << r.report.iterations << ',' << num(r.report.state.lambda) << ',' << active_nodes(r) << ','
           << num(viol);
      } else {
        os << ",,,";
      }
      os << '\n';
    }
  }
  return failed;
}

int bench_test4(const BenchOptions& opt, const fs::path& out, std::ostream& log) {
  const std::vector<Algorithm> algos = opt.algorithms.empty() ? std::vector<Algorithm>{Algorithm::CP_U} : opt.algorithms;
  const int n = opt.sizes.empty() ? 50 : opt.sizes.front();
  auto os = open_out(out / "test4_extrema.csv");
  os << "q,algorithm,status,iterations,min_m,max_m,lambda\n";
  int failed = 0;
  for (double q : {1.2, 2.0, 3.0, 10.0}) {
    for (Algorithm a : algos) {
      const Cell c = run_cell(bench_config(4, n, 1.0, q, a),
                              out / "cells" / ("test4_" + tag(to_string(a)) + "_q" + tag(num(q))), log);
      if (c.status != "converged") ++failed;
      os << num(q) << ',' << to_string(a) << ',' << c.status << ',';
      if (c.result) {
        const ScalarField& m = c.result->report.state.m;
        os << c.result->report.iterations << ',' << num(m.values.minCoeff()) << ','
           << num(m.values.maxCoeff()) << ',' << num(c.result->report.state.lambda);
      } else {
        os << ",,,";
      }
      os << '\n';
    }
  }
  return failed;
}

}  // namespace

int run_bench(const BenchOptions& opt, std::ostream& log) {
  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  switch (opt.test) {
    case 1:
      return bench_test1(opt, out, log);
    case 2: {
      const std::vector<Algorithm> algos =
          opt.algorithms.empty() ? std::vector<Algorithm>{Algorithm::ADMM, Algorithm::CP_U} : opt.algorithms;
      const std::vector<int> sizes = opt.sizes.empty() ? std::vector<int>{20, 40, 60, 80, 100} : opt.sizes;
      const std::vector<double> dofs(sizes.begin(), sizes.end());
      int failed = bench_wide("test2_dof.csv", "n", dofs, algos,
                              [](double n, Algorithm a) { return bench_config(2, static_cast<int>(n), 0.0, 2.0, a); },
                              true, out, log);
      const int nv = opt.sizes.empty() ? 60 : opt.sizes.back();
      failed += bench_wide("test2_viscosity.csv", "nu", std::vector<double>{1.0, 0.1, 1e-2, 1e-3, 0.0}, algos,
                           [nv](double nu, Algorithm a) { return bench_config(2, nv, nu, 2.0, a); }, false, out, log);
      return failed;
    }
    case 3:
      return bench_test3(opt, out, log);
    case 4:
      return bench_test4(opt, out, log);
    default:
      throw ConfigError("bench: unknown test " + std::to_string(opt.test) + " (1-4)");
  }
}

void print_norms(std::ostream& os, int n, double nu, double q, std::uint64_t seed) {
  const TorusGrid g(n);
  const ProblemSpec spec(g, nu, q, std::make_shared<LogCoupling>(Eigen::VectorXd::Zero(g.size())));
  const NormEstimate est = estimate_norm(constraint_map(g, nu), seed);
  os << "n=" << n << '\n'
     << "h=" << num(g.h()) << '\n'
     << "nu=" << num(nu) << '\n'
     << "q=" << num(q) << '\n'
     << "norm_G=" << num(xi_norm(spec, Algorithm::CP_SP)) << '\n'
     << "norm_G_power=" << num(est.norm) << '\n'
     << "power_iterations=" << est.iterations << '\n'
     << "default_tol=" << num(default_tol(g)) << '\n';
  for (Algorithm a : all_algorithms()) {
    SolverConfig cfg;
    cfg.algorithm = a;
    const StepSizes st = resolve_steps(spec, cfg);
    os << tag(to_string(a)) << ": xi_norm=" << num(st.xi_norm) << " gamma=" << num(st.gamma);
    if (a == Algorithm::CP_U || a == Algorithm::CP_SP) os << " tau=" << num(st.tau);
    os << '\n';
  }
}

}  // namespace mfgprox
