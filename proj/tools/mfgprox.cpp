// mfgprox: solve, benchmark and audit stationary MFG discretizations.
//
//   mfgprox solve --config FILE [--out DIR] [--dry-run]
//   mfgprox bench --test N [--algos LIST] [--sizes LIST] [--out DIR]
//   mfgprox check --dir DIR
//   mfgprox norms --nh N --nu V [--q Q] [--seed S]
//
// solve exits 0 on convergence, 2 when max_iter is reached, 1 on
// configuration or I/O errors. check exits 0 when the residuals pass, 2 when
// they do not.

#include "mfgprox/runner.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

using namespace mfgprox;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_solve(const std::string& config, const std::string& out, bool dry_run) {
  RunConfig cfg = load_config(config);
  if (!out.empty()) cfg.output.dir = out;
  const ProblemSpec spec = build_problem(cfg.problem);
  const StepSizes st = resolve_steps(spec, cfg.solver);
  if (dry_run) {
    write_config(std::cout, cfg);
    std::cout << "\n[resolved]\n"
              << std::setprecision(10) << "xi_norm = " << st.xi_norm << '\n'
              << "gamma = " << st.gamma << '\n'
              << "tau = " << st.tau << '\n'
              << "tol = " << (cfg.solver.tol > 0.0 ? cfg.solver.tol : default_tol(spec.grid)) << '\n';
    for (const auto& w : st.warnings) std::cout << "warning = " << w << '\n';
    return kExitConverged;
  }
  const RunResult r = run_case(cfg);
  write_outputs(cfg.output.dir, r);
  for (const auto& w : r.report.warnings) std::cerr << "warning: " << w << '\n';
  write_summary(std::cout, r);
  return r.report.converged ? kExitConverged : kExitNotConverged;
}

int cmd_bench(int test, const std::string& algos, const std::string& sizes, const std::string& out) {
  BenchOptions opt;
  opt.test = test;
  opt.out_dir = out;
  for (const auto& a : split_list(algos)) opt.algorithms.push_back(parse_algorithm(a));
  for (const auto& n : split_list(sizes)) opt.sizes.push_back(std::stoi(n));
  const int failed = run_bench(opt, std::cerr);
  std::cout << "bench test " << test << ": " << failed << " cell(s) not converged; tables in " << out << '\n';
  return kExitConverged;
}

int cmd_check(const std::string& dir) {
  const CheckResult c = check_directory(dir);
  std::cout << std::setprecision(6) << "res_hjb=" << c.kkt.res_hjb << '\n'
            << "res_fp=" << c.kkt.res_fp << '\n'
            << "res_mass=" << c.kkt.res_mass << '\n'
            << "res_compl=" << c.kkt.res_compl << '\n'
            << "gap=" << c.gap << '\n'
            << "threshold=" << c.threshold << '\n'
            << "kkt: " << (c.kkt_pass ? "pass" : "fail") << '\n'
            << "gap: " << (c.gap_pass ? "pass" : "fail") << '\n';
  return c.pass() ? kExitConverged : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal splitting solvers for stationary mean field games on the torus"};
  app.require_subcommand(1);

  std::string config, out, dir, algos, sizes;
  bool dry_run = false;
  int test = 1, nh = 20;
  double nu = 0.0, q = 2.0;
  std::uint64_t seed = 12345;

  auto* solve_cmd = app.add_subcommand("solve", "Run one solve from an INI config");
  solve_cmd->add_option("--config", config, "Config file")->required();
  solve_cmd->add_option("--out", out, "Output directory (overrides output.dir)");
  solve_cmd->add_flag("--dry-run", dry_run, "Print the resolved config and step sizes only");

  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark sweep and write its tables");
  bench_cmd->add_option("--test", test, "Benchmark id")->required()->check(CLI::Range(1, 4));
  bench_cmd->add_option("--algos", algos, "Comma-separated algorithms (default: the table's)");
  bench_cmd->add_option("--sizes", sizes, "Comma-separated grid sizes (default: the table's)");
  std::string bench_out = "bench";
  bench_cmd->add_option("--out", bench_out, "Output directory");

  auto* check_cmd = app.add_subcommand("check", "Re-evaluate residuals of a solve directory");
  check_cmd->add_option("--dir", dir, "Output directory of a solve")->required();

  auto* norms_cmd = app.add_subcommand("norms", "Operator norms and default step sizes");
  norms_cmd->add_option("--nh", nh, "Nodes per direction")->required()->check(CLI::Range(3, 100000));
  norms_cmd->add_option("--nu", nu, "Viscosity")->required()->check(CLI::NonNegativeNumber);
  norms_cmd->add_option("--q", q, "Kinetic exponent");
  norms_cmd->add_option("--seed", seed, "Power iteration seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return cmd_solve(config, out, dry_run);
    if (*bench_cmd) return cmd_bench(test, algos, sizes, bench_out);
    if (*check_cmd) return cmd_check(dir);
    if (*norms_cmd) {
      print_norms(std::cout, nh, nu, q, seed);
      return kExitConverged;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
