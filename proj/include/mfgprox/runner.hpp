#pragma once

#include "mfgprox/config.hpp"
#include "mfgprox/solvers.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mfgprox {

/// One solve plus the benchmark-specific error measures.
struct RunResult {
  RunConfig config;
  ProblemSpec spec;
  SolveReport report;
  /// Test 1: continuous L2 error against the closed form; Test 2 (nu = 0):
  /// h-weighted L2 error against the reference density.
  std::optional<double> error_l2;
  /// Test 1: |lambda - exact lambda|.
  std::optional<double> lambda_error;
};

RunResult run_case(const RunConfig& cfg);

/// Ordered key=value pairs of the summary record (no wall time, so equal
/// configurations give identical files in serial mode).
std::vector<std::pair<std::string, std::string>> summary_fields(const RunResult& r);

inline constexpr const char* kHistoryHeader =
    "iter,primal_change,res_hjb,res_fp,res_mass,res_compl,gap,lambda";

void write_history(std::ostream& os, const SolveReport& rep);
void write_summary(std::ostream& os, const RunResult& r);

/// history.csv, summary.txt, timing.txt, config.ini and, when enabled,
/// m.gf1, w.gf1, u.gf1 in dir (created if needed).
void write_outputs(const std::string& dir, const RunResult& r);

std::map<std::string, std::string> read_summary(const std::string& path);

struct CheckResult {
  KktResiduals kkt;
  double gap = 0.0;  // NaN without a conjugate
  double tol = 0.0;
  double threshold = 0.0;  // 100 tol, compared with the scaled residuals
  bool kkt_pass = false;
  bool gap_pass = false;
  bool pass() const { return kkt_pass && gap_pass; }
};

/// Re-evaluates residuals and gap from the artifacts of a solve directory.
/// Throws std::runtime_error listing missing files.
CheckResult check_directory(const std::string& dir);

/// Acceptance threshold shared by check and the benchmarks: scaled KKT
/// residuals and gap / scale at most 100 tol.
bool kkt_within(const KktResiduals& k, double tol);
bool gap_within(double gap, const KktResiduals& k, double tol);

/// Step sizes used by the benchmark tables (the defaults unless noted in
/// bench_config).
RunConfig bench_config(int test, int n, double nu, double q, Algorithm a, bool constrained = false);

struct BenchOptions {
  int test = 1;
  std::vector<Algorithm> algorithms;  // empty: the table's own set
  std::string out_dir = "bench";
  std::vector<int> sizes;  // empty: the table's own set
};

/// Runs the sweep for one benchmark and writes its CSV tables to out_dir.
/// Failed cells are marked in the status column. Returns the number of failed cells.
int run_bench(const BenchOptions& opt, std::ostream& log);

/// Operator norms and default step sizes for an N x N grid.
void print_norms(std::ostream& os, int n, double nu, double q, std::uint64_t seed);

}  // namespace mfgprox
