#pragma once

#include "mfgprox/diagnostics.hpp"
#include "mfgprox/problem.hpp"
#include "mfgprox/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace mfgprox {

/// A missing, unknown or malformed configuration key. The message names the key.
class ConfigKeyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// [problem] section. test = 1..4 selects a benchmark; test = custom builds
/// the problem from the coupling and bound keys.
struct ProblemConfig {
  std::string test = "1";
  int n = 20;
  double nu = 0.0;
  double q = 2.0;
  bool constrained = false;
  double dbar = 1.3;
  double radius = 0.25;
  double gaussian_width = 0.1;

  // custom problems
  std::string coupling = "log";  // log | quadratic | cubic
  std::string data = "zero";     // zero | sines | gaussian | potential
  double weight = 1.0;           // r of the quadratic coupling
  std::string bound = "none";    // none | constant | disc
  double bound_value = 1.3;
  double bound_inner = 1.0;

  bool is_benchmark() const { return test != "custom"; }
  int test_id() const;
};

struct OutputConfig {
  std::string dir = "out";
  bool dump_fields = true;
  int history_every = 1;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  std::uint64_t seed = 12345;
  OutputConfig output;
};

/// INI text with [problem], [solver] and [output] sections. Required keys:
/// problem.test, problem.n, solver.algorithm. Unknown sections and keys are
/// rejected. problem.nu defaults to 0 for tests 1-2 and 1 for tests 3-4.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Resolved configuration in the same format; parse_config reads it back.
void write_config(std::ostream& os, const RunConfig& cfg);

ProblemSpec build_problem(const ProblemConfig& pc);
/// Same test fields as an ExperimentSpec (benchmarks only).
ExperimentSpec to_experiment(const ProblemConfig& pc);

}  // namespace mfgprox
