#pragma once

#include "mfgprox/diagnostics.hpp"
#include "mfgprox/grid.hpp"
#include "mfgprox/problem.hpp"
#include "mfgprox/saddle.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfgprox {

/// -U: the linear constraint sits inside the indicator of V (saddle solves).
/// -SP: the constraint operator is split out and iterates are projected on the
/// mass constraint (no linear solves).
enum class Algorithm { ADMM, PCPM_U, CP_U, MS_U, CP_SP, MS_SP, PCPM_SP };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);
const std::vector<Algorithm>& all_algorithms();
bool is_split(Algorithm a);
/// MS-SP and PCPM-SP: the projection is added without a convergence theorem.
bool is_empirical(Algorithm a);

/// Rejected solver settings (bad step sizes, unsupported problem).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::CP_U;
  double gamma = 0.0;  // <= 0 selects the default for the algorithm
  double tau = 0.0;    // CP family; <= 0 selects the default
  double theta = 1.0;
  double tol = 0.0;  // <= 0 selects h^3 / 5
  long max_iter = 200000;
  int record_every = 1;
  /// Evaluate KKT residuals and duality gap on recorded rows.
  bool diagnostics = true;
  /// When false, step sizes outside the convergence bounds only warn.
  bool enforce_step_bounds = true;
  SaddleOptions linear;
};

/// Step sizes after defaults, with the operator norm they were checked against.
struct StepSizes {
  double gamma = 0.0;
  double tau = 0.0;
  double xi_norm = 1.0;
  std::vector<std::string> warnings;
};

/// ||Xi||: 1 for the unsplit formulation, ||G|| (exact, from the spectrum of
/// G G*) for the split one, ||(u, lambda) -> (-h^2 lambda, B* u, nu A u)|| for ADMM.
double xi_norm(const ProblemSpec& spec, Algorithm a);
StepSizes resolve_steps(const ProblemSpec& spec, const SolverConfig& cfg);
double default_tol(const TorusGrid& g);

struct HistoryRow {
  long iter = 0;
  double primal_change = 0.0;
  KktResiduals kkt;
  double gap = 0.0;
  double lambda = 0.0;
};

struct PrimalDualState {
  ScalarField m;
  FluxField w;
  /// Value function and mass multiplier in the sign convention of
  /// -nu Lap u + H(D u) - lambda = f(m); u has zero sum.
  ScalarField u;
  double lambda = 0.0;
  /// Dual iterate (n, v) of the unsplit methods, from which (u, lambda) is pulled back.
  std::optional<PrimalPair> sigma;

  explicit PrimalDualState(const TorusGrid& g) : m(g, 1.0), w(g), u(g) {}
};

struct SolveReport {
  Algorithm algorithm = Algorithm::CP_U;
  PrimalDualState state;
  long iterations = 0;
  bool converged = false;
  double final_change = 0.0;
  double gamma = 0.0;
  double tau = 0.0;
  double theta = 1.0;
  double tol = 0.0;
  double xi_norm = 1.0;
  bool empirical = false;
  std::vector<std::string> warnings;
  std::vector<HistoryRow> history;
  KktResiduals kkt;
  double gap = 0.0;
  double wall_seconds = 0.0;
  std::int64_t saddle_solves = 0;

  explicit SolveReport(const TorusGrid& g) : state(g) {}
};

/// Euclidean norm of the stacked difference (m, w) - (m', w').
double primal_change(const ScalarField& m0, const FluxField& w0, const ScalarField& m1,
                     const FluxField& w1);
bool stopping_check(const ScalarField& m0, const FluxField& w0, const ScalarField& m1,
                    const FluxField& w1, double tol);

/// (u, lambda) in the convention of PrimalDualState. For unsplit states the
/// dual pair is mapped through (G G*)^{-1} G; otherwise the stored values are
/// returned with u shifted to zero sum. solver may be null.
std::pair<ScalarField, double> recover_multipliers(const PrimalDualState& state,
                                                   const ProblemSpec& spec,
                                                   const SaddleSolver* solver = nullptr);

SolveReport run_admm(const ProblemSpec& spec, const SolverConfig& cfg);
SolveReport run_pcpm_u(const ProblemSpec& spec, const SolverConfig& cfg);
SolveReport run_cp_u(const ProblemSpec& spec, const SolverConfig& cfg);
SolveReport run_ms_u(const ProblemSpec& spec, const SolverConfig& cfg);
SolveReport run_cp_sp(const ProblemSpec& spec, const SolverConfig& cfg);
SolveReport run_ms_sp(const ProblemSpec& spec, const SolverConfig& cfg);
SolveReport run_pcpm_sp(const ProblemSpec& spec, const SolverConfig& cfg);

/// Dispatches on cfg.algorithm.
SolveReport solve(const ProblemSpec& spec, const SolverConfig& cfg);

}  // namespace mfgprox
