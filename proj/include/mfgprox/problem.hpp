#pragma once

#include "mfgprox/coupling.hpp"
#include "mfgprox/grid.hpp"

#include <optional>

namespace mfgprox {

/// Discrete stationary MFG: grid, viscosity, Hamiltonian exponent q' = q/(q-1),
/// local coupling and an optional upper bound on the density.
struct ProblemSpec {
  TorusGrid grid;
  double nu = 0.0;
  double q = 2.0;
  CouplingPtr coupling;
  std::optional<ScalarField> density_bound;

  ProblemSpec(TorusGrid g, double nu_, double q_, CouplingPtr c,
              std::optional<ScalarField> d = std::nullopt);

  double q_conj() const { return q / (q - 1.0); }
  bool bounded() const { return density_bound.has_value(); }
  double bound_at(int node) const { return density_bound ? (*density_bound)[node] : kInf; }
};

}  // namespace mfgprox
