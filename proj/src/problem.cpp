#include "mfgprox/problem.hpp"

#include <stdexcept>

namespace mfgprox {

ProblemSpec::ProblemSpec(TorusGrid g, double nu_, double q_, CouplingPtr c,
                         std::optional<ScalarField> d)
    : grid(g), nu(nu_), q(q_), coupling(std::move(c)), density_bound(std::move(d)) {
  if (!(nu >= 0.0)) throw std::invalid_argument("ProblemSpec: nu must be >= 0");
  if (!(q > 1.0)) throw std::invalid_argument("ProblemSpec: q must exceed 1");
  if (!coupling) throw std::invalid_argument("ProblemSpec: coupling is required");
  if (density_bound) {
    require_same_grid(grid, density_bound->grid, "ProblemSpec density bound");
    if ((density_bound->values.array() <= 0.0).any()) {
      throw std::invalid_argument("ProblemSpec: density bound must be positive");
    }
  }
}

}  // namespace mfgprox
