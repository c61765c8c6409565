#pragma once

#include "mfgprox/grid.hpp"

#include <random>

namespace mfgprox::testing {

inline ScalarField random_scalar(const TorusGrid& g, std::mt19937_64& rng, double lo = -1.0,
                                 double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField f(g);
  for (int k = 0; k < g.size(); ++k) f[k] = dist(rng);
  return f;
}

inline FluxField random_flux(const TorusGrid& g, std::mt19937_64& rng, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  FluxField f(g);
  for (int k = 0; k < g.size(); ++k)
    for (int c = 0; c < 4; ++c) f.values(c, k) = dist(rng);
  return f;
}

}  // namespace mfgprox::testing
