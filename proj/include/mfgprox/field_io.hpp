#pragma once

#include "mfgprox/grid.hpp"

#include <iosfwd>
#include <string>

namespace mfgprox {

// GF1 text format: header "GF1 <N> <components>", then for each component N
// lines (index i) of N values (index j), 17 significant digits.

void write_gf1(std::ostream& os, const ScalarField& f);
void write_gf1(std::ostream& os, const FluxField& f);
void write_gf1(const std::string& path, const ScalarField& f);
void write_gf1(const std::string& path, const FluxField& f);

ScalarField read_gf1_scalar(std::istream& is);
FluxField read_gf1_flux(std::istream& is);
ScalarField read_gf1_scalar(const std::string& path);
FluxField read_gf1_flux(const std::string& path);

}  // namespace mfgprox
