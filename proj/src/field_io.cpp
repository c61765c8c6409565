#include "mfgprox/field_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mfgprox {

namespace {

template <class Get>
void write_block(std::ostream& os, const TorusGrid& g, int comps, Get get) {
  os << "GF1 " << g.n() << ' ' << comps << '\n';
  os << std::setprecision(17);
  for (int c = 0; c < comps; ++c) {
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        if (j) os << ' ';
        os << get(c, g.index(i, j));
      }
      os << '\n';
    }
  }
  if (!os) throw std::runtime_error("GF1: write failed");
}

TorusGrid read_header(std::istream& is, int expect_comps) {
  std::string tag;
  int n = 0, comps = 0;
  if (!(is >> tag >> n >> comps) || tag != "GF1") throw std::runtime_error("GF1: bad header");
  if (comps != expect_comps) {
    throw std::runtime_error("GF1: expected " + std::to_string(expect_comps) +
                             " components, file has " + std::to_string(comps));
  }
  return TorusGrid(n);
}

double read_value(std::istream& is) {
  double v = 0.0;
  if (!(is >> v)) throw std::runtime_error("GF1: truncated or malformed data");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}

}  // namespace

void write_gf1(std::ostream& os, const ScalarField& f) {
  write_block(os, f.grid, 1, [&](int, int k) { return f.values[k]; });
}

void write_gf1(std::ostream& os, const FluxField& f) {
  write_block(os, f.grid, 4, [&](int c, int k) { return f.values(c, k); });
}

void write_gf1(const std::string& path, const ScalarField& f) {
  auto os = open_out(path);
  write_gf1(os, f);
}

void write_gf1(const std::string& path, const FluxField& f) {
  auto os = open_out(path);
  write_gf1(os, f);
}

ScalarField read_gf1_scalar(std::istream& is) {
  const TorusGrid g = read_header(is, 1);
  ScalarField f(g);
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) f(i, j) = read_value(is);
  return f;
}

FluxField read_gf1_flux(std::istream& is) {
  const TorusGrid g = read_header(is, 4);
  FluxField f(g);
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j) f.values(c, g.index(i, j)) = read_value(is);
  return f;
}

ScalarField read_gf1_scalar(const std::string& path) {
  auto is = open_in(path);
  return read_gf1_scalar(is);
}

FluxField read_gf1_flux(const std::string& path) {
  auto is = open_in(path);
  return read_gf1_flux(is);
}

}  // namespace mfgprox
