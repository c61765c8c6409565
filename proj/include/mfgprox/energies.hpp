#pragma once

#include "mfgprox/coupling.hpp"
#include "mfgprox/grid.hpp"
#include "mfgprox/problem.hpp"

namespace mfgprox {

/// Kinetic integrand |w|^q / (q m^{q-1}) on {m > 0, w in K}, 0 at (0, 0), +inf elsewhere.
double bhat(double m, const Vec4& w, double q);

/// alpha + |P_K beta|^{q'} / q' <= 0, the domain of the conjugate of bhat.
bool in_conjugate_set(double alpha, const Vec4& beta, double q);

/// sum over nodes of bhat(m, w) + F(x, m), +inf when m exceeds the density bound.
double primal_objective(const ScalarField& m, const FluxField& w, const ProblemSpec& spec);

/// Per-node data for prox of gamma * (F + bhat + indicator of [0, d]).
struct ProxSpec {
  double q = 2.0;
  double gamma = 1.0;
  double d = kInf;
  const Coupling* coupling = nullptr;
  int node = 0;

  double q_conj() const { return q / (q - 1.0); }
  void validate() const;
};

/// Q_{m,w}(p, delta) = s (p + c s^{1-2/q})^q - (gamma/q') |P_K w|^q with
/// s = p + gamma F'(p) - m + delta and c = gamma^{2/q} q'^{1-2/q}.
/// Throws std::domain_error if p < 0 or s < 0.
double q_eval(double p, double delta, double m, const Vec4& w, const ProxSpec& spec);

struct ProxResult {
  double p = 0.0;
  Vec4 v = Vec4::Zero();
};

/// prox of gamma * (F + bhat (+ indicator of [0, d])) at (m, w).
ProxResult prox_phi(double m, const Vec4& w, const ProxSpec& spec);

/// Unique z >= 0 with z + gamma F'(z) = m, or 0 when m <= gamma F'(0).
double prox_gamma_F_scalar(double m, int node, double gamma, const Coupling& coupling);

struct AdmmProxResult {
  double a = 0.0;
  Vec4 b = Vec4::Zero();
  double c = 0.0;
  double s = 0.0;
};

/// prox of psi/gamma at one node for q = 2, where
/// psi(a, b, c) = F*(a + |P_K b|^2 / 2 + c).
AdmmProxResult prox_psi_admm(double a0, const Vec4& b0, double c0, int node, double gamma,
                             const Coupling& coupling);

/// Applies prox_phi at every node. m_out / w_out may alias the inputs.
void prox_phi_field(const ScalarField& m, const FluxField& w, const ProblemSpec& spec,
                    double gamma, ScalarField& m_out, FluxField& w_out);

}  // namespace mfgprox
