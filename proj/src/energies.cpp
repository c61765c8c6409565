#include "mfgprox/energies.hpp"

#include "mfgprox/parallel.hpp"
#include "mfgprox/roots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfgprox {

namespace {

bool in_K(const Vec4& w) { return w[0] >= 0.0 && w[1] <= 0.0 && w[2] >= 0.0 && w[3] <= 0.0; }

// Below this the base s of Q is treated as zero; Q then equals its limit -C0.
constexpr double kTinyBase = 1e-300;

// Q and its derivatives for fixed node data, parametrized by (p, s).
struct QModel {
  double q, gamma, c, e, c0;

  QModel(double q_, double gamma_, double pkw_norm) : q(q_), gamma(gamma_) {
    const double qc = q / (q - 1.0);
    c = std::pow(gamma, 2.0 / q) * std::pow(qc, 1.0 - 2.0 / q);
    e = 1.0 - 2.0 / q;
    c0 = gamma / qc * std::pow(pkw_norm, q);
  }

  // c s^e, with the s -> 0 limit.
  double cse(double s) const {
    if (s <= kTinyBase) return e < 0.0 ? kInf : (e == 0.0 ? c : 0.0);
    return c * std::pow(s, e);
  }

  double value(double p, double s) const {
    if (s <= kTinyBase) return -c0;
    const double x = p + cse(s);
    return s * std::pow(x, q) - c0;
  }

  // dQ/dp along s = p + gamma F'(p) - m (ds/dp = sp), and dQ/ds.
  double d_dp(double p, double s, double sp) const {
    if (s <= kTinyBase) return kInf;
    const double k = cse(s);
    const double x = p + k;
    const double xq1 = std::pow(x, q - 1.0);
    return sp * xq1 * (x + q * e * k) + q * s * xq1;
  }
  double d_ds(double p, double s) const {
    if (s <= kTinyBase) return kInf;
    const double k = cse(s);
    const double x = p + k;
    return std::pow(x, q - 1.0) * (x + q * e * k);
  }

  double shrink(double p, double s) const {
    if (p <= 0.0) return 0.0;
    const double x = p + cse(s);
    return std::isfinite(x) ? p / x : 0.0;
  }
};

double gamma_fprime(const ProxSpec& spec, double p) { return spec.gamma * spec.coupling->f(spec.node, p); }

}  // namespace

double bhat(double m, const Vec4& w, double q) {
  if (m > 0.0 && in_K(w)) return std::pow(w.norm(), q) / (q * std::pow(m, q - 1.0));
  if (m == 0.0 && w.isZero(0.0)) return 0.0;
  return kInf;
}

bool in_conjugate_set(double alpha, const Vec4& beta, double q) {
  const double qc = q / (q - 1.0);
  return alpha + std::pow(project_K(beta).norm(), qc) / qc <= 0.0;
}

double primal_objective(const ScalarField& m, const FluxField& w, const ProblemSpec& spec) {
  require_same_grid(m.grid, w.grid, "primal_objective");
  double total = 0.0;
  for (int k = 0; k < m.grid.size(); ++k) {
    if (m[k] > spec.bound_at(k)) return kInf;
    const double b = bhat(m[k], Vec4(w.node(k)), spec.q);
    const double f = spec.coupling->F(k, m[k]);
    if (!std::isfinite(b) || !std::isfinite(f)) return kInf;
    total += b + f;
  }
  return total;
}

void ProxSpec::validate() const {
  if (!(q > 1.0)) throw std::invalid_argument("ProxSpec: q must exceed 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("ProxSpec: gamma must be positive");
  if (!(d > 0.0)) throw std::invalid_argument("ProxSpec: density bound must be positive");
  if (!coupling) throw std::invalid_argument("ProxSpec: coupling missing");
}

double q_eval(double p, double delta, double m, const Vec4& w, const ProxSpec& spec) {
  spec.validate();
  if (p < 0.0) throw std::domain_error("q_eval: p must be nonnegative");
  const double fp = gamma_fprime(spec, p);
  if (!std::isfinite(fp)) throw std::domain_error("q_eval: F'(p) is not finite");
  const double s = p + fp - m + delta;
  if (s < 0.0) throw std::domain_error("q_eval: (p, delta) outside D(m)");
  const QModel model(spec.q, spec.gamma, project_K(w).norm());
  return model.value(p, s);
}

double prox_gamma_F_scalar(double m, int node, double gamma, const Coupling& coupling) {
  if (coupling.f0_finite() && m <= gamma * coupling.f0(node)) return 0.0;
  auto fn = [&](double z) {
    const double v = z + gamma * coupling.f(node, z) - m;
    const double d = 1.0 + gamma * coupling.df(node, z);
    return std::pair{v, d};
  };
  const double hi = grow_upper(fn, 0.0, std::max(m, 1.0));
  return solve_increasing(fn, 0.0, hi, std::clamp(m, 0.0, hi)).x;
}

ProxResult prox_phi(double m, const Vec4& w, const ProxSpec& spec) {
  spec.validate();
  const Coupling& F = *spec.coupling;
  const int node = spec.node;
  const double g = spec.gamma;
  const double d = spec.d;
  const bool bounded = std::isfinite(d);
  const Vec4 pkw = project_K(w);
  const double a = pkw.norm();

  ProxResult out;
  if (a == 0.0) {
    out.p = std::min(prox_gamma_F_scalar(m, node, g, F), d);
    return out;
  }

  const QModel model(spec.q, g, a);
  auto s_of_p = [&](double p) { return p + g * F.f(node, p) - m; };
  auto q_p = [&](double p) {
    const double s = std::max(s_of_p(p), 0.0);
    const double sp = 1.0 + g * F.df(node, p);
    return std::pair{model.value(p, s), model.d_dp(p, s, sp)};
  };

  auto solve_p = [&](double lo) {
    const double hi = bounded ? d : grow_upper(q_p, lo, std::max(2.0 * lo, lo + 1.0));
    const double p = solve_increasing(q_p, lo, hi, 0.5 * (lo + hi)).x;
    out.p = p;
    out.v = model.shrink(p, std::max(s_of_p(p), 0.0)) * pkw;
    return out;
  };

  // Upper branch: p = d, slack delta >= 0 from Q(d, delta) = 0, solved in s = s(d) + delta.
  auto solve_d = [&]() {
    const double s_lo = std::max(s_of_p(d), 0.0);
    auto q_s = [&](double s) { return std::pair{model.value(d, s), model.d_ds(d, s)}; };
    const double s_hi = grow_upper(q_s, s_lo, std::max(2.0 * s_lo, s_lo + 1.0));
    const double s = solve_increasing(q_s, s_lo, s_hi, 0.5 * (s_lo + s_hi)).x;
    out.p = d;
    out.v = model.shrink(d, s) * pkw;
    return out;
  };

  auto q_at_d = [&]() { return model.value(d, s_of_p(d)); };

  if (F.f0_finite()) {
    const double g0 = g * F.f0(node);
    if (m <= g0) {
      if (model.value(0.0, g0 - m) >= 0.0) return out;
      if (!bounded || q_at_d() > 0.0) return solve_p(0.0);
      return solve_d();
    }
  }
  if (!bounded) return solve_p(prox_gamma_F_scalar(m, node, g, F));
  if (m < d + g * F.f(node, d) && q_at_d() > 0.0) {
    return solve_p(prox_gamma_F_scalar(m, node, g, F));
  }
  return solve_d();
}

AdmmProxResult prox_psi_admm(double a0, const Vec4& b0, double c0, int node, double gamma,
                             const Coupling& coupling) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_psi_admm: gamma must be positive");
  if (!coupling.has_conjugate()) {
    throw std::invalid_argument("prox_psi_admm: coupling '" + coupling.name() +
                                "' provides no conjugate derivative");
  }
  const Vec4 pk = project_K(b0);
  const double pk2 = pk.squaredNorm();
  AdmmProxResult out{a0, b0, c0, 0.0};
  if (!(a0 + 0.5 * pk2 + c0 > coupling.f0(node))) return out;

  auto arg = [&](double s) { return a0 + c0 - 2.0 * s + pk2 / (2.0 * (1.0 + s) * (1.0 + s)); };
  auto fn = [&](double s) {
    const double t = arg(s);
    const double v = gamma * s - coupling.conj_deriv(node, t);
    const double dt = -2.0 - pk2 / ((1.0 + s) * (1.0 + s) * (1.0 + s));
    const double d = gamma - coupling.conj_deriv2(node, t) * dt;
    return std::pair{v, d};
  };
  const double hi = grow_upper(fn, 0.0, 1.0);
  const double s = solve_increasing(fn, 0.0, hi, 0.5 * hi).x;
  out.s = s;
  out.a = a0 - s;
  out.c = c0 - s;
  out.b = pk / (1.0 + s) + project_K_polar(b0);
  return out;
}

void prox_phi_field(const ScalarField& m, const FluxField& w, const ProblemSpec& spec,
                    double gamma, ScalarField& m_out, FluxField& w_out) {
  require_same_grid(m.grid, w.grid, "prox_phi_field");
  const int n = m.grid.size();
  if (&m_out != &m) m_out = ScalarField(m.grid);
  if (&w_out != &w) w_out = FluxField(m.grid);
  const Coupling* coupling = spec.coupling.get();
  parallel_for(n, [&](int k) {
    ProxSpec ps{spec.q, gamma, spec.bound_at(k), coupling, k};
    const ProxResult r = prox_phi(m[k], Vec4(w.node(k)), ps);
    m_out[k] = r.p;
    w_out.node(k) = r.v;
  });
}

}  // namespace mfgprox
