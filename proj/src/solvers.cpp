#include "mfgprox/solvers.hpp"

#include "mfgprox/energies.hpp"
#include "mfgprox/parallel.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace mfgprox {

namespace {

struct AlgoName {
  Algorithm algo;
  const char* name;
};

constexpr AlgoName kNames[] = {
    {Algorithm::ADMM, "ADMM"},   {Algorithm::PCPM_U, "PCPM-U"}, {Algorithm::CP_U, "CP-U"},
    {Algorithm::MS_U, "MS-U"},   {Algorithm::CP_SP, "CP-SP"},   {Algorithm::MS_SP, "MS-SP"},
    {Algorithm::PCPM_SP, "PCPM-SP"},
};

bool is_cp(Algorithm a) { return a == Algorithm::CP_U || a == Algorithm::CP_SP; }
bool is_pcpm(Algorithm a) { return a == Algorithm::PCPM_U || a == Algorithm::PCPM_SP; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

using Clock = std::chrono::steady_clock;

// Shared bookkeeping of the iteration loops.
class Driver {
 public:
  Driver(const ProblemSpec& spec, const SolverConfig& cfg, Algorithm algo)
      : spec_(spec), cfg_(cfg), rep_(spec.grid), start_(Clock::now()) {
    if (cfg.algorithm != algo) {
      throw ConfigError("solver config names " + to_string(cfg.algorithm) + " but " +
                        to_string(algo) + " was called");
    }
    if (cfg.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
    StepSizes st = resolve_steps(spec, cfg);
    rep_.algorithm = algo;
    rep_.gamma = st.gamma;
    rep_.tau = st.tau;
    rep_.theta = cfg.theta;
    rep_.xi_norm = st.xi_norm;
    rep_.tol = cfg.tol > 0.0 ? cfg.tol : default_tol(spec.grid);
    rep_.empirical = is_empirical(algo);
    rep_.warnings = std::move(st.warnings);
  }

  double gamma() const { return rep_.gamma; }
  double tau() const { return rep_.tau; }
  double theta() const { return rep_.theta; }
  double tol() const { return rep_.tol; }
  long max_iter() const { return cfg_.max_iter; }

  using Multipliers = std::function<std::pair<ScalarField, double>()>;

  // Returns true when the loop should stop.
  bool step(long iter, double change, const ScalarField& m, const FluxField& w,
            const Multipliers& mult) {
    if (!std::isfinite(change)) {
      throw std::runtime_error(to_string(rep_.algorithm) + ": non-finite iterate at iteration " +
                               std::to_string(iter));
    }
    rep_.iterations = iter;
    rep_.final_change = change;
    const bool done = change <= rep_.tol;
    if (done || iter % cfg_.record_every == 0 || iter == cfg_.max_iter) {
      HistoryRow row;
      row.iter = iter;
      row.primal_change = change;
      if (cfg_.diagnostics) {
        auto [u, lambda] = mult();
        row.lambda = lambda;
        row.kkt = kkt_residuals(m, w, u, lambda, spec_);
        row.gap = gap_or_nan(m, w, u, lambda);
      } else {
        row.kkt = KktResiduals{};
        row.gap = std::nan("");
        row.lambda = std::nan("");
      }
      rep_.history.push_back(row);
    }
    if (done) rep_.converged = true;
    return done;
  }

  SolveReport finish(const ScalarField& m, const FluxField& w, const Multipliers& mult,
                     std::optional<PrimalPair> sigma, std::int64_t solves) {
    rep_.state.m = m;
    rep_.state.w = w;
    rep_.state.sigma = std::move(sigma);
    auto [u, lambda] = mult();
    rep_.state.u = std::move(u);
    rep_.state.lambda = lambda;
    rep_.kkt = kkt_residuals(m, w, rep_.state.u, lambda, spec_);
    rep_.gap = gap_or_nan(m, w, rep_.state.u, lambda);
    rep_.saddle_solves = solves;
    rep_.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(rep_);
  }

 private:
  double gap_or_nan(const ScalarField& m, const FluxField& w, const ScalarField& u,
                    double lambda) const {
    if (!spec_.coupling->has_conjugate()) return std::nan("");
    return duality_gap(m, w, u, lambda, spec_);
  }

  const ProblemSpec& spec_;
  const SolverConfig& cfg_;
  SolveReport rep_;
  Clock::time_point start_;
};

std::pair<ScalarField, double> pull_back(const SaddleSolver& solver, const PrimalPair& sigma) {
  const ConstraintOperator G(solver.grid(), solver.nu());
  auto [r1, r2] = G.apply(sigma.m, sigma.w);
  auto [us, ls] = solve_GGstar(solver, r1, r2);
  const double h = solver.grid().h();
  us.values = -us.values;
  return {std::move(us), h * h * ls};
}

ScalarField zero_sum(ScalarField u) {
  u.values.array() -= ordered_sum(u.values) / static_cast<double>(u.values.size());
  return u;
}

// Split-formulation multipliers (u_sigma, lambda_sigma) to the system convention.
// The mass projection after a prox with step t removed shift = h^2 sum n - 1;
// its normal-cone multiplier shift / t belongs to lambda as well.
std::pair<ScalarField, double> from_split(const ScalarField& us, double ls, double shift,
                                          double t) {
  ScalarField u = us;
  u.values = -u.values;
  const double h = us.grid.h();
  return {zero_sum(std::move(u)), h * h * ls + shift / t};
}

// Mass projection P_C: m -> m + (1 - h^2 sum m) 1. Returns the removed shift.
double project_C_shift(ScalarField& m) {
  const double shift = mass(m) - 1.0;
  m.values.array() -= shift;
  return shift;
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  std::string up;
  for (char c : name) up += static_cast<char>(c == '_' ? '-' : std::toupper(static_cast<unsigned char>(c)));
  for (const auto& [a, n] : kNames) {
    if (up == n) return a;
  }
  throw ConfigError("unknown algorithm '" + name +
                    "' (ADMM, PCPM-U, CP-U, MS-U, CP-SP, MS-SP, PCPM-SP)");
}

std::string to_string(Algorithm a) {
  for (const auto& [x, n] : kNames) {
    if (x == a) return n;
  }
  return "?";
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = {Algorithm::ADMM,  Algorithm::PCPM_U, Algorithm::CP_U,
                                             Algorithm::MS_U,  Algorithm::CP_SP,  Algorithm::MS_SP,
                                             Algorithm::PCPM_SP};
  return all;
}

bool is_split(Algorithm a) {
  return a == Algorithm::CP_SP || a == Algorithm::MS_SP || a == Algorithm::PCPM_SP;
}

bool is_empirical(Algorithm a) { return a == Algorithm::MS_SP || a == Algorithm::PCPM_SP; }

double default_tol(const TorusGrid& g) { return g.h() * g.h() * g.h() / 5.0; }

double xi_norm(const ProblemSpec& spec, Algorithm a) {
  if (!is_split(a) && a != Algorithm::ADMM) return 1.0;
  // G G* = diag(nu^2 L^2 + 2 L, h^2); the ADMM operator has the same Gram matrix.
  const SaddleSolver s(spec.grid, spec.nu);
  const double h = spec.grid.h();
  return std::sqrt(std::max(s.max_eigenvalue(), h * h));
}

StepSizes resolve_steps(const ProblemSpec& spec, const SolverConfig& cfg) {
  StepSizes st;
  const Algorithm a = cfg.algorithm;
  st.xi_norm = xi_norm(spec, a);
  const double x = st.xi_norm;
  if (a == Algorithm::ADMM) {
    st.gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0;
    return st;
  }
  std::string bound;
  bool ok = true;
  if (is_cp(a)) {
    st.gamma = cfg.gamma > 0.0 ? cfg.gamma : 0.95 / x;
    st.tau = cfg.tau > 0.0 ? cfg.tau : 0.95 / x;
    ok = st.gamma * st.tau * x * x < 1.0;
    bound = "gamma*tau*||Xi||^2 = " + fmt(st.gamma * st.tau * x * x) + " must be < 1";
  } else if (is_pcpm(a)) {
    const double lim = 0.5 * std::min(1.0, 1.0 / x);
    st.gamma = cfg.gamma > 0.0 ? cfg.gamma : 0.95 * lim;
    ok = st.gamma < lim;
    bound = "gamma = " + fmt(st.gamma) + " must be < min(1, 1/||Xi||)/2 = " + fmt(lim);
  } else {
    st.gamma = cfg.gamma > 0.0 ? cfg.gamma : 0.95 / x;
    ok = st.gamma * x < 1.0;
    bound = "gamma = " + fmt(st.gamma) + " must be < 1/||Xi|| = " + fmt(1.0 / x);
  }
  if (!ok) {
    if (cfg.enforce_step_bounds) throw ConfigError(to_string(a) + ": " + bound);
    st.warnings.push_back("step sizes outside the convergence bound: " + bound);
  }
  return st;
}

double primal_change(const ScalarField& m0, const FluxField& w0, const ScalarField& m1,
                     const FluxField& w1) {
  const double dm = (m1.values - m0.values).squaredNorm();
  const double dw = (w1.values - w0.values).squaredNorm();
  return std::sqrt(dm + dw);
}

bool stopping_check(const ScalarField& m0, const FluxField& w0, const ScalarField& m1,
                    const FluxField& w1, double tol) {
  require_same_grid(m0.grid, m1.grid, "stopping_check");
  require_same_grid(w0.grid, w1.grid, "stopping_check");
  return primal_change(m0, w0, m1, w1) <= tol;
}

std::pair<ScalarField, double> recover_multipliers(const PrimalDualState& state,
                                                   const ProblemSpec& spec,
                                                   const SaddleSolver* solver) {
  if (!state.sigma) return {zero_sum(state.u), state.lambda};
  if (solver) return pull_back(*solver, *state.sigma);
  const SaddleSolver own(spec.grid, spec.nu);
  return pull_back(own, *state.sigma);
}

SolveReport run_admm(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::ADMM);
  if (spec.q != 2.0) throw ConfigError("ADMM requires q = 2 (got " + fmt(spec.q) + ")");
  if (spec.bounded()) throw ConfigError("ADMM does not handle density bounds");
  const Coupling& F = *spec.coupling;
  if (!F.has_conjugate()) {
    throw ConfigError("ADMM needs the conjugate of coupling '" + F.name() + "'");
  }
  const TorusGrid& g = spec.grid;
  const int n = g.size();
  const double h2 = g.h() * g.h();
  const double nu = spec.nu;
  const double gamma = drv.gamma();
  const SaddleSolver solver(g, nu, cfg.linear);

  // y = (u, lambda), v = (a, b, c), sigma = (s1, s2, s3). sigma approximates
  // (m, w, m) at a solution, so (1, 0, 1) matches the uniform initial density.
  ScalarField u(g);
  double lambda = 0.0;
  ScalarField a(g), c(g);
  FluxField b(g);
  ScalarField s1(g, 1.0), s3(g, 1.0);
  FluxField s2(g);
  ScalarField m(g, 1.0), m_new(g);
  FluxField w(g), w_new(g);

  auto mult = [&]() { return std::pair{zero_sum(u), h2 * lambda}; };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    FluxField bb = b;
    bb.values -= s2.values / gamma;
    ScalarField cc = c;
    cc.values -= s3.values / gamma;
    ScalarField rhs = apply_B(bb);
    rhs.values += apply_A(cc, nu).values;
    u = solver.solve(rhs);
    lambda = ordered_sum((s1.values.array() - 1.0 - gamma * a.values.array()).matrix()) / gamma;

    const FluxField bsu = apply_Bstar(u);
    const ScalarField au = apply_A(u, nu);
    parallel_for(n, [&](int i) {
      const Vec4 b0 = s2.node(i) / gamma + bsu.node(i);
      const AdmmProxResult r = prox_psi_admm(s1[i] / gamma - h2 * lambda, b0,
                                             s3[i] / gamma + au[i], i, gamma, F);
      a[i] = r.a;
      b.node(i) = r.b;
      c[i] = r.c;
      const double eta = r.a + 0.5 * project_K(r.b).squaredNorm() + r.c;
      m_new[i] = eta > F.f0(i) ? F.conj_deriv(i, eta) : 0.0;
    });
    s1.values.array() -= gamma * (h2 * lambda + a.values.array());
    s2.values += gamma * (bsu.values - b.values);
    s3.values += gamma * (au.values - c.values);

    w_new = flux_from_value(u, m_new, 2.0);
    const double change = primal_change(m, w, m_new, w_new);
    std::swap(m, m_new);
    std::swap(w, w_new);
    if (drv.step(k, change, m, w, mult)) break;
  }
  return drv.finish(m, w, mult, std::nullopt, solver.solve_count());
}

SolveReport run_pcpm_u(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::PCPM_U);
  const TorusGrid& g = spec.grid;
  const double gamma = drv.gamma();
  const SaddleSolver solver(g, spec.nu, cfg.linear);

  // (m, w) = (1, 0) lies in V, so v starts there too.
  PrimalPair y(ScalarField(g, 1.0), FluxField(g));
  PrimalPair vbar = y;
  PrimalPair sigma(g), p(g), arg(g), y_new(g);

  auto mult = [&]() { return pull_back(solver, sigma); };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    p.m.values = sigma.m.values + gamma * (y.m.values - vbar.m.values);
    p.w.values = sigma.w.values + gamma * (y.w.values - vbar.w.values);

    arg.m.values = y.m.values - gamma * p.m.values;
    arg.w.values = y.w.values - gamma * p.w.values;
    prox_phi_field(arg.m, arg.w, spec, gamma, y_new.m, y_new.w);

    arg.m.values = vbar.m.values + gamma * p.m.values;
    arg.w.values = vbar.w.values + gamma * p.w.values;
    vbar = project_V(solver, arg);

    sigma.m.values += gamma * (y_new.m.values - vbar.m.values);
    sigma.w.values += gamma * (y_new.w.values - vbar.w.values);

    const double change = primal_change(y.m, y.w, y_new.m, y_new.w);
    std::swap(y, y_new);
    if (drv.step(k, change, y.m, y.w, mult)) break;
  }
  return drv.finish(y.m, y.w, mult, sigma, solver.solve_count());
}

SolveReport run_cp_u(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::CP_U);
  const TorusGrid& g = spec.grid;
  const double gamma = drv.gamma(), tau = drv.tau(), theta = drv.theta();
  const SaddleSolver solver(g, spec.nu, cfg.linear);

  PrimalPair y(ScalarField(g, 1.0), FluxField(g));
  PrimalPair ybar = y, sigma(g), arg(g), y_new(g);

  auto mult = [&]() { return pull_back(solver, sigma); };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    arg.m.values = sigma.m.values + gamma * ybar.m.values;
    arg.w.values = sigma.w.values + gamma * ybar.w.values;
    sigma = prox_psistar_unsplit(solver, arg, gamma);

    arg.m.values = y.m.values - tau * sigma.m.values;
    arg.w.values = y.w.values - tau * sigma.w.values;
    prox_phi_field(arg.m, arg.w, spec, tau, y_new.m, y_new.w);

    ybar.m.values = y_new.m.values + theta * (y_new.m.values - y.m.values);
    ybar.w.values = y_new.w.values + theta * (y_new.w.values - y.w.values);

    const double change = primal_change(y.m, y.w, y_new.m, y_new.w);
    std::swap(y, y_new);
    if (drv.step(k, change, y.m, y.w, mult)) break;
  }
  return drv.finish(y.m, y.w, mult, sigma, solver.solve_count());
}

SolveReport run_ms_u(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::MS_U);
  const TorusGrid& g = spec.grid;
  const double gamma = drv.gamma();
  const SaddleSolver solver(g, spec.nu, cfg.linear);

  PrimalPair y(ScalarField(g, 1.0), FluxField(g));
  PrimalPair p = y, sigma(g), eta(g), arg(g), y_new(g);

  auto mult = [&]() { return pull_back(solver, sigma); };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    // eta and p only read (y, sigma).
    arg.m.values = sigma.m.values + gamma * y.m.values;
    arg.w.values = sigma.w.values + gamma * y.w.values;
    eta = prox_psistar_unsplit(solver, arg, gamma);

    arg.m.values = y.m.values - gamma * sigma.m.values;
    arg.w.values = y.w.values - gamma * sigma.w.values;
    prox_phi_field(arg.m, arg.w, spec, gamma, p.m, p.w);

    y_new.m.values = p.m.values - gamma * (eta.m.values - sigma.m.values);
    y_new.w.values = p.w.values - gamma * (eta.w.values - sigma.w.values);
    sigma.m.values = eta.m.values + gamma * (p.m.values - y.m.values);
    sigma.w.values = eta.w.values + gamma * (p.w.values - y.w.values);

    const double change = primal_change(y.m, y.w, y_new.m, y_new.w);
    std::swap(y, y_new);
    // The prox output p is the iterate that satisfies the bounds.
    if (drv.step(k, change, p.m, p.w, mult)) break;
  }
  return drv.finish(p.m, p.w, mult, sigma, solver.solve_count());
}

namespace {

// G* (us, ls) = (A us + h^2 ls 1, B* us), subtracted from (m, w) with weight t.
void descend_Gstar(const ProblemSpec& spec, const ScalarField& us, double ls, double t,
                   const ScalarField& m, const FluxField& w, ScalarField& m_out,
                   FluxField& w_out) {
  const double h2 = spec.grid.h() * spec.grid.h();
  m_out.values = m.values - t * apply_A(us, spec.nu).values;
  m_out.values.array() -= t * h2 * ls;
  w_out.values = w.values - t * apply_Bstar(us).values;
}

// (A m + B w, h^2 sum m - rhs_mass).
std::pair<ScalarField, double> apply_G(const ProblemSpec& spec, const ScalarField& m,
                                       const FluxField& w) {
  ScalarField r = apply_A(m, spec.nu);
  r.values += apply_B(w).values;
  return {std::move(r), mass(m)};
}

}  // namespace

SolveReport run_cp_sp(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::CP_SP);
  const TorusGrid& g = spec.grid;
  const double gamma = drv.gamma(), tau = drv.tau(), theta = drv.theta();

  ScalarField m(g, 1.0), mbar = m, n(g), am(g);
  FluxField w(g), wbar = w, v(g), aw(g);
  ScalarField us(g);
  double ls = 0.0, shift = 0.0;

  auto mult = [&]() { return from_split(us, ls, shift, tau); };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    const auto [gr, gm] = apply_G(spec, mbar, wbar);
    us.values += gamma * gr.values;
    ls += gamma * (gm - 1.0);

    descend_Gstar(spec, us, ls, tau, m, w, am, aw);
    prox_phi_field(am, aw, spec, tau, n, v);

    ScalarField m_new = n;
    shift = project_C_shift(m_new);
    mbar.values = m_new.values + theta * (n.values - m.values);
    wbar.values = v.values + theta * (v.values - w.values);

    const double change = primal_change(m, w, m_new, v);
    m = std::move(m_new);
    w = v;
    if (drv.step(k, change, m, w, mult)) break;
  }
  return drv.finish(m, w, mult, std::nullopt, 0);
}

SolveReport run_ms_sp(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::MS_SP);
  const TorusGrid& g = spec.grid;
  const double gamma = drv.gamma();

  ScalarField m(g, 1.0), pm(g), am(g), m_new(g);
  FluxField w(g), pw(g), aw(g), w_new(g);
  ScalarField us(g);
  double ls = 0.0, shift = 0.0;

  auto mult = [&]() { return from_split(us, ls, shift, gamma); };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    // eta = prox_{gamma psi*}(sigma + gamma G y) = sigma + gamma (G y - (0, 1)).
    const auto [gr, gm] = apply_G(spec, m, w);
    ScalarField eta_u = us;
    eta_u.values += gamma * gr.values;
    const double eta_l = ls + gamma * (gm - 1.0);

    descend_Gstar(spec, us, ls, gamma, m, w, am, aw);
    prox_phi_field(am, aw, spec, gamma, pm, pw);
    shift = project_C_shift(pm);

    // y+ = p - gamma G*(eta - sigma), projected so every iterate keeps unit mass.
    ScalarField du = eta_u;
    du.values -= us.values;
    descend_Gstar(spec, du, eta_l - ls, gamma, pm, pw, m_new, w_new);
    project_C_shift(m_new);

    ScalarField dm = pm;
    dm.values -= m.values;
    FluxField dw = pw;
    dw.values -= w.values;
    const auto [gd, gdm] = apply_G(spec, dm, dw);
    us.values = eta_u.values + gamma * gd.values;
    ls = eta_l + gamma * gdm;

    const double change = primal_change(m, w, m_new, w_new);
    std::swap(m, m_new);
    std::swap(w, w_new);
    if (drv.step(k, change, pm, pw, mult)) break;
  }
  return drv.finish(pm, pw, mult, std::nullopt, 0);
}

SolveReport run_pcpm_sp(const ProblemSpec& spec, const SolverConfig& cfg) {
  Driver drv(spec, cfg, Algorithm::PCPM_SP);
  const TorusGrid& g = spec.grid;
  const double gamma = drv.gamma();

  ScalarField m(g, 1.0), am(g), m_new(g);
  FluxField w(g), aw(g), w_new(g);
  ScalarField us(g), vz(g), pu(g);
  double ls = 0.0, vl = 1.0, shift = 0.0;

  auto mult = [&]() { return from_split(us, ls, shift, gamma); };

  for (long k = 1; k <= drv.max_iter(); ++k) {
    const auto [gr, gm] = apply_G(spec, m, w);
    pu.values = us.values + gamma * (gr.values - vz.values);
    const double pl = ls + gamma * (gm - vl);

    descend_Gstar(spec, pu, pl, gamma, m, w, am, aw);
    prox_phi_field(am, aw, spec, gamma, m_new, w_new);
    shift = project_C_shift(m_new);

    // prox of gamma times the indicator of {(0, 1)}.
    vz.values.setZero();
    vl = 1.0;

    const auto [gr1, gm1] = apply_G(spec, m_new, w_new);
    us.values += gamma * (gr1.values - vz.values);
    ls += gamma * (gm1 - vl);

    const double change = primal_change(m, w, m_new, w_new);
    std::swap(m, m_new);
    std::swap(w, w_new);
    if (drv.step(k, change, m, w, mult)) break;
  }
  return drv.finish(m, w, mult, std::nullopt, 0);
}

SolveReport solve(const ProblemSpec& spec, const SolverConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::ADMM: return run_admm(spec, cfg);
    case Algorithm::PCPM_U: return run_pcpm_u(spec, cfg);
    case Algorithm::CP_U: return run_cp_u(spec, cfg);
    case Algorithm::MS_U: return run_ms_u(spec, cfg);
    case Algorithm::CP_SP: return run_cp_sp(spec, cfg);
    case Algorithm::MS_SP: return run_ms_sp(spec, cfg);
    case Algorithm::PCPM_SP: return run_pcpm_sp(spec, cfg);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace mfgprox
