#include "projflow/verification.hpp"

#include "projflow/dense.hpp"
#include "projflow/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace projflow {

namespace {

// case (a): stream function psi = (x(1-x) y(1-y))^2, time factor cos(t),
// pressure x^3 y - 1/8
struct CaseA {
  static double q(double s) { return s * (1.0 - s); }
  static double dq(double s) { return 1.0 - 2.0 * s; }
  // A = q^2, Bf = q q'
  static double A(double s) { return q(s) * q(s); }
  static double dA(double s) { return 2.0 * q(s) * dq(s); }
  static double ddA(double s) { return 2.0 * dq(s) * dq(s) - 4.0 * q(s); }
  static double Bf(double s) { return q(s) * dq(s); }
  static double dBf(double s) { return dq(s) * dq(s) - 2.0 * q(s); }
  static double ddBf(double s) { return -6.0 * dq(s); }

  static std::array<double, 2> u(double t, double x, double y) {
    const double c = std::cos(t);
    return {2.0 * c * A(x) * Bf(y), -2.0 * c * Bf(x) * A(y)};
  }
  static double p(double, double x, double y) { return x * x * x * y - 0.125; }
  static std::array<double, 2> f(double mu, double t, double x, double y) {
    const double c = std::cos(t), s = std::sin(t);
    const double u1 = 2.0 * c * A(x) * Bf(y);
    const double u2 = -2.0 * c * Bf(x) * A(y);
    const double u1t = -2.0 * s * A(x) * Bf(y);
    const double u2t = 2.0 * s * Bf(x) * A(y);
    const double u1x = 2.0 * c * dA(x) * Bf(y);
    const double u1y = 2.0 * c * A(x) * dBf(y);
    const double u2x = -2.0 * c * dBf(x) * A(y);
    const double u2y = -2.0 * c * Bf(x) * dA(y);
    const double lap1 = 2.0 * c * (ddA(x) * Bf(y) + A(x) * ddBf(y));
    const double lap2 = -2.0 * c * (ddBf(x) * A(y) + Bf(x) * ddA(y));
    const double px = 3.0 * x * x * y;
    const double py = x * x * x;
    return {u1t + u1 * u1x + u2 * u1y + px - mu * lap1,
            u2t + u1 * u2x + u2 * u2y + py - mu * lap2};
  }
};

// case (b): u = e^{-t} curl of sin^2(pi x) sin^2(pi y)/pi, pressure
// e^{-2t} cos(pi x) cos(pi y)
struct CaseB {
  static std::array<double, 2> u(double t, double x, double y) {
    const double e = std::exp(-t);
    const double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
    return {e * sx * sx * std::sin(2.0 * M_PI * y), -e * std::sin(2.0 * M_PI * x) * sy * sy};
  }
  static double p(double t, double x, double y) {
    return std::exp(-2.0 * t) * std::cos(M_PI * x) * std::cos(M_PI * y);
  }
  static std::array<double, 2> f(double mu, double t, double x, double y) {
    const double e = std::exp(-t);
    const double pi = M_PI;
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    const double s2x = std::sin(2.0 * pi * x), s2y = std::sin(2.0 * pi * y);
    const double c2x = std::cos(2.0 * pi * x), c2y = std::cos(2.0 * pi * y);
    const double u1 = e * sx * sx * s2y;
    const double u2 = -e * s2x * sy * sy;
    const double u1t = -u1, u2t = -u2;
    const double u1x = e * pi * s2x * s2y;
    const double u1y = e * 2.0 * pi * sx * sx * c2y;
    const double u2x = -e * 2.0 * pi * c2x * sy * sy;
    const double u2y = -e * pi * s2x * s2y;
    const double lap1 = e * (2.0 * pi * pi * c2x * s2y - 4.0 * pi * pi * sx * sx * s2y);
    const double lap2 = e * (4.0 * pi * pi * s2x * sy * sy - 2.0 * pi * pi * s2x * c2y);
    const double ep = std::exp(-2.0 * t);
    const double px = -ep * pi * std::sin(pi * x) * std::cos(pi * y);
    const double py = -ep * pi * std::cos(pi * x) * std::sin(pi * y);
    return {u1t + u1 * u1x + u2 * u1y + px - mu * lap1,
            u2t + u1 * u2x + u2 * u2y + py - mu * lap2};
  }
};

} // namespace

const std::vector<ManufacturedCase>& builtin_cases() {
  static const std::vector<ManufacturedCase> cases = [] {
    std::vector<ManufacturedCase> cs(2);
    cs[0].name = "case_a";
    cs[0].u = [](double t, double x, double y) { return CaseA::u(t, x, y); };
    cs[0].p = [](double t, double x, double y) { return CaseA::p(t, x, y); };
    cs[0].forcing = [](double mu) {
      return [mu](double t, double x, double y) { return CaseA::f(mu, t, x, y); };
    };
    cs[1].name = "case_b";
    cs[1].u = [](double t, double x, double y) { return CaseB::u(t, x, y); };
    cs[1].p = [](double t, double x, double y) { return CaseB::p(t, x, y); };
    cs[1].forcing = [](double mu) {
      return [mu](double t, double x, double y) { return CaseB::f(mu, t, x, y); };
    };
    return cs;
  }();
  return cases;
}

const ManufacturedCase& builtin_case(const std::string& name) {
  for (const auto& c : builtin_cases())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown manufactured case '" + name + "'");
}

namespace {

constexpr double kFdStep = 4e-3;

// fourth-order central first and second derivatives
template <typename F>
double d1(F&& f, double s) {
  const double h = kFdStep;
  return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h);
}
template <typename F>
double d2(F&& f, double s) {
  const double h = kFdStep;
  return (-f(s + 2 * h) + 16 * f(s + h) - 30 * f(s) + 16 * f(s - h) - f(s - 2 * h)) / (12 * h * h);
}

} // namespace

double pde_residual_fd(const ManufacturedCase& c, double mu, double t, double x, double y) {
  double res = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    auto uc = [&](double tt, double xx, double yy) { return c.u(tt, xx, yy)[comp]; };
    const double ut = d1([&](double s) { return uc(s, x, y); }, t);
    const double ux = d1([&](double s) { return uc(t, s, y); }, x);
    const double uy = d1([&](double s) { return uc(t, x, s); }, y);
    const double lap = d2([&](double s) { return uc(t, s, y); }, x) +
                       d2([&](double s) { return uc(t, x, s); }, y);
    const double grad_p = comp == 0 ? d1([&](double s) { return c.p(t, s, y); }, x)
                                    : d1([&](double s) { return c.p(t, x, s); }, y);
    const auto uval = c.u(t, x, y);
    const double conv = uval[0] * ux + uval[1] * uy;
    const double fval = c.forcing(mu)(t, x, y)[comp];
    res = std::max(res, std::abs(ut + conv + grad_p - mu * lap - fval));
  }
  return res;
}

double divergence_fd(const ManufacturedCase& c, double t, double x, double y) {
  const double ux = d1([&](double s) { return c.u(t, s, y)[0]; }, x);
  const double vy = d1([&](double s) { return c.u(t, x, s)[1]; }, y);
  return ux + vy;
}

namespace {

// bordered dense solve of the Darcy saddle point with the mean constraint
ProjectionResult dense_darcy(const std::vector<double>& u_tilde, const Discretization& disc,
                             double dt) {
  const OperatorSet& ops = disc.ops;
  const int nu = 2 * disc.velocity.n_dofs;
  const int np = disc.pressure.n_dofs;
  const int n = nu + np + 1;
  DenseMatrix K(n, n);
  const DenseMatrix M = DenseMatrix::from_csr(ops.M_u_c);
  const DenseMatrix B = DenseMatrix::from_csr(ops.B0);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nu; ++j) K(i, j) = M(i, j);
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < nu; ++i) {
      K(i, nu + j) = -dt * B(j, i);
      K(nu + j, i) = B(j, i);
    }
  const std::vector<double> e = ops.M_p.apply(std::vector<double>(np, 1.0));
  for (int j = 0; j < np; ++j) {
    K(nu + j, nu + np) = e[j];
    K(nu + np, nu + j) = e[j];
  }
  std::vector<double> rhs(n, 0.0);
  const std::vector<double> Mu = ops.M_u_c.apply(u_tilde);
  for (int i = 0; i < nu; ++i) rhs[i] = Mu[i];
  const std::vector<double> sol = DenseLu(K).solve(rhs);
  ProjectionResult out;
  out.u.a.assign(sol.begin(), sol.begin() + nu);
  out.p.assign(sol.begin() + nu, sol.begin() + nu + np);
  ops.subtract_l2_mean(out.p);
  return out;
}

// Monolithic dense solve of the incremental projection on U_h + grad(P_h).
// Two borders pin the constant modes: the pressure mean and the mean of the
// gradient-part potential (both vanish at the true solution).
ProjectionResult dense_poisson(const std::vector<double>& u_tilde,
                               const std::vector<double>& p_prev, const Discretization& disc,
                               double dt) {
  const OperatorSet& ops = disc.ops;
  const int nu = 2 * disc.velocity.n_dofs;
  const int np = disc.pressure.n_dofs;
  const int n = nu + 2 * np + 2;  // unknowns: a_u, c_u, p_new, lambda_p, lambda_c
  DenseMatrix K(n, n);
  const DenseMatrix M = DenseMatrix::from_csr(ops.M_u_c);
  const DenseMatrix G = DenseMatrix::from_csr(ops.G0);
  const DenseMatrix Ap = DenseMatrix::from_csr(ops.A_p);

  // rows v in U_h: M a_u + G c_u + dt G p_new = M a_u~ + dt G p_prev
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nu; ++j) K(i, j) = M(i, j);
    for (int j = 0; j < np; ++j) {
      K(i, nu + j) = G(i, j);
      K(i, nu + np + j) = dt * G(i, j);
    }
  }
  const std::vector<double> e = ops.M_p.apply(std::vector<double>(np, 1.0));
  // rows grad psi: G^T a_u + A_p c_u + dt A_p p_new + lambda_c e = ...
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < nu; ++j) K(nu + i, j) = G(j, i);
    for (int j = 0; j < np; ++j) {
      K(nu + i, nu + j) = Ap(i, j);
      K(nu + i, nu + np + j) = dt * Ap(i, j);
    }
    K(nu + i, n - 1) = e[i];
  }
  // constraint rows q: G^T a_u + A_p c_u + lambda_p e = 0
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < nu; ++j) K(nu + np + i, j) = G(j, i);
    for (int j = 0; j < np; ++j) K(nu + np + i, nu + j) = Ap(i, j);
    K(nu + np + i, n - 2) = e[i];
  }
  for (int j = 0; j < np; ++j) K(n - 2, nu + np + j) = e[j];  // e^T p_new = 0
  for (int j = 0; j < np; ++j) K(n - 1, nu + j) = e[j];       // e^T c_u = 0

  std::vector<double> rhs(n, 0.0);
  const std::vector<double> Mu = ops.M_u_c.apply(u_tilde);
  std::vector<double> Gp = ops.G0.apply(p_prev);
  for (int i = 0; i < nu; ++i) rhs[i] = Mu[i] + dt * Gp[i];
  const std::vector<double> Gtu = ops.G0.apply_transposed(u_tilde);
  const std::vector<double> App = ops.A_p.apply(p_prev);
  for (int i = 0; i < np; ++i) rhs[nu + i] = Gtu[i] + dt * App[i];

  const std::vector<double> sol = DenseLu(K).solve(rhs);
  ProjectionResult out;
  out.u.a.assign(sol.begin(), sol.begin() + nu);
  out.u.c.assign(sol.begin() + nu, sol.begin() + nu + np);
  out.p.assign(sol.begin() + nu + np, sol.begin() + nu + 2 * np);
  ops.subtract_l2_mean(out.p);
  return out;
}

} // namespace

State dense_oracle_step(const State& state, const Discretization& disc,
                        const SimulationConfig& cfg) {
  const int nu = 2 * disc.velocity.n_dofs;
  if (nu > kOracleMaxVelocityDofs)
    throw std::invalid_argument("dense_oracle_step: mesh exceeds the oracle size guard");
  const OperatorSet& ops = disc.ops;

  std::vector<double> F;
  if (cfg.forcing)
    F = assemble_forcing(cfg.forcing, disc.velocity, state.m, cfg.dt, cfg.n_time_quad);

  // prediction by dense LU on the same assembled operator
  FEFunction w;
  w.space = &disc.velocity;
  w.arity = 2;
  w.coeffs = state.u_tilde;
  const CsrMatrix N_s = assemble_convection(w, disc.velocity, disc.velocity);
  CsrMatrix S_s = add_same_pattern(1.0 / cfg.dt, ops.M_s, cfg.mu, ops.A_s);
  S_s = add_same_pattern(1.0, S_s, 1.0, N_s);
  CsrMatrix S = block_diag2(S_s);
  S.eliminate_dofs(disc.velocity.vector_boundary_dofs());

  std::vector<double> rhs = ops.M_u.apply(state.u.a);
  if (state.u.composite()) {
    const std::vector<double> gc = ops.G0.apply(state.u.c);
    for (int i = 0; i < nu; ++i) rhs[i] += gc[i];
  }
  for (int i = 0; i < nu; ++i) rhs[i] /= cfg.dt;
  if (!F.empty())
    for (int i = 0; i < nu; ++i) rhs[i] += F[i];
  if (cfg.scheme == SchemeKind::incremental_poisson) {
    const std::vector<double> btp = ops.B0.apply_transposed(state.p);
    for (int i = 0; i < nu; ++i) rhs[i] += btp[i];
  }
  for (int d : disc.velocity.vector_boundary_dofs()) rhs[d] = 0.0;

  State next;
  next.m = state.m + 1;
  next.t = state.t + cfg.dt;
  next.u_tilde = DenseLu(DenseMatrix::from_csr(S)).solve(rhs);

  ProjectionResult proj = (cfg.scheme == SchemeKind::chorin_darcy)
                              ? dense_darcy(next.u_tilde, disc, cfg.dt)
                              : dense_poisson(next.u_tilde, state.p, disc, cfg.dt);
  next.u = std::move(proj.u);
  next.p = std::move(proj.p);
  return next;
}

std::string StudyReport::to_csv() const {
  std::string out = "level,h,dt,err_l2l2,err_terminal,rate_l2l2,rate_terminal\n";
  char buf[256];
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double r1 = i > 0 ? rates_l2l2[i - 1] : 0.0;
    const double r2 = i > 0 ? rates_terminal[i - 1] : 0.0;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, levels[i].h,
                  levels[i].dt, levels[i].err_l2l2, levels[i].err_terminal, r1, r2);
    out += buf;
  }
  return out;
}

std::string StudyReport::to_text() const {
  std::string out = "convergence study: case " + case_name + ", scheme " + scheme_name(scheme) + "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-12s %-12s %-14s %-14s %-8s %-8s\n", "level", "h", "dt",
                "err_L2L2", "err_terminal", "rate", "rate_T");
  out += buf;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i == 0)
      std::snprintf(buf, sizeof buf, "%-6zu %-12.4g %-12.4g %-14.6g %-14.6g %-8s %-8s\n", i,
                    levels[i].h, levels[i].dt, levels[i].err_l2l2, levels[i].err_terminal, "-",
                    "-");
    else
      std::snprintf(buf, sizeof buf, "%-6zu %-12.4g %-12.4g %-14.6g %-14.6g %-8.3f %-8.3f\n", i,
                    levels[i].h, levels[i].dt, levels[i].err_l2l2, levels[i].err_terminal,
                    rates_l2l2[i - 1], rates_terminal[i - 1]);
    out += buf;
  }
  return out;
}

StudyReport convergence_study(const ManufacturedCase& mcase, const StudySchedule& schedule,
                              SchemeKind scheme) {
  StudyReport rep;
  rep.scheme = scheme;
  rep.case_name = mcase.name;

  const TriMesh mesh = generate_structured(schedule.nx, schedule.nx);
  const Discretization disc(mesh);
  for (double dt : schedule.dts)
    if (check_coupling(mesh.h, dt, 2, schedule.safety) != CouplingStatus::ok)
      std::fprintf(stderr, "warning: study level dt=%g violates the h^k vs sqrt(dt) coupling\n",
                   dt);

  for (double dt : schedule.dts) {
    SimulationConfig cfg;
    cfg.scheme = scheme;
    cfg.mu = schedule.mu;
    cfg.T = schedule.T;
    cfg.dt = dt;
    cfg.forcing = mcase.forcing(schedule.mu);
    cfg.initial = [&mcase](double x, double y) { return mcase.u(0.0, x, y); };
    cfg.forcing_name = mcase.name;
    cfg.initial_name = mcase.name;

    const RunResult res = run(cfg, disc);
    const int N = cfg.n_steps();

    StudyLevel lvl;
    lvl.h = mesh.h;
    lvl.dt = dt;

    // terminal error of the intermediate velocity
    FEFunction uN;
    uN.space = &disc.velocity;
    uN.arity = 2;
    uN.coeffs = res.states.back().u_tilde;
    lvl.err_terminal = l2_error(uN, [&](double x, double y) { return mcase.u(cfg.T, x, y); });

    // discrete L2(0,T;L2) error of the piecewise-constant u~ interpolant,
    // 4-point Gauss in time per interval
    std::vector<double> tq, tw;
    gauss_legendre_01(4, tq, tw);
    double err2 = 0.0;
    for (int m = 0; m < N; ++m) {
      FEFunction um;
      um.space = &disc.velocity;
      um.arity = 2;
      um.coeffs = res.states[m + 1].u_tilde;
      for (std::size_t s = 0; s < tq.size(); ++s) {
        const double t = (m + tq[s]) * dt;
        const double e = l2_error(um, [&](double x, double y) { return mcase.u(t, x, y); });
        err2 += tw[s] * dt * e * e;
      }
    }
    lvl.err_l2l2 = std::sqrt(err2);
    rep.levels.push_back(lvl);
  }

  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    rep.rates_l2l2.push_back(std::log2(rep.levels[i - 1].err_l2l2 / rep.levels[i].err_l2l2));
    rep.rates_terminal.push_back(
        std::log2(rep.levels[i - 1].err_terminal / rep.levels[i].err_terminal));
  }
  return rep;
}

} // namespace projflow
