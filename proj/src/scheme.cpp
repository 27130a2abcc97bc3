#include "projflow/scheme.hpp"

#include "projflow/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace projflow {

std::string scheme_name(SchemeKind k) {
  return k == SchemeKind::chorin_darcy ? "chorin_darcy" : "incremental_poisson";
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "chorin_darcy") return SchemeKind::chorin_darcy;
  if (name == "incremental_poisson") return SchemeKind::incremental_poisson;
  throw ConfigError("scheme", "unknown scheme '" + name + "'");
}

VelocityValue vel_sub(const VelocityValue& x, const VelocityValue& y) {
  VelocityValue d;
  d.a.resize(std::max(x.a.size(), y.a.size()), 0.0);
  for (std::size_t i = 0; i < x.a.size(); ++i) d.a[i] = x.a[i];
  for (std::size_t i = 0; i < y.a.size(); ++i) d.a[i] -= y.a[i];
  if (x.composite() || y.composite()) {
    d.c.resize(std::max(x.c.size(), y.c.size()), 0.0);
    for (std::size_t i = 0; i < x.c.size(); ++i) d.c[i] = x.c[i];
    for (std::size_t i = 0; i < y.c.size(); ++i) d.c[i] -= y.c[i];
  }
  return d;
}

double vel_inner(const OperatorSet& ops, const VelocityValue& x, const VelocityValue& y) {
  double s = kernels::dot(x.a, ops.M_u.apply(y.a));
  if (y.composite()) s += kernels::dot(x.a, ops.G0.apply(y.c));
  if (x.composite()) s += kernels::dot(x.c, ops.G0.apply_transposed(y.a));
  if (x.composite() && y.composite()) s += kernels::dot(x.c, ops.A_p.apply(y.c));
  return s;
}

double vel_norm2(const OperatorSet& ops, const VelocityValue& x) { return vel_inner(ops, x, x); }

int SimulationConfig::n_steps() const {
  const double ratio = T / dt;
  const long long n = std::llround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("dt", "T/dt must be a positive integer (T=" + std::to_string(T) +
                                ", dt=" + std::to_string(dt) + ")");
  return static_cast<int>(n);
}

void validate_config(const SimulationConfig& cfg) {
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) throw ConfigError("mu", "mu must be finite and positive");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ConfigError("T", "T must be finite and positive");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt", "dt must be finite and positive");
  if (cfg.solver.rel_tol <= 0.0 || cfg.solver.abs_tol <= 0.0)
    throw ConfigError("solver", "solver tolerances must be positive");
  if (cfg.solver.max_iter < 1) throw ConfigError("solver", "max_iter must be >= 1");
  if (cfg.n_time_quad < 1) throw ConfigError("n_time_quad", "n_time_quad must be >= 1");
  if (cfg.coupling_exponent < 1) throw ConfigError("coupling_exponent", "must be >= 1");
  cfg.n_steps();
}

ProjectionResult projection_step_darcy(const std::vector<double>& u_tilde,
                                       const Discretization& disc, double dt,
                                       const SolverConfig& solver) {
  const OperatorSet& ops = disc.ops;
  DarcySolution sol =
      solve_darcy_saddle(ops.M_u_c_chol, ops.B0, u_tilde, dt, solver, ops.M_p, ops.area);
  ProjectionResult out;
  out.u.a = std::move(sol.u);
  out.p = std::move(sol.p);
  return out;
}

ProjectionResult projection_step_poisson(const std::vector<double>& u_tilde,
                                         const std::vector<double>& p_prev,
                                         const Discretization& disc, double dt,
                                         const SolverConfig& solver) {
  const OperatorSet& ops = disc.ops;
  const int np = disc.pressure.n_dofs;
  // A_p p = A_p p_prev - (div u~, .)/dt, with (div u~, q) = -(u~, grad q)
  std::vector<double> rhs = ops.A_p.apply(p_prev);
  const std::vector<double> gtu = ops.G0.apply_transposed(u_tilde);
  for (int j = 0; j < np; ++j) rhs[j] += gtu[j] / dt;
  std::vector<double> p = solve_cg(ops.A_p, rhs, solver, /*deflate_constants=*/true);
  ops.subtract_l2_mean(p);

  ProjectionResult out;
  out.u.a = u_tilde;
  out.u.c.resize(np);
  for (int j = 0; j < np; ++j) out.u.c[j] = -dt * (p[j] - p_prev[j]);
  out.p = std::move(p);
  return out;
}

State init_state(const SimulationConfig& cfg, const Discretization& disc) {
  State st;
  st.m = 0;
  st.t = 0.0;

  if (cfg.initial) {
    FEFunction u0 = l2_project(cfg.initial, disc.velocity, disc.ops.M_s_c);
    st.u_tilde = std::move(u0.coeffs);
  } else {
    st.u_tilde.assign(2 * disc.velocity.n_dofs, 0.0);
  }

  ProjectionResult proj =
      (cfg.scheme == SchemeKind::chorin_darcy)
          ? projection_step_darcy(st.u_tilde, disc, cfg.dt, cfg.solver)
          : projection_step_poisson(st.u_tilde, std::vector<double>(disc.pressure.n_dofs, 0.0),
                                    disc, cfg.dt, cfg.solver);
  st.u = std::move(proj.u);
  st.p = std::move(proj.p);
  return st;
}

namespace {

// prediction right side tested against interior velocity functions
std::vector<double> prediction_rhs(const State& state, const Discretization& disc,
                                   const SimulationConfig& cfg,
                                   const std::vector<double>& forcing_vec) {
  const OperatorSet& ops = disc.ops;
  std::vector<double> rhs = ops.M_u.apply(state.u.a);
  if (state.u.composite()) {
    const std::vector<double> gc = ops.G0.apply(state.u.c);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += gc[i];
  }
  const double inv_dt = 1.0 / cfg.dt;
  for (double& v : rhs) v *= inv_dt;
  if (!forcing_vec.empty())
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += forcing_vec[i];
  if (cfg.scheme == SchemeKind::incremental_poisson) {
    const std::vector<double> btp = ops.B0.apply_transposed(state.p);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += btp[i];
  }
  for (int d : disc.velocity.vector_boundary_dofs()) rhs[d] = 0.0;
  return rhs;
}

} // namespace

std::vector<double> prediction_step(const State& state, const Discretization& disc,
                                    const SimulationConfig& cfg,
                                    const std::vector<double>& forcing_vec) {
  const OperatorSet& ops = disc.ops;
  FEFunction w;
  w.space = &disc.velocity;
  w.arity = 2;
  w.coeffs = state.u_tilde;
  const CsrMatrix& N_s = ops.convection->assemble(w);

  CsrMatrix S_s = add_same_pattern(1.0 / cfg.dt, ops.M_s, cfg.mu, ops.A_s);
  S_s = add_same_pattern(1.0, S_s, 1.0, N_s);
  CsrMatrix S = block_diag2(S_s);
  S.eliminate_dofs(disc.velocity.vector_boundary_dofs());

  const std::vector<double> rhs = prediction_rhs(state, disc, cfg, forcing_vec);
  try {
    return solve_prediction(S, rhs, cfg.solver);
  } catch (const SolverError&) {
    if (S.rows <= kDirectSizeLimit) return solve_direct(S, rhs);
    throw;
  }
}

CouplingStatus check_coupling(double h, double dt, int k, double safety) {
  if (h <= 0.0 || dt <= 0.0 || k < 1 || safety <= 0.0)
    throw std::invalid_argument("check_coupling: positive inputs required");
  return std::pow(h, k) > safety * std::sqrt(dt) ? CouplingStatus::warn : CouplingStatus::ok;
}

RunResult run(const SimulationConfig& cfg, const Discretization& disc,
              const StepCallback& callback) {
  validate_config(cfg);
  const int N = cfg.n_steps();
  const OperatorSet& ops = disc.ops;

  RunResult res;
  res.ledger.scheme = cfg.scheme;
  res.ledger.dt = cfg.dt;
  res.states.reserve(N + 1);
  try {
    res.states.push_back(init_state(cfg, disc));
  } catch (const SolverError& e) {
    throw SolverError(std::string("step 0 (initial projection): ") + e.what(), e.residual,
                      e.iterations);
  }
  if (callback) callback(res.states.front());

  {
    LedgerRow row0;
    row0.m = 0;
    row0.t = 0.0;
    row0.E = 0.5 * vel_norm2(ops, res.states[0].u);
    if (cfg.scheme == SchemeKind::incremental_poisson)
      row0.E += 0.5 * cfg.dt * cfg.dt * ops.p_grad_norm2(res.states[0].p);
    res.ledger.rows.push_back(row0);
  }

  // constants of the per-step pressure bound, measured once per mesh
  if (cfg.scheme == SchemeKind::chorin_darcy) {
    res.checks.beta_h = estimate_lbb(ops.A_u_c, ops.B0, ops.M_p, cfg.solver);
    res.checks.c_poincare = poincare_constant(ops.M_u_mask, ops.A_u_c, cfg.solver);
  }

  std::vector<double> fnorms;  // ||f^m||_L2 per step, for the Gronwall bound
  fnorms.reserve(N);
  double total_work = 0.0;

  for (int m = 0; m < N; ++m) {
    const State& prev = res.states.back();
    std::vector<double> F;
    if (cfg.forcing) F = assemble_forcing(cfg.forcing, disc.velocity, m, cfg.dt, cfg.n_time_quad);
    fnorms.push_back(cfg.forcing ? forcing_time_average_norm(cfg.forcing, *disc.mesh, m, cfg.dt,
                                                             cfg.n_time_quad)
                                 : 0.0);

    State next;
    next.m = m + 1;
    next.t = (m + 1) * cfg.dt;
    try {
      next.u_tilde = prediction_step(prev, disc, cfg, F);
      ProjectionResult proj =
          (cfg.scheme == SchemeKind::chorin_darcy)
              ? projection_step_darcy(next.u_tilde, disc, cfg.dt, cfg.solver)
              : projection_step_poisson(next.u_tilde, prev.p, disc, cfg.dt, cfg.solver);
      next.u = std::move(proj.u);
      next.p = std::move(proj.p);
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(m + 1) + ": " + e.what(), e.residual,
                        e.iterations);
    }

    const LedgerRow row = ledger_append(res.ledger, prev, next, F, ops, cfg.mu);
    total_work += row.work;

    // per-step invariants
    {
      const double ut2 = vel_norm2(ops, {next.u_tilde, {}});
      const double u2 = vel_norm2(ops, next.u);
      const double d2 = vel_norm2(ops, vel_sub({next.u_tilde, {}}, next.u));
      const double ortho = std::abs(ut2 - u2 - d2) / std::max(ut2, 1e-300);
      res.checks.max_ortho_residual_rel = std::max(res.checks.max_ortho_residual_rel, ortho);

      const double divres = weak_div_residual(next.u, ops);
      res.checks.max_div_residual = std::max(res.checks.max_div_residual, divres);

      if (cfg.scheme == SchemeKind::chorin_darcy) {
        const double pnorm = std::sqrt(ops.p_mass_norm2(next.p));
        const double corr =
            std::sqrt(vel_norm2(ops, vel_sub(next.u, {next.u_tilde, {}}))) / cfg.dt;
        const double bound = res.checks.c_poincare / res.checks.beta_h * corr;
        const double ratio = pnorm / std::max(bound, 1e-300);
        res.checks.max_pressure_bound_ratio = std::max(res.checks.max_pressure_bound_ratio, ratio);
        if (pnorm > bound * (1.0 + 1e-8)) ++res.checks.pressure_bound_violations;
      }
    }

    res.states.push_back(std::move(next));
    if (callback) callback(res.states.back());
  }

  res.checks.max_ledger_residual_rel = res.ledger.max_row_residual_rel();
  res.checks.cumulative_residual_rel = res.ledger.cumulative_residual_rel();
  res.checks.work_free = (total_work == 0.0);
  if (res.checks.work_free) {
    const double slack = 1e-11 * std::max(res.ledger.rows.front().E, 1e-30);
    for (std::size_t i = 1; i < res.ledger.rows.size(); ++i)
      if (res.ledger.rows[i].E > res.ledger.rows[i - 1].E + slack)
        res.checks.energy_nonincreasing = false;
  }

  // Gronwall a priori bound, exp(2 M dt)(E0 + dt/2 sum ||f^m||^2); the
  // constant-2 derivation needs dt <= 1/2 unless the forcing work vanishes
  if (cfg.dt <= 0.5 || res.checks.work_free) {
    res.checks.gronwall_checked = true;
    const double E0 = res.ledger.rows.front().E;
    double fsum = 0.0;
    for (int M = 1; M <= N; ++M) {
      fsum += 0.5 * cfg.dt * fnorms[M - 1] * fnorms[M - 1];
      const double bound = std::exp(2.0 * M * cfg.dt) * (E0 + fsum);
      const double slack = 1e-9 * std::max(bound, 1e-30);
      const double ut2 = 0.5 * vel_norm2(ops, {res.states[M].u_tilde, {}});
      if (res.ledger.rows[M].E > bound + slack) res.checks.gronwall_ok = false;
      if (cfg.scheme == SchemeKind::chorin_darcy && ut2 > bound + slack)
        res.checks.gronwall_ok = false;
    }
  }

  return res;
}

} // namespace projflow
