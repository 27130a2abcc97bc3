#ifndef PROJFLOW_SCHEME_HPP
#define PROJFLOW_SCHEME_HPP

#include "projflow/diagnostics.hpp"
#include "projflow/state.hpp"

#include <functional>

namespace projflow {

// Taylor-Hood discretization of one mesh: P-k zero-trace velocity with P1
// zero-mean pressure, plus the assembled operator set. Addresses are stable
// (the object pins the space references used inside ops). Concurrent runs
// need distinct Discretizations: the convection value cache is per-object.
struct Discretization {
  const TriMesh* mesh;
  FESpace velocity;
  FESpace pressure;
  OperatorSet ops;

  explicit Discretization(const TriMesh& m, int velocity_degree = 2)
      : mesh(&m),
        velocity(build_space(m, velocity_degree, Constraint::zero_trace)),
        pressure(build_space(m, 1, Constraint::zero_mean)),
        ops(make_operator_set(velocity, pressure)) {}

  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;
};

State init_state(const SimulationConfig& cfg, const Discretization& disc);

// One prediction solve: (M/dt + N(u~^m) + mu A) u~ = M u^m / dt + F^m
// (+ B^T p^m for the incremental scheme). Falls back to the direct solver
// if the Krylov solve breaks down and the system is small enough.
std::vector<double> prediction_step(const State& state, const Discretization& disc,
                                    const SimulationConfig& cfg,
                                    const std::vector<double>& forcing_vec);

struct ProjectionResult {
  VelocityValue u;
  std::vector<double> p;
};
ProjectionResult projection_step_darcy(const std::vector<double>& u_tilde,
                                       const Discretization& disc, double dt,
                                       const SolverConfig& solver);
ProjectionResult projection_step_poisson(const std::vector<double>& u_tilde,
                                         const std::vector<double>& p_prev,
                                         const Discretization& disc, double dt,
                                         const SolverConfig& solver);

enum class CouplingStatus { ok, warn };
// Convergence-theory coupling h^k vs sqrt(dt); stability itself is
// unconditional, so a violation is only a warning.
CouplingStatus check_coupling(double h, double dt, int k, double safety = 1.0);

struct RunChecks {
  double max_ledger_residual_rel = 0.0;
  double cumulative_residual_rel = 0.0;
  double max_ortho_residual_rel = 0.0;   // projection orthogonality identity
  double max_div_residual = 0.0;         // weak divergence of corrected velocities
  double beta_h = 0.0;                   // Darcy runs only
  double c_poincare = 0.0;
  int pressure_bound_violations = 0;
  double max_pressure_bound_ratio = 0.0; // ||p|| / ((C_P/beta)||(u-u~)/dt||)
  bool gronwall_checked = false;
  bool gronwall_ok = true;
  bool work_free = true;                 // total forcing work is zero
  bool energy_nonincreasing = true;      // evaluated when work_free
};

struct RunResult {
  std::vector<State> states;  // N+1 levels
  EnergyLedger ledger;
  RunChecks checks;
};

using StepCallback = std::function<void(const State&)>;

// Executes N = T/dt steps, appending one ledger row per step and recording
// the per-step invariant checks. The first solver failure aborts with the
// step index in the error message.
RunResult run(const SimulationConfig& cfg, const Discretization& disc,
              const StepCallback& callback = {});

} // namespace projflow

#endif
