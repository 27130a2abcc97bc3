#ifndef PROJFLOW_VERIFICATION_HPP
#define PROJFLOW_VERIFICATION_HPP

#include "projflow/scheme.hpp"

#include <functional>
#include <string>
#include <vector>

namespace projflow {

// Exact solution pair with forcing engineered so that (u, p) solves the
// momentum equation for the given viscosity. u is divergence-free and
// vanishes on the boundary of the unit square; p has zero mean.
struct ManufacturedCase {
  std::string name;
  TimeVectorField u;
  TimeScalarField p;
  std::function<TimeVectorField(double mu)> forcing;
};

// (a) Stokes-regime polynomial stream-function case, (b) decaying
// trigonometric case. Both forcings carry the full convection term.
const std::vector<ManufacturedCase>& builtin_cases();
const ManufacturedCase& builtin_case(const std::string& name);

// |f - (u_t + (u.grad)u + grad p - mu lap u)| at one point, all derivatives
// by fourth-order central differences; independent check of the closed-form
// forcing.
double pde_residual_fd(const ManufacturedCase& c, double mu, double t, double x, double y);
// divergence of u at one point by the same stencils
double divergence_fd(const ManufacturedCase& c, double t, double x, double y);

// One full scheme step computed with dense factorizations and a monolithic
// saddle-point solve; only for meshes with <= kOracleMaxVelocityDofs.
constexpr int kOracleMaxVelocityDofs = 200;
State dense_oracle_step(const State& state, const Discretization& disc,
                        const SimulationConfig& cfg);

struct StudyLevel {
  double h = 0.0;
  double dt = 0.0;
  double err_l2l2 = 0.0;      // L2(0,T;L2) error of the u~ interpolant
  double err_terminal = 0.0;  // ||u~^N - u(T)||_L2
};

struct StudyReport {
  SchemeKind scheme;
  std::string case_name;
  std::vector<StudyLevel> levels;
  std::vector<double> rates_l2l2;      // log2 ratios of successive levels
  std::vector<double> rates_terminal;
  std::string to_csv() const;
  std::string to_text() const;
};

struct StudySchedule {
  int nx = 16;
  std::vector<double> dts;
  double mu = 0.05;
  double T = 0.5;
  double safety = 1.0;  // coupling check h^k <= safety sqrt(dt)
};

StudyReport convergence_study(const ManufacturedCase& mcase, const StudySchedule& schedule,
                              SchemeKind scheme);

} // namespace projflow

#endif
