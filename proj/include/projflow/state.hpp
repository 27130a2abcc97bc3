#ifndef PROJFLOW_STATE_HPP
#define PROJFLOW_STATE_HPP

#include "projflow/assembly.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace projflow {

enum class SchemeKind { chorin_darcy, incremental_poisson };

std::string scheme_name(SchemeKind k);
SchemeKind scheme_from_name(const std::string& name);

struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : std::runtime_error(msg), field(std::move(f)) {}
};

// Velocity in U_h + grad(P_h): u = sum a_i phi_i + sum c_j grad psi_j.
// Plain U_h fields leave c empty. Inner products against U_h test functions
// are M_u a + G c; against grad(P_h) they are G^T a + A_p c.
struct VelocityValue {
  std::vector<double> a;
  std::vector<double> c;
  bool composite() const { return !c.empty(); }
};

VelocityValue vel_sub(const VelocityValue& x, const VelocityValue& y);
double vel_inner(const OperatorSet& ops, const VelocityValue& x, const VelocityValue& y);
double vel_norm2(const OperatorSet& ops, const VelocityValue& x);

struct State {
  int m = 0;
  double t = 0.0;
  std::vector<double> u_tilde;  // intermediate velocity, zero trace
  VelocityValue u;              // corrected velocity
  std::vector<double> p;        // pressure, zero L2 mean
};

struct SimulationConfig {
  SchemeKind scheme = SchemeKind::chorin_darcy;
  double mu = 1.0;
  double T = 1.0;
  double dt = 0.1;
  int coupling_exponent = 2;    // element degree k in the h^k vs sqrt(dt) rule
  TimeVectorField forcing;      // null means zero
  VectorField initial;          // null means zero
  SolverConfig solver;
  int n_time_quad = 4;
  std::string forcing_name = "zero";
  std::string initial_name = "zero";

  int n_steps() const;          // validates that T/dt is an integer
};

// Throws ConfigError naming the offending field.
void validate_config(const SimulationConfig& cfg);

} // namespace projflow

#endif
