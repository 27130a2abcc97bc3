#ifndef PROJFLOW_DIAGNOSTICS_HPP
#define PROJFLOW_DIAGNOSTICS_HPP

#include "projflow/state.hpp"

#include <string>
#include <vector>

namespace projflow {

// One row per time level. Row 0 carries the initial energy; row m >= 1
// carries the terms of step m-1 -> m and the residual of the discrete
// energy identity (the jump2 column enters the residual only for the
// Darcy scheme; the incremental identity does not contain it).
struct LedgerRow {
  int m = 0;
  double t = 0.0;
  double E = 0.0;
  double jump1 = 0.0;        // 1/2 ||u~^{m} - u^{m-1}||^2
  double jump2 = 0.0;        // 1/2 ||u^{m} - u~^{m}||^2
  double dissipation = 0.0;  // mu dt ||grad u~^{m}||^2
  double work = 0.0;         // dt (f^{m-1}, u~^{m})
  double residual = 0.0;
};

struct EnergyLedger {
  SchemeKind scheme = SchemeKind::chorin_darcy;
  double dt = 0.0;
  std::vector<LedgerRow> rows;

  std::string to_csv() const;  // fixed column order, 17 significant digits
  double max_row_residual_rel() const;
  // residual of the summed identity, accumulated with compensated summation
  double cumulative_residual() const;
  double cumulative_residual_rel() const;
};

LedgerRow ledger_append(EnergyLedger& ledger, const State& prev, const State& next,
                        const std::vector<double>& forcing_vec, const OperatorSet& ops,
                        double mu);

// Time interpolants of a stored trajectory. Right-open intervals for u_h and
// u_bar, left-open for u_tilde and p (u_tilde(0) = u^0, p(0) = p^0); at t = T
// the last interval is extended closed. u_hat needs level m+2, so past
// t^{N-1} it continues constantly with the last tilde level; norms exclude
// that stretch.
class Interpolants {
 public:
  Interpolants(const std::vector<State>& states, double dt);
  VelocityValue u(double t) const;
  std::vector<double> u_bar(double t) const;
  VelocityValue u_tilde(double t) const;
  VelocityValue u_hat(double t) const;
  std::vector<double> pressure(double t) const;
  // step index m whose averaged forcing f^m is active at t (left-open
  // intervals, like u_tilde); feed it to assemble_forcing to realize f_h(t)
  int forcing_level(double t) const;

 private:
  const std::vector<State>* states_;
  double dt_;
  int interval_right_open(double t) const;
  int level_left_open(double t) const;
};

// Exact time integrals over [0,T] of the squared interpolant differences;
// the final interval (which would need level N+1) is excluded from the
// norms involving u_hat.
struct InterpolantDifferenceNorms {
  double u_minus_uhat = 0.0;      // int ||u_h - u^_h||^2 dt
  double uhat_minus_utilde = 0.0; // int ||u^_h - u~_h||^2 dt
  double ubar_minus_utilde = 0.0; // int ||u-_h - u~_h||^2 dt
};
InterpolantDifferenceNorms interpolant_difference_norms(const std::vector<State>& states,
                                                        const OperatorSet& ops, double dt);

// max over pressure basis q of |(u, grad q)| / ||q||_H1
double weak_div_residual(const VelocityValue& u, const OperatorSet& ops);

struct GronwallInput {
  std::vector<double> a, b;  // nonnegative sequences
  double mu = 0.0, dt = 0.0, beta = 0.0;
};
// Right side of the discrete Gronwall bound for each n:
//   exp(mu dt n) a_0 + beta sum_{m<n} exp(mu dt (n-m)) b_m
std::vector<double> gronwall_bound(const GronwallInput& in);
// Does a satisfy the recursion a_n <= (1+mu dt)(a_{n-1} + beta b_{n-1})?
bool gronwall_hypothesis_holds(const GronwallInput& in, double slack = 1e-12);
// Checks a_n <= bound_n for all n; requires the hypothesis to hold.
bool gronwall_verify(const GronwallInput& in, double slack = 1e-9);

} // namespace projflow

#endif
