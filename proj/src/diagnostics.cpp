#include "projflow/diagnostics.hpp"

#include "projflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace projflow {

std::string EnergyLedger::to_csv() const {
  std::string out = "m,t,E,jump1,jump2,dissipation,work,residual\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.m, r.t, r.E,
                  r.jump1, r.jump2, r.dissipation, r.work, r.residual);
    out += buf;
  }
  return out;
}

double EnergyLedger::max_row_residual_rel() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const LedgerRow& r = rows[i];
    const double maxcol = std::max({std::abs(r.E), std::abs(rows[i - 1].E), r.jump1, r.jump2,
                                    r.dissipation, std::abs(r.work)});
    worst = std::max(worst, std::abs(r.residual) / std::max(maxcol, 1e-300));
  }
  return worst;
}

double EnergyLedger::cumulative_residual() const {
  // Kahan-compensated sum of the per-step identities
  double sum = 0.0, comp = 0.0;
  auto add = [&](double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  const bool darcy = (scheme == SchemeKind::chorin_darcy);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    add(rows[i].jump1);
    if (darcy) add(rows[i].jump2);
    add(rows[i].dissipation);
    add(-rows[i].work);
  }
  if (rows.empty()) return 0.0;
  add(rows.back().E);
  add(-rows.front().E);
  return sum;
}

double EnergyLedger::cumulative_residual_rel() const {
  double scale = 0.0;
  for (const auto& r : rows)
    scale = std::max({scale, std::abs(r.E), r.jump1, r.jump2, r.dissipation, std::abs(r.work)});
  return std::abs(cumulative_residual()) / std::max(scale, 1e-300);
}

LedgerRow ledger_append(EnergyLedger& ledger, const State& prev, const State& next,
                        const std::vector<double>& forcing_vec, const OperatorSet& ops,
                        double mu) {
  if (next.m != prev.m + 1) throw std::invalid_argument("ledger_append: states not consecutive");
  const double dt = ledger.dt;
  LedgerRow row;
  row.m = next.m;
  row.t = next.t;
  row.E = 0.5 * vel_norm2(ops, next.u);
  if (ledger.scheme == SchemeKind::incremental_poisson)
    row.E += 0.5 * dt * dt * ops.p_grad_norm2(next.p);
  row.jump1 = 0.5 * vel_norm2(ops, vel_sub({next.u_tilde, {}}, prev.u));
  row.jump2 = 0.5 * vel_norm2(ops, vel_sub(next.u, {next.u_tilde, {}}));
  row.dissipation = mu * dt * ops.vel_grad_norm2(next.u_tilde);
  row.work = forcing_vec.empty() ? 0.0 : dt * kernels::dot(forcing_vec, next.u_tilde);

  const double E_prev = ledger.rows.empty() ? 0.0 : ledger.rows.back().E;
  row.residual = row.E - E_prev + row.jump1 + row.dissipation - row.work;
  if (ledger.scheme == SchemeKind::chorin_darcy) row.residual += row.jump2;

  ledger.rows.push_back(row);
  return row;
}

Interpolants::Interpolants(const std::vector<State>& states, double dt)
    : states_(&states), dt_(dt) {
  if (states.size() < 2) throw std::invalid_argument("Interpolants: need at least two levels");
}

// Node snap tolerance: times within 1e-9 steps of a node count as the node,
// which absorbs the rounding of t = m*dt at any realistic step count.
namespace {
constexpr double kNodeSnap = 1e-9;
}

int Interpolants::interval_right_open(double t) const {
  const int N = static_cast<int>(states_->size()) - 1;
  int m = static_cast<int>(std::floor(t / dt_ + kNodeSnap));
  return std::clamp(m, 0, N - 1);
}

int Interpolants::level_left_open(double t) const {
  // value on (t^m, t^{m+1}] is level m+1
  const int N = static_cast<int>(states_->size()) - 1;
  const int m = static_cast<int>(std::ceil(t / dt_ - kNodeSnap));
  return std::clamp(m, 0, N);
}

VelocityValue Interpolants::u(double t) const {
  const int m = interval_right_open(t);
  double s = std::clamp((t - m * dt_) / dt_, 0.0, 1.0);
  if (s < kNodeSnap) s = 0.0;  // exact node values at the nodes
  const VelocityValue& a = (*states_)[m].u;
  const VelocityValue& b = (*states_)[m + 1].u;
  if (s > 1.0 - kNodeSnap) return b;
  VelocityValue d = vel_sub(b, a);
  VelocityValue out = a;
  out.a.resize(d.a.size(), 0.0);
  for (std::size_t i = 0; i < d.a.size(); ++i) out.a[i] += s * d.a[i];
  if (d.composite()) {
    out.c.resize(d.c.size(), 0.0);
    for (std::size_t i = 0; i < d.c.size(); ++i) out.c[i] += s * d.c[i];
  }
  return out;
}

std::vector<double> Interpolants::u_bar(double t) const {
  return (*states_)[interval_right_open(t)].u_tilde;
}

VelocityValue Interpolants::u_tilde(double t) const {
  const int lvl = level_left_open(t);
  if (lvl == 0) return (*states_)[0].u;  // convention u~_h(0) = u^0
  return {(*states_)[lvl].u_tilde, {}};
}

VelocityValue Interpolants::u_hat(double t) const {
  const int N = static_cast<int>(states_->size()) - 1;
  int m = interval_right_open(t);
  m = std::min(m, N - 2);  // final interval continues with the last level
  if (m < 0) throw std::invalid_argument("u_hat: trajectory too short (needs level m+2)");
  double s = std::clamp((t - m * dt_) / dt_, 0.0, 1.0);
  if (s < kNodeSnap) s = 0.0;
  const std::vector<double>& a = (*states_)[m + 1].u_tilde;
  const std::vector<double>& b = (*states_)[m + 2].u_tilde;
  if (s > 1.0 - kNodeSnap) return {b, {}};
  VelocityValue out;
  out.a.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.a[i] = a[i] + s * (b[i] - a[i]);
  return out;
}

std::vector<double> Interpolants::pressure(double t) const {
  return (*states_)[level_left_open(t)].p;
}

int Interpolants::forcing_level(double t) const {
  return std::max(level_left_open(t) - 1, 0);
}

InterpolantDifferenceNorms interpolant_difference_norms(const std::vector<State>& states,
                                                        const OperatorSet& ops, double dt) {
  const int N = static_cast<int>(states.size()) - 1;
  if (N < 2) throw std::invalid_argument("interpolant_difference_norms: need at least levels 0..2");
  InterpolantDifferenceNorms out;

  // int ||u-_h - u~_h||^2: piecewise constant, value u~^m - u~^{m+1} on interval m
  for (int m = 0; m < N; ++m) {
    VelocityValue d = vel_sub({states[m].u_tilde, {}}, {states[m + 1].u_tilde, {}});
    out.ubar_minus_utilde += dt * vel_norm2(ops, d);
  }

  // int ||u^_h - u~_h||^2: linear-in-s difference s (u~^{m+2} - u~^{m+1})
  for (int m = 0; m + 2 <= N; ++m) {
    VelocityValue d = vel_sub({states[m + 2].u_tilde, {}}, {states[m + 1].u_tilde, {}});
    out.uhat_minus_utilde += dt / 3.0 * vel_norm2(ops, d);
  }

  // int ||u_h - u^_h||^2 with u_h - u^_h = (1-s) a_m + s b_m,
  // a_m = u^m - u~^{m+1}, b_m = u^{m+1} - u~^{m+2}
  for (int m = 0; m + 2 <= N; ++m) {
    VelocityValue a = vel_sub(states[m].u, {states[m + 1].u_tilde, {}});
    VelocityValue b = vel_sub(states[m + 1].u, {states[m + 2].u_tilde, {}});
    const double aa = vel_norm2(ops, a), bb = vel_norm2(ops, b), ab = vel_inner(ops, a, b);
    out.u_minus_uhat += dt * (aa + bb + ab) / 3.0;
  }
  return out;
}

double weak_div_residual(const VelocityValue& u, const OperatorSet& ops) {
  std::vector<double> r = ops.G_raw.apply_transposed(u.a);
  if (u.composite()) {
    const std::vector<double> ac = ops.A_p.apply(u.c);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += ac[j];
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double h1 = std::sqrt(ops.M_p.at(static_cast<int>(j), static_cast<int>(j)) +
                                ops.A_p.at(static_cast<int>(j), static_cast<int>(j)));
    worst = std::max(worst, std::abs(r[j]) / h1);
  }
  return worst;
}

std::vector<double> gronwall_bound(const GronwallInput& in) {
  const std::size_t n = in.a.size();
  std::vector<double> bound(n);
  if (n == 0) return bound;
  bound[0] = in.a[0];
  for (std::size_t k = 1; k < n; ++k) {
    double s = std::exp(in.mu * in.dt * static_cast<double>(k)) * in.a[0];
    for (std::size_t m = 0; m < k; ++m)
      s += in.beta * std::exp(in.mu * in.dt * static_cast<double>(k - m)) *
           (m < in.b.size() ? in.b[m] : 0.0);
    bound[k] = s;
  }
  return bound;
}

bool gronwall_hypothesis_holds(const GronwallInput& in, double slack) {
  for (double v : in.a)
    if (v < 0.0) return false;
  for (double v : in.b)
    if (v < 0.0) return false;
  for (std::size_t k = 1; k < in.a.size(); ++k) {
    const double bprev = (k - 1 < in.b.size()) ? in.b[k - 1] : 0.0;
    const double rhs = (1.0 + in.mu * in.dt) * (in.a[k - 1] + in.beta * bprev);
    if (in.a[k] > rhs * (1.0 + slack) + slack) return false;
  }
  return true;
}

bool gronwall_verify(const GronwallInput& in, double slack) {
  if (!gronwall_hypothesis_holds(in, 1e-9)) return false;
  const std::vector<double> bound = gronwall_bound(in);
  for (std::size_t k = 0; k < in.a.size(); ++k)
    if (in.a[k] > bound[k] * (1.0 + slack) + slack) return false;
  return true;
}

} // namespace projflow
