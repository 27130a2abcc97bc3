#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projflow/diagnostics.hpp"
#include "projflow/fields.hpp"
#include "projflow/scheme.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace projflow;

TEST_CASE("ledger: zero states give a zero row") {
  const TriMesh mesh = generate_structured(2, 2);
  const Discretization disc(mesh);
  EnergyLedger ledger;
  ledger.scheme = SchemeKind::chorin_darcy;
  ledger.dt = 0.1;
  State a, b;
  a.m = 0;
  b.m = 1;
  b.t = 0.1;
  a.u_tilde.assign(2 * disc.velocity.n_dofs, 0.0);
  a.u.a = a.u_tilde;
  a.p.assign(disc.pressure.n_dofs, 0.0);
  b = a;
  b.m = 1;
  ledger.rows.push_back({});
  const LedgerRow row = ledger_append(ledger, a, b, {}, disc.ops, 1.0);
  CHECK(row.E == 0.0);
  CHECK(row.jump1 == 0.0);
  CHECK(row.jump2 == 0.0);
  CHECK(row.residual == 0.0);
}

TEST_CASE("ledger: one diffusion step closes the identity to solver precision") {
  const TriMesh mesh = generate_structured(4, 4);
  const Discretization disc(mesh);
  SimulationConfig cfg;
  cfg.scheme = SchemeKind::chorin_darcy;
  cfg.mu = 0.05;
  cfg.T = 0.01;
  cfg.dt = 0.01;
  cfg.initial = initial_field("case_a");

  const State st0 = init_state(cfg, disc);
  State frozen = st0;
  frozen.u_tilde.assign(frozen.u_tilde.size(), 0.0);  // no convection
  const auto ut = prediction_step(frozen, disc, cfg, {});
  State st1;
  st1.m = 1;
  st1.t = cfg.dt;
  st1.u_tilde = ut;
  ProjectionResult pr = projection_step_darcy(ut, disc, cfg.dt, cfg.solver);
  st1.u = pr.u;
  st1.p = pr.p;

  EnergyLedger ledger;
  ledger.scheme = cfg.scheme;
  ledger.dt = cfg.dt;
  LedgerRow row0;
  row0.E = 0.5 * vel_norm2(disc.ops, st0.u);
  ledger.rows.push_back(row0);
  const LedgerRow row = ledger_append(ledger, st0, st1, {}, disc.ops, cfg.mu);
  CHECK(std::abs(row.residual) <= 1e-10 * row0.E);
}

TEST_CASE("ledger: cumulative residual stays small over a hundred forced steps") {
  const TriMesh mesh = generate_structured(4, 4);
  const Discretization disc(mesh);
  SimulationConfig cfg;
  cfg.scheme = SchemeKind::chorin_darcy;
  cfg.mu = 0.05;
  cfg.T = 1.0;
  cfg.dt = 0.01;
  cfg.initial = initial_field("case_a");
  cfg.forcing = forcing_field("case_a", cfg.mu);
  const RunResult res = run(cfg, disc);
  REQUIRE(res.ledger.rows.size() == 101);
  CHECK(res.ledger.max_row_residual_rel() <= 1e-8);
  CHECK(res.ledger.cumulative_residual_rel() <= 1e-8);
}

TEST_CASE("ledger CSV format") {
  EnergyLedger ledger;
  ledger.scheme = SchemeKind::chorin_darcy;
  ledger.dt = 0.5;
  LedgerRow r;
  r.m = 0;
  r.t = 0.0;
  r.E = 1.0 / 3.0;
  ledger.rows.push_back(r);
  const std::string csv = ledger.to_csv();
  CHECK(csv.find("m,t,E,jump1,jump2,dissipation,work,residual\n") == 0);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);  // 17 significant digits
}

TEST_CASE("interpolants match the stored levels at the nodes") {
  const TriMesh mesh = generate_structured(2, 2);
  const Discretization disc(mesh);
  SimulationConfig cfg;
  cfg.scheme = SchemeKind::chorin_darcy;
  cfg.mu = 0.05;
  cfg.T = 0.04;
  cfg.dt = 0.01;
  cfg.initial = initial_field("case_a");
  cfg.forcing = forcing_field("case_a", cfg.mu);
  const RunResult res = run(cfg, disc);
  const Interpolants interp(res.states, cfg.dt);

  for (std::size_t m = 0; m < res.states.size(); ++m) {
    const double t = m * cfg.dt;
    const VelocityValue u = interp.u(t);
    for (std::size_t i = 0; i < u.a.size(); ++i) CHECK(u.a[i] == res.states[m].u.a[i]);
    if (m >= 1) {
      const VelocityValue ut = interp.u_tilde(t);
      for (std::size_t i = 0; i < ut.a.size(); ++i)
        CHECK(ut.a[i] == res.states[m].u_tilde[i]);
      const auto p = interp.pressure(t);
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == res.states[m].p[i]);
    }
  }
  // left-open conventions at t = 0
  const VelocityValue u0 = interp.u_tilde(0.0);
  for (std::size_t i = 0; i < u0.a.size(); ++i) CHECK(u0.a[i] == res.states[0].u.a[i]);
  const auto p0 = interp.pressure(0.0);
  for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0[i] == res.states[0].p[i]);
  // u_bar is the left tilde level on right-open intervals
  const auto ub = interp.u_bar(0.5 * cfg.dt);
  for (std::size_t i = 0; i < ub.size(); ++i) CHECK(ub[i] == res.states[0].u_tilde[i]);
  // u_hat starts each interval at the next tilde level
  const int N = static_cast<int>(res.states.size()) - 1;
  for (int m = 0; m + 2 <= N; ++m) {
    const VelocityValue uh = interp.u_hat(m * cfg.dt);
    for (std::size_t i = 0; i < uh.a.size(); ++i)
      CHECK(uh.a[i] == res.states[m + 1].u_tilde[i]);
  }
  // beyond the last full interval it continues with the final level
  const VelocityValue uT = interp.u_hat(N * cfg.dt);
  for (std::size_t i = 0; i < uT.a.size(); ++i) CHECK(uT.a[i] == res.states[N].u_tilde[i]);
  // the averaged forcing active on (t^m, t^{m+1}] is f^m
  CHECK(interp.forcing_level(0.5 * cfg.dt) == 0);
  CHECK(interp.forcing_level(cfg.dt) == 0);
  CHECK(interp.forcing_level(1.5 * cfg.dt) == 1);
}

TEST_CASE("interpolant node matching survives long trajectories") {
  // synthetic many-level trajectory; node times m*dt accumulate rounding
  const TriMesh mesh = generate_structured(1, 1);
  const Discretization disc(mesh);
  const double dt = 0.0071;  // not representable exactly in binary
  const int N = 500;
  std::vector<State> states(N + 1);
  for (int m = 0; m <= N; ++m) {
    states[m].m = m;
    states[m].t = m * dt;
    states[m].u_tilde.assign(2 * disc.velocity.n_dofs, static_cast<double>(m));
    states[m].u.a = states[m].u_tilde;
    states[m].p.assign(disc.pressure.n_dofs, static_cast<double>(m));
  }
  const Interpolants interp(states, dt);
  for (int m : {0, 1, 137, 499, 500}) {
    const double t = m * dt;
    CHECK(interp.u(t).a[0] == static_cast<double>(m));
    if (m >= 1) {
      CHECK(interp.u_tilde(t).a[0] == static_cast<double>(m));
      CHECK(interp.pressure(t)[0] == static_cast<double>(m));
    }
    if (m < 500) CHECK(interp.u_bar(t)[0] == static_cast<double>(m));
  }
}

TEST_CASE("interpolant difference norms against a hand-computed trajectory") {
  const TriMesh mesh = generate_structured(2, 2);
  const Discretization disc(mesh);
  const int nu = 2 * disc.velocity.n_dofs;
  testsupport::Lcg rng(53);
  std::vector<double> z(nu);
  for (auto& v : z) v = rng.unit();
  const double Z = vel_norm2(disc.ops, {z, {}});
  const double dt = 0.25;

  auto scaled = [&](double f) {
    std::vector<double> v(nu);
    for (int i = 0; i < nu; ++i) v[i] = f * z[i];
    return v;
  };
  // u~ levels: 0, z, 3z; u levels: 2z, 5z, 7z
  std::vector<State> states(3);
  states[0].m = 0;
  states[0].u_tilde = scaled(0.0);
  states[0].u.a = scaled(2.0);
  states[1].m = 1;
  states[1].t = dt;
  states[1].u_tilde = scaled(1.0);
  states[1].u.a = scaled(5.0);
  states[2].m = 2;
  states[2].t = 2 * dt;
  states[2].u_tilde = scaled(3.0);
  states[2].u.a = scaled(7.0);
  for (auto& s : states) s.p.assign(disc.pressure.n_dofs, 0.0);

  const InterpolantDifferenceNorms q = interpolant_difference_norms(states, disc.ops, dt);
  // || ubar - utilde ||^2 = dt (|0-1|^2 + |1-3|^2) Z = 5 dt Z
  CHECK(q.ubar_minus_utilde == doctest::Approx(5.0 * dt * Z).epsilon(1e-12));
  // || uhat - utilde ||^2 = dt/3 |3-1|^2 Z = 4/3 dt Z
  CHECK(q.uhat_minus_utilde == doctest::Approx(4.0 / 3.0 * dt * Z).epsilon(1e-12));
  // a = (2-1) z, b = (5-3) z: dt (1 + 4 + 2)/3 Z = 7/3 dt Z
  CHECK(q.u_minus_uhat == doctest::Approx(7.0 / 3.0 * dt * Z).epsilon(1e-12));

  // constant-in-time trajectory: all differences vanish
  std::vector<State> flat(3);
  for (int m = 0; m < 3; ++m) {
    flat[m].m = m;
    flat[m].t = m * dt;
    flat[m].u_tilde = scaled(1.0);
    flat[m].u.a = scaled(1.0);
    flat[m].p.assign(disc.pressure.n_dofs, 0.0);
  }
  const InterpolantDifferenceNorms q0 = interpolant_difference_norms(flat, disc.ops, dt);
  CHECK(q0.ubar_minus_utilde <= 1e-14);
  CHECK(q0.uhat_minus_utilde <= 1e-14);
  CHECK(q0.u_minus_uhat <= 1e-14);
}

TEST_CASE("interpolant differences halve when dt halves on broadband data") {
  const TriMesh mesh = generate_structured(8, 8);
  const Discretization disc(mesh);
  InterpolantDifferenceNorms prev{};
  bool have_prev = false;
  for (double dt : {0.00625, 0.003125}) {
    SimulationConfig cfg;
    cfg.scheme = SchemeKind::chorin_darcy;
    cfg.mu = 0.2;
    cfg.T = 0.1;
    cfg.dt = dt;
    cfg.initial = initial_field("rough");
    const RunResult res = run(cfg, disc);
    const InterpolantDifferenceNorms q = interpolant_difference_norms(res.states, disc.ops, dt);
    if (have_prev) {
      CHECK(q.u_minus_uhat / prev.u_minus_uhat >= 0.3);
      CHECK(q.u_minus_uhat / prev.u_minus_uhat <= 0.7);
      CHECK(q.uhat_minus_utilde / prev.uhat_minus_utilde >= 0.3);
      CHECK(q.uhat_minus_utilde / prev.uhat_minus_utilde <= 0.7);
      CHECK(q.ubar_minus_utilde / prev.ubar_minus_utilde >= 0.3);
      CHECK(q.ubar_minus_utilde / prev.ubar_minus_utilde <= 0.7);
    }
    prev = q;
    have_prev = true;
  }
}

TEST_CASE("weak divergence residual of a pure gradient field") {
  const TriMesh mesh = generate_structured(2, 2);
  const Discretization disc(mesh);
  const int np = disc.pressure.n_dofs;
  for (int j = 0; j < np; ++j) {
    VelocityValue grad;
    grad.a.assign(2 * disc.velocity.n_dofs, 0.0);
    grad.c.assign(np, 0.0);
    grad.c[j] = 1.0;
    const double res = weak_div_residual(grad, disc.ops);
    // equals the largest A_p column entry over the H1 norms of the basis
    double expected = 0.0;
    for (int i = 0; i < np; ++i)
      expected = std::max(expected, std::abs(disc.ops.A_p.at(i, j)) /
                                        std::sqrt(disc.ops.M_p.at(i, i) + disc.ops.A_p.at(i, i)));
    CHECK(res == doctest::Approx(expected).epsilon(1e-13));
    CHECK(res > 0.0);
  }
}

TEST_CASE("discrete gronwall utility") {
  // mu = beta = 0 collapses the bound to a_0
  GronwallInput flat;
  flat.a = {2.0, 1.5, 1.0};
  flat.b = {0.0, 0.0};
  const auto b0 = gronwall_bound(flat);
  for (double v : b0) CHECK(v == 2.0);
  CHECK(gronwall_verify(flat));

  // 1000 random sequences satisfying the recursion with equality never
  // exceed the bound
  testsupport::Lcg rng(59);
  for (int trial = 0; trial < 1000; ++trial) {
    GronwallInput in;
    in.mu = 2.0 * rng.positive();
    in.dt = 0.5 * rng.positive() + 1e-3;
    in.beta = rng.positive();
    const int n = 2 + static_cast<int>(rng.positive() * 20);
    in.a.resize(n);
    in.b.resize(n);
    in.a[0] = rng.positive();
    for (int k = 0; k < n; ++k) in.b[k] = rng.positive();
    for (int k = 1; k < n; ++k)
      in.a[k] = (1.0 + in.mu * in.dt) * (in.a[k - 1] + in.beta * in.b[k - 1]);
    CHECK(gronwall_hypothesis_holds(in));
    const auto bound = gronwall_bound(in);
    for (int k = 0; k < n; ++k) CHECK(in.a[k] <= bound[k] * (1.0 + 1e-12));
  }

  // b = 0, a_n = (1+mu dt) a_{n-1}: bound holds and is within the stated
  // factor of tight
  GronwallInput geo;
  geo.mu = 0.7;
  geo.dt = 0.05;
  geo.beta = 0.0;
  geo.a.resize(30);
  geo.b.assign(30, 0.0);
  geo.a[0] = 1.0;
  for (int k = 1; k < 30; ++k) geo.a[k] = (1.0 + geo.mu * geo.dt) * geo.a[k - 1];
  CHECK(gronwall_verify(geo));
  const auto bound = gronwall_bound(geo);
  for (int k = 0; k < 30; ++k) {
    const double tightness = std::exp(geo.mu * geo.dt * k) / std::pow(1.0 + geo.mu * geo.dt, k);
    CHECK(bound[k] / geo.a[k] <= tightness * (1.0 + 1e-12));
  }

  // monotone in a_0, b, mu, beta
  GronwallInput base;
  base.mu = 1.0;
  base.dt = 0.1;
  base.beta = 0.5;
  base.a = {1.0, 0.0, 0.0, 0.0};
  base.b = {0.3, 0.2, 0.1};
  const auto bb = gronwall_bound(base);
  for (auto bump : {0, 1, 2, 3}) {
    GronwallInput up = base;
    if (bump == 0) up.a[0] *= 1.5;
    if (bump == 1)
      for (auto& v : up.b) v *= 1.5;
    if (bump == 2) up.mu *= 1.5;
    if (bump == 3) up.beta *= 1.5;
    const auto bu = gronwall_bound(up);
    for (std::size_t k = 1; k < bb.size(); ++k) CHECK(bu[k] >= bb[k]);
  }
}
