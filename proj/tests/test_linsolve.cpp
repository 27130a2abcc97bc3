#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projflow/assembly.hpp"
#include "projflow/dense.hpp"
#include "projflow/kernels.hpp"
#include "projflow/linsolve.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace projflow;

namespace {

CsrMatrix random_spd(int n, testsupport::Lcg& rng) {
  DenseMatrix R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = rng.unit();
  TripletList t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = (i == j) ? n : 0.0;
      for (int k = 0; k < n; ++k) s += R(k, i) * R(k, j);
      t.push(i, j, s);
    }
  return csr_from_triplets(n, n, t);
}

struct ThOperators {
  TriMesh mesh;
  FESpace vel, pre;
  OperatorSet ops;
  explicit ThOperators(int nx)
      : mesh(generate_structured(nx, nx)),
        vel(build_space(mesh, 2, Constraint::zero_trace)),
        pre(build_space(mesh, 1, Constraint::zero_mean)),
        ops(make_operator_set(vel, pre)) {}
};

} // namespace

TEST_CASE("direct solver basics") {
  CHECK(solve_direct(CsrMatrix::identity(3), {1.0, 2.0, 3.0}) ==
        std::vector<double>{1.0, 2.0, 3.0});

  TripletList t;
  t.push(0, 0, 2.0);
  t.push(0, 1, 1.0);
  t.push(1, 0, 1.0);
  t.push(1, 1, 2.0);
  const auto x = solve_direct(csr_from_triplets(2, 2, t), {3.0, 3.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("direct solver against an independent dense factorization") {
  testsupport::Lcg rng(31);
  const CsrMatrix S = random_spd(20, rng);
  std::vector<double> rhs(20);
  for (auto& v : rhs) v = rng.unit();
  const auto x = solve_direct(S, rhs);
  const auto L = testsupport::dense_cholesky(DenseMatrix::from_csr(S));
  const auto y = testsupport::dense_cholesky_solve(L, rhs);
  for (int i = 0; i < 20; ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-10);
}

TEST_CASE("singular systems surface loudly") {
  TripletList t;
  t.push(0, 0, 1.0);
  t.push(0, 1, 1.0);
  t.push(1, 0, 1.0);
  t.push(1, 1, 1.0);
  CHECK_THROWS_AS(solve_direct(csr_from_triplets(2, 2, t), {1.0, 2.0}), SingularMatrixError);
}

TEST_CASE("sparse cholesky agrees with the direct solver") {
  ThOperators th(3);
  testsupport::Lcg rng(37);
  std::vector<double> rhs(th.ops.M_u_c.rows);
  for (auto& v : rhs) v = rng.unit();
  const auto x1 = th.ops.M_u_c_chol.solve(rhs);
  const auto x2 = solve_direct(th.ops.M_u_c, rhs);
  for (std::size_t i = 0; i < rhs.size(); ++i) CHECK(std::abs(x1[i] - x2[i]) <= 1e-11);
}

TEST_CASE("cg basics, deflation and manufactured pressure solve") {
  ThOperators th(3);
  SolverConfig cfg;

  SolveReport rep;
  const auto x0 = solve_cg(th.ops.A_p, std::vector<double>(th.pre.n_dofs, 0.0), cfg, true, &rep);
  CHECK(rep.iterations == 0);
  for (double v : x0) CHECK(v == 0.0);

  // manufactured zero-mean pressure: apply A_p to a known vector
  std::vector<double> p(th.pre.n_dofs);
  for (int j = 0; j < th.pre.n_dofs; ++j)
    p[j] = std::sin(2.0 * j) + 0.3 * std::cos(5.0 * j);
  orthogonalize_against_ones(p);
  const auto rhs = th.ops.A_p.apply(p);
  const auto sol = solve_cg(th.ops.A_p, rhs, cfg, true);
  // both are centered in the same way, so they agree up to the tolerance
  std::vector<double> pc = p;
  orthogonalize_against_ones(pc);
  for (int j = 0; j < th.pre.n_dofs; ++j) CHECK(sol[j] == doctest::Approx(pc[j]).epsilon(1e-7));

  // deflation equals pre-centering the right side
  std::vector<double> rhs_off = rhs;
  for (auto& v : rhs_off) v += 3.7;  // nonzero mean
  const auto s1 = solve_cg(th.ops.A_p, rhs_off, cfg, true);
  std::vector<double> rhs_centered = rhs_off;
  orthogonalize_against_ones(rhs_centered);
  const auto s2 = solve_cg(th.ops.A_p, rhs_centered, cfg, true);
  for (int j = 0; j < th.pre.n_dofs; ++j) CHECK(s1[j] == doctest::Approx(s2[j]).epsilon(1e-12));
}

TEST_CASE("prediction solver: SPD case matches cg, general case matches direct") {
  ThOperators th(2);
  testsupport::Lcg rng(41);
  const int n = th.ops.M_u_c.rows;
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = th.vel.is_boundary[i % th.vel.n_dofs] ? 0.0 : rng.unit();
  SolverConfig cfg;

  // N(0): system is SPD
  CsrMatrix S_spd = add_same_pattern(10.0, th.ops.M_s, 0.05, th.ops.A_s);
  CsrMatrix S = block_diag2(S_spd);
  S.eliminate_dofs(th.vel.vector_boundary_dofs());
  const auto x_b = solve_prediction(S, rhs, cfg);
  const auto x_cg = solve_cg(S, rhs, cfg);
  for (int i = 0; i < n; ++i) CHECK(std::abs(x_b[i] - x_cg[i]) <= 1e-10 * (1.0 + std::abs(x_cg[i])));

  // with convection: compare against the direct solver
  FEFunction w;
  w.space = &th.vel;
  w.arity = 2;
  w.coeffs.assign(2 * th.vel.n_dofs, 0.0);
  for (int d = 0; d < th.vel.n_dofs; ++d)
    if (!th.vel.is_boundary[d]) {
      w.coeffs[d] = rng.unit();
      w.coeffs[th.vel.n_dofs + d] = rng.unit();
    }
  const CsrMatrix N = assemble_convection(w, th.vel, th.vel);
  CsrMatrix S2_s = add_same_pattern(10.0, th.ops.M_s, 0.05, th.ops.A_s);
  S2_s = add_same_pattern(1.0, S2_s, 1.0, N);
  CsrMatrix S2 = block_diag2(S2_s);
  S2.eliminate_dofs(th.vel.vector_boundary_dofs());
  const auto xb2 = solve_prediction(S2, rhs, cfg);
  const auto xd2 = solve_direct(S2, rhs);
  for (int i = 0; i < n; ++i) CHECK(std::abs(xb2[i] - xd2[i]) <= 1e-9);

  // coercivity witness: x' sym(S) x > 0 for random x
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> z(n);
    for (auto& v : z) v = rng.unit();
    const auto Sz = S2.apply(z);
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += z[i] * Sz[i];
    CHECK(quad > 0.0);
  }
}

TEST_CASE("darcy saddle solve: fixed point, orthogonality, dense KKT oracle") {
  ThOperators th(2);  // the 8-triangle mesh
  testsupport::Lcg rng(43);
  SolverConfig cfg;
  const int nu = 2 * th.vel.n_dofs;
  const double dt = 0.05;

  std::vector<double> u_tilde(nu, 0.0);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < th.vel.n_dofs; ++d) {
      const double r = rng.unit();
      if (!th.vel.is_boundary[d]) u_tilde[c * th.vel.n_dofs + d] = r;
    }

  const DarcySolution sol =
      solve_darcy_saddle(th.ops.M_u_c_chol, th.ops.B0, u_tilde, dt, cfg, th.ops.M_p, th.ops.area);

  // orthogonality ||u~||^2 = ||u||^2 + ||u - u~||^2
  auto m_norm2 = [&](const std::vector<double>& v) {
    return kernels::dot(v, th.ops.M_u.apply(v));
  };
  std::vector<double> diff(nu);
  for (int i = 0; i < nu; ++i) diff[i] = sol.u[i] - u_tilde[i];
  const double lhs = m_norm2(u_tilde);
  const double rhs = m_norm2(sol.u) + m_norm2(diff);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);

  // projecting the projected field changes nothing
  const DarcySolution sol2 =
      solve_darcy_saddle(th.ops.M_u_c_chol, th.ops.B0, sol.u, dt, cfg, th.ops.M_p, th.ops.area);
  for (int i = 0; i < nu; ++i) CHECK(std::abs(sol2.u[i] - sol.u[i]) <= 1e-10);
  const double pnorm = std::sqrt(kernels::dot(sol2.p, th.ops.M_p.apply(sol2.p)));
  CHECK(pnorm <= 1e-8);

  // dense KKT oracle with a mean constraint
  const int np = th.pre.n_dofs;
  const int n = nu + np + 1;
  DenseMatrix K(n, n);
  const DenseMatrix M = DenseMatrix::from_csr(th.ops.M_u_c);
  const DenseMatrix B = DenseMatrix::from_csr(th.ops.B0);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nu; ++j) K(i, j) = M(i, j);
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < nu; ++i) {
      K(i, nu + j) = -dt * B(j, i);
      K(nu + j, i) = B(j, i);
    }
  const auto e = th.ops.M_p.apply(std::vector<double>(np, 1.0));
  for (int j = 0; j < np; ++j) {
    K(nu + j, nu + np) = e[j];
    K(nu + np, nu + j) = e[j];
  }
  std::vector<double> kkt_rhs(n, 0.0);
  const auto Mu = th.ops.M_u_c.apply(u_tilde);
  for (int i = 0; i < nu; ++i) kkt_rhs[i] = Mu[i];
  const auto dense = DenseLu(K).solve(kkt_rhs);
  for (int i = 0; i < nu; ++i) CHECK(std::abs(sol.u[i] - dense[i]) <= 1e-9);
  std::vector<double> p_dense(dense.begin() + nu, dense.begin() + nu + np);
  th.ops.subtract_l2_mean(p_dense);
  for (int j = 0; j < np; ++j) CHECK(std::abs(sol.p[j] - p_dense[j]) <= 1e-9);
}

TEST_CASE("inf-sup estimate matches the dense eigensolve oracle on nx=2") {
  ThOperators th(2);
  const double beta = estimate_lbb(th.ops.A_u_c, th.ops.B0, th.ops.M_p);

  // dense S = B A^-1 B^T restricted to the zero-mean complement via the
  // generalized eigenproblem; smallest eigenvalue above the constant mode
  const int np = th.pre.n_dofs;
  const DenseMatrix A = DenseMatrix::from_csr(th.ops.A_u_c);
  const auto L = testsupport::dense_cholesky(A);
  DenseMatrix S(np, np);
  for (int j = 0; j < np; ++j) {
    std::vector<double> ej(np, 0.0);
    ej[j] = 1.0;
    const auto Btej = th.ops.B0.apply_transposed(ej);
    const auto w = testsupport::dense_cholesky_solve(L, Btej);
    const auto col = th.ops.B0.apply(w);
    for (int i = 0; i < np; ++i) S(i, j) = col[i];
  }
  const auto ev = testsupport::generalized_eigenvalues(S, DenseMatrix::from_csr(th.ops.M_p));
  double lam_min_pos = 0.0;
  for (double v : ev)
    if (v > 1e-10 * ev.back()) {
      lam_min_pos = v;
      break;
    }
  CHECK(beta == doctest::Approx(std::sqrt(lam_min_pos)).epsilon(1e-6));
}

TEST_CASE("inf-sup uniformity of Taylor-Hood and degeneracy of P1/P1") {
  std::vector<double> th_betas;
  for (int nx : {2, 4, 8}) {
    ThOperators th(nx);
    th_betas.push_back(estimate_lbb(th.ops.A_u_c, th.ops.B0, th.ops.M_p));
    CHECK(th_betas.back() > 0.1);
  }
  const double lo = std::min({th_betas[0], th_betas[1], th_betas[2]});
  const double hi = std::max({th_betas[0], th_betas[1], th_betas[2]});
  CHECK(hi / lo <= 1.10);

  // P1/P1 has spurious pressure modes; the smallest positive eigenvalue
  // decays under refinement (levels chosen with enough velocity dofs)
  std::vector<double> p1_betas;
  for (int nx : {6, 12}) {
    const TriMesh mesh = generate_structured(nx, nx);
    const FESpace vel = build_space(mesh, 1, Constraint::zero_trace);
    const FESpace pre = build_space(mesh, 1, Constraint::zero_mean);
    const OperatorSet ops = make_operator_set(vel, pre);
    p1_betas.push_back(estimate_lbb(ops.A_u_c, ops.B0, ops.M_p));
  }
  CHECK(p1_betas[1] < 0.7 * p1_betas[0]);
}

TEST_CASE("discrete poincare constant") {
  ThOperators th(2);
  const double cp = poincare_constant(th.ops.M_u_mask, th.ops.A_u_c);

  // oracle: largest eigenvalue of M x = lambda A x on the interior block
  const int ns = th.vel.n_dofs;
  std::vector<int> interior;
  for (int d = 0; d < ns; ++d)
    if (!th.vel.is_boundary[d]) interior.push_back(d);
  const int ni = static_cast<int>(interior.size());
  DenseMatrix Mi(ni, ni), Ai(ni, ni);
  const DenseMatrix M = DenseMatrix::from_csr(th.ops.M_s);
  const CsrMatrix A_s = assemble_stiffness(th.vel);
  const DenseMatrix A = DenseMatrix::from_csr(A_s);
  for (int i = 0; i < ni; ++i)
    for (int j = 0; j < ni; ++j) {
      Mi(i, j) = M(interior[i], interior[j]);
      Ai(i, j) = A(interior[i], interior[j]);
    }
  const auto ev = testsupport::generalized_eigenvalues(Mi, Ai);
  CHECK(cp == doctest::Approx(std::sqrt(ev.back())).epsilon(1e-7));
  // never exceeds the continuum Poincare constant of the unit square
  CHECK(cp <= 1.0 / (M_PI * std::sqrt(2.0)) + 1e-12);
}
