#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projflow/assembly.hpp"
#include "projflow/dense.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace projflow;

namespace {

// single reference triangle (0,0), (1,0), (0,1)
TriMesh reference_triangle() {
  TriMesh m;
  m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.triangles = {{0, 1, 2}};
  m.finalize();
  return m;
}

std::vector<double> random_zero_trace(const FESpace& s, testsupport::Lcg& rng) {
  std::vector<double> v(2 * s.n_dofs, 0.0);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < s.n_dofs; ++d) {
      const double r = rng.unit();
      if (!s.is_boundary[d]) v[c * s.n_dofs + d] = r;
    }
  return v;
}

} // namespace

TEST_CASE("P1 element matrices on the reference triangle") {
  const TriMesh mesh = reference_triangle();
  const FESpace s = build_space(mesh, 1, Constraint::none);

  const CsrMatrix M = assemble_mass(s);
  const double mref[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(M.at(i, j) == doctest::Approx(mref[i][j] / 24.0).epsilon(1e-13));

  const CsrMatrix A = assemble_stiffness(s);
  const double aref[3][3] = {{2, -1, -1}, {-1, 1, 0}, {-1, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(A.at(i, j) == doctest::Approx(aref[i][j] / 2.0).epsilon(1e-13));
}

TEST_CASE("mass matrix: total sum, row sums and positivity") {
  const TriMesh mesh = generate_structured(2, 2);
  const FESpace s = build_space(mesh, 1, Constraint::none);
  const CsrMatrix M = assemble_mass(s);

  double total = 0.0;
  for (double v : M.vals) total += v;
  CHECK(total == doctest::Approx(mesh.area()).epsilon(1e-13));

  // row sum = one third of the area of the triangles touching the vertex
  for (int d = 0; d < s.n_dofs; ++d) {
    double patch = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t)
      for (int k = 0; k < 3; ++k)
        if (mesh.triangles[t][k] == d) patch += mesh.triangle_area(t);
    double row = 0.0;
    for (int k = M.row_ptr[d]; k < M.row_ptr[d + 1]; ++k) row += M.vals[k];
    CHECK(row == doctest::Approx(patch / 3.0).epsilon(1e-13));
  }

  const auto ev = testsupport::jacobi_eigenvalues(DenseMatrix::from_csr(M));
  CHECK(ev.front() > 0.0);
}

TEST_CASE("stiffness matrix annihilates constants and is exact on linears") {
  const TriMesh mesh = generate_structured(2, 2);
  const FESpace s = build_space(mesh, 1, Constraint::none);
  const CsrMatrix A = assemble_stiffness(s);
  CHECK(A.symmetry_residual() <= 1e-13 * A.max_abs());

  const std::vector<double> ones(s.n_dofs, 1.0);
  for (double v : A.apply(ones)) CHECK(std::abs(v) <= 1e-13);

  std::vector<double> fx(s.n_dofs);
  for (int d = 0; d < s.n_dofs; ++d) fx[d] = s.dof_coords[d][0];
  double energy = 0.0;
  const auto Afx = A.apply(fx);
  for (int d = 0; d < s.n_dofs; ++d) energy += fx[d] * Afx[d];
  CHECK(energy == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("convection form is skew-symmetric for zero-trace advecting fields") {
  const TriMesh mesh = generate_structured(2, 2);
  const FESpace s = build_space(mesh, 2, Constraint::zero_trace);
  testsupport::Lcg rng(17);

  FEFunction w;
  w.space = &s;
  w.arity = 2;
  w.coeffs = random_zero_trace(s, rng);
  const CsrMatrix N = assemble_convection(w, s, s);

  double wnorm = 0.0;
  for (double c : w.coeffs) wnorm = std::max(wnorm, std::abs(c));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(s.n_dofs);
    for (auto& x : v) x = rng.unit();
    const auto Nv = N.apply(v);
    double vNv = 0.0, v2 = 0.0;
    for (int i = 0; i < s.n_dofs; ++i) {
      vNv += v[i] * Nv[i];
      v2 += v[i] * v[i];
    }
    CHECK(std::abs(vNv) <= 1e-12 * std::max(1.0, wnorm * v2));
  }

  FEFunction zero = FEFunction::zero(s, 2);
  const CsrMatrix N0 = assemble_convection(zero, s, s);
  CHECK(N0.max_abs() == 0.0);
}

TEST_CASE("convection value against the symbolic single-triangle integral") {
  // w = (1,0) constant, u = v = (x, 0): b(w,u,v) = int over T of 1 * x = 1/6
  const TriMesh mesh = reference_triangle();
  const FESpace s = build_space(mesh, 2, Constraint::none);
  FEFunction w;
  w.space = &s;
  w.arity = 2;
  w.coeffs.assign(2 * s.n_dofs, 0.0);
  for (int d = 0; d < s.n_dofs; ++d) w.coeffs[d] = 1.0;
  std::vector<double> u(s.n_dofs);
  for (int d = 0; d < s.n_dofs; ++d) u[d] = s.dof_coords[d][0];

  const CsrMatrix N = assemble_convection(w, s, s);
  const auto Nu = N.apply(u);
  double b = 0.0;
  for (int d = 0; d < s.n_dofs; ++d) b += u[d] * Nu[d];
  CHECK(b == doctest::Approx(testsupport::ref_tri_monomial(1, 0)).epsilon(1e-13));
  CHECK(testsupport::ref_tri_monomial(1, 0) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("divergence and gradient couplings are dual on zero-trace dofs") {
  const TriMesh mesh = generate_structured(2, 2);
  const FESpace vel = build_space(mesh, 2, Constraint::zero_trace);
  const FESpace pre = build_space(mesh, 1, Constraint::zero_mean);
  const OperatorSet ops = make_operator_set(vel, pre);

  // B0 = -G0^T entrywise
  const CsrMatrix G0t = ops.G0.transposed();
  double worst = 0.0;
  for (int i = 0; i < ops.B0.rows; ++i)
    for (int k = ops.B0.row_ptr[i]; k < ops.B0.row_ptr[i + 1]; ++k)
      worst = std::max(worst,
                       std::abs(ops.B0.vals[k] + G0t.at(i, ops.B0.col_idx[k])));
  CHECK(worst <= 1e-12);

  // rigid rotation (-y, x) is exactly divergence-free pointwise
  std::vector<double> rot(2 * vel.n_dofs);
  for (int d = 0; d < vel.n_dofs; ++d) {
    rot[d] = -vel.dof_coords[d][1];
    rot[vel.n_dofs + d] = vel.dof_coords[d][0];
  }
  for (double v : ops.B_raw.apply(rot)) CHECK(std::abs(v) <= 1e-13);

  // divergence theorem: (div u, 1) = 0 for zero-trace u
  testsupport::Lcg rng(23);
  const std::vector<double> u = random_zero_trace(vel, rng);
  const auto Bu = ops.B0.apply(u);
  double total = 0.0;
  for (double v : Bu) total += v;
  CHECK(std::abs(total) <= 1e-12);
}

TEST_CASE("forcing assembly and exact time averaging") {
  const TriMesh mesh = generate_structured(2, 2);
  const FESpace s = build_space(mesh, 2, Constraint::none);
  const double dt = 0.125;

  const std::vector<double> zero = assemble_forcing(nullptr, s, 0, dt, 4);
  for (double v : zero) CHECK(v == 0.0);

  auto g = [](double x, double y) { return std::array<double, 2>{x + y, x * y}; };
  TimeVectorField constant = [&g](double, double x, double y) { return g(x, y); };
  TimeVectorField linear_t = [&g](double t, double x, double y) {
    const auto v = g(x, y);
    return std::array<double, 2>{t * v[0], t * v[1]};
  };
  const auto Fc = assemble_forcing(constant, s, 3, dt, 4);
  const auto Fl = assemble_forcing(linear_t, s, 0, dt, 4);  // interval [0, dt]
  // constant in time: equal to the steady assembly; steady value via m=0 too
  const auto Fc0 = assemble_forcing(constant, s, 0, dt, 1);
  for (std::size_t i = 0; i < Fc.size(); ++i) CHECK(Fc[i] == doctest::Approx(Fc0[i]).epsilon(1e-14));
  // f = t g: time average over [0,dt] is (dt/2) g
  for (std::size_t i = 0; i < Fl.size(); ++i)
    CHECK(Fl[i] == doctest::Approx(0.5 * dt * Fc[i]).epsilon(1e-13));
}

TEST_CASE("assembly is deterministic") {
  const TriMesh mesh = generate_structured(3, 3);
  const FESpace s = build_space(mesh, 2, Constraint::zero_trace);
  const CsrMatrix A1 = assemble_stiffness(s);
  const CsrMatrix A2 = assemble_stiffness(s);
  REQUIRE(A1.nnz() == A2.nnz());
  for (std::size_t k = 0; k < A1.nnz(); ++k) CHECK(A1.vals[k] == A2.vals[k]);

  testsupport::Lcg rng(29);
  FEFunction w;
  w.space = &s;
  w.arity = 2;
  w.coeffs = random_zero_trace(s, rng);
  ConvectionAssembler conv(s);
  const CsrMatrix N1 = conv.assemble(w);
  const CsrMatrix N1copy = N1;
  const CsrMatrix& N2 = conv.assemble(w);
  for (std::size_t k = 0; k < N2.nnz(); ++k) CHECK(N1copy.vals[k] == N2.vals[k]);
  // refill matches one-shot assembly
  const CsrMatrix Nref = assemble_convection(w, s, s);
  for (int i = 0; i < Nref.rows; ++i)
    for (int k = Nref.row_ptr[i]; k < Nref.row_ptr[i + 1]; ++k)
      CHECK(Nref.vals[k] == doctest::Approx(N2.at(i, Nref.col_idx[k])).epsilon(1e-15));
}

TEST_CASE("claimed-symmetric operators pass the symmetry residual test") {
  const TriMesh mesh = generate_structured(3, 3);
  const FESpace vel = build_space(mesh, 2, Constraint::zero_trace);
  const FESpace pre = build_space(mesh, 1, Constraint::zero_mean);
  const OperatorSet ops = make_operator_set(vel, pre);
  CHECK(ops.M_u.symmetry_residual() <= 1e-13 * ops.M_u.max_abs());
  CHECK(ops.M_u_c.symmetry_residual() <= 1e-13 * ops.M_u_c.max_abs());
  CHECK(ops.A_u_c.symmetry_residual() <= 1e-13 * ops.A_u_c.max_abs());
  CHECK(ops.A_p.symmetry_residual() <= 1e-13 * ops.A_p.max_abs());
  CHECK(ops.M_p.symmetry_residual() <= 1e-13 * ops.M_p.max_abs());
}
