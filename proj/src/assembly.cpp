#include "projflow/assembly.hpp"

#include "projflow/kernels.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace projflow {

namespace {

struct QuadTables {
  const QuadratureRule& rule = QuadratureRule::triangle_degree6();
  // basis values / barycentric gradients at all quadrature points
  std::vector<std::array<double, 6>> N;
  std::vector<std::array<std::array<double, 3>, 6>> dN;

  explicit QuadTables(int degree) {
    N.resize(rule.points.size());
    dN.resize(rule.points.size());
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      shape_values(degree, rule.points[k], N[k].data());
      double g[6][3];
      shape_grads_bary(degree, rule.points[k], g);
      for (int a = 0; a < 6; ++a)
        for (int j = 0; j < 3; ++j) dN[k][a][j] = g[a][j];
    }
  }
};

// Generic cell-parallel assembly: `local` fills an ndxnd block per triangle,
// accumulation into triplets is serial in triangle order (deterministic for
// any thread count).
template <typename LocalFn>
CsrMatrix assemble_cellwise(const FESpace& space, LocalFn&& local) {
  const int nt = space.mesh->n_triangles();
  const int nd = space.dofs_per_cell();
  std::vector<double> blocks(static_cast<std::size_t>(nt) * nd * nd);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < nt; ++t) local(t, &blocks[static_cast<std::size_t>(t) * nd * nd]);

  TripletList trip;
  trip.is.reserve(static_cast<std::size_t>(nt) * nd * nd);
  for (int t = 0; t < nt; ++t) {
    const double* blk = &blocks[static_cast<std::size_t>(t) * nd * nd];
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b)
        trip.push(space.cell_dofs[t][a], space.cell_dofs[t][b], blk[a * nd + b]);
  }
  return csr_from_triplets(space.n_dofs, space.n_dofs, trip);
}

} // namespace

CsrMatrix assemble_mass(const FESpace& space) {
  const QuadTables tab(space.degree);
  const int nd = space.dofs_per_cell();
  const TriMesh& mesh = *space.mesh;
  return assemble_cellwise(space, [&](int t, double* blk) {
    const CellGeometry geo = cell_geometry(mesh, t);
    std::memset(blk, 0, sizeof(double) * nd * nd);
    for (std::size_t k = 0; k < tab.rule.points.size(); ++k) {
      const double wq = tab.rule.weights[k] * geo.jac;
      for (int a = 0; a < nd; ++a)
        for (int b = 0; b < nd; ++b) blk[a * nd + b] += wq * tab.N[k][a] * tab.N[k][b];
    }
  });
}

CsrMatrix assemble_stiffness(const FESpace& space) {
  const QuadTables tab(space.degree);
  const int nd = space.dofs_per_cell();
  const TriMesh& mesh = *space.mesh;
  return assemble_cellwise(space, [&](int t, double* blk) {
    const CellGeometry geo = cell_geometry(mesh, t);
    std::memset(blk, 0, sizeof(double) * nd * nd);
    double gx[6], gy[6];
    for (std::size_t k = 0; k < tab.rule.points.size(); ++k) {
      const double wq = tab.rule.weights[k] * geo.jac;
      for (int a = 0; a < nd; ++a) {
        gx[a] = gy[a] = 0.0;
        for (int j = 0; j < 3; ++j) {
          gx[a] += tab.dN[k][a][j] * geo.grad_lambda[j][0];
          gy[a] += tab.dN[k][a][j] * geo.grad_lambda[j][1];
        }
      }
      for (int a = 0; a < nd; ++a)
        for (int b = 0; b < nd; ++b) blk[a * nd + b] += wq * (gx[a] * gx[b] + gy[a] * gy[b]);
    }
  });
}

namespace {

// shared by assemble_convection and ConvectionAssembler
void convection_block(const FESpace& space, const FEFunction& w, const QuadTables& tab, int t,
                      double* blk) {
  const TriMesh& mesh = *space.mesh;
  const int nd = space.dofs_per_cell();
  const CellGeometry geo = cell_geometry(mesh, t);
  std::memset(blk, 0, sizeof(double) * nd * nd);
  const FESpace& ws = *w.space;
  const int wnd = ws.dofs_per_cell();
  double wgx[6], wgy[6];
  for (std::size_t k = 0; k < tab.rule.points.size(); ++k) {
    const double wq = tab.rule.weights[k] * geo.jac;
    // advecting field value and divergence at the quadrature point
    double wN[6];
    shape_values(ws.degree, tab.rule.points[k], wN);
    double wdN[6][3];
    shape_grads_bary(ws.degree, tab.rule.points[k], wdN);
    double w0 = 0.0, w1 = 0.0, divw = 0.0;
    for (int a = 0; a < wnd; ++a) {
      double gx = 0.0, gy = 0.0;
      for (int j = 0; j < 3; ++j) {
        gx += wdN[a][j] * geo.grad_lambda[j][0];
        gy += wdN[a][j] * geo.grad_lambda[j][1];
      }
      const int dof = ws.cell_dofs[t][a];
      w0 += w.coeffs[dof] * wN[a];
      w1 += w.coeffs[ws.n_dofs + dof] * wN[a];
      divw += w.coeffs[dof] * gx + w.coeffs[ws.n_dofs + dof] * gy;
    }
    for (int a = 0; a < nd; ++a) {
      wgx[a] = wgy[a] = 0.0;
      for (int j = 0; j < 3; ++j) {
        wgx[a] += tab.dN[k][a][j] * geo.grad_lambda[j][0];
        wgy[a] += tab.dN[k][a][j] * geo.grad_lambda[j][1];
      }
    }
    // N[a][b] = (w.grad phi_b) phi_a + 1/2 div w phi_b phi_a
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b)
        blk[a * nd + b] +=
            wq * ((w0 * wgx[b] + w1 * wgy[b]) * tab.N[k][a] + 0.5 * divw * tab.N[k][b] * tab.N[k][a]);
  }
}

} // namespace

CsrMatrix assemble_convection(const FEFunction& w, const FESpace& trial_space,
                              const FESpace& test_space) {
  if (trial_space.mesh != test_space.mesh || w.space->mesh != trial_space.mesh)
    throw std::invalid_argument("assemble_convection: spaces live on different meshes");
  if (trial_space.degree != test_space.degree)
    throw std::invalid_argument("assemble_convection: mixed trial/test degrees unsupported");
  const QuadTables tab(trial_space.degree);
  return assemble_cellwise(trial_space,
                           [&](int t, double* blk) { convection_block(trial_space, w, tab, t, blk); });
}

ConvectionAssembler::ConvectionAssembler(const FESpace& space) : space_(&space) {
  FEFunction zero = FEFunction::zero(space, 2);
  pattern_ = assemble_convection(zero, space, space);
  const int nd = space.dofs_per_cell();
  const int nt = space.mesh->n_triangles();
  slot_.resize(static_cast<std::size_t>(nt) * nd * nd);
  for (int t = 0; t < nt; ++t)
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b) {
        const int i = space.cell_dofs[t][a], j = space.cell_dofs[t][b];
        int found = -1;
        for (int k = pattern_.row_ptr[i]; k < pattern_.row_ptr[i + 1]; ++k)
          if (pattern_.col_idx[k] == j) {
            found = k;
            break;
          }
        slot_[(static_cast<std::size_t>(t) * nd + a) * nd + b] = found;
      }
}

const CsrMatrix& ConvectionAssembler::assemble(const FEFunction& w) {
  const FESpace& space = *space_;
  const QuadTables tab(space.degree);
  const int nd = space.dofs_per_cell();
  const int nt = space.mesh->n_triangles();
  std::vector<double> blocks(static_cast<std::size_t>(nt) * nd * nd);
#pragma omp parallel for schedule(static)
  for (int t = 0; t < nt; ++t)
    convection_block(space, w, tab, t, &blocks[static_cast<std::size_t>(t) * nd * nd]);
  kernels::fill(0.0, pattern_.vals.data(), pattern_.vals.size());
  for (int t = 0; t < nt; ++t)
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b)
        pattern_.vals[slot_[(static_cast<std::size_t>(t) * nd + a) * nd + b]] +=
            blocks[(static_cast<std::size_t>(t) * nd + a) * nd + b];
  return pattern_;
}

namespace {

// div/grad couplings share the loop; sign and index layout differ
CsrMatrix assemble_coupling(const FESpace& vs, const FESpace& ps, bool divergence_rows) {
  if (vs.mesh != ps.mesh) throw std::invalid_argument("coupling: spaces live on different meshes");
  const QuadTables vtab(vs.degree), ptab(ps.degree);
  const TriMesh& mesh = *vs.mesh;
  const int vnd = vs.dofs_per_cell(), pnd = ps.dofs_per_cell();
  TripletList trip;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const CellGeometry geo = cell_geometry(mesh, t);
    for (std::size_t k = 0; k < vtab.rule.points.size(); ++k) {
      const double wq = vtab.rule.weights[k] * geo.jac;
      double vgx[6], vgy[6], pgx[6], pgy[6];
      for (int a = 0; a < vnd; ++a) {
        vgx[a] = vgy[a] = 0.0;
        for (int j = 0; j < 3; ++j) {
          vgx[a] += vtab.dN[k][a][j] * geo.grad_lambda[j][0];
          vgy[a] += vtab.dN[k][a][j] * geo.grad_lambda[j][1];
        }
      }
      for (int b = 0; b < pnd; ++b) {
        pgx[b] = pgy[b] = 0.0;
        for (int j = 0; j < 3; ++j) {
          pgx[b] += ptab.dN[k][b][j] * geo.grad_lambda[j][0];
          pgy[b] += ptab.dN[k][b][j] * geo.grad_lambda[j][1];
        }
      }
      for (int a = 0; a < vnd; ++a) {
        const int vi = vs.cell_dofs[t][a];
        for (int b = 0; b < pnd; ++b) {
          const int pj = ps.cell_dofs[t][b];
          if (divergence_rows) {
            // B[pj, c*n + vi] = (d_c phi_a, psi_b)
            trip.push(pj, vi, wq * vgx[a] * ptab.N[k][b]);
            trip.push(pj, vs.n_dofs + vi, wq * vgy[a] * ptab.N[k][b]);
          } else {
            // G[c*n + vi, pj] = (phi_a, d_c psi_b)
            trip.push(vi, pj, wq * vtab.N[k][a] * pgx[b]);
            trip.push(vs.n_dofs + vi, pj, wq * vtab.N[k][a] * pgy[b]);
          }
        }
      }
    }
  }
  if (divergence_rows) return csr_from_triplets(ps.n_dofs, 2 * vs.n_dofs, trip);
  return csr_from_triplets(2 * vs.n_dofs, ps.n_dofs, trip);
}

} // namespace

CsrMatrix assemble_divergence(const FESpace& velocity_space, const FESpace& pressure_space) {
  return assemble_coupling(velocity_space, pressure_space, /*divergence_rows=*/true);
}

CsrMatrix assemble_pressure_gradient(const FESpace& velocity_space,
                                     const FESpace& pressure_space) {
  return assemble_coupling(velocity_space, pressure_space, /*divergence_rows=*/false);
}

std::vector<double> assemble_forcing(const TimeVectorField& f, const FESpace& space, int m,
                                     double dt, int n_time_quad) {
  if (dt <= 0.0) throw std::invalid_argument("assemble_forcing: dt must be positive");
  std::vector<double> out(2 * space.n_dofs, 0.0);
  if (!f) return out;
  std::vector<double> tq, tw;
  gauss_legendre_01(n_time_quad, tq, tw);
  const double t0 = m * dt;

  const QuadratureRule& q = QuadratureRule::triangle_degree6();
  const QuadTables tab(space.degree);
  const TriMesh& mesh = *space.mesh;
  const int nd = space.dofs_per_cell();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const CellGeometry geo = cell_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const auto& lam = q.points[k];
      const double x = lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0];
      const double y = lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1];
      // time average over [t^m, t^{m+1}]; the 1/dt cancels the interval length
      double f0 = 0.0, f1 = 0.0;
      for (int s = 0; s < n_time_quad; ++s) {
        const auto val = f(t0 + tq[s] * dt, x, y);
        f0 += tw[s] * val[0];
        f1 += tw[s] * val[1];
      }
      const double wq = q.weights[k] * geo.jac;
      for (int a = 0; a < nd; ++a) {
        const int dof = space.cell_dofs[t][a];
        out[dof] += wq * f0 * tab.N[k][a];
        out[space.n_dofs + dof] += wq * f1 * tab.N[k][a];
      }
    }
  }
  return out;
}

double forcing_time_average_norm(const TimeVectorField& f, const TriMesh& mesh, int m, double dt,
                                 int n_time_quad) {
  if (!f) return 0.0;
  std::vector<double> tq, tw;
  gauss_legendre_01(n_time_quad, tq, tw);
  const double t0 = m * dt;
  const QuadratureRule& q = QuadratureRule::triangle_degree6();
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const CellGeometry geo = cell_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const auto& lam = q.points[k];
      const double x = lam[0] * p0[0] + lam[1] * p1[0] + lam[2] * p2[0];
      const double y = lam[0] * p0[1] + lam[1] * p1[1] + lam[2] * p2[1];
      double f0 = 0.0, f1 = 0.0;
      for (int s = 0; s < n_time_quad; ++s) {
        const auto val = f(t0 + tq[s] * dt, x, y);
        f0 += tw[s] * val[0];
        f1 += tw[s] * val[1];
      }
      total += q.weights[k] * geo.jac * (f0 * f0 + f1 * f1);
    }
  }
  return std::sqrt(std::max(total, 0.0));
}

double OperatorSet::vel_mass_norm2(const std::vector<double>& a) const {
  return kernels::dot(a, M_u.apply(a));
}

double OperatorSet::vel_grad_norm2(const std::vector<double>& a) const {
  const int n = vspace->n_dofs;
  std::vector<double> cx(a.begin(), a.begin() + n), cy(a.begin() + n, a.end());
  return kernels::dot(cx, A_s.apply(cx)) + kernels::dot(cy, A_s.apply(cy));
}

double OperatorSet::p_grad_norm2(const std::vector<double>& p) const {
  return kernels::dot(p, A_p.apply(p));
}

double OperatorSet::p_mass_norm2(const std::vector<double>& p) const {
  return kernels::dot(p, M_p.apply(p));
}

double OperatorSet::l2_mean(const std::vector<double>& p) const {
  const std::vector<double> Mp = M_p.apply(p);
  return kernels::sum(Mp.data(), Mp.size()) / area;
}

void OperatorSet::subtract_l2_mean(std::vector<double>& p) const {
  const double m = l2_mean(p);
  for (double& v : p) v -= m;
}

OperatorSet make_operator_set(const FESpace& velocity_space, const FESpace& pressure_space) {
  if (velocity_space.mesh != pressure_space.mesh)
    throw std::invalid_argument("make_operator_set: spaces live on different meshes");
  OperatorSet ops;
  ops.vspace = &velocity_space;
  ops.pspace = &pressure_space;
  ops.area = velocity_space.mesh->area();

  ops.M_s = assemble_mass(velocity_space);
  ops.A_s = assemble_stiffness(velocity_space);
  ops.M_u = block_diag2(ops.M_s);
  ops.A_p = assemble_stiffness(pressure_space);
  ops.M_p = assemble_mass(pressure_space);

  const std::vector<int> bdofs = velocity_space.boundary_dofs;
  const std::vector<int> vbdofs = velocity_space.vector_boundary_dofs();

  ops.M_s_c = ops.M_s;
  ops.M_s_c.eliminate_dofs(bdofs);
  ops.M_u_c = block_diag2(ops.M_s_c);
  ops.M_u_mask = ops.M_u;
  ops.M_u_mask.zero_rows(vbdofs);
  ops.M_u_mask.zero_cols(vbdofs);

  CsrMatrix A_s_c = ops.A_s;
  A_s_c.eliminate_dofs(bdofs);
  ops.A_u_c = block_diag2(A_s_c);

  ops.B_raw = assemble_divergence(velocity_space, pressure_space);
  ops.G_raw = assemble_pressure_gradient(velocity_space, pressure_space);
  ops.B0 = ops.B_raw;
  ops.B0.zero_cols(vbdofs);
  ops.G0 = ops.G_raw;
  ops.G0.zero_rows(vbdofs);

  ops.M_u_c_chol = CholeskyFactor(ops.M_u_c);
  ops.convection = std::make_unique<ConvectionAssembler>(velocity_space);
  return ops;
}

} // namespace projflow
