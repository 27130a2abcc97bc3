#ifndef PROJFLOW_ASSEMBLY_HPP
#define PROJFLOW_ASSEMBLY_HPP

#include "projflow/fespace.hpp"
#include "projflow/linsolve.hpp"
#include "projflow/sparse.hpp"

#include <memory>
#include <vector>

namespace projflow {

CsrMatrix assemble_mass(const FESpace& space);
CsrMatrix assemble_stiffness(const FESpace& space);

// Skew-symmetrized convection: N[i][j] = (w.grad phi_j, phi_i) + 1/2 (div w phi_j, phi_i),
// one scalar block (identical for both velocity components).
CsrMatrix assemble_convection(const FEFunction& w, const FESpace& trial_space,
                              const FESpace& test_space);

// B[j, c*n+i] = (d_c phi_i, psi_j): rows are pressure dofs, columns
// component-blocked velocity dofs, so (B u)_j = (div u, psi_j).
CsrMatrix assemble_divergence(const FESpace& velocity_space, const FESpace& pressure_space);
// G[c*n+i, j] = (phi_i, d_c psi_j), so B = -G^T on the zero-trace columns.
CsrMatrix assemble_pressure_gradient(const FESpace& velocity_space,
                                     const FESpace& pressure_space);

// Forcing vector with entries (f^m, phi_i) where f^m is the time average of
// f over [m dt, (m+1) dt] by an n_time_quad-point Gauss rule.
std::vector<double> assemble_forcing(const TimeVectorField& f, const FESpace& space, int m,
                                     double dt, int n_time_quad);
// L2(Omega) norm of the time-averaged forcing on step m.
double forcing_time_average_norm(const TimeVectorField& f, const TriMesh& mesh, int m, double dt,
                                 int n_time_quad);

// Refills the convection values into a fixed sparsity pattern (the mass
// pattern); assembly order is per-triangle and deterministic.
class ConvectionAssembler {
 public:
  explicit ConvectionAssembler(const FESpace& space);
  const CsrMatrix& assemble(const FEFunction& w);

 private:
  const FESpace* space_;
  CsrMatrix pattern_;
  std::vector<int> slot_;  // per (triangle, a, b) csr value index
};

// All operators of the Taylor-Hood pair used by the schemes. The masked
// variants B0/G0 carry zeroed entries on constrained velocity dofs, which is
// the form entering the solvers and the duality identity B0 = -G0^T.
struct OperatorSet {
  const FESpace* vspace = nullptr;  // velocity scalar space (zero_trace)
  const FESpace* pspace = nullptr;  // pressure space (zero_mean)

  CsrMatrix M_s;      // scalar velocity mass, unconstrained
  CsrMatrix A_s;      // scalar velocity stiffness, unconstrained
  CsrMatrix M_s_c;    // scalar mass, Dirichlet-eliminated
  CsrMatrix M_u;      // vector mass, unconstrained
  CsrMatrix M_u_c;    // vector mass, Dirichlet-eliminated
  CsrMatrix M_u_mask; // vector mass, boundary rows/cols zeroed (no unit diagonal)
  CsrMatrix A_u_c;    // vector stiffness, Dirichlet-eliminated
  CsrMatrix B_raw, B0;
  CsrMatrix G_raw, G0;
  CsrMatrix A_p, M_p;
  double area = 0.0;

  CholeskyFactor M_u_c_chol;  // cached once per mesh

  std::unique_ptr<ConvectionAssembler> convection;

  // quadrature-exact norms through the assembled operators
  double vel_mass_norm2(const std::vector<double>& a) const;      // a^T M_u a
  double vel_grad_norm2(const std::vector<double>& a) const;      // per-component A_s
  double p_grad_norm2(const std::vector<double>& p) const;        // p^T A_p p
  double p_mass_norm2(const std::vector<double>& p) const;
  double l2_mean(const std::vector<double>& p) const;             // (p,1)/|Omega|
  void subtract_l2_mean(std::vector<double>& p) const;
};

OperatorSet make_operator_set(const FESpace& velocity_space, const FESpace& pressure_space);

} // namespace projflow

#endif
