#ifndef PROJFLOW_FESPACE_HPP
#define PROJFLOW_FESPACE_HPP

#include "projflow/mesh.hpp"
#include "projflow/sparse.hpp"

#include <array>
#include <functional>
#include <vector>

namespace projflow {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double)>;
using TimeScalarField = std::function<double(double, double, double)>;           // (t,x,y)
using TimeVectorField = std::function<std::array<double, 2>(double, double, double)>;

// Symmetric rule on the reference triangle; weights sum to the reference
// area 1/2. Exactness is verified against monomial integrals in the tests.
struct QuadratureRule {
  int exactness_degree = 0;
  std::vector<std::array<double, 3>> points;  // barycentric
  std::vector<double> weights;

  static const QuadratureRule& triangle_degree6();
};

// Gauss-Legendre nodes/weights on [0,1]; exact for degree <= 2n-1.
void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w);

enum class Constraint { none, zero_mean, zero_trace };

// Continuous Lagrange space of degree k in {1,2} on a TriMesh. DOFs are the
// vertices, plus (k=2) the edge midpoints numbered after all vertices.
// Vector fields are component-blocked: [all x-coefficients; all y-...].
struct FESpace {
  const TriMesh* mesh = nullptr;
  int degree = 1;
  Constraint constraint = Constraint::none;
  int n_dofs = 0;                                  // scalar dofs
  std::vector<std::array<double, 2>> dof_coords;
  std::vector<std::array<int, 6>> cell_dofs;       // P1 uses the first 3
  std::vector<int> boundary_dofs;                  // sorted scalar dof ids
  std::vector<char> is_boundary;

  int dofs_per_cell() const { return degree == 1 ? 3 : 6; }
  int n_vector_dofs() const { return 2 * n_dofs; }
  std::vector<int> vector_boundary_dofs() const;   // both components
};

FESpace build_space(const TriMesh& mesh, int degree, Constraint constraint);

struct FEFunction {
  const FESpace* space = nullptr;
  int arity = 1;                 // 1 scalar, 2 vector
  std::vector<double> coeffs;    // n_dofs or 2*n_dofs

  static FEFunction zero(const FESpace& s, int arity);
};

// Shape values / barycentric-gradient tables at one point.
void shape_values(int degree, const std::array<double, 3>& lam, double* N);
void shape_grads_bary(int degree, const std::array<double, 3>& lam, double grad[6][3]);

// Per-triangle geometry: barycentric gradients and the Jacobian factor.
struct CellGeometry {
  std::array<std::array<double, 2>, 3> grad_lambda;
  double jac;  // 2*area, quadrature scale factor
};
CellGeometry cell_geometry(const TriMesh& mesh, int t);

std::array<double, 2> evaluate(const FEFunction& f, int tri_index,
                               const std::array<double, 3>& bary);
// gradient of each component at a barycentric point: g[c][d] = d u_c / d x_d
void evaluate_gradient(const FEFunction& f, int tri_index, const std::array<double, 3>& bary,
                       double g[2][2]);

// L2-orthogonal projection into the (constrained) space; the mass matrix
// must already carry the space's constraint.
FEFunction l2_project(const VectorField& target, const FESpace& space, const CsrMatrix& mass);
FEFunction l2_project_scalar(const ScalarField& target, const FESpace& space,
                             const CsrMatrix& mass);

// Pointwise view of an FE function (linear-scan point location), so fields
// living on a finer or different mesh can be projection targets.
VectorField field_from_fe(const FEFunction& f);

double l2_norm(const FEFunction& f);
double h1_seminorm(const FEFunction& f);
double l2_inner(const FEFunction& f, const FEFunction& g);
double mean_value(const FEFunction& f);  // (f,1)/|Omega|, scalar functions

double l2_error(const FEFunction& f, const VectorField& exact);
double l2_norm_of_field(const TriMesh& mesh, const VectorField& f);

} // namespace projflow

#endif
