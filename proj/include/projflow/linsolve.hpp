#ifndef PROJFLOW_LINSOLVE_HPP
#define PROJFLOW_LINSOLVE_HPP

#include "projflow/sparse.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace projflow {

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_iter = 5000;
};

struct SolverError : std::runtime_error {
  double residual = 0.0;
  int iterations = 0;
  SolverError(const std::string& msg, double res, int it)
      : std::runtime_error(msg), residual(res), iterations(it) {}
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // re-verified by explicit multiplication
};

// Sparse SPD Cholesky on the envelope of the RCM-permuted matrix. Throws
// SingularMatrixError if a pivot fails. Cached once per mesh for mass and
// stiffness solves.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(const CsrMatrix& A);
  std::vector<double> solve(const std::vector<double>& b) const;
  bool empty() const { return n_ == 0; }
  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<int> perm_, iperm_;      // RCM ordering
  std::vector<int> first_;             // first column of each envelope row
  std::vector<std::size_t> offset_;    // row start in vals_
  std::vector<double> vals_;           // L rows, [first_[i], i]
};

// Dense LU behind the sparse interface; for small systems and oracle runs.
std::vector<double> solve_direct(const CsrMatrix& S, const std::vector<double>& rhs);
constexpr int kDirectSizeLimit = 3000;

using LinearOperator = std::function<void(const double*, double*)>;

// Preconditioned conjugate gradient. With deflate_constants, the right side
// is first orthogonalized against the constant vector (required when the
// operator annihilates constants) and the returned iterate is centered.
std::vector<double> solve_cg(const CsrMatrix& S, const std::vector<double>& rhs,
                             const SolverConfig& cfg, bool deflate_constants = false,
                             SolveReport* report = nullptr);

std::vector<double> solve_cg_operator(const LinearOperator& apply, int n,
                                      const std::vector<double>& rhs, const SolverConfig& cfg,
                                      bool deflate_constants = false,
                                      SolveReport* report = nullptr,
                                      const std::vector<double>* jacobi = nullptr);

// BiCGStab with Jacobi preconditioning for the nonsymmetric prediction
// systems. Throws SolverError on breakdown or stagnation.
std::vector<double> solve_prediction(const CsrMatrix& S, const std::vector<double>& rhs,
                                     const SolverConfig& cfg, SolveReport* report = nullptr);

struct DarcySolution {
  std::vector<double> u;
  std::vector<double> p;        // centered to zero L2 mean against M_p
  SolveReport schur;
};

// Projection of u_tilde onto the discretely divergence-free subspace via the
// pressure Schur complement S_p = dt * B M^-1 B^T:
//   M (u - u_tilde) = dt * B^T p,   B u = 0.
// B must carry zeroed columns on constrained velocity dofs; M_chol is the
// factorization of the constrained velocity mass. M_p supplies the Jacobi
// scaling of the Schur solve and the zero-mean normalization of p.
DarcySolution solve_darcy_saddle(const CholeskyFactor& M_chol, const CsrMatrix& B,
                                 const std::vector<double>& u_tilde, double dt,
                                 const SolverConfig& cfg, const CsrMatrix& M_p, double area);

// Inf-sup constant of the pair: beta = sqrt(lambda_min+) of the generalized
// problem  B A^-1 B^T q = lambda M_p q  on zero-mean pressures, by inverse
// power iteration with the constant mode deflated in the M_p inner product.
// Rank-deficient pairs (exact spurious modes) fall back to a dense pencil
// eigensolve that skips the zero eigenvalues.
double estimate_lbb(const CsrMatrix& A_u_constrained, const CsrMatrix& B, const CsrMatrix& M_p,
                    const SolverConfig& cfg = {});

// Discrete Poincare constant sup ||v|| / ||grad v|| over the zero-trace
// space: sqrt(lambda_max) of M v = lambda A v by power iteration on A^-1 M.
double poincare_constant(const CsrMatrix& M_u_masked, const CsrMatrix& A_u_constrained,
                         const SolverConfig& cfg = {});

void orthogonalize_against_ones(std::vector<double>& v);

} // namespace projflow

#endif
