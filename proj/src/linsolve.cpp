#include "projflow/linsolve.hpp"

#include "projflow/dense.hpp"
#include "projflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace projflow {

namespace {

// Reverse Cuthill-McKee ordering; BFS neighbors visited by (degree, index).
std::vector<int> rcm_ordering(const CsrMatrix& A) {
  const int n = A.rows;
  std::vector<int> degree(n);
  for (int i = 0; i < n; ++i) degree[i] = A.row_ptr[i + 1] - A.row_ptr[i];
  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (int start = 0; start < n; ++start) {
    // next unvisited vertex of minimal degree
    int seed = -1;
    for (int i = 0; i < n; ++i)
      if (!visited[i] && (seed < 0 || degree[i] < degree[seed])) seed = i;
    if (seed < 0) break;
    std::queue<int> q;
    q.push(seed);
    visited[seed] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      order.push_back(v);
      std::vector<int> nb;
      for (int k = A.row_ptr[v]; k < A.row_ptr[v + 1]; ++k) {
        const int w = A.col_idx[k];
        if (w != v && !visited[w]) nb.push_back(w);
      }
      std::sort(nb.begin(), nb.end(), [&](int a, int b) {
        if (degree[a] != degree[b]) return degree[a] < degree[b];
        return a < b;
      });
      for (int w : nb) {
        visited[w] = 1;
        q.push(w);
      }
    }
    if (static_cast<int>(order.size()) == n) break;
  }
  std::reverse(order.begin(), order.end());
  return order;
}

} // namespace

CholeskyFactor::CholeskyFactor(const CsrMatrix& A) {
  if (A.rows != A.cols) throw std::invalid_argument("CholeskyFactor: square matrix required");
  n_ = A.rows;
  perm_ = rcm_ordering(A);
  iperm_.resize(n_);
  for (int i = 0; i < n_; ++i) iperm_[perm_[i]] = i;

  first_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) first_[i] = i;
  for (int r = 0; r < n_; ++r) {
    const int i = iperm_[r];
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      const int j = iperm_[A.col_idx[k]];
      if (j <= i) first_[i] = std::min(first_[i], j);
    }
  }
  offset_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) offset_[i + 1] = offset_[i] + static_cast<std::size_t>(i - first_[i] + 1);
  vals_.assign(offset_[n_], 0.0);

  for (int r = 0; r < n_; ++r) {
    const int i = iperm_[r];
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      const int j = iperm_[A.col_idx[k]];
      if (j <= i) vals_[offset_[i] + (j - first_[i])] += A.vals[k];
    }
  }

  // envelope LL^T
  double maxdiag = 0.0;
  for (int i = 0; i < n_; ++i) maxdiag = std::max(maxdiag, vals_[offset_[i + 1] - 1]);
  const double tiny = maxdiag * 1e-14 + 1e-300;
  for (int i = 0; i < n_; ++i) {
    double* li = &vals_[offset_[i]];
    const int fi = first_[i];
    for (int j = fi; j < i; ++j) {
      const double* lj = &vals_[offset_[j]];
      const int fj = first_[j];
      const int lo = std::max(fi, fj);
      double s = li[j - fi];
      for (int k = lo; k < j; ++k) s -= li[k - fi] * lj[k - fj];
      li[j - fi] = s / lj[j - fj];
    }
    double s = li[i - fi];
    for (int k = fi; k < i; ++k) s -= li[k - fi] * li[k - fi];
    if (s <= tiny)
      throw SingularMatrixError("CholeskyFactor: matrix not positive definite to working precision");
    li[i - fi] = std::sqrt(s);
  }
}

std::vector<double> CholeskyFactor::solve(const std::vector<double>& b) const {
  std::vector<double> y(n_);
  for (int i = 0; i < n_; ++i) y[i] = b[perm_[i]];
  // forward
  for (int i = 0; i < n_; ++i) {
    const double* li = &vals_[offset_[i]];
    const int fi = first_[i];
    double s = y[i];
    for (int k = fi; k < i; ++k) s -= li[k - fi] * y[k];
    y[i] = s / li[i - fi];
  }
  // backward (column sweep of L^T)
  for (int i = n_ - 1; i >= 0; --i) {
    const double* li = &vals_[offset_[i]];
    const int fi = first_[i];
    y[i] /= li[i - fi];
    const double yi = y[i];
    for (int k = fi; k < i; ++k) y[k] -= li[k - fi] * yi;
  }
  std::vector<double> x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

std::vector<double> solve_direct(const CsrMatrix& S, const std::vector<double>& rhs) {
  if (S.rows != S.cols) throw std::invalid_argument("solve_direct: square matrix required");
  if (S.rows > kDirectSizeLimit)
    throw std::invalid_argument("solve_direct: system larger than the direct-solver size guard");
  DenseLu lu(DenseMatrix::from_csr(S));
  std::vector<double> x = lu.solve(rhs);
  // verify the residual against the stated contract
  std::vector<double> r = S.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rhs[i];
  const double scale = S.max_abs() * kernels::norm2(x) + kernels::norm2(rhs);
  if (kernels::norm2(r) > 1e-12 * scale + 1e-300)
    throw SingularMatrixError("solve_direct: residual check failed; matrix near-singular");
  return x;
}

void orthogonalize_against_ones(std::vector<double>& v) {
  const double mean = kernels::sum(v.data(), v.size()) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

std::vector<double> solve_cg_operator(const LinearOperator& apply, int n,
                                      const std::vector<double>& rhs, const SolverConfig& cfg,
                                      bool deflate_constants, SolveReport* report,
                                      const std::vector<double>* jacobi) {
  std::vector<double> b = rhs;
  if (deflate_constants) orthogonalize_against_ones(b);

  std::vector<double> x(n, 0.0), r = b, z(n), p(n), Ap(n);
  const double bnorm = kernels::norm2(b);
  const double tol = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);

  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (jacobi)
      for (int i = 0; i < n; ++i) out[i] = in[i] / (*jacobi)[i];
    else
      kernels::copy(in.data(), out.data(), n);
  };

  double rnorm = kernels::norm2(r);
  int it = 0;
  if (rnorm > tol) {
    precond(r, z);
    p = z;
    double rz = kernels::dot(r, z);
    for (it = 1; it <= cfg.max_iter; ++it) {
      apply(p.data(), Ap.data());
      const double pAp = kernels::dot(p, Ap);
      if (pAp <= 0.0) throw SolverError("cg: operator not positive definite", rnorm, it);
      const double alpha = rz / pAp;
      kernels::axpy(alpha, p.data(), x.data(), n);
      kernels::axpy(-alpha, Ap.data(), r.data(), n);
      rnorm = kernels::norm2(r);
      if (rnorm <= tol) break;
      precond(r, z);
      const double rz_new = kernels::dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }

  // re-verify by explicit multiplication
  apply(x.data(), Ap.data());
  std::vector<double> rv(n);
  for (int i = 0; i < n; ++i) rv[i] = b[i] - Ap[i];
  const double verified = kernels::norm2(rv);
  if (verified > 10.0 * tol + 1e-300)
    throw SolverError("cg: not converged within max_iter", verified, it);
  if (deflate_constants) orthogonalize_against_ones(x);
  if (report) {
    report->iterations = it;
    report->residual = verified;
  }
  return x;
}

std::vector<double> solve_cg(const CsrMatrix& S, const std::vector<double>& rhs,
                             const SolverConfig& cfg, bool deflate_constants,
                             SolveReport* report) {
  std::vector<double> diag = S.diagonal();
  for (double& d : diag)
    if (d <= 0.0) d = 1.0;
  LinearOperator apply = [&S](const double* x, double* y) { kernels::spmv(S, x, y); };
  return solve_cg_operator(apply, S.rows, rhs, cfg, deflate_constants, report, &diag);
}

std::vector<double> solve_prediction(const CsrMatrix& S, const std::vector<double>& rhs,
                                     const SolverConfig& cfg, SolveReport* report) {
  const int n = S.rows;
  std::vector<double> diag = S.diagonal();
  for (double& d : diag)
    if (d == 0.0) d = 1.0;

  std::vector<double> x(n, 0.0), r = rhs, rt = rhs;
  std::vector<double> p(n, 0.0), v(n, 0.0), y(n), z(n), s(n), t(n);
  const double bnorm = kernels::norm2(rhs);
  const double tol = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double rnorm = kernels::norm2(r);
  int it = 0;
  while (rnorm > tol && it < cfg.max_iter) {
    ++it;
    const double rho_new = kernels::dot(rt, r);
    if (std::abs(rho_new) < 1e-300)
      throw SolverError("bicgstab: breakdown (rho = 0)", rnorm, it);
    if (it == 1) {
      p = r;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    for (int i = 0; i < n; ++i) y[i] = p[i] / diag[i];
    kernels::spmv(S, y.data(), v.data());
    const double rtv = kernels::dot(rt, v);
    if (std::abs(rtv) < 1e-300) throw SolverError("bicgstab: breakdown (rt'v = 0)", rnorm, it);
    alpha = rho / rtv;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (kernels::norm2(s) <= tol) {
      kernels::axpy(alpha, y.data(), x.data(), n);
      r = s;
      rnorm = kernels::norm2(r);
      break;
    }
    for (int i = 0; i < n; ++i) z[i] = s[i] / diag[i];
    kernels::spmv(S, z.data(), t.data());
    const double tt = kernels::dot(t, t);
    if (tt < 1e-300) throw SolverError("bicgstab: breakdown (t = 0)", rnorm, it);
    omega = kernels::dot(t, s) / tt;
    if (std::abs(omega) < 1e-300) throw SolverError("bicgstab: stagnation (omega = 0)", rnorm, it);
    for (int i = 0; i < n; ++i) x[i] += alpha * y[i] + omega * z[i];
    for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rnorm = kernels::norm2(r);
  }

  kernels::spmv(S, x.data(), t.data());
  for (int i = 0; i < n; ++i) t[i] = rhs[i] - t[i];
  const double verified = kernels::norm2(t);
  if (verified > 10.0 * tol + 1e-300)
    throw SolverError("bicgstab: not converged within max_iter", verified, it);
  if (report) {
    report->iterations = it;
    report->residual = verified;
  }
  return x;
}

DarcySolution solve_darcy_saddle(const CholeskyFactor& M_chol, const CsrMatrix& B,
                                 const std::vector<double>& u_tilde, double dt,
                                 const SolverConfig& cfg, const CsrMatrix& M_p, double area) {
  const int np = B.rows;
  const int nu = B.cols;

  LinearOperator schur = [&](const double* q, double* out) {
    std::vector<double> qv(q, q + np);
    std::vector<double> w = B.apply_transposed(qv);
    w = M_chol.solve(w);
    std::vector<double> Bw = B.apply(w);
    for (int j = 0; j < np; ++j) out[j] = dt * Bw[j];
  };

  std::vector<double> rhs = B.apply(u_tilde);
  for (double& v : rhs) v = -v;
  const std::vector<double> jacobi = M_p.diagonal();

  DarcySolution sol;
  try {
    sol.p = solve_cg_operator(schur, np, rhs, cfg, /*deflate_constants=*/true, &sol.schur,
                              &jacobi);
  } catch (const SolverError& e) {
    throw SolverError(std::string("darcy projection: Schur solve failed (") + e.what() +
                          "); LBB degeneracy or tolerance mismatch",
                      e.residual, e.iterations);
  }

  // zero L2 mean: (p, 1) = 0 against the pressure mass
  const std::vector<double> Mp = M_p.apply(sol.p);
  double mean = 0.0;
  for (double v : Mp) mean += v;
  mean /= area;
  for (double& v : sol.p) v -= mean;

  std::vector<double> w = B.apply_transposed(sol.p);
  w = M_chol.solve(w);
  sol.u.resize(nu);
  for (int i = 0; i < nu; ++i) sol.u[i] = u_tilde[i] + dt * w[i];
  return sol;
}

namespace {

double rayleigh(const LinearOperator& S, const CsrMatrix& M, const std::vector<double>& q) {
  std::vector<double> Sq(q.size()), Mq = M.apply(q);
  S(q.data(), Sq.data());
  return kernels::dot(q, Sq) / kernels::dot(q, Mq);
}

// subtract the M-weighted mean so that (q, 1)_M = 0
void center_against_ones_weighted(std::vector<double>& q, const CsrMatrix& M, double weight_sum) {
  const std::vector<double> Mq = M.apply(q);
  double mean = 0.0;
  for (double v : Mq) mean += v;
  mean /= weight_sum;
  for (double& v : q) v -= mean;
}

// dense symmetric Jacobi eigenvalues, for the degenerate-pair fallback
std::vector<double> dense_sym_eigenvalues(DenseMatrix m) {
  const int n = m.rows;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-28 * n * n) break;
    for (int p = 0; p < n; ++p)
      for (int qq = p + 1; qq < n; ++qq) {
        if (std::abs(m(p, qq)) < 1e-300) continue;
        const double theta = (m(qq, qq) - m(p, p)) / (2.0 * m(p, qq));
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, qq);
          m(k, p) = c * mkp - s * mkq;
          m(k, qq) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(qq, k);
          m(p, k) = c * mpk - s * mqk;
          m(qq, k) = s * mpk + c * mqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = m(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// smallest positive eigenvalue of the dense pencil S q = lambda M q via the
// Cholesky reduction L^-1 S L^-T
double dense_pencil_lambda_min_pos(const LinearOperator& schur, const CsrMatrix& M_p, int np) {
  DenseMatrix S(np, np);
  std::vector<double> col(np);
  for (int j = 0; j < np; ++j) {
    std::vector<double> ej(np, 0.0);
    ej[j] = 1.0;
    schur(ej.data(), col.data());
    for (int i = 0; i < np; ++i) S(i, j) = col[i];
  }
  DenseMatrix L = DenseMatrix::from_csr(M_p);
  for (int i = 0; i < np; ++i) {  // dense Cholesky of the SPD pressure mass
    for (int j = 0; j < i; ++j) {
      double s = L(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
    double s = L(i, i);
    for (int k = 0; k < i; ++k) s -= L(i, k) * L(i, k);
    if (s <= 0.0) throw SingularMatrixError("estimate_lbb: pressure mass not SPD");
    L(i, i) = std::sqrt(s);
    for (int j = i + 1; j < np; ++j) L(i, j) = 0.0;
  }
  // C = L^-1 S L^-T
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) col[i] = S(i, j);
    for (int i = 0; i < np; ++i) {
      for (int k = 0; k < i; ++k) col[i] -= L(i, k) * col[k];
      col[i] /= L(i, i);
    }
    for (int i = 0; i < np; ++i) S(i, j) = col[i];
  }
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) col[j] = S(i, j);
    for (int j = 0; j < np; ++j) {
      for (int k = 0; k < j; ++k) col[j] -= L(j, k) * col[k];
      col[j] /= L(j, j);
    }
    for (int j = 0; j < np; ++j) S(i, j) = col[j];
  }
  const std::vector<double> ev = dense_sym_eigenvalues(S);
  const double cutoff = 1e-9 * std::max(ev.back(), 0.0) + 1e-300;
  for (double v : ev)
    if (v > cutoff) return v;
  throw SolverError("estimate_lbb: pencil has no positive eigenvalue", 0.0, 0);
}

} // namespace

double estimate_lbb(const CsrMatrix& A_u_constrained, const CsrMatrix& B, const CsrMatrix& M_p,
                    const SolverConfig& cfg) {
  const int np = B.rows;
  CholeskyFactor A_chol(A_u_constrained);

  LinearOperator schur = [&](const double* q, double* out) {
    std::vector<double> qv(q, q + np);
    std::vector<double> w = B.apply_transposed(qv);
    w = A_chol.solve(w);
    std::vector<double> Bw = B.apply(w);
    for (int j = 0; j < np; ++j) out[j] = Bw[j];
  };

  const std::vector<double> Mones = M_p.apply(std::vector<double>(np, 1.0));
  double area = 0.0;
  for (double v : Mones) area += v;

  SolverConfig inner = cfg;
  inner.rel_tol = 1e-10;  // inexact inverse iteration; the Rayleigh quotient
                          // is quadratically accurate in the iterate
  inner.max_iter = std::max(cfg.max_iter, 10000);

  // inverse power iteration on S q = lambda M_p q; the iterate is kept at
  // zero L2 mean so that M_p q stays in the range of S
  std::vector<double> q(np);
  for (int j = 0; j < np; ++j) q[j] = std::sin(1.0 + 0.7 * j);  // deterministic seed
  center_against_ones_weighted(q, M_p, area);
  double lambda = rayleigh(schur, M_p, q);
  constexpr int kMaxOuter = 400;
  constexpr int kDenseFallbackLimit = 700;
  try {
    for (int outer = 0; outer < kMaxOuter; ++outer) {
      std::vector<double> Mq = M_p.apply(q);
      q = solve_cg_operator(schur, np, Mq, inner, /*deflate_constants=*/true);
      center_against_ones_weighted(q, M_p, area);
      const double nrm = kernels::norm2(q);
      if (nrm == 0.0) throw SolverError("estimate_lbb: iterate vanished", 0.0, outer);
      kernels::scal(1.0 / nrm, q.data(), np);
      const double lambda_new = rayleigh(schur, M_p, q);
      const bool converged = std::abs(lambda_new - lambda) <= 1e-10 * std::abs(lambda_new);
      lambda = lambda_new;
      if (converged && outer >= 3) {
        if (lambda <= 0.0)
          throw SolverError("estimate_lbb: nonpositive eigenvalue", lambda, outer);
        return std::sqrt(lambda);
      }
    }
    throw SolverError("estimate_lbb: eigen-iteration did not converge", lambda, kMaxOuter);
  } catch (const SolverError&) {
    // rank-deficient pair (exact spurious modes): the Schur operator is
    // singular beyond constants; fall back to the dense pencil eigensolve
    // for the smallest positive eigenvalue
    if (np <= kDenseFallbackLimit) return std::sqrt(dense_pencil_lambda_min_pos(schur, M_p, np));
    throw;
  }
}

double poincare_constant(const CsrMatrix& M_u_masked, const CsrMatrix& A_u_constrained,
                         const SolverConfig& cfg) {
  const int n = M_u_masked.rows;
  CholeskyFactor A_chol(A_u_constrained);
  (void)cfg;

  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::cos(0.3 + 1.1 * i);
  // keep the iterate inside the zero-trace subspace
  x = A_chol.solve(M_u_masked.apply(x));
  double lambda = 0.0;
  for (int outer = 0; outer < 800; ++outer) {
    std::vector<double> Mx = M_u_masked.apply(x);
    const double num = kernels::dot(x, Mx);
    std::vector<double> Ax = A_u_constrained.apply(x);
    const double den = kernels::dot(x, Ax);
    const double lambda_new = num / den;
    std::vector<double> y = A_chol.solve(Mx);
    const double nrm = kernels::norm2(y);
    if (nrm == 0.0) throw SolverError("poincare_constant: iterate vanished", 0.0, outer);
    kernels::scal(1.0 / nrm, y.data(), n);
    x = std::move(y);
    if (outer >= 3 && std::abs(lambda_new - lambda) <= 1e-11 * std::abs(lambda_new)) {
      return std::sqrt(lambda_new);
    }
    lambda = lambda_new;
  }
  throw SolverError("poincare_constant: power iteration did not converge", lambda, 800);
}

} // namespace projflow
