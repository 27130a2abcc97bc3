#include "projflow/dense.hpp"

#include "projflow/sparse.hpp"

#include <cmath>

namespace projflow {

DenseMatrix DenseMatrix::from_csr(const CsrMatrix& m) {
  DenseMatrix d(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) d(i, m.col_idx[k]) += m.vals[k];
  return d;
}

std::vector<double> DenseMatrix::apply(const std::vector<double>& x) const {
  std::vector<double> y(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

DenseLu::DenseLu(DenseMatrix m) : n_(m.rows), lu_(std::move(m)), piv_(n_) {
  if (lu_.rows != lu_.cols) throw std::invalid_argument("DenseLu: square matrix required");
  double scale = 0.0;
  for (double v : lu_.a) scale = std::max(scale, std::abs(v));
  const double tiny = scale * 1e-14 + 1e-300;
  for (int k = 0; k < n_; ++k) {
    int p = k;
    double best = std::abs(lu_(k, k));
    for (int i = k + 1; i < n_; ++i)
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    if (best <= tiny) throw SingularMatrixError("DenseLu: matrix singular to working precision");
    piv_[k] = p;
    if (p != k)
      for (int j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(p, j));
    const double inv = 1.0 / lu_(k, k);
    for (int i = k + 1; i < n_; ++i) {
      const double f = lu_(i, k) * inv;
      lu_(i, k) = f;
      if (f != 0.0)
        for (int j = k + 1; j < n_; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

std::vector<double> DenseLu::solve(std::vector<double> b) const {
  for (int k = 0; k < n_; ++k)
    if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
  for (int i = 1; i < n_; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= lu_(i, j) * b[j];
    b[i] = s;
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n_; ++j) s -= lu_(i, j) * b[j];
    b[i] = s / lu_(i, i);
  }
  return b;
}

} // namespace projflow
