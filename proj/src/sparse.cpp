#include "projflow/sparse.hpp"

#include "projflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace projflow {

double CsrMatrix::at(int i, int j) const {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    if (col_idx[k] == j) return vals[k];
  return 0.0;
}

double* CsrMatrix::find(int i, int j) {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    if (col_idx[k] == j) return &vals[k];
  return nullptr;
}

std::vector<double> CsrMatrix::apply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols) throw std::invalid_argument("spmv: size mismatch");
  std::vector<double> y(rows);
  kernels::spmv(*this, x.data(), y.data());
  return y;
}

std::vector<double> CsrMatrix::apply_transposed(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != rows) throw std::invalid_argument("spmv_t: size mismatch");
  std::vector<double> y(cols);
  kernels::spmv_transposed(*this, x.data(), y.data());
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows, 0.0);
  for (int i = 0; i < rows; ++i) d[i] = at(i, i);
  return d;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (int k = 0; k < static_cast<int>(nnz()); ++k) ++t.row_ptr[col_idx[k] + 1];
  for (int j = 0; j < cols; ++j) t.row_ptr[j + 1] += t.row_ptr[j];
  t.col_idx.resize(nnz());
  t.vals.resize(nnz());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int pos = next[col_idx[k]]++;
      t.col_idx[pos] = i;
      t.vals[pos] = vals[k];
    }
  return t;
}

void CsrMatrix::eliminate_dofs(const std::vector<int>& dofs) {
  if (rows != cols) throw std::invalid_argument("eliminate_dofs: square matrix required");
  std::vector<char> mark(rows, 0);
  for (int d : dofs) mark[d] = 1;
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int j = col_idx[k];
      if (mark[i] || mark[j]) vals[k] = (i == j) ? 1.0 : 0.0;
    }
}

void CsrMatrix::zero_rows(const std::vector<int>& dofs) {
  std::vector<char> mark(rows, 0);
  for (int d : dofs) mark[d] = 1;
  for (int i = 0; i < rows; ++i)
    if (mark[i])
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) vals[k] = 0.0;
}

void CsrMatrix::zero_cols(const std::vector<int>& dofs) {
  std::vector<char> mark(cols, 0);
  for (int d : dofs) mark[d] = 1;
  for (int k = 0; k < static_cast<int>(nnz()); ++k)
    if (mark[col_idx[k]]) vals[k] = 0.0;
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::symmetry_residual() const {
  if (rows != cols) throw std::invalid_argument("symmetry_residual: square matrix required");
  const CsrMatrix t = transposed();
  double m = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      m = std::max(m, std::abs(vals[k] - t.at(i, col_idx[k])));
  // entries present only in the transpose
  for (int i = 0; i < t.rows; ++i)
    for (int k = t.row_ptr[i]; k < t.row_ptr[i + 1]; ++k)
      m = std::max(m, std::abs(t.vals[k] - at(i, t.col_idx[k])));
  return m;
}

std::string CsrMatrix::to_coordinate_text() const {
  std::string out;
  char buf[80];
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, col_idx[k], vals[k]);
      out += buf;
    }
  return out;
}

CsrMatrix CsrMatrix::identity(int n) {
  CsrMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.vals.assign(n, 1.0);
  for (int i = 0; i <= n; ++i) m.row_ptr[i] = i;
  for (int i = 0; i < n; ++i) m.col_idx[i] = i;
  return m;
}

CsrMatrix csr_from_triplets(int rows, int cols, const TripletList& t) {
  const std::size_t n = t.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (t.is[a] != t.is[b]) return t.is[a] < t.is[b];
    return t.js[a] < t.js[b];
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t o = order[k];
    if (k > 0) {
      const std::size_t prev = order[k - 1];
      if (t.is[o] == t.is[prev] && t.js[o] == t.js[prev]) {
        m.vals.back() += t.vs[o];
        continue;
      }
    }
    m.col_idx.push_back(t.js[o]);
    m.vals.push_back(t.vs[o]);
    ++m.row_ptr[t.is[o] + 1];
  }
  for (int i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

CsrMatrix block_diag2(const CsrMatrix& A) {
  CsrMatrix m;
  m.rows = 2 * A.rows;
  m.cols = 2 * A.cols;
  m.row_ptr.resize(m.rows + 1);
  m.col_idx.resize(2 * A.nnz());
  m.vals.resize(2 * A.nnz());
  const int nnzA = static_cast<int>(A.nnz());
  for (int blk = 0; blk < 2; ++blk) {
    const int roff = blk * A.rows, coff = blk * A.cols, koff = blk * nnzA;
    for (int i = 0; i < A.rows; ++i) m.row_ptr[roff + i] = koff + A.row_ptr[i];
    for (int k = 0; k < nnzA; ++k) {
      m.col_idx[koff + k] = coff + A.col_idx[k];
      m.vals[koff + k] = A.vals[k];
    }
  }
  m.row_ptr[m.rows] = 2 * nnzA;
  return m;
}

CsrMatrix add_same_pattern(double alpha, const CsrMatrix& A, double beta, const CsrMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols || A.nnz() != B.nnz() || A.col_idx != B.col_idx)
    throw std::invalid_argument("add_same_pattern: pattern mismatch");
  CsrMatrix c = A;
  for (std::size_t k = 0; k < c.nnz(); ++k) c.vals[k] = alpha * A.vals[k] + beta * B.vals[k];
  return c;
}

} // namespace projflow
