#ifndef PROJFLOW_SPARSE_HPP
#define PROJFLOW_SPARSE_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace projflow {

// Compressed sparse row matrix. Built from triplets with a deterministic
// (stable) ordering so repeated assembly is bit-identical.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;   // size rows+1
  std::vector<int> col_idx;   // size nnz
  std::vector<double> vals;   // size nnz

  std::size_t nnz() const { return col_idx.size(); }
  double at(int i, int j) const;       // 0 if not stored
  double* find(int i, int j);          // nullptr if not stored

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transposed(const std::vector<double>& x) const;

  std::vector<double> diagonal() const;
  CsrMatrix transposed() const;

  // Symmetric Dirichlet elimination: zero rows and columns of the marked
  // dofs and place a unit diagonal there.
  void eliminate_dofs(const std::vector<int>& dofs);
  // Zero rows / columns of the marked dofs (entries kept in the pattern).
  void zero_rows(const std::vector<int>& dofs);
  void zero_cols(const std::vector<int>& dofs);

  double max_abs() const;
  // max_ij |A_ij - A_ji|; requires square matrix
  double symmetry_residual() const;

  std::string to_coordinate_text() const;  // "i j value" lines, debug dump

  static CsrMatrix identity(int n);
};

struct TripletList {
  std::vector<int> is, js;
  std::vector<double> vs;
  void push(int i, int j, double v) {
    is.push_back(i);
    js.push_back(j);
    vs.push_back(v);
  }
  std::size_t size() const { return vs.size(); }
};

// Duplicates are summed in insertion order (deterministic).
CsrMatrix csr_from_triplets(int rows, int cols, const TripletList& t);

// Block-diagonal expansion [A 0; 0 A] for component-blocked vector fields.
CsrMatrix block_diag2(const CsrMatrix& A);

// C = alpha*A + beta*B for matrices with identical sparsity pattern.
CsrMatrix add_same_pattern(double alpha, const CsrMatrix& A, double beta, const CsrMatrix& B);

} // namespace projflow

#endif
