#ifndef PROJFLOW_DENSE_HPP
#define PROJFLOW_DENSE_HPP

#include <stdexcept>
#include <vector>

namespace projflow {

struct CsrMatrix;

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Small dense matrices for direct solves and oracle paths.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static DenseMatrix from_csr(const CsrMatrix& m);
  std::vector<double> apply(const std::vector<double>& x) const;
};

// LU factorization with partial pivoting. Throws SingularMatrixError when a
// pivot is zero to working precision.
class DenseLu {
 public:
  explicit DenseLu(DenseMatrix m);
  std::vector<double> solve(std::vector<double> b) const;
  int size() const { return n_; }

 private:
  int n_;
  DenseMatrix lu_;
  std::vector<int> piv_;
};

} // namespace projflow

#endif
