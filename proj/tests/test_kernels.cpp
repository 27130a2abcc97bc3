#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projflow/kernels.hpp"
#include "projflow/sparse.hpp"
#include "support/oracles.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <vector>

using namespace projflow;

namespace {

CsrMatrix random_sparse(int n, testsupport::Lcg& rng) {
  TripletList t;
  for (int i = 0; i < n; ++i) {
    t.push(i, i, 2.0 + rng.positive());
    for (int k = 0; k < 4; ++k) {
      const int j = static_cast<int>(rng.positive() * n) % n;
      t.push(i, j, rng.unit());
    }
  }
  return csr_from_triplets(n, n, t);
}

} // namespace

TEST_CASE("parallel kernels match the serial reference") {
  testsupport::Lcg rng(7);
  const int n = 1537;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.unit();
    y[i] = rng.unit();
  }

  CHECK(kernels::dot(x.data(), y.data(), n) ==
        doctest::Approx(serial::dot(x.data(), y.data(), n)).epsilon(1e-13));
  CHECK(kernels::norm2(x.data(), n) ==
        doctest::Approx(serial::norm2(x.data(), n)).epsilon(1e-13));

  std::vector<double> y1 = y, y2 = y;
  kernels::axpy(0.37, x.data(), y1.data(), n);
  serial::axpy(0.37, x.data(), y2.data(), n);
  for (int i = 0; i < n; ++i) CHECK(y1[i] == y2[i]);

  const CsrMatrix A = random_sparse(n, rng);
  std::vector<double> z1(n), z2(n);
  kernels::spmv(A, x.data(), z1.data());
  serial::spmv(A, x.data(), z2.data());
  for (int i = 0; i < n; ++i) CHECK(z1[i] == z2[i]);  // row-parallel spmv is bit-identical
}

TEST_CASE("reductions are bit-identical across thread counts") {
  testsupport::Lcg rng(11);
  const int n = 10000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.unit();
    y[i] = rng.unit();
  }
#ifdef _OPENMP
  omp_set_num_threads(1);
  const double d1 = kernels::dot(x.data(), y.data(), n);
  omp_set_num_threads(4);
  const double d4 = kernels::dot(x.data(), y.data(), n);
  omp_set_num_threads(omp_get_num_procs());
  CHECK(d1 == d4);
#else
  CHECK(kernels::dot(x.data(), y.data(), n) == kernels::dot(x.data(), y.data(), n));
#endif
}

TEST_CASE("csr construction sums duplicates deterministically") {
  TripletList t;
  t.push(0, 1, 1.0);
  t.push(1, 0, 2.0);
  t.push(0, 1, 0.5);
  t.push(0, 0, -1.0);
  const CsrMatrix m = csr_from_triplets(2, 2, t);
  CHECK(m.nnz() == 3);
  CHECK(m.at(0, 1) == 1.5);
  CHECK(m.at(0, 0) == -1.0);
  CHECK(m.at(1, 0) == 2.0);
  CHECK(m.at(1, 1) == 0.0);
  CHECK(m.to_coordinate_text() == "0 0 -1\n0 1 1.5\n1 0 2\n");
}

TEST_CASE("transpose, block_diag2 and pattern add") {
  testsupport::Lcg rng(3);
  const CsrMatrix A = random_sparse(40, rng);
  const CsrMatrix At = A.transposed();
  for (int i = 0; i < 40; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      CHECK(At.at(A.col_idx[k], i) == A.vals[k]);

  const CsrMatrix B = block_diag2(A);
  CHECK(B.rows == 80);
  CHECK(B.at(3, 5) == A.at(3, 5));
  CHECK(B.at(40 + 3, 40 + 5) == A.at(3, 5));
  CHECK(B.at(3, 40 + 5) == 0.0);

  const CsrMatrix C = add_same_pattern(2.0, A, -1.0, A);
  for (std::size_t k = 0; k < A.nnz(); ++k) CHECK(C.vals[k] == doctest::Approx(A.vals[k]));
}

TEST_CASE("dirichlet elimination zeroes rows and columns with unit diagonal") {
  TripletList t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.push(i, j, 1.0 + i + j);
  CsrMatrix m = csr_from_triplets(3, 3, t);
  m.eliminate_dofs({1});
  CHECK(m.at(1, 1) == 1.0);
  CHECK(m.at(1, 0) == 0.0);
  CHECK(m.at(0, 1) == 0.0);
  CHECK(m.at(2, 2) == 5.0);

  const double sym = m.symmetry_residual();
  CHECK(sym <= 1e-15);
}
