#include "projflow/kernels.hpp"

#include "projflow/sparse.hpp"

#include <cmath>

namespace projflow {
namespace kernels {

// Fixed chunk grid: reduction results do not depend on the thread count.
constexpr std::size_t kChunks = 64;

namespace {

inline std::size_t chunk_begin(std::size_t n, std::size_t c) { return n * c / kChunks; }

} // namespace

double dot(const double* x, const double* y, std::size_t n) {
  double partial[kChunks];
#pragma omp parallel for schedule(static)
  for (int c = 0; c < static_cast<int>(kChunks); ++c) {
    const std::size_t b = chunk_begin(n, c), e = chunk_begin(n, c + 1);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += x[i] * y[i];
    partial[c] = s;
  }
  double s = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) s += partial[c];
  return s;
}

double norm2(const double* x, std::size_t n) { return std::sqrt(dot(x, x, n)); }

double sum(const double* x, std::size_t n) {
  double partial[kChunks];
#pragma omp parallel for schedule(static)
  for (int c = 0; c < static_cast<int>(kChunks); ++c) {
    const std::size_t b = chunk_begin(n, c), e = chunk_begin(n, c + 1);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += x[i];
    partial[c] = s;
  }
  double s = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) s += partial[c];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) x[i] *= a;
}

void copy(const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = x[i];
}

void fill(double a, double* x, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) x[i] = a;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  return dot(x.data(), y.data(), x.size());
}

double norm2(const std::vector<double>& x) { return norm2(x.data(), x.size()); }

void spmv(const CsrMatrix& A, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.vals[k] * x[A.col_idx[k]];
    y[i] = s;
  }
}

void spmv_transposed(const CsrMatrix& A, const double* x, double* y) {
  for (int j = 0; j < A.cols; ++j) y[j] = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) y[A.col_idx[k]] += A.vals[k] * x[i];
}

} // namespace kernels

namespace serial {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double norm2(const double* x, std::size_t n) { return std::sqrt(dot(x, x, n)); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void spmv(const CsrMatrix& A, const double* x, double* y) {
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.vals[k] * x[A.col_idx[k]];
    y[i] = s;
  }
}

} // namespace serial

} // namespace projflow
