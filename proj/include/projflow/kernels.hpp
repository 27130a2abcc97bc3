#ifndef PROJFLOW_KERNELS_HPP
#define PROJFLOW_KERNELS_HPP

#include <cstddef>
#include <vector>

namespace projflow {

struct CsrMatrix;

// Parallel vector/matrix kernels. Reductions run over a fixed chunk grid and
// are combined serially in chunk order, so results are bit-identical for any
// thread count (including the serial reference path for spmv/axpy).
namespace kernels {

double dot(const double* x, const double* y, std::size_t n);
double norm2(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);   // y += a*x
void scal(double a, double* x, std::size_t n);
void copy(const double* x, double* y, std::size_t n);
void fill(double a, double* x, std::size_t n);

double dot(const std::vector<double>& x, const std::vector<double>& y);
double norm2(const std::vector<double>& x);

// y = A*x (row-parallel; each row is a serial dot, so output is
// bit-identical to the serial reference)
void spmv(const CsrMatrix& A, const double* x, double* y);
// y = A^T*x (serial column sweep; kept serial to preserve determinism)
void spmv_transposed(const CsrMatrix& A, const double* x, double* y);

} // namespace kernels

// Naive single-loop reference implementations, kept for testing the parallel
// kernels against.
namespace serial {

double dot(const double* x, const double* y, std::size_t n);
double norm2(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void spmv(const CsrMatrix& A, const double* x, double* y);

} // namespace serial

} // namespace projflow

#endif
