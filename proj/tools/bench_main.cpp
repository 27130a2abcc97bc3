// Benchmark comparing the OpenMP kernels against the serial reference on
// assembly-sized workloads: spmv, dot, and full operator assembly.

#include "projflow/assembly.hpp"
#include "projflow/kernels.hpp"
#include "projflow/mesh.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace projflow;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

} // namespace

int main(int argc, char** argv) {
  int nx = 96;
  if (argc > 1) nx = std::atoi(argv[1]);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; parallel kernels run serially\n");
#endif

  const TriMesh mesh = generate_structured(nx, nx);
  const FESpace vel = build_space(mesh, 2, Constraint::zero_trace);
  std::printf("mesh nx=%d: %d triangles, %d P2 dofs\n", nx, mesh.n_triangles(), vel.n_dofs);

  const CsrMatrix A = assemble_stiffness(vel);
  std::vector<double> x(A.cols), y(A.rows);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * i);

  const int spmv_reps = 200;
  const double t_spmv_serial = time_best_of(5, [&] {
    for (int r = 0; r < spmv_reps; ++r) serial::spmv(A, x.data(), y.data());
  });
  const double t_spmv_par = time_best_of(5, [&] {
    for (int r = 0; r < spmv_reps; ++r) kernels::spmv(A, x.data(), y.data());
  });

  const int dot_reps = 2000;
  volatile double sink = 0.0;
  const double t_dot_serial = time_best_of(5, [&] {
    double s = 0.0;
    for (int r = 0; r < dot_reps; ++r) s += serial::dot(x.data(), x.data(), x.size());
    sink = s;
  });
  const double t_dot_par = time_best_of(5, [&] {
    double s = 0.0;
    for (int r = 0; r < dot_reps; ++r) s += kernels::dot(x.data(), x.data(), x.size());
    sink = s;
  });
  (void)sink;

  const double t_asm = time_best_of(3, [&] { (void)assemble_stiffness(vel); });

  std::printf("\n%-28s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]", "speedup");
  std::printf("%-28s %12.4f %12.4f %8.2f\n", "spmv x200", t_spmv_serial, t_spmv_par,
              t_spmv_serial / t_spmv_par);
  std::printf("%-28s %12.4f %12.4f %8.2f\n", "dot x2000", t_dot_serial, t_dot_par,
              t_dot_serial / t_dot_par);
  std::printf("%-28s %12s %12.4f %8s\n", "assemble_stiffness (P2)", "-", t_asm, "-");
  return 0;
}
