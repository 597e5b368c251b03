// Times the serial reference kernels against the OpenMP lane and checks
// that both produce bit-identical results. Build target only, not a test.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "srad/kernels.hpp"

using namespace srad;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngHandle& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.next_normal();
  return m;
}

template <class Fn>
double time_best_of(int reps, Fn fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

int g_mismatches = 0;

void bench_gemm(std::size_t m, std::size_t k, std::size_t n) {
  RngHandle rng(1);
  const Matrix a = random_matrix(m, k, rng);
  const Matrix b = random_matrix(k, n, rng);
  Matrix c_ser(m, n), c_par(m, n);

  const double t_ser = time_best_of(3, [&] { kernels::serial::gemm(a, b, c_ser); });
  const double t_par = time_best_of(3, [&] { kernels::par::gemm(a, b, c_par); });
  const bool same = c_ser.data == c_par.data;
  if (!same) ++g_mismatches;

  std::printf("gemm      %4zux%4zux%4zu  serial %8.3f ms  omp %8.3f ms  x%.2f  %s\n",
              m, k, n, t_ser * 1e3, t_par * 1e3, t_ser / t_par,
              same ? "bit-identical" : "MISMATCH");
}

void bench_gemm_at_b(std::size_t m, std::size_t k, std::size_t n) {
  RngHandle rng(2);
  const Matrix a = random_matrix(m, k, rng);
  const Matrix b = random_matrix(m, n, rng);
  Matrix c_ser(k, n), c_par(k, n);

  const double t_ser =
      time_best_of(3, [&] { kernels::serial::gemm_at_b(a, b, c_ser); });
  const double t_par = time_best_of(3, [&] { kernels::par::gemm_at_b(a, b, c_par); });
  const bool same = c_ser.data == c_par.data;
  if (!same) ++g_mismatches;

  std::printf("gemm_at_b %4zux%4zux%4zu  serial %8.3f ms  omp %8.3f ms  x%.2f  %s\n",
              m, k, n, t_ser * 1e3, t_par * 1e3, t_ser / t_par,
              same ? "bit-identical" : "MISMATCH");
}

void bench_matvec(std::size_t m, std::size_t n) {
  RngHandle rng(3);
  const Matrix a = random_matrix(m, n, rng);
  std::vector<double> x(n), y_ser(m), y_par(m);
  for (double& v : x) v = rng.next_normal();

  const double t_ser = time_best_of(5, [&] { kernels::serial::matvec(a, x, y_ser); });
  const double t_par = time_best_of(5, [&] { kernels::par::matvec(a, x, y_par); });
  const bool same = y_ser == y_par;
  if (!same) ++g_mismatches;

  std::printf("matvec    %4zux%4zu       serial %8.3f ms  omp %8.3f ms  x%.2f  %s\n",
              m, n, t_ser * 1e3, t_par * 1e3, t_ser / t_par,
              same ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both lanes run serially\n");
#endif

  // Sizes in the range of a real deployment: fragments x C3D dim x hidden.
  bench_gemm(64, 4096, 512);
  bench_gemm(256, 512, 512);
  bench_gemm(512, 512, 1024);
  bench_gemm_at_b(4096, 64, 512);
  bench_gemm_at_b(512, 256, 512);
  bench_matvec(2048, 4096);

  if (g_mismatches > 0) {
    std::printf("%d kernel(s) diverged from the serial reference\n", g_mismatches);
    return 1;
  }
  return 0;
}
