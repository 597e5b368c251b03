#include "srad/kernels.hpp"

#include <atomic>
#include <cstdint>

namespace srad::kernels {

namespace {

void check_gemm(const Matrix& a, const Matrix& b, const Matrix& c,
                std::size_t m, std::size_t k, std::size_t n) {
  if (b.rows != k || c.rows != m || c.cols != n)
    throw ShapeError("gemm shape mismatch");
  (void)a;
}

// Shared per-element bodies. Both lanes call these so the floating-point
// accumulation order is identical.

inline double dot_row_row(const Matrix& a, std::size_t i, const Matrix& b,
                          std::size_t j) {
  // sum_t a(i,t) * b(t,j)
  double acc = 0.0;
  const double* ap = a.data.data() + i * a.cols;
  for (std::size_t t = 0; t < a.cols; ++t) acc += ap[t] * b.data[t * b.cols + j];
  return acc;
}

inline double dot_col_col(const Matrix& a, std::size_t i, const Matrix& b,
                          std::size_t j) {
  // sum_t a(t,i) * b(t,j)
  double acc = 0.0;
  for (std::size_t t = 0; t < a.rows; ++t)
    acc += a.data[t * a.cols + i] * b.data[t * b.cols + j];
  return acc;
}

inline double dot_row_vec(const Matrix& a, std::size_t i,
                          std::span<const double> x) {
  double acc = 0.0;
  const double* ap = a.data.data() + i * a.cols;
  for (std::size_t t = 0; t < a.cols; ++t) acc += ap[t] * x[t];
  return acc;
}

inline double dot_col_vec(const Matrix& a, std::size_t j,
                          std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t t = 0; t < a.rows; ++t) acc += a.data[t * a.cols + j] * x[t];
  return acc;
}

std::atomic<bool> g_parallel{
#ifdef _OPENMP
    true
#else
    false
#endif
};

constexpr std::size_t kGrain = 1u << 15;  // flops below this stay serial

}  // namespace

namespace serial {

void gemm(const Matrix& a, const Matrix& b, Matrix& c) {
  check_gemm(a, b, c, a.rows, a.cols, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      c.data[i * b.cols + j] = dot_row_row(a, i, b, j);
}

void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& c) {
  check_gemm(a, b, c, a.cols, a.rows, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      c.data[i * b.cols + j] = dot_col_col(a, i, b, j);
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols || y.size() != a.rows) throw ShapeError("matvec shape mismatch");
  for (std::size_t i = 0; i < a.rows; ++i) y[i] = dot_row_vec(a, i, x);
}

void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.rows || y.size() != a.cols)
    throw ShapeError("matvec_t shape mismatch");
  for (std::size_t j = 0; j < a.cols; ++j) y[j] = dot_col_vec(a, j, x);
}

void col_sums(const Matrix& a, std::span<double> out) {
  if (out.size() != a.cols) throw ShapeError("col_sums shape mismatch");
  for (std::size_t j = 0; j < a.cols; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t < a.rows; ++t) acc += a.data[t * a.cols + j];
    out[j] = acc;
  }
}

}  // namespace serial

namespace par {

void gemm(const Matrix& a, const Matrix& b, Matrix& c) {
  check_gemm(a, b, c, a.rows, a.cols, b.cols);
  const std::int64_t m = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      c.data[static_cast<std::size_t>(i) * b.cols + j] =
          dot_row_row(a, static_cast<std::size_t>(i), b, j);
}

void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& c) {
  check_gemm(a, b, c, a.cols, a.rows, b.cols);
  const std::int64_t k = static_cast<std::int64_t>(a.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      c.data[static_cast<std::size_t>(i) * b.cols + j] =
          dot_col_col(a, static_cast<std::size_t>(i), b, j);
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols || y.size() != a.rows) throw ShapeError("matvec shape mismatch");
  const std::int64_t m = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i)
    y[static_cast<std::size_t>(i)] = dot_row_vec(a, static_cast<std::size_t>(i), x);
}

void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.rows || y.size() != a.cols)
    throw ShapeError("matvec_t shape mismatch");
  const std::int64_t n = static_cast<std::int64_t>(a.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < n; ++j)
    y[static_cast<std::size_t>(j)] = dot_col_vec(a, static_cast<std::size_t>(j), x);
}

void col_sums(const Matrix& a, std::span<double> out) {
  if (out.size() != a.cols) throw ShapeError("col_sums shape mismatch");
  const std::int64_t n = static_cast<std::int64_t>(a.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t < a.rows; ++t)
      acc += a.data[t * a.cols + static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] = acc;
  }
}

}  // namespace par

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

namespace {
inline bool go_par(std::size_t flops) { return parallel_enabled() && flops >= kGrain; }
}  // namespace

void gemm(const Matrix& a, const Matrix& b, Matrix& c) {
  go_par(a.rows * a.cols * b.cols) ? par::gemm(a, b, c) : serial::gemm(a, b, c);
}

void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& c) {
  go_par(a.rows * a.cols * b.cols) ? par::gemm_at_b(a, b, c)
                                   : serial::gemm_at_b(a, b, c);
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  go_par(a.rows * a.cols) ? par::matvec(a, x, y) : serial::matvec(a, x, y);
}

void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  go_par(a.rows * a.cols) ? par::matvec_t(a, x, y) : serial::matvec_t(a, x, y);
}

void col_sums(const Matrix& a, std::span<double> out) {
  go_par(a.rows * a.cols) ? par::col_sums(a, out) : serial::col_sums(a, out);
}

}  // namespace srad::kernels
