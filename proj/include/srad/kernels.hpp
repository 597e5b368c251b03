#pragma once

#include <span>

#include "srad/core.hpp"

// Dense kernels behind the network and clustering hot loops.
//
// Every kernel exists twice: kernels::serial is the reference, kernels::par
// is the OpenMP version. Both accumulate each output element in the same
// index order, so results are bit-identical regardless of thread count.
// The unqualified entry points dispatch on a work-size threshold.

namespace srad::kernels {

// C = A * B            (m x k) . (k x n)
// C = A^T * B          (m x k)^T . (m x n) -> (k x n)
// y = A * x            (m x n) . n -> m
// y = A^T * x          (m x n)^T . m -> n
// out[j] = sum_i A(i,j)

namespace serial {
void gemm(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& c);
void matvec(const Matrix& a, std::span<const double> x, std::span<double> y);
void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y);
void col_sums(const Matrix& a, std::span<double> out);
}  // namespace serial

namespace par {
void gemm(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& c);
void matvec(const Matrix& a, std::span<const double> x, std::span<double> y);
void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y);
void col_sums(const Matrix& a, std::span<double> out);
}  // namespace par

// Global switch, default on when compiled with OpenMP. Small problems fall
// back to the serial path regardless (threading overhead dominates below
// the grain size).
void set_parallel(bool enabled);
bool parallel_enabled();

void gemm(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_at_b(const Matrix& a, const Matrix& b, Matrix& c);
void matvec(const Matrix& a, std::span<const double> x, std::span<double> y);
void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y);
void col_sums(const Matrix& a, std::span<double> out);

}  // namespace srad::kernels
