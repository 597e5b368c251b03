#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "srad/kernels.hpp"

using namespace srad;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngHandle& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.next_normal();
  return m;
}

}  // namespace

TEST_CASE("gemm matches a hand-computed product") {
  Matrix a(2, 3);
  a.data = {1, 2, 3, 4, 5, 6};
  Matrix b(3, 2);
  b.data = {7, 8, 9, 10, 11, 12};
  Matrix c(2, 2);
  kernels::serial::gemm(a, b, c);
  CHECK(c(0, 0) == 58);
  CHECK(c(0, 1) == 64);
  CHECK(c(1, 0) == 139);
  CHECK(c(1, 1) == 154);
}

TEST_CASE("gemm_at_b matches explicit transpose-multiply") {
  RngHandle rng(3);
  const Matrix a = random_matrix(5, 4, rng);
  const Matrix b = random_matrix(5, 3, rng);
  Matrix c(4, 3);
  kernels::serial::gemm_at_b(a, b, c);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double want = 0.0;
      for (std::size_t t = 0; t < 5; ++t) want += a(t, i) * b(t, j);
      CHECK(c(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("parallel lane is bit-identical to the serial reference") {
  RngHandle rng(11);
  // Sizes straddle the dispatch grain on both sides.
  for (auto [m, k, n] : {std::tuple<int, int, int>{3, 4, 5},
                         {40, 60, 50},
                         {90, 70, 110}}) {
    const Matrix a = random_matrix(m, k, rng);
    const Matrix b = random_matrix(k, n, rng);
    Matrix c_ser(m, n), c_par(m, n);
    kernels::serial::gemm(a, b, c_ser);
    kernels::par::gemm(a, b, c_par);
    CHECK(c_ser.data == c_par.data);

    const Matrix a2 = random_matrix(m, k, rng);
    const Matrix b2 = random_matrix(m, n, rng);
    Matrix t_ser(k, n), t_par(k, n);
    kernels::serial::gemm_at_b(a2, b2, t_ser);
    kernels::par::gemm_at_b(a2, b2, t_par);
    CHECK(t_ser.data == t_par.data);

    std::vector<double> x(k), y_ser(m), y_par(m);
    RngHandle xr(5);
    for (double& v : x) v = xr.next_normal();
    kernels::serial::matvec(a, x, y_ser);
    kernels::par::matvec(a, x, y_par);
    CHECK(y_ser == y_par);

    std::vector<double> xt(m), z_ser(k), z_par(k);
    for (double& v : xt) v = xr.next_normal();
    kernels::serial::matvec_t(a, xt, z_ser);
    kernels::par::matvec_t(a, xt, z_par);
    CHECK(z_ser == z_par);

    std::vector<double> s_ser(k), s_par(k);
    kernels::serial::col_sums(a, s_ser);
    kernels::par::col_sums(a, s_par);
    CHECK(s_ser == s_par);
  }
}

TEST_CASE("dispatcher output does not depend on the parallel switch") {
  RngHandle rng(17);
  const Matrix a = random_matrix(64, 64, rng);
  const Matrix b = random_matrix(64, 64, rng);

  Matrix c_on(64, 64), c_off(64, 64);
  kernels::set_parallel(true);
  kernels::gemm(a, b, c_on);
  kernels::set_parallel(false);
  kernels::gemm(a, b, c_off);
  kernels::set_parallel(true);
  CHECK(c_on.data == c_off.data);
}

TEST_CASE("shape mismatches are rejected") {
  Matrix a(2, 3), b(4, 2), c(2, 2);
  CHECK_THROWS_AS(kernels::serial::gemm(a, b, c), ShapeError);
  std::vector<double> x(5), y(2);
  CHECK_THROWS_AS(kernels::serial::matvec(a, x, y), ShapeError);
}
