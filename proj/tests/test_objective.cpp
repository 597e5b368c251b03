#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "srad/objective.hpp"

using namespace srad;

TEST_CASE("regression loss is zero when scores equal targets") {
  const std::vector<double> y{0.3, 0.8};
  const RegressionLoss l = regression_loss(y, y);
  CHECK(l.value == 0.0);
  CHECK(l.d_scores == std::vector<double>{0.0, 0.0});
}

TEST_CASE("regression loss on a worked example") {
  const std::vector<double> y{1.0, 0.0};
  const std::vector<double> s{0.5, 0.5};
  const RegressionLoss l = regression_loss(y, s);
  CHECK(l.value == doctest::Approx(0.25));
  CHECK(l.d_scores[0] == doctest::Approx(-0.5));
  CHECK(l.d_scores[1] == doctest::Approx(0.5));
}

TEST_CASE("regression gradient matches finite differences") {
  RngHandle rng(8);
  std::vector<double> y(6), s(6);
  for (std::size_t i = 0; i < 6; ++i) {
    y[i] = double(rng.next_below(2));
    s[i] = 0.05 + 0.9 * rng.next_unit();
  }
  const RegressionLoss l = regression_loss(y, s);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> up = s, down = s;
    up[i] += h;
    down[i] -= h;
    const double fd =
        (regression_loss(y, up).value - regression_loss(y, down).value) / (2 * h);
    CHECK(oracle::rel_error(l.d_scores[i], fd) < 1e-8);
  }
  CHECK_THROWS_AS(regression_loss(y, std::vector<double>(3, 0.5)), ShapeError);
}

TEST_CASE("clustering loss for normal videos is the capped distance") {
  SUBCASE("below the cap") {
    const ClusteringLoss l = clustering_loss(0.5, 0, 1.0, 1e-3);
    CHECK(l.value == 0.5);
    CHECK(l.d_distance == 1.0);
  }
  SUBCASE("above the cap") {
    const ClusteringLoss l = clustering_loss(3.0, 0, 1.0, 1e-3);
    CHECK(l.value == 1.0);
    CHECK(l.d_distance == 0.0);
  }
  SUBCASE("at the cap the subgradient is zero") {
    const ClusteringLoss l = clustering_loss(1.0, 0, 1.0, 1e-3);
    CHECK(l.value == 1.0);
    CHECK(l.d_distance == 0.0);
  }
}

TEST_CASE("clustering loss for anomalous videos is the clamped inverse") {
  const ClusteringLoss l = clustering_loss(2.0, 1, 1.0, 1e-3);
  CHECK(l.value == doctest::Approx(0.5));
  CHECK(l.d_distance == doctest::Approx(-0.25));

  SUBCASE("the floor keeps the loss finite with a zero subgradient") {
    const ClusteringLoss c = clustering_loss(1e-9, 1, 1.0, 1e-3);
    CHECK(c.value == doctest::Approx(1000.0));
    CHECK(c.d_distance == 0.0);
    CHECK(c.d_used == 1e-3);
  }
  CHECK_THROWS_AS(clustering_loss(-0.1, 1, 1.0, 1e-3), ValidationError);
}

TEST_CASE("clustering-loss derivatives match finite differences away from kinks") {
  const double h = 1e-7;
  auto check_at = [&](double d, int label) {
    const ClusteringLoss l = clustering_loss(d, label, 1.0, 1e-3);
    const double fd = (clustering_loss(d + h, label, 1.0, 1e-3).value -
                       clustering_loss(d - h, label, 1.0, 1e-3).value) /
                      (2 * h);
    CHECK(oracle::rel_error(l.d_distance, fd) < 1e-6);
  };
  check_at(0.4, 0);
  check_at(0.9, 0);
  check_at(0.7, 1);
  check_at(3.5, 1);
}

TEST_CASE("clustering loss is monotone in the distance") {
  RngHandle rng(14);
  for (int i = 0; i < 100; ++i) {
    double d1 = 5.0 * rng.next_unit();
    double d2 = 5.0 * rng.next_unit();
    if (d1 > d2) std::swap(d1, d2);
    CHECK(clustering_loss(d1, 0, 1.0, 1e-3).value <=
          clustering_loss(d2, 0, 1.0, 1e-3).value);
    CHECK(clustering_loss(d1, 1, 1.0, 1e-3).value >=
          clustering_loss(d2, 1, 1.0, 1e-3).value);
  }
}

TEST_CASE("loss bounds hold") {
  RngHandle rng(15);
  for (int i = 0; i < 100; ++i) {
    const double d = 10.0 * rng.next_unit();
    CHECK(clustering_loss(d, 0, 1.0, 1e-3).value <= 1.0);
    CHECK(clustering_loss(d, 1, 1.0, 1e-3).value <= 1000.0);
  }
}

TEST_CASE("total loss composes the pieces") {
  CHECK(total_loss(0.25, 0.5, 0.05) == doctest::Approx(0.275));
  CHECK(total_loss(0.6, 0.9, 0.0) == 0.6);
  CHECK(total_loss(0.6, 0.0, 0.05) == 0.6);
}

TEST_CASE("total loss is linear in the clustering term with slope lambda") {
  const double lambda = 0.05;
  const double l0 = total_loss(0.3, 1.0, lambda);
  const double l1 = total_loss(0.3, 2.0, lambda);
  CHECK(l1 - l0 == doctest::Approx(lambda));
}
