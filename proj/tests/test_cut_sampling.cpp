#include <cmath>
#include <functional>
#include <vector>

#include "cutsteer/cut_sampling.hpp"
#include "cutsteer/error.hpp"
#include "doctest.h"
#include "moment_oracle.hpp"

using namespace cutsteer;

TEST_CASE("axis families have the expected counts and ordering") {
  const auto p = cut::generate_axes(3, 1);
  REQUIRE(p.count() == 6);
  Eigen::MatrixXd expected(3, 6);
  expected << 1, -1, 0, 0, 0, 0,
              0, 0, 1, -1, 0, 0,
              0, 0, 0, 0, 1, -1;
  CHECK(p.axes == expected);
  CHECK(cut::generate_axes(3, 2).count() == 12);
  CHECK(cut::generate_axes(3, 3).count() == 8);
  CHECK(cut::generate_axes(6, 2).count() == 60);
  CHECK(cut::generate_axes(6, 6).count() == 64);

  // first 2nd-conjugate axes: support {0,1} with ++, +-, -+, --
  const auto c2 = cut::generate_axes(3, 2);
  CHECK(c2.axes.col(0) == Eigen::Vector3d(1, 1, 0));
  CHECK(c2.axes.col(1) == Eigen::Vector3d(1, -1, 0));
  CHECK(c2.axes.col(2) == Eigen::Vector3d(-1, 1, 0));
  CHECK(c2.axes.col(4) == Eigen::Vector3d(1, 0, 1));
}

TEST_CASE("axis families are closed under negation with m nonzeros each") {
  for (int n = 1; n <= 6; ++n) {
    for (int m = 1; m <= n; ++m) {
      const auto f = cut::generate_axes(n, m);
      for (int k = 0; k < f.count(); ++k) {
        CHECK((f.axes.col(k).array() != 0.0).count() == m);
        bool found = false;
        for (int l = 0; l < f.count() && !found; ++l) found = f.axes.col(l) == -f.axes.col(k);
        CHECK(found);
      }
    }
  }
}

TEST_CASE("invalid conjugate orders are rejected") {
  CHECK_THROWS_AS(cut::generate_axes(3, 4), Error);
  CHECK_THROWS_AS(cut::generate_axes(3, 0), Error);
  try {
    cut::generate_axes(2, 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_order);
  }
}

TEST_CASE("CUT-4 constants at n=6") {
  const auto s = cut::cut4_standard(6);
  CHECK(s.count() == 76);
  CHECK(s.points.col(0).norm() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.points.col(12).norm() == doctest::Approx(std::sqrt(2.0) * std::sqrt(6.0)).epsilon(1e-15));
  CHECK(s.weights(0) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(s.weights(12) == doctest::Approx(1.0 / 256.0).epsilon(1e-15));
  CHECK(std::abs(s.weights.sum() - 1.0) < 1e-15);
}

TEST_CASE("CUT-4 rejects n <= 2") {
  for (int n : {1, 2}) {
    try {
      cut::cut4_standard(n);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unsupported_dimension);
    }
  }
}

TEST_CASE("CUT-4 matches Gaussian moments up to degree 4") {
  for (int n = 3; n <= 6; ++n) {
    const auto s = cut::cut4_standard(n);
    CHECK(s.count() == 2 * n + (1 << n));
    CHECK(oracle::max_moment_error(s.points, s.weights, 4) <= 1e-10);
  }
}

TEST_CASE("CUT-6 scaling system and closure") {
  for (int n = 3; n <= 6; ++n) {
    const auto k = cut::cut6_coefficients(n);
    const double a1 = k.a[0], a2 = k.a[1], a3 = k.a[2];
    CHECK(std::abs(2 * (8 - n) * a1 * a1 + a2 * a2 + 2 * (n - 1) * a3 * a3 - 1) <= 1e-12);
    CHECK(std::abs(2 * (8 - n) * a1 + a2 + 2 * (n - 1) * a3 - 3) <= 1e-12);
    CHECK(std::abs(a2 + 2 * a3 - 1) <= 1e-12);
    CHECK(a1 > 0);
    CHECK(a2 > 0);
    CHECK(a3 > 0);
    CHECK(k.w_center >= 0);
    const double closure = k.w_center + 2 * n * k.w[0] + std::ldexp(1.0, n) * k.w[1] + 2 * n * (n - 1) * k.w[2];
    CHECK(std::abs(closure - 1.0) <= 1e-14);
  }
}

TEST_CASE("CUT-6 matches Gaussian moments up to degree 6") {
  for (int n = 3; n <= 6; ++n) {
    const auto s = cut::cut6_standard(n);
    CHECK(s.count() == 2 * n * n + (1 << n) + 1);
    CHECK(s.points.col(s.count() - 1).isZero());
    CHECK(oracle::max_moment_error(s.points, s.weights, 6) <= 1e-9);
  }
  CHECK(cut::cut6_standard(6).count() == 137);
  CHECK_THROWS_AS(cut::cut6_standard(7), Error);
  CHECK_THROWS_AS(cut::cut6_standard(2), Error);
}

TEST_CASE("standard sets are negation symmetric") {
  for (int order : {4, 6}) {
    const auto s = cut::cut_standard(order, 5);
    for (int i = 0; i < s.count(); ++i) {
      if (s.points.col(i).isZero()) continue;
      bool found = false;
      for (int j = 0; j < s.count() && !found; ++j)
        found = s.points.col(j) == -s.points.col(i) && s.weights(j) == s.weights(i);
      CHECK(found);
    }
  }
}

TEST_CASE("transform to a general Gaussian") {
  const auto s = cut::cut4_standard(4);
  const auto same = cut::transform_to_gaussian(s, Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4));
  CHECK(same.points == s.points);
  CHECK(same.weights == s.weights);

  const auto scaled = cut::transform_to_gaussian(s, Eigen::VectorXd::Zero(4), 2.0 * Eigen::MatrixXd::Identity(4, 4));
  const Eigen::MatrixXd cov = scaled.points * scaled.weights.asDiagonal() * scaled.points.transpose();
  CHECK((cov - 4.0 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-13);

  Eigen::VectorXd shift(4);
  shift << 1.5, -2.0, 3.0, 0.25;
  const auto moved = cut::transform_to_gaussian(s, shift, Eigen::MatrixXd::Identity(4, 4));
  CHECK((moved.points * moved.weights - shift).cwiseAbs().maxCoeff() <= 1e-13);

  CHECK_THROWS_AS(cut::transform_to_gaussian(s, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)), Error);
}
