#include <cmath>
#include <random>

#include "cutsteer/cut_sampling.hpp"
#include "cutsteer/error.hpp"
#include "cutsteer/moment_algebra.hpp"
#include "doctest.h"

using namespace cutsteer;
using moments::AggregatedState;

namespace {

AggregatedState random_cloud(std::mt19937_64& rng, int nx, int ns, bool positive_weights = true) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.2, 1.0);
  Eigen::MatrixXd pts(nx, ns);
  for (int i = 0; i < pts.size(); ++i) pts.data()[i] = nd(rng) + 0.3 * nd(rng) * nd(rng);
  Eigen::VectorXd w(ns);
  for (int i = 0; i < ns; ++i) w(i) = positive_weights ? ud(rng) : ud(rng) - 0.1;
  w /= w.sum();
  return moments::aggregate(pts, w);
}

AggregatedState cut_cloud(int order) {
  const auto s = cut::cut_standard(order, 6);
  return moments::aggregate(s.points, s.weights);
}

}  // namespace

TEST_CASE("centralize removes the weighted mean and is idempotent") {
  std::mt19937_64 rng(7);
  const auto x = random_cloud(rng, 6, 76);
  const auto z = moments::centralize(x);
  CHECK(moments::mean(z).cwiseAbs().maxCoeff() <= 1e-13);
  const auto zz = moments::centralize(z);
  CHECK((zz.data - z.data).cwiseAbs().maxCoeff() <= 1e-13);

  AggregatedState c = x;
  for (int i = 0; i < c.n_s(); ++i) c.as_matrix().col(i) = Eigen::VectorXd::LinSpaced(6, 1, 6);
  CHECK(moments::centralize(c).data.cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("mean map properties") {
  CHECK(moments::mean(cut_cloud(4)).cwiseAbs().maxCoeff() <= 1e-15);
  std::mt19937_64 rng(3);
  auto x = random_cloud(rng, 6, 40);
  const Eigen::VectorXd mu0 = moments::mean(x);
  Eigen::VectorXd shift = Eigen::VectorXd::LinSpaced(6, -1, 2);
  x.as_matrix().colwise() += shift;
  CHECK((moments::mean(x) - mu0 - shift).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("centralizer operator identities") {
  std::mt19937_64 rng(11);
  const auto x = random_cloud(rng, 6, 20);
  const Eigen::MatrixXd az = moments::dense_centralizer(x.weights, 6);
  const Eigen::MatrixXd amu = moments::dense_mean_map(x.weights, 6);
  CHECK((amu * az).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((az * az - az).cwiseAbs().maxCoeff() <= 1e-13);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(120);
  for (int i = 0; i < 120; ++i) v(i) = nd(rng);
  CHECK((moments::apply_centralizer(x.weights, 6, v) - az * v).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((moments::apply_mean_map(x.weights, 6, v) - amu * v).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("square-root covariance") {
  const auto z = moments::centralize(cut_cloud(4));
  const Eigen::MatrixXd m = moments::sqrt_covariance(z);
  CHECK((m * m.transpose() - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-12);

  std::mt19937_64 rng(5);
  const auto r = moments::centralize(random_cloud(rng, 6, 76));
  const Eigen::MatrixXd mr = moments::sqrt_covariance(r);
  const Eigen::MatrixXd p = moments::full_covariance(r);
  CHECK((mr * mr.transpose() - p).norm() <= 1e-12 * p.norm());

  AggregatedState r3 = r;
  r3.data *= 3.0;
  CHECK((moments::sqrt_covariance(r3) - 3.0 * mr).cwiseAbs().maxCoeff() <= 1e-13);

  AggregatedState zero = r;
  zero.data.setZero();
  CHECK(moments::sqrt_covariance(zero).isZero());

  AggregatedState neg = r;
  neg.weights(0) = -0.1;
  CHECK_THROWS_AS(moments::sqrt_covariance(neg), Error);
}

TEST_CASE("spectral norm") {
  CHECK(moments::spectral_norm(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3), v = Eigen::VectorXd::Zero(5);
  u(0) = 2.0;
  v(2) = 3.0;
  CHECK(moments::spectral_norm(u * v.transpose()) == doctest::Approx(6.0).epsilon(1e-14));

  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(3, 30);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  // power iteration oracle on M^T M
  Eigen::VectorXd x = Eigen::VectorXd::Ones(30);
  double lam = 0.0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd y = m.transpose() * (m * x);
    lam = y.norm() / x.norm();
    x = y.normalized();
  }
  CHECK(std::abs(moments::spectral_norm(m) - std::sqrt(lam)) <= 1e-10);
}

TEST_CASE("covariance delta form") {
  std::mt19937_64 rng(23);
  const auto z = moments::centralize(random_cloud(rng, 6, 76));
  const Eigen::MatrixXd p = moments::full_covariance(z);
  CHECK((moments::covariance_delta_form(z, Eigen::VectorXd::Zero(z.data.size())) - p).isZero());
  CHECK((moments::full_covariance(moments::centralize(cut_cloud(4))) - Eigen::MatrixXd::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  std::normal_distribution<double> nd;
  Eigen::VectorXd dz(z.data.size());
  for (int i = 0; i < dz.size(); ++i) dz(i) = nd(rng);
  dz = moments::apply_centralizer(z.weights, 6, dz);
  auto err = [&](double h) {
    AggregatedState zp = z;
    zp.data += h * dz;
    return (moments::full_covariance(zp) - moments::covariance_delta_form(z, h * dz)).norm();
  };
  const double ratio = err(1e-3) / err(5e-4);
  CHECK(ratio == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("standardized moments") {
  const auto z4 = moments::centralize(cut_cloud(4));
  const auto z6 = moments::centralize(cut_cloud(6));
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(moments::standardized_moment(z4, 3, j)) <= 1e-14);
    CHECK(moments::standardized_moment(z4, 4, j) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(moments::standardized_moment(z6, 4, j) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(moments::standardized_moment(z6, 6, j) == doctest::Approx(15.0).epsilon(1e-12));
  }

  std::mt19937_64 rng(29);
  const auto z = moments::centralize(random_cloud(rng, 6, 76));
  AggregatedState scaled = z;
  scaled.data *= 4.5;
  AggregatedState negated = z;
  negated.data *= -1.0;
  for (int m = 3; m <= 6; ++m) {
    for (int j = 0; j < 6; ++j) {
      const double v = moments::standardized_moment(z, m, j);
      CHECK(std::abs(moments::standardized_moment(scaled, m, j) - v) <= 1e-12 * std::max(1.0, std::abs(v)));
      const double sign = (m % 2) ? -1.0 : 1.0;
      CHECK(std::abs(moments::standardized_moment(negated, m, j) - sign * v) <= 1e-12 * std::max(1.0, std::abs(v)));
    }
  }

  AggregatedState flat = z;
  flat.as_matrix().row(2).setZero();
  try {
    moments::standardized_moment(flat, 3, 2);
    FAIL("expected degenerate axis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_axis);
  }
}

TEST_CASE("moment Jacobian matches finite differences and the naive oracle") {
  std::mt19937_64 rng(31);
  for (int m = 3; m <= 6; ++m) {
    const auto z = moments::centralize(random_cloud(rng, 6, 76));
    const Eigen::MatrixXd jac = moments::moment_jacobian(z, m);
    const Eigen::MatrixXd naive = moments::moment_jacobian_naive(z, m);
    CHECK((jac - naive).cwiseAbs().maxCoeff() <= 1e-12);
    const double h = 1e-6;
    double worst = 0.0;
    for (int j = 0; j < 6; ++j) {
      Eigen::RowVectorXd fd(z.data.size());
      for (int e = 0; e < z.data.size(); ++e) {
        AggregatedState zp = z, zm = z;
        zp.data(e) += h;
        zm.data(e) -= h;
        fd(e) = (moments::standardized_moment(zp, m, j) - moments::standardized_moment(zm, m, j)) / (2 * h);
      }
      worst = std::max(worst, (jac.row(j) - fd).norm() / fd.norm());
    }
    CHECK(worst <= 1e-6);
    // scale invariance: gradient orthogonal to the radial direction
    CHECK((jac * z.data).cwiseAbs().maxCoeff() <= 1e-10 * jac.norm() * z.data.norm());
  }
}

TEST_CASE("moment Jacobian sparsity and the symmetric skewness case") {
  const auto z = moments::centralize(cut_cloud(6));
  const Eigen::MatrixXd jac = moments::moment_jacobian(z, 3);
  CHECK((jac - moments::moment_jacobian_naive(z, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  for (int j = 0; j < 6; ++j) {
    for (int e = 0; e < jac.cols(); ++e) {
      if (e % 6 != j) CHECK(jac(j, e) == 0.0);
    }
    // E[Z^3] = 0 so only the first term survives: 3 w_i z_ij^2 / var^1.5 with var = 1
    for (int i = 0; i < z.n_s(); ++i) {
      const double zij = z.as_matrix()(j, i);
      CHECK(jac(j, i * 6 + j) == doctest::Approx(3.0 * z.weights(i) * zij * zij).epsilon(1e-12));
    }
  }
  AggregatedState flat = z;
  flat.as_matrix().row(0).setZero();
  CHECK_THROWS_AS(moments::moment_jacobian(flat, 4), Error);
  CHECK_THROWS_AS(moments::moment_jacobian_naive(flat, 4), Error);
}
