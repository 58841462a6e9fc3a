#include <cmath>
#include <numeric>
#include <random>

#include "cutsteer/error.hpp"
#include "cutsteer/monte_carlo.hpp"
#include "doctest.h"

using namespace cutsteer;
using namespace cutsteer::mc;

namespace {

scvx::SteeringProblem drift_problem() {
  scvx::SteeringProblem p;
  p.model = dyn::DynamicsModel::free_space();
  p.grid = dyn::NodeGrid::uniform(0.0, 1.0, 3);
  p.initial.mean << 1.0, 2.0, 3.0, 0.1, 0.2, 0.3;
  p.initial.covariance = Mat6::Identity() * 0.01;
  return p;
}

std::vector<Vec6> centers_of(const scvx::SteeringProblem& p) {
  return std::vector<Vec6>(p.nodes(), p.initial.mean);
}

}  // namespace

TEST_CASE("two-point cloud moments") {
  Eigen::MatrixXd cloud(1, 4);
  cloud << -1.0, 1.0, -1.0, 1.0;
  const EmpiricalMoments m = empirical_moments(cloud, 0);
  CHECK(m.mean == 0.0);
  CHECK(m.skewness == doctest::Approx(0.0));
  CHECK(m.kurtosis == doctest::Approx(1.0));
  CHECK(m.sigma == doctest::Approx(std::sqrt(4.0 / 3.0)));
}

TEST_CASE("moments of a hand-checked skewed cloud") {
  Eigen::MatrixXd cloud(1, 4);
  cloud << 0.0, 0.0, 0.0, 4.0;
  // mean 1, central moments m2 = 3, m3 = 6, m4 = 21
  const EmpiricalMoments m = empirical_moments(cloud, 0);
  CHECK(m.mean == doctest::Approx(1.0));
  CHECK(m.skewness == doctest::Approx(6.0 / std::pow(3.0, 1.5)));
  CHECK(m.kurtosis == doctest::Approx(21.0 / 9.0));
}

TEST_CASE("degenerate axis is reported") {
  Eigen::MatrixXd cloud = Eigen::MatrixXd::Constant(2, 10, 5.0);
  cloud.row(0).setLinSpaced(10, 0.0, 1.0);
  CHECK_NOTHROW(empirical_moments(cloud, 0));
  try {
    empirical_moments(cloud, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_axis);
  }
}

TEST_CASE("gaussian samples have normal kurtosis") {
  const int n = 200000;
  Mat6 cov = Mat6::Identity();
  cov(0, 1) = cov(1, 0) = 0.5;
  const Eigen::MatrixXd cloud = sample_gaussian(Vec6::Zero(), cov, n, 42);
  const double tol = 5.0 * std::sqrt(24.0 / n);
  for (int a = 0; a < 6; ++a) {
    const EmpiricalMoments m = empirical_moments(cloud, a);
    CHECK(std::abs(m.kurtosis - 3.0) < tol);
    CHECK(std::abs(m.skewness) < 5.0 * std::sqrt(6.0 / n));
    CHECK(std::abs(m.sigma - 1.0) < 0.01);
  }
  const Eigen::MatrixXd c = cloud.colwise() - cloud.rowwise().mean();
  CHECK((c.row(0).dot(c.row(1)) / (n - 1)) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sampling is deterministic per seed") {
  const Eigen::MatrixXd a = sample_gaussian(Vec6::Zero(), Mat6::Identity(), 50, 7);
  const Eigen::MatrixXd b = sample_gaussian(Vec6::Zero(), Mat6::Identity(), 50, 7);
  const Eigen::MatrixXd c = sample_gaussian(Vec6::Zero(), Mat6::Identity(), 50, 8);
  CHECK(a == b);
  CHECK(a != c);
  // a longer run shares its prefix
  const Eigen::MatrixXd d = sample_gaussian(Vec6::Zero(), Mat6::Identity(), 80, 7);
  CHECK(d.leftCols(50) == a);
}

TEST_CASE("nearest-rank quantile") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937(3));
  CHECK(nearest_rank(v, 0.99) == 99.0);
  CHECK(nearest_rank(v, 1.0) == 100.0);
  CHECK(nearest_rank(v, 0.5) == 50.0);
  CHECK(nearest_rank({4.0}, 0.99) == 4.0);
  CHECK_THROWS_AS(nearest_rank({}, 0.5), Error);
  CHECK_THROWS_AS(nearest_rank(v, 0.0), Error);
}

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(100.0).epsilon(1e-14));
  std::vector<double> s{1.0, 9.0, 2.0, 9.0, 3.0, 9.0};
  CHECK(pairwise_sum(s.data(), 3, 2) == 6.0);
}

TEST_CASE("feedforward-only policy gives a point-mass delta-v") {
  const scvx::SteeringProblem p = drift_problem();
  dyn::ImpulsivePolicy pol = dyn::ImpulsivePolicy::zeros(2);
  pol.feedforward[0] << 0.3, 0.0, 0.4;
  pol.feedforward[1] << 0.0, 1.0, 0.0;
  const EnsembleRun run = run_ensemble(p, pol, centers_of(p), 500, 1);
  REQUIRE(run.valid() == 500);
  CHECK((run.dv_total.array() - 1.5).abs().maxCoeff() < 1e-14);
  const DvStatistics st = dv_statistics(run, 1.5, 1.5);
  CHECK(st.total.p99 == doctest::Approx(1.5));
  CHECK(st.expected_fuel_error == doctest::Approx(0.0));
  CHECK(st.per_node.size() == 2);
  CHECK(st.per_node[0].mean == doctest::Approx(0.5));
}

TEST_CASE("ensemble of a linear system matches the propagated Gaussian") {
  const scvx::SteeringProblem p = drift_problem();
  dyn::ImpulsivePolicy pol = dyn::ImpulsivePolicy::zeros(2);
  // velocity feedback that cancels velocity dispersion at the first node
  for (int i = 0; i < 3; ++i) pol.gain[0](i, 3 + i) = -1.0;
  const EnsembleRun run = run_ensemble(p, pol, centers_of(p), 20000, 5);
  const NodeStatistics& term = run.moments.back();
  // positions keep their initial spread; velocities collapse to the mean
  for (int a = 0; a < 3; ++a) {
    CHECK(term.three_sigma(a) == doctest::Approx(0.3).epsilon(0.03));
    CHECK(std::abs(term.kurtosis(a) - 3.0) < 0.2);
    CHECK(term.three_sigma(3 + a) == 0.0);
    CHECK(std::isnan(term.skewness(3 + a)));
  }
  CHECK(run.nodes.size() == 3);
}

TEST_CASE("ensembles are reproducible") {
  const scvx::SteeringProblem p = drift_problem();
  dyn::ImpulsivePolicy pol = dyn::ImpulsivePolicy::zeros(2);
  pol.gain[1](0, 0) = 0.2;
  const EnsembleRun a = run_ensemble(p, pol, centers_of(p), 300, 9);
  const EnsembleRun b = run_ensemble(p, pol, centers_of(p), 300, 9);
  CHECK(a.dv == b.dv);
  CHECK(a.terminal() == b.terminal());
}

TEST_CASE("ensemble input checks") {
  const scvx::SteeringProblem p = drift_problem();
  CHECK_THROWS_AS(run_ensemble(p, dyn::ImpulsivePolicy::zeros(3), centers_of(p), 10, 1), Error);
  CHECK_THROWS_AS(run_ensemble(p, dyn::ImpulsivePolicy::zeros(2), centers_of(p), 1, 1), Error);
}

TEST_CASE("moment error shrinks like one over root n") {
  const int n = 64000;
  const Eigen::MatrixXd cloud = sample_gaussian(Vec6::Zero(), Mat6::Identity(), n, 11);
  const std::vector<int> checkpoints{1000, 2000, 4000, 8000, 16000, n};
  const auto rows = convergence_analysis(cloud, checkpoints);
  REQUIRE(rows.size() == checkpoints.size() * 6);
  // the full-size checkpoint reproduces the reference exactly
  for (std::size_t r = rows.size() - 6; r < rows.size(); ++r) {
    CHECK(rows[r].mean == 0.0);
    CHECK(rows[r].kurtosis == 0.0);
  }
  // Against the exact variance of a standard normal the RMS error over axes
  // follows n^(-1/2).
  std::vector<double> ns, errs;
  for (int c : {1000, 4000, 16000, 64000}) {
    double e = 0.0;
    for (int a = 0; a < 6; ++a) {
      double acc = 0.0;
      for (int rep = 0; rep < 8; ++rep) {
        const Eigen::MatrixXd s = sample_gaussian(Vec6::Zero(), Mat6::Identity(), c, 100 + rep);
        acc += std::pow(empirical_moments(s, a).sigma - 1.0, 2);
      }
      e += acc / 8.0;
    }
    ns.push_back(c);
    errs.push_back(std::sqrt(e / 6.0));
  }
  CHECK(log_log_slope(ns, errs) == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("log-log slope of an exact power law") {
  CHECK(log_log_slope({1.0, 10.0, 100.0}, {1.0, 0.1, 0.01}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(log_log_slope({1.0}, {1.0}), Error);
}
