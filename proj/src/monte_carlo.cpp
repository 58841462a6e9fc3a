#include "cutsteer/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cutsteer/error.hpp"

namespace cutsteer::mc {

double pairwise_sum(const double* values, std::size_t n, std::size_t stride) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[i * stride];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half, stride) + pairwise_sum(values + half * stride, n - half, stride);
}

namespace {

double sum(const Eigen::VectorXd& v) { return pairwise_sum(v.data(), static_cast<std::size_t>(v.size())); }

}  // namespace

EmpiricalMoments empirical_moments(const Eigen::MatrixXd& cloud, int axis) {
  if (axis < 0 || axis >= cloud.rows()) throw Error(ErrorCode::shape, "axis out of range", "axis=" + std::to_string(axis));
  const Eigen::Index n = cloud.cols();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "empirical moments need at least two samples");
  const Eigen::VectorXd x = cloud.row(axis).transpose();
  EmpiricalMoments m;
  m.mean = sum(x) / static_cast<double>(n);
  const Eigen::VectorXd d = x.array() - m.mean;
  const Eigen::VectorXd d2 = d.array().square();
  const double s2 = sum(d2);
  const double m2 = s2 / static_cast<double>(n);
  if (!(m2 > moments::kVarianceFloor * std::max(1.0, m.mean * m.mean)))
    throw Error(ErrorCode::degenerate_axis, "sample variance is zero", "axis=" + std::to_string(axis));
  m.sigma = std::sqrt(s2 / static_cast<double>(n - 1));
  const double m3 = sum(d2.cwiseProduct(d)) / static_cast<double>(n);
  const double m4 = sum(d2.cwiseProduct(d2)) / static_cast<double>(n);
  m.skewness = m3 / std::pow(m2, 1.5);
  m.kurtosis = m4 / (m2 * m2);
  return m;
}

NodeStatistics node_statistics(const Eigen::MatrixXd& cloud) {
  if (cloud.rows() != 6) throw Error(ErrorCode::shape, "node cloud must have six rows");
  NodeStatistics s;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int a = 0; a < 6; ++a) {
    EmpiricalMoments m;
    try {
      m = empirical_moments(cloud, a);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_axis) throw;
      // collapsed axis: zero spread, shape moments undefined
      m.mean = sum(cloud.row(a).transpose()) / static_cast<double>(cloud.cols());
      m.sigma = 0.0;
      m.skewness = m.kurtosis = nan;
    }
    s.mean(a) = m.mean;
    s.three_sigma(a) = 3.0 * m.sigma;
    s.skewness(a) = m.skewness;
    s.kurtosis(a) = m.kurtosis;
  }
  return s;
}

Vec6 standard_normal(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> nd;
  Vec6 z;
  for (int a = 0; a < 6; ++a) z(a) = nd(gen);
  return z;
}

Eigen::MatrixXd sample_gaussian(const Vec6& mean, const Mat6& covariance, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "sample count must be positive");
  const Eigen::LLT<Mat6> llt(covariance);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::invalid_argument, "covariance is not positive definite");
  const Mat6 l = llt.matrixL();
  Eigen::MatrixXd out(6, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) out.col(i) = mean + l * standard_normal(seed, static_cast<std::uint64_t>(i));
  return out;
}

EnsembleRun run_ensemble(const scvx::SteeringProblem& problem, const dyn::ImpulsivePolicy& policy,
                         const std::vector<Vec6>& centers, int n_samples, std::uint64_t seed) {
  problem.validate();
  const int segs = problem.segments();
  const int nodes = problem.nodes();
  if (policy.segments() != segs || static_cast<int>(policy.gain.size()) != segs)
    throw Error(ErrorCode::shape, "policy does not match the node grid",
                "segments=" + std::to_string(policy.segments()) + " expected=" + std::to_string(segs));
  if (static_cast<int>(centers.size()) < segs) throw Error(ErrorCode::shape, "missing feedback centers");
  if (n_samples < 2) throw Error(ErrorCode::invalid_argument, "ensemble needs at least two samples");

  const Eigen::MatrixXd start = sample_gaussian(problem.initial.mean, problem.initial.covariance, n_samples, seed);
  std::vector<Eigen::MatrixXd> states(nodes, Eigen::MatrixXd(6, n_samples));
  Eigen::MatrixXd dv(n_samples, segs);
  std::vector<char> failed(n_samples, 0);

#pragma omp parallel for schedule(dynamic, 16)
  for (int s = 0; s < n_samples; ++s) {
    try {
      Vec6 x = start.col(s);
      if (problem.initial.lead_in > 0.0) x = dyn::propagate(problem.model, x, problem.initial.lead_in);
      for (int k = 0; k < segs; ++k) {
        states[k].col(s) = x;
        const dyn::Vec3 u = policy.feedforward[k] + policy.gain[k] * (x - centers[k]);
        dv(s, k) = u.norm();
        x = dyn::propagate(problem.model, dyn::apply_impulse(x, u), problem.grid.dt(k));
      }
      states[segs].col(s) = x;
      if (!x.allFinite()) failed[s] = 1;
    } catch (const Error&) {
      failed[s] = 1;
    }
  }

  EnsembleRun run;
  run.seed = seed;
  run.n_samples = n_samples;
  for (int s = 0; s < n_samples; ++s)
    if (failed[s]) run.flagged.push_back(s);
  const double frac = static_cast<double>(run.flagged.size()) / n_samples;
  if (frac > kMaxFlaggedFraction)
    throw Error(ErrorCode::sampling, "too many samples failed to propagate",
                "flagged=" + std::to_string(run.flagged.size()) + " samples=" + std::to_string(n_samples));

  const int valid = n_samples - static_cast<int>(run.flagged.size());
  std::vector<int> keep;
  keep.reserve(valid);
  for (int s = 0; s < n_samples; ++s)
    if (!failed[s]) keep.push_back(s);
  run.nodes.assign(nodes, Eigen::MatrixXd(6, valid));
  run.dv.resize(valid, segs);
  run.dv_total.resize(valid);
  for (int j = 0; j < valid; ++j) {
    for (int k = 0; k < nodes; ++k) run.nodes[k].col(j) = states[k].col(keep[j]);
    run.dv.row(j) = dv.row(keep[j]);
    run.dv_total(j) = dv.row(keep[j]).sum();
  }
  for (int k = 0; k < nodes; ++k) run.moments.push_back(node_statistics(run.nodes[k]));
  return run;
}

EnsembleRun run_ensemble(const scvx::SteeringProblem& problem, const scvx::ConvergedPolicy& policy, int n_samples,
                         std::uint64_t seed) {
  return run_ensemble(problem, policy.policy, policy.cut_means, n_samples, seed);
}

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::invalid_argument, "quantile of an empty set");
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::invalid_argument, "quantile level must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-9));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

DvSummary summarize(const Eigen::VectorXd& v) {
  DvSummary s;
  s.mean = sum(v) / static_cast<double>(v.size());
  s.p99 = nearest_rank(std::vector<double>(v.data(), v.data() + v.size()), 0.99);
  return s;
}

}  // namespace

DvStatistics dv_statistics(const EnsembleRun& run, double dv99_bound, double expected_fuel) {
  if (run.valid() < 1) throw Error(ErrorCode::invalid_argument, "ensemble has no valid samples");
  DvStatistics st;
  for (Eigen::Index k = 0; k < run.dv.cols(); ++k) st.per_node.push_back(summarize(run.dv.col(k)));
  st.total = summarize(run.dv_total);
  st.dv99_bound = dv99_bound;
  st.expected_fuel = expected_fuel;
  st.bound_margin = dv99_bound - st.total.p99;
  st.expected_fuel_error = expected_fuel != 0.0 ? (st.total.mean - expected_fuel) / expected_fuel : 0.0;
  return st;
}

std::vector<ConvergenceRow> convergence_analysis(const Eigen::MatrixXd& cloud, const std::vector<int>& checkpoints) {
  const auto n = static_cast<int>(cloud.cols());
  std::vector<EmpiricalMoments> full;
  for (int a = 0; a < cloud.rows(); ++a) full.push_back(empirical_moments(cloud, a));
  std::vector<ConvergenceRow> rows;
  for (int c : checkpoints) {
    if (c < 2 || c > n)
      throw Error(ErrorCode::invalid_argument, "checkpoint outside the sample range", "checkpoint=" + std::to_string(c));
    const Eigen::MatrixXd prefix = cloud.leftCols(c);
    for (int a = 0; a < cloud.rows(); ++a) {
      const EmpiricalMoments m = empirical_moments(prefix, a);
      rows.push_back({c, a, std::abs(m.mean - full[a].mean), std::abs(m.sigma - full[a].sigma),
                      std::abs(m.skewness - full[a].skewness), std::abs(m.kurtosis - full[a].kurtosis)});
    }
  }
  return rows;
}

double log_log_slope(const std::vector<double>& samples, const std::vector<double>& errors) {
  if (samples.size() != errors.size() || samples.size() < 2)
    throw Error(ErrorCode::invalid_argument, "slope needs matching series of at least two points");
  Eigen::MatrixXd a(samples.size(), 2);
  Eigen::VectorXd b(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] > 0.0 && errors[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "log of a nonpositive value");
    a(i, 0) = std::log(samples[i]);
    a(i, 1) = 1.0;
    b(i) = std::log(errors[i]);
  }
  return a.colPivHouseholderQr().solve(b)(0);
}

}  // namespace cutsteer::mc
