#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cutsteer/scvx_engine.hpp"

namespace cutsteer::mc {

using dyn::Mat6;
using dyn::Vec6;

inline constexpr int kDefaultSamples = 10000;
inline constexpr int kFastSamples = 2000;
/// A run fails when more than this fraction of samples cannot be propagated.
inline constexpr double kMaxFlaggedFraction = 1e-3;

struct EmpiricalMoments {
  double mean = 0.0;
  double sigma = 0.0;  // unbiased
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// Sample moments of one axis of a cloud (rows are axes, columns samples).
EmpiricalMoments empirical_moments(const Eigen::MatrixXd& cloud, int axis);

struct NodeStatistics {
  Vec6 mean;
  Vec6 three_sigma;
  Vec6 skewness;
  Vec6 kurtosis;
};

NodeStatistics node_statistics(const Eigen::MatrixXd& cloud);

/// Pairwise summation in a fixed order.
double pairwise_sum(const double* values, std::size_t n, std::size_t stride = 1);

/// Standard normal draws for sample `index` of stream `seed`. Each sample owns
/// its generator, so results do not depend on scheduling.
Vec6 standard_normal(std::uint64_t seed, std::uint64_t index);

/// n draws from N(mean, covariance), one column per sample.
Eigen::MatrixXd sample_gaussian(const Vec6& mean, const Mat6& covariance, int n, std::uint64_t seed);

struct EnsembleRun {
  std::uint64_t seed = 0;
  int n_samples = 0;
  std::vector<int> flagged;             // sample indices that failed to propagate
  std::vector<Eigen::MatrixXd> nodes;   // per node, 6 x n_valid, before that node's impulse
  std::vector<NodeStatistics> moments;  // per node
  Eigen::MatrixXd dv;                   // n_valid x segments, impulse magnitudes
  Eigen::VectorXd dv_total;
  const Eigen::MatrixXd& terminal() const { return nodes.back(); }
  int valid() const { return static_cast<int>(dv_total.size()); }
};

/// Propagates samples of the problem's initial Gaussian (through the lead-in
/// when configured) under u = u_bar_k + K_k (x - center_k).
EnsembleRun run_ensemble(const scvx::SteeringProblem& problem, const dyn::ImpulsivePolicy& policy,
                         const std::vector<Vec6>& centers, int n_samples, std::uint64_t seed);
EnsembleRun run_ensemble(const scvx::SteeringProblem& problem, const scvx::ConvergedPolicy& policy,
                         int n_samples, std::uint64_t seed);

/// Nearest-rank quantile: element ceil(q n) of the sorted values (1-based).
double nearest_rank(std::vector<double> values, double q);

struct DvSummary {
  double mean = 0.0;
  double p99 = 0.0;
};

struct DvStatistics {
  std::vector<DvSummary> per_node;
  DvSummary total;
  double dv99_bound = 0.0;
  double expected_fuel = 0.0;
  double bound_margin = 0.0;       // dv99_bound - total.p99
  double expected_fuel_error = 0.0;  // (total.mean - expected_fuel) / expected_fuel
};

DvStatistics dv_statistics(const EnsembleRun& run, double dv99_bound, double expected_fuel);

struct ConvergenceRow {
  int samples = 0;
  int axis = 0;
  double mean = 0.0;
  double sigma = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// |moment(first n) - moment(all)| for every checkpoint n and axis.
std::vector<ConvergenceRow> convergence_analysis(const Eigen::MatrixXd& cloud, const std::vector<int>& checkpoints);

/// Least-squares slope of log(error) against log(samples).
double log_log_slope(const std::vector<double>& samples, const std::vector<double>& errors);

}  // namespace cutsteer::mc
