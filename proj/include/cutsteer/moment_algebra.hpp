#pragma once

#include <Eigen/Dense>

namespace cutsteer::moments {

inline constexpr double kVarianceFloor = 1e-30;

/// Sigma points of one node stacked into a single vector. Point i occupies
/// data[i*n_x, (i+1)*n_x).
struct AggregatedState {
  int n_x = 0;
  Eigen::VectorXd data;
  Eigen::VectorXd weights;

  int n_s() const { return static_cast<int>(weights.size()); }
  Eigen::Map<const Eigen::MatrixXd> as_matrix() const {
    return {data.data(), n_x, n_s()};
  }
  Eigen::Map<Eigen::MatrixXd> as_matrix() { return {data.data(), n_x, n_s()}; }
};

AggregatedState aggregate(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights);

/// z = x - replicated weighted mean.
AggregatedState centralize(const AggregatedState& x);

/// Weighted mean of the points.
Eigen::VectorXd mean(const AggregatedState& x);

/// Implicit centralizer operators applied to a perturbation vector.
Eigen::VectorXd apply_centralizer(const Eigen::VectorXd& weights, int n_x, const Eigen::VectorXd& v);
Eigen::VectorXd apply_mean_map(const Eigen::VectorXd& weights, int n_x, const Eigen::VectorXd& v);

/// Dense realizations, for testing only.
Eigen::MatrixXd dense_centralizer(const Eigen::VectorXd& weights, int n_x);
Eigen::MatrixXd dense_mean_map(const Eigen::VectorXd& weights, int n_x);

/// Columns sqrt(w_i) z_i. Rejects negative weights.
Eigen::MatrixXd sqrt_covariance(const AggregatedState& z);

double spectral_norm(const Eigen::MatrixXd& m);

Eigen::MatrixXd full_covariance(const AggregatedState& z);

/// First-order covariance about z_ref: P* + dP + dP^T with dP = sum w_i z*_i dz_i^T.
Eigen::MatrixXd covariance_delta_form(const AggregatedState& z_ref, const Eigen::VectorXd& dz);

/// E[Z_j^m] / E[Z_j^2]^(m/2) using raw moments of the given (centralized) points.
double standardized_moment(const AggregatedState& z, int m, int axis);
Eigen::VectorXd standardized_moments(const AggregatedState& z, int m);

/// Gradient of the standardized moment of each axis with respect to the
/// aggregated centralized vector. Row j is nonzero only at entries i*n_x + j.
Eigen::MatrixXd moment_jacobian(const AggregatedState& z, int m);

/// Same quantity built from explicit dense selector matrices.
Eigen::MatrixXd moment_jacobian_naive(const AggregatedState& z, int m);

}  // namespace cutsteer::moments
