#pragma once

#include <Eigen/Dense>

namespace cutsteer::cut {

/// Sign-permuted axes with exactly `order` nonzero entries of +-1.
/// Columns are ordered lexicographically by support, then by sign pattern
/// with + before -.
struct AxisFamily {
  int dimension = 0;
  int order = 0;
  Eigen::MatrixXd axes;  // dimension x count

  int count() const { return static_cast<int>(axes.cols()); }
};

/// Weighted point cloud. Points are stored column-wise.
struct SigmaSet {
  Eigen::MatrixXd points;  // n_x x n_s
  Eigen::VectorXd weights;
  int order = 4;

  int dimension() const { return static_cast<int>(points.rows()); }
  int count() const { return static_cast<int>(points.cols()); }
};

/// Scalings and weights of a CUT-6 standard set.
struct Cut6Coefficients {
  double a[3];        // roots of the scaling system
  double r[3];        // shell radii: principal, n-th conjugate, 2nd conjugate
  double w[3];        // shell weights in the same order
  double w_center;
  double residual;    // max abs residual of the scaling system
};

AxisFamily generate_axes(int n, int m);

SigmaSet cut4_standard(int n);

Cut6Coefficients cut6_coefficients(int n);
SigmaSet cut6_standard(int n);

/// Standard set of the given order (4 or 6).
SigmaSet cut_standard(int order, int n);

/// y = S x + mean for every point. Weights are copied.
SigmaSet transform_to_gaussian(const SigmaSet& set, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& sqrt_cov);

/// Convenience: lower Cholesky factor of cov, then transform.
SigmaSet sample_gaussian(int order, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

}  // namespace cutsteer::cut
