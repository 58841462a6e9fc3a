#include "cutsteer/moment_algebra.hpp"

#include <cmath>
#include <string>

#include "cutsteer/error.hpp"

namespace cutsteer::moments {

namespace {

void check_shape(const AggregatedState& x) {
  if (x.n_x <= 0 || x.data.size() != static_cast<Eigen::Index>(x.n_x) * x.n_s()) {
    throw Error(ErrorCode::shape, "aggregated vector length does not match n_x * n_s",
                "n_x=" + std::to_string(x.n_x) + " n_s=" + std::to_string(x.n_s()) +
                    " len=" + std::to_string(x.data.size()));
  }
}

double axis_variance(const AggregatedState& z, int axis) {
  const auto pts = z.as_matrix();
  double s = 0.0;
  for (int i = 0; i < z.n_s(); ++i) s += z.weights(i) * pts(axis, i) * pts(axis, i);
  return s;
}

double checked_variance(const AggregatedState& z, int axis) {
  const double var = axis_variance(z, axis);
  if (!(var > kVarianceFloor)) {
    throw Error(ErrorCode::degenerate_axis, "axis variance below floor",
                "axis=" + std::to_string(axis));
  }
  return var;
}

}  // namespace

AggregatedState aggregate(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights) {
  if (points.cols() != weights.size()) {
    throw Error(ErrorCode::shape, "point count does not match weight count");
  }
  AggregatedState x;
  x.n_x = static_cast<int>(points.rows());
  x.weights = weights;
  x.data = Eigen::Map<const Eigen::VectorXd>(points.data(), points.size());
  return x;
}

Eigen::VectorXd mean(const AggregatedState& x) {
  check_shape(x);
  return x.as_matrix() * x.weights;
}

AggregatedState centralize(const AggregatedState& x) {
  AggregatedState z = x;
  const Eigen::VectorXd mu = mean(x);
  z.as_matrix().colwise() -= mu;
  return z;
}

Eigen::VectorXd apply_mean_map(const Eigen::VectorXd& weights, int n_x, const Eigen::VectorXd& v) {
  Eigen::Map<const Eigen::MatrixXd> m(v.data(), n_x, weights.size());
  return m * weights;
}

Eigen::VectorXd apply_centralizer(const Eigen::VectorXd& weights, int n_x, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v;
  Eigen::Map<Eigen::MatrixXd> m(out.data(), n_x, weights.size());
  m.colwise() -= apply_mean_map(weights, n_x, v);
  return out;
}

Eigen::MatrixXd dense_mean_map(const Eigen::VectorXd& weights, int n_x) {
  const int ns = static_cast<int>(weights.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_x, n_x * ns);
  for (int i = 0; i < ns; ++i) a.block(0, i * n_x, n_x, n_x) = weights(i) * Eigen::MatrixXd::Identity(n_x, n_x);
  return a;
}

Eigen::MatrixXd dense_centralizer(const Eigen::VectorXd& weights, int n_x) {
  const int ns = static_cast<int>(weights.size());
  const Eigen::MatrixXd amu = dense_mean_map(weights, n_x);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n_x * ns, n_x * ns);
  for (int i = 0; i < ns; ++i) a.block(i * n_x, 0, n_x, n_x * ns) -= amu;
  return a;
}

Eigen::MatrixXd sqrt_covariance(const AggregatedState& z) {
  check_shape(z);
  for (int i = 0; i < z.n_s(); ++i) {
    if (z.weights(i) < 0.0) {
      throw Error(ErrorCode::invalid_weight, "negative weight in square-root covariance",
                  "point=" + std::to_string(i));
    }
  }
  Eigen::MatrixXd m = z.as_matrix();
  for (int i = 0; i < z.n_s(); ++i) m.col(i) *= std::sqrt(z.weights(i));
  return m;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  // eigenvalues of the smaller Gram matrix
  const Eigen::MatrixXd g = m.rows() <= m.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                 : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Eigen::MatrixXd full_covariance(const AggregatedState& z) {
  check_shape(z);
  const auto pts = z.as_matrix();
  return pts * z.weights.asDiagonal() * pts.transpose();
}

Eigen::MatrixXd covariance_delta_form(const AggregatedState& z_ref, const Eigen::VectorXd& dz) {
  const Eigen::MatrixXd p = full_covariance(z_ref);
  Eigen::Map<const Eigen::MatrixXd> d(dz.data(), z_ref.n_x, z_ref.n_s());
  const Eigen::MatrixXd dp = z_ref.as_matrix() * z_ref.weights.asDiagonal() * d.transpose();
  return p + dp + dp.transpose();
}

double standardized_moment(const AggregatedState& z, int m, int axis) {
  check_shape(z);
  if (m < 2) throw Error(ErrorCode::invalid_argument, "moment order must be >= 2");
  if (axis < 0 || axis >= z.n_x) throw Error(ErrorCode::shape, "axis out of range");
  const double var = checked_variance(z, axis);
  const auto pts = z.as_matrix();
  double em = 0.0;
  for (int i = 0; i < z.n_s(); ++i) em += z.weights(i) * std::pow(pts(axis, i), m);
  return em * std::pow(var, -0.5 * m);
}

Eigen::VectorXd standardized_moments(const AggregatedState& z, int m) {
  Eigen::VectorXd out(z.n_x);
  for (int j = 0; j < z.n_x; ++j) out(j) = standardized_moment(z, m, j);
  return out;
}

Eigen::MatrixXd moment_jacobian(const AggregatedState& z, int m) {
  check_shape(z);
  if (m < 3) throw Error(ErrorCode::invalid_argument, "moment Jacobian order must be >= 3");
  const int nx = z.n_x;
  const int ns = z.n_s();
  const auto pts = z.as_matrix();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nx, nx * ns);
  for (int j = 0; j < nx; ++j) {
    const double var = checked_variance(z, j);
    double em = 0.0;
    for (int i = 0; i < ns; ++i) em += z.weights(i) * std::pow(pts(j, i), m);
    const double s0 = m * std::pow(var, -0.5 * m);
    const double s1 = m * em * std::pow(var, -0.5 * m - 1.0);
    for (int i = 0; i < ns; ++i) {
      const double zij = pts(j, i);
      jac(j, i * nx + j) = z.weights(i) * (s0 * std::pow(zij, m - 1) - s1 * zij);
    }
  }
  return jac;
}

Eigen::MatrixXd moment_jacobian_naive(const AggregatedState& z, int m) {
  check_shape(z);
  if (m < 3) throw Error(ErrorCode::invalid_argument, "moment Jacobian order must be >= 3");
  const int nx = z.n_x;
  const int ns = z.n_s();
  const int len = nx * ns;
  Eigen::MatrixXd jac(nx, len);
  for (int j = 0; j < nx; ++j) {
    const Eigen::RowVectorXd ej = Eigen::RowVectorXd::Unit(nx, j);
    double e2 = 0.0;
    double em = 0.0;
    Eigen::RowVectorXd d2 = Eigen::RowVectorXd::Zero(len);
    Eigen::RowVectorXd dm = Eigen::RowVectorXd::Zero(len);
    for (int i = 0; i < ns; ++i) {
      Eigen::MatrixXd ei = Eigen::MatrixXd::Zero(nx, len);
      ei.block(0, i * nx, nx, nx).setIdentity();
      const Eigen::RowVectorXd sel = ej * ei;
      const double v = sel.dot(z.data);
      e2 += z.weights(i) * v * v;
      em += z.weights(i) * std::pow(v, m);
      d2 += 2.0 * z.weights(i) * v * sel;
      dm += m * z.weights(i) * std::pow(v, m - 1) * sel;
    }
    if (!(e2 > kVarianceFloor)) {
      throw Error(ErrorCode::degenerate_axis, "axis variance below floor", "axis=" + std::to_string(j));
    }
    // quotient rule on em * e2^(-m/2)
    jac.row(j) = dm * std::pow(e2, -0.5 * m) - 0.5 * m * em * std::pow(e2, -0.5 * m - 1.0) * d2;
  }
  return jac;
}

}  // namespace cutsteer::moments
