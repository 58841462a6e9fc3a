#pragma once

// Independent moment oracle for standard Gaussians (Isserlis): for independent
// N(0,1) coordinates E[prod x_i^a_i] = prod (a_i - 1)!! when every a_i is even.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double gaussian_moment(const std::vector<int>& powers) {
  double out = 1.0;
  for (int p : powers) {
    if (p % 2) return 0.0;
    for (int k = p - 1; k > 1; k -= 2) out *= k;
  }
  return out;
}

/// Max abs error over every monomial of total degree <= max_degree.
inline double max_moment_error(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w, int max_degree) {
  const int n = static_cast<int>(pts.rows());
  std::vector<int> powers(n, 0);
  double worst = 0.0;
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == n) {
      double s = 0.0;
      for (int i = 0; i < pts.cols(); ++i) {
        double term = w(i);
        for (int a = 0; a < n; ++a) term *= std::pow(pts(a, i), powers[a]);
        s += term;
      }
      worst = std::max(worst, std::abs(s - gaussian_moment(powers)));
      return;
    }
    for (int p = 0; p <= left; ++p) {
      powers[axis] = p;
      rec(axis + 1, left - p);
    }
    powers[axis] = 0;
  };
  rec(0, max_degree);
  return worst;
}

}  // namespace oracle
