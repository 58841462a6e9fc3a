#include "cutsteer/cut_sampling.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "cutsteer/error.hpp"

namespace cutsteer::cut {

namespace {

// Next m-combination of {0..n-1} in lexicographic order.
bool next_combination(std::vector<int>& idx, int n) {
  const int m = static_cast<int>(idx.size());
  int i = m - 1;
  while (i >= 0 && idx[i] == n - m + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

void append_shell(Eigen::MatrixXd& pts, Eigen::VectorXd& w, int& col, const AxisFamily& fam,
                  double radius, double weight) {
  for (int k = 0; k < fam.count(); ++k) {
    pts.col(col) = radius * fam.axes.col(k);
    w(col) = weight;
    ++col;
  }
}

}  // namespace

AxisFamily generate_axes(int n, int m) {
  if (n < 1 || m < 1 || m > n) {
    std::ostringstream os;
    os << "conjugate order " << m << " invalid for dimension " << n;
    throw Error(ErrorCode::invalid_order, os.str());
  }
  long count = 1;
  for (int i = 0; i < m; ++i) count = count * (n - i) / (i + 1);
  count <<= m;

  AxisFamily fam;
  fam.dimension = n;
  fam.order = m;
  fam.axes = Eigen::MatrixXd::Zero(n, count);

  std::vector<int> support(m);
  for (int i = 0; i < m; ++i) support[i] = i;
  int col = 0;
  do {
    // bit b of the pattern set -> entry b of the support is negative; the
    // leading support entry is the most significant bit so + sorts first
    for (int pattern = 0; pattern < (1 << m); ++pattern) {
      for (int b = 0; b < m; ++b) {
        const bool neg = (pattern >> (m - 1 - b)) & 1;
        fam.axes(support[b], col) = neg ? -1.0 : 1.0;
      }
      ++col;
    }
  } while (next_combination(support, n));
  return fam;
}

SigmaSet cut4_standard(int n) {
  if (n < 3) {
    throw Error(ErrorCode::unsupported_dimension,
                "CUT-4 requires dimension >= 3 (conjugate shell is undefined below)",
                "n=" + std::to_string(n));
  }
  const double r1 = std::sqrt((n + 2.0) / 2.0);
  const double r2 = std::sqrt((n + 2.0) / (n - 2.0));
  const double w1 = 4.0 / ((n + 2.0) * (n + 2.0));
  const double w2 = (n - 2.0) * (n - 2.0) / (std::ldexp(1.0, n) * (n + 2.0) * (n + 2.0));

  const AxisFamily principal = generate_axes(n, 1);
  const AxisFamily conj = generate_axes(n, n);
  SigmaSet set;
  set.order = 4;
  set.points.resize(n, principal.count() + conj.count());
  set.weights.resize(set.points.cols());
  int col = 0;
  append_shell(set.points, set.weights, col, principal, r1, w1);
  append_shell(set.points, set.weights, col, conj, r2, w2);
  return set;
}

Cut6Coefficients cut6_coefficients(int n) {
  if (n < 3 || n > 6) {
    throw Error(ErrorCode::unsupported_dimension, "CUT-6 is available for dimensions 3 through 6",
                "n=" + std::to_string(n));
  }
  // The linear equations eliminate a1 and a2, leaving a quadratic in a3:
  //   a2 = 1 - 2 a3,  a1 = (1 - (n-2) a3) / (8-n).
  // The branch with the smaller a3 is the one with all roots positive for every n.
  const double c = 8.0 - n;
  const double p = (n - 2.0) / c;
  // 2c (1/c - p a3)^2 + (1 - 2 a3)^2 + 2(n-1) a3^2 - 1 = qa a3^2 + qb a3 + qc
  const double qa = 2.0 * c * p * p + 4.0 + 2.0 * (n - 1.0);
  const double qb = -4.0 * p - 4.0;
  const double qc = 2.0 / c;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) {
    throw Error(ErrorCode::construction, "CUT-6 scaling system has no real root",
                "n=" + std::to_string(n));
  }
  const double sq = std::sqrt(disc);
  // numerically stable smaller root
  const double q = -0.5 * (qb - sq);
  double a3 = std::min(q / qa, qc / q);

  double a[3] = {(1.0 - (n - 2.0) * a3) / c, 1.0 - 2.0 * a3, a3};

  auto residuals = [&](const double* x, double* f) {
    f[0] = 2.0 * c * x[0] * x[0] + x[1] * x[1] + 2.0 * (n - 1.0) * x[2] * x[2] - 1.0;
    f[1] = 2.0 * c * x[0] + x[1] + 2.0 * (n - 1.0) * x[2] - 3.0;
    f[2] = x[1] + 2.0 * x[2] - 1.0;
  };
  // Newton polish on the full system
  for (int it = 0; it < 5; ++it) {
    double f[3];
    residuals(a, f);
    Eigen::Matrix3d J;
    J << 4.0 * c * a[0], 2.0 * a[1], 4.0 * (n - 1.0) * a[2],
         2.0 * c, 1.0, 2.0 * (n - 1.0),
         0.0, 1.0, 2.0;
    const Eigen::Vector3d step = J.partialPivLu().solve(Eigen::Vector3d(f[0], f[1], f[2]));
    for (int i = 0; i < 3; ++i) a[i] -= step(i);
  }
  double f[3];
  residuals(a, f);
  const double res = std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2])});

  if (!(a[0] > 0.0 && a[1] > 0.0 && a[2] > 0.0) || res > 1e-12) {
    std::ostringstream os;
    os << "n=" << n << " a=(" << a[0] << "," << a[1] << "," << a[2] << ") residual=" << res;
    throw Error(ErrorCode::construction, "CUT-6 scaling root is not admissible", os.str());
  }

  Cut6Coefficients out{};
  for (int i = 0; i < 3; ++i) {
    out.a[i] = a[i];
    out.r[i] = 1.0 / std::sqrt(a[i]);
  }
  out.w[0] = c * a[0] * a[0] * a[0];
  out.w[1] = a[1] * a[1] * a[1] / std::ldexp(1.0, n);
  out.w[2] = 0.5 * a[2] * a[2] * a[2];
  out.w_center = 1.0 - 2.0 * n * out.w[0] - std::ldexp(1.0, n) * out.w[1] -
                 2.0 * n * (n - 1.0) * out.w[2];
  out.residual = res;
  if (out.w_center < 0.0) {
    throw Error(ErrorCode::construction, "CUT-6 central weight is negative",
                "n=" + std::to_string(n) + " w0=" + std::to_string(out.w_center));
  }
  return out;
}

SigmaSet cut6_standard(int n) {
  const Cut6Coefficients k = cut6_coefficients(n);
  const AxisFamily principal = generate_axes(n, 1);
  const AxisFamily conj_n = generate_axes(n, n);
  const AxisFamily conj_2 = generate_axes(n, 2);

  SigmaSet set;
  set.order = 6;
  const int count = principal.count() + conj_n.count() + conj_2.count() + 1;
  set.points = Eigen::MatrixXd::Zero(n, count);
  set.weights.resize(count);
  int col = 0;
  append_shell(set.points, set.weights, col, principal, k.r[0], k.w[0]);
  append_shell(set.points, set.weights, col, conj_n, k.r[1], k.w[1]);
  append_shell(set.points, set.weights, col, conj_2, k.r[2], k.w[2]);
  set.weights(col) = k.w_center;
  return set;
}

SigmaSet cut_standard(int order, int n) {
  if (order == 4) return cut4_standard(n);
  if (order == 6) return cut6_standard(n);
  throw Error(ErrorCode::invalid_order, "CUT order must be 4 or 6",
              "order=" + std::to_string(order));
}

SigmaSet transform_to_gaussian(const SigmaSet& set, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& sqrt_cov) {
  const int n = set.dimension();
  if (sqrt_cov.rows() != n || sqrt_cov.cols() != n || mean.size() != n) {
    std::ostringstream os;
    os << "set dimension " << n << ", factor " << sqrt_cov.rows() << "x" << sqrt_cov.cols()
       << ", mean " << mean.size();
    throw Error(ErrorCode::shape, "sqrt covariance or mean does not match the set", os.str());
  }
  if (!sqrt_cov.allFinite() || !mean.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "non-finite transform input");
  }
  SigmaSet out;
  out.order = set.order;
  out.weights = set.weights;
  out.points = (sqrt_cov * set.points).colwise() + mean;
  return out;
}

SigmaSet sample_gaussian(int order, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::invalid_argument, "covariance is not positive definite");
  }
  return transform_to_gaussian(cut_standard(order, static_cast<int>(mean.size())), mean,
                               llt.matrixL());
}

}  // namespace cutsteer::cut
