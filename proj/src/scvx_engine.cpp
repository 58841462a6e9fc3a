#include "cutsteer/scvx_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cutsteer/error.hpp"

namespace cutsteer::scvx {

using conic::AffineExpr;
using conic::ConeKind;
using conic::VariableHandle;
using moments::AggregatedState;

namespace {

constexpr int kNx = 6;
constexpr int kNu = 3;

std::vector<int> axis_indices(AxisSelector s) {
  switch (s) {
    case AxisSelector::position: return {0, 1, 2};
    case AxisSelector::velocity: return {3, 4, 5};
    case AxisSelector::full: break;
  }
  return {0, 1, 2, 3, 4, 5};
}

std::vector<int> constraint_nodes(const MomentConstraint& c, int nodes) {
  if (c.node != kAllNodes) return {c.node};
  std::vector<int> out(nodes);
  for (int k = 0; k < nodes; ++k) out[k] = k;
  return out;
}

Vec3 control_at(const dyn::ImpulsivePolicy& pol, int k, const AggregatedState& z, int i) {
  return pol.feedforward[k] + pol.gain[k] * z.as_matrix().col(i);
}

// Symmetric factor S with S S^T = P, clipping tiny negative eigenvalues.
Mat6 symmetric_factor(const Mat6& p) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (p + p.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::reference, "covariance eigendecomposition failed");
  const Vec6 s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// --- problem -----------------------------------------------------------------

bool SteeringProblem::slacked(int segment) const {
  switch (slack) {
    case SlackPlacement::final_segment: return segment == segments() - 1;
    case SlackPlacement::all_segments: return true;
    case SlackPlacement::none: return false;
  }
  return false;
}

void SteeringProblem::validate() const {
  if (grid.size() < 2) throw Error(ErrorCode::invalid_argument, "grid needs at least two nodes");
  for (int k = 0; k + 1 < grid.size(); ++k)
    if (!(grid.dt(k) > 0.0)) throw Error(ErrorCode::invalid_argument, "grid epochs must increase");
  if (cut_order != 4 && cut_order != 6) throw Error(ErrorCode::invalid_order, "CUT order must be 4 or 6");
  if (initial.lead_in < 0.0) throw Error(ErrorCode::invalid_argument, "lead-in time must be nonnegative");
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    const auto& con = constraints[c];
    const std::string where = "constraint " + std::to_string(c);
    if (con.node != kAllNodes && (con.node < 0 || con.node >= grid.size()))
      throw Error(ErrorCode::build, where + " references a node outside the grid", "node=" + std::to_string(con.node));
    switch (con.kind) {
      case MomentKind::mean_eq:
        if (con.target.size() != kNx) throw Error(ErrorCode::shape, where + ": mean target must have state dimension");
        break;
      case MomentKind::sqrt_cov_norm_le:
        if (!(con.bound > 0.0)) throw Error(ErrorCode::invalid_argument, where + ": bound must be positive");
        break;
      case MomentKind::standardized_moment_box:
        if (!(con.bound > 0.0)) throw Error(ErrorCode::invalid_argument, where + ": epsilon must be positive");
        if (con.order < 3) throw Error(ErrorCode::invalid_order, where + ": standardized moment order must be >= 3");
        if (con.node == kAllNodes) throw Error(ErrorCode::build, where + ": moment boxes apply to a single node");
        break;
    }
  }
}

AggregatedState SteeringProblem::initial_sigma_points(const dyn::IntegratorOptions& opt) const {
  cut::SigmaSet set = cut::sample_gaussian(cut_order, initial.mean, initial.covariance);
  if (initial.lead_in > 0.0) {
    const int ns = set.count();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ns; ++i) {
      const Vec6 x = set.points.col(i);
      set.points.col(i) = dyn::propagate(model, x, initial.lead_in, opt);
    }
  }
  return moments::aggregate(set.points, set.weights);
}

ScvxParams ScvxParams::two_body() { return ScvxParams{}; }

ScvxParams ScvxParams::cr3bp() {
  ScvxParams p;
  p.eps_opt = 1e-4;
  p.eps_feas = 1e-7;
  p.eta0 = 1.0;
  p.eta1 = 0.2;
  p.eta2 = 0.1;
  p.alpha1 = 3.0;
  p.alpha2 = 2.0;
  p.beta = 1.5;
  p.gamma = 0.99;
  p.delta_init = 0.1;
  p.delta_min = 1e-10;
  p.delta_max = 0.1;
  p.w_init = 100.0;
  p.w_max = 1e10;
  return p;
}

void ScvxParams::validate() const {
  if (!(eps_opt > 0.0 && eps_feas > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerances must be positive");
  if (!(0.0 < eta2 && eta2 < eta1 && eta1 <= eta0))
    throw Error(ErrorCode::invalid_argument, "acceptance thresholds must satisfy 0 < eta2 < eta1 <= eta0");
  if (!(alpha1 > 1.0 && alpha2 > 1.0)) throw Error(ErrorCode::invalid_argument, "trust-region factors must exceed 1");
  if (!(beta >= 1.0)) throw Error(ErrorCode::invalid_argument, "penalty growth must be >= 1");
  if (!(0.0 < delta_min && delta_min <= delta_init && delta_init <= delta_max))
    throw Error(ErrorCode::invalid_argument, "trust-region bounds must be ordered");
  if (!(w_init > 0.0 && w_init <= w_max)) throw Error(ErrorCode::invalid_argument, "penalty weights must be ordered");
  if (max_iterations < 1) throw Error(ErrorCode::invalid_argument, "max_iterations must be positive");
}

ScvxState initial_state(const SteeringProblem& problem, const ScvxParams& params, Reference reference) {
  params.validate();
  problem.validate();
  if (static_cast<int>(reference.nodes.size()) != problem.nodes() ||
      reference.policy.segments() != problem.segments())
    throw Error(ErrorCode::shape, "reference does not match the node grid");
  const int ns = reference.nodes[0].n_s();
  const int expected = cut::cut_standard(problem.cut_order, kNx).count();
  for (const auto& x : reference.nodes)
    if (x.n_s() != expected || x.n_x != kNx) throw Error(ErrorCode::shape, "reference sigma counts do not match the CUT order");
  ScvxState s;
  s.reference = std::move(reference);
  s.w_p = params.w_init;
  s.delta = params.delta_init;
  s.lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.segments()) * ns * kNx);
  int boxes = 0;
  for (const auto& c : problem.constraints) boxes += c.kind == MomentKind::standardized_moment_box;
  s.mu = Eigen::VectorXd::Zero(boxes);
  return s;
}

// --- initial references ------------------------------------------------------

ReferenceGuess initial_reference(const SteeringProblem& problem) {
  problem.validate();
  const int n = problem.nodes();
  ReferenceGuess g;
  const AggregatedState x0 = problem.initial_sigma_points();
  const Vec6 mu0 = moments::mean(x0);
  const Mat6 p0 = moments::full_covariance(moments::centralize(x0));

  g.means.resize(n);
  g.means[0] = mu0;
  const double t0 = problem.grid.epochs.front();
  const double tof = problem.grid.epochs.back() - t0;
  for (int k = 1; k < n; ++k) {
    if (problem.guess == GuessKind::element_interpolation) {
      if (problem.model.kind != dyn::DynamicsModel::Kind::two_body)
        throw Error(ErrorCode::reference, "element interpolation needs two-body dynamics");
      const double frac = (problem.grid.epochs[k] - t0) / tof;
      g.means[k] = dyn::kepler_interpolate(mu0, problem.guess_target, problem.model.mu, tof, frac);
    } else {
      g.means[k] = dyn::propagate(problem.model, g.means[k - 1], problem.grid.dt(k - 1));
    }
  }

  Eigen::SelfAdjointEigenSolver<Mat6> es0(p0);
  if (es0.info() != Eigen::Success) throw Error(ErrorCode::reference, "initial covariance eigendecomposition failed");
  const Vec6 lambda0 = es0.eigenvalues();
  if (lambda0.minCoeff() < -1e-12 * std::max(1.0, lambda0.maxCoeff()))
    throw Error(ErrorCode::reference, "initial covariance is not positive semidefinite");

  g.covariances.resize(n);
  g.covariances[0] = p0;
  for (int k = 0; k + 1 < n; ++k) {
    const Mat6 a = dyn::propagate_with_stm(problem.model, g.means[k], problem.grid.dt(k)).stm;
    Mat6 p = a * g.covariances[k] * a.transpose();
    p = 0.5 * (p + p.transpose());
    Eigen::SelfAdjointEigenSolver<Mat6> es(p);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::reference, "propagated covariance eigendecomposition failed",
                                                 "node=" + std::to_string(k + 1));
    const Mat6& q = es.eigenvectors();
    g.covariances[k + 1] = q * lambda0.asDiagonal() * q.transpose();
  }

  const cut::SigmaSet standard = cut::cut_standard(problem.cut_order, kNx);
  g.reference.nodes.resize(n);
  g.reference.nodes[0] = x0;
  for (int k = 1; k < n; ++k) {
    const cut::SigmaSet s = cut::transform_to_gaussian(standard, g.means[k], symmetric_factor(g.covariances[k]));
    g.reference.nodes[k] = moments::aggregate(s.points, s.weights);
  }
  g.reference.policy = dyn::ImpulsivePolicy::zeros(problem.segments());
  return g;
}

Reference propagate_reference(const SteeringProblem& problem, const dyn::ImpulsivePolicy& policy) {
  problem.validate();
  if (policy.segments() != problem.segments()) throw Error(ErrorCode::shape, "policy does not match the node grid");
  Reference r;
  r.policy = policy;
  r.nodes.resize(problem.nodes());
  r.nodes[0] = problem.initial_sigma_points();
  for (int k = 0; k < problem.segments(); ++k) {
    const AggregatedState z = moments::centralize(r.nodes[k]);
    AggregatedState next = r.nodes[k];
    const int ns = next.n_s();
    const double dt = problem.grid.dt(k);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ns; ++i) {
      const Vec6 x = r.nodes[k].as_matrix().col(i);
      next.as_matrix().col(i) = dyn::propagate(problem.model, dyn::apply_impulse(x, control_at(policy, k, z, i)), dt);
    }
    r.nodes[k + 1] = std::move(next);
  }
  return r;
}

// --- linearization and subproblem --------------------------------------------

Linearization linearize_reference(const SteeringProblem& problem, const Reference& ref) {
  Linearization lin;
  const int n = problem.nodes();
  lin.centered.resize(n);
  lin.means.resize(n);
  for (int k = 0; k < n; ++k) {
    lin.centered[k] = moments::centralize(ref.nodes[k]);
    lin.means[k] = moments::mean(ref.nodes[k]);
  }
  lin.segments.resize(problem.segments());
  for (int k = 0; k < problem.segments(); ++k) {
    const int ns = ref.nodes[k].n_s();
    auto& seg = lin.segments[k];
    seg.resize(ns);
    const double t0 = problem.grid.epochs[k];
    const double t1 = problem.grid.epochs[k + 1];
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ns; ++i) {
      const Vec6 x = ref.nodes[k].as_matrix().col(i);
      seg[i] = dyn::linearize_segment(problem.model, x, control_at(ref.policy, k, lin.centered[k], i), t0, t1);
    }
  }
  return lin;
}

std::vector<Vec3> feedback_directions(const Eigen::MatrixXd& product) {
  std::vector<Vec3> dirs;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(product, Eigen::ComputeFullU);
  for (int c = 0; c < 3; ++c) dirs.push_back(svd.matrixU().col(c).normalized());
  for (int a = 0; a < 3; ++a) dirs.push_back(Vec3::Unit(a));
  const double s2 = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      for (double sign : {1.0, -1.0}) {
        Vec3 v = Vec3::Zero();
        v(a) = s2;
        v(b) = sign * s2;
        dirs.push_back(v);
      }
    }
  }
  const double s3 = 1.0 / std::sqrt(3.0);
  for (double sy : {1.0, -1.0})
    for (double sz : {1.0, -1.0}) dirs.push_back(Vec3(s3, sy * s3, sz * s3));
  return dirs;
}

Subproblem build_subproblem(const SteeringProblem& problem, const ScvxState& state, const Linearization& lin) {
  problem.validate();
  const Reference& ref = state.reference;
  const int n = problem.nodes();
  const int segs = problem.segments();
  const int ns = ref.nodes[0].n_s();
  const int len = ns * kNx;
  const Eigen::VectorXd& w = ref.nodes[0].weights;
  if (static_cast<int>(lin.segments.size()) != segs) throw Error(ErrorCode::shape, "linearization does not match the grid");

  Subproblem sub;
  auto& p = sub.program;
  sub.objective = AffineExpr(1);
  AffineExpr& obj = sub.objective;

  for (int k = 0; k < n; ++k) sub.dx.push_back(p.add_variable(len, "dx" + std::to_string(k)));
  for (int k = 0; k < n; ++k) sub.dmu.push_back(p.add_variable(kNx, "dmu" + std::to_string(k)));
  for (int k = 0; k < segs; ++k) {
    sub.du.push_back(p.add_variable(kNu, "du" + std::to_string(k)));
    sub.dk.push_back(p.add_variable(kNu * kNx, "dK" + std::to_string(k)));
  }
  for (int k = 0; k < segs; ++k)
    sub.xi.push_back(problem.slacked(k) ? p.add_variable(len, "xi" + std::to_string(k)) : VariableHandle{});
  for (std::size_t c = 0; c < problem.constraints.size(); ++c) {
    if (problem.constraints[c].kind == MomentKind::standardized_moment_box) {
      sub.zeta.push_back(p.add_variable(1, "zeta" + std::to_string(c)));
      sub.box_constraints.push_back(static_cast<int>(c));
    }
  }
  sub.counts.states = n * len;
  sub.counts.feedforward = segs * kNu;
  sub.counts.gains = segs * kNu * kNx;
  for (const auto& v : sub.xi) sub.counts.slacks += v.length;
  sub.counts.slacks += static_cast<int>(sub.zeta.size());
  sub.counts.auxiliary = n * kNx;

  // first node is fixed
  {
    AffineExpr e(len);
    e.add_diagonal(0, sub.dx[0], len, 1.0);
    p.add_constraint({ConeKind::zero, e});
  }
  // mean maps
  for (int k = 0; k < n; ++k) {
    AffineExpr e(kNx);
    e.add_diagonal(0, sub.dmu[k], kNx, 1.0);
    for (int i = 0; i < ns; ++i)
      for (int r = 0; r < kNx; ++r) e.add(r, sub.dx[k], i * kNx + r, -w(i));
    p.add_constraint({ConeKind::zero, e});
  }
  // linearized sigma-point dynamics in defect form
  for (int k = 0; k < segs; ++k) {
    const Mat36& kref = ref.policy.gain[k];
    const AggregatedState& z = lin.centered[k];
    AffineExpr e(len);
    for (int i = 0; i < ns; ++i) {
      const dyn::SegmentLinearization& sl = lin.segments[k][i];
      const Mat6 bk = sl.B * kref;
      const Mat6 m = sl.A + bk;
      const Vec6 zi = z.as_matrix().col(i);
      const Vec6 defect = sl.endpoint - ref.nodes[k + 1].as_matrix().col(i);
      const int row0 = i * kNx;
      e.add_diagonal(row0, sub.dx[k + 1], kNx, 1.0, row0);
      e.add_block(row0, sub.dx[k], -m, row0);
      e.add_block(row0, sub.dmu[k], bk);
      e.add_block(row0, sub.du[k], -sl.B);
      Eigen::Matrix<double, 6, 18> bz;
      for (int j = 0; j < kNu; ++j)
        for (int c = 0; c < kNx; ++c) bz.col(j * kNx + c) = sl.B.col(j) * zi(c);
      e.add_block(row0, sub.dk[k], -bz);
      if (sub.xi[k].id >= 0) e.add_diagonal(row0, sub.xi[k], kNx, -1.0, row0);
      e.constant().segment(row0, kNx) = -defect;
    }
    p.add_constraint({ConeKind::zero, e});
  }
  // trust regions
  for (int k = 1; k < n; ++k) {
    AffineExpr e(2 * len);
    e.add_diagonal(0, sub.dx[k], len, -1.0);
    e.add_diagonal(len, sub.dx[k], len, 1.0);
    e.constant().setConstant(state.delta);
    p.add_constraint({ConeKind::nonneg, e});
  }
  for (int k = 0; k < segs; ++k) {
    AffineExpr e(2 * kNu * kNx);
    e.add_diagonal(0, sub.dk[k], kNu * kNx, -1.0);
    e.add_diagonal(kNu * kNx, sub.dk[k], kNu * kNx, 1.0);
    e.constant().setConstant(state.delta);
    p.add_constraint({ConeKind::nonneg, e});
  }
  // moment constraints
  int box = 0;
  for (const auto& con : problem.constraints) {
    const std::vector<int> axes = axis_indices(con.axes);
    const int na = static_cast<int>(axes.size());
    if (con.kind == MomentKind::mean_eq) {
      for (int k : constraint_nodes(con, n)) {
        AffineExpr e(na);
        for (int a = 0; a < na; ++a) {
          e.add(a, sub.dmu[k], axes[a], 1.0);
          e.constant()(a) = lin.means[k](axes[a]) - con.target(axes[a]);
        }
        p.add_constraint({ConeKind::zero, e});
      }
    } else if (con.kind == MomentKind::sqrt_cov_norm_le) {
      for (int k : constraint_nodes(con, n)) {
        if (k == 0) continue;  // fixed node, reported by the nonlinear evaluation
        const AggregatedState& z = lin.centered[k];
        AffineExpr e(1 + na * ns);
        e.constant()(0) = con.bound;
        for (int i = 0; i < ns; ++i) {
          if (w(i) < 0.0) throw Error(ErrorCode::invalid_weight, "square-root covariance needs nonnegative weights");
          const double sw = std::sqrt(w(i));
          for (int a = 0; a < na; ++a) {
            const int row = 1 + i * na + a;
            e.add(row, sub.dx[k], i * kNx + axes[a], sw);
            e.add(row, sub.dmu[k], axes[a], -sw);
            e.constant()(row) = sw * z.as_matrix()(axes[a], i);
          }
        }
        p.add_constraint({ConeKind::soc, e});
      }
    } else {
      const int k = con.node;
      const AggregatedState& z = lin.centered[k];
      const Eigen::MatrixXd jac = moments::moment_jacobian(z, con.order);
      const Eigen::VectorXd ref_m = moments::standardized_moments(z, con.order);
      const VariableHandle zeta = sub.zeta[box];
      AffineExpr e(2 * na);
      for (int a = 0; a < na; ++a) {
        const int j = axes[a];
        double colsum = 0.0;
        for (int i = 0; i < ns; ++i) {
          const double g = jac(j, i * kNx + j);
          e.add(a, sub.dx[k], i * kNx + j, -g);
          e.add(na + a, sub.dx[k], i * kNx + j, g);
          colsum += g;
        }
        e.add(a, sub.dmu[k], j, colsum);
        e.add(na + a, sub.dmu[k], j, -colsum);
        e.add(a, zeta, 0, 1.0);
        e.add(na + a, zeta, 0, 1.0);
        const double off = ref_m(j) - con.center;
        e.constant()(a) = con.bound - off;
        e.constant()(na + a) = con.bound + off;
      }
      p.add_constraint({ConeKind::nonneg, e});
      AffineExpr pos(1);
      pos.add(0, zeta, 0, 1.0);
      p.add_constraint({ConeKind::nonneg, pos});
      ++box;
    }
  }

  // objective
  const double sq = std::sqrt(kChiSquare3Quantile99);
  if (problem.objective == ObjectiveKind::dv99_ub) {
    for (int k = 0; k < segs; ++k) {
      const VariableHandle t = p.add_variable(2, "t" + std::to_string(k));
      sub.counts.auxiliary += 2;
      AffineExpr cu(1 + kNu);
      cu.add(0, t, 0, 1.0);
      cu.add_diagonal(1, sub.du[k], kNu, 1.0);
      cu.constant().tail(kNu) = ref.policy.feedforward[k];
      p.add_constraint({ConeKind::soc, cu});

      const Mat6 s = symmetric_factor(moments::full_covariance(lin.centered[k]));
      const Mat36& kref = ref.policy.gain[k];
      for (const Vec3& a : feedback_directions(kref * s)) {
        AffineExpr ck(1 + kNx);
        ck.add(0, t, 1, 1.0);
        ck.constant().tail(kNx) = s.transpose() * kref.transpose() * a;
        for (int c = 0; c < kNx; ++c)
          for (int r = 0; r < kNu; ++r)
            for (int m = 0; m < kNx; ++m)
              if (a(r) != 0.0 && s(m, c) != 0.0) ck.add(1 + c, sub.dk[k], r * kNx + m, a(r) * s(m, c));
        p.add_constraint({ConeKind::soc, ck});
      }
      obj.add(0, t, 0, 1.0);
      obj.add(0, t, 1, sq);
    }
  } else {
    for (int k = 0; k < segs; ++k) {
      const VariableHandle t = p.add_variable(ns, "t" + std::to_string(k));
      sub.counts.auxiliary += ns;
      const Mat36& kref = ref.policy.gain[k];
      const AggregatedState& z = lin.centered[k];
      for (int i = 0; i < ns; ++i) {
        if (w(i) < 0.0) throw Error(ErrorCode::invalid_weight, "expected fuel needs nonnegative weights");
        const Vec6 zi = z.as_matrix().col(i);
        AffineExpr e(1 + kNu);
        e.add(0, t, i, 1.0);
        e.add_diagonal(1, sub.du[k], kNu, 1.0);
        e.add_block(1, sub.dx[k], kref, i * kNx);
        e.add_block(1, sub.dmu[k], -kref);
        for (int r = 0; r < kNu; ++r)
          for (int c = 0; c < kNx; ++c)
            if (zi(c) != 0.0) e.add(1 + r, sub.dk[k], r * kNx + c, zi(c));
        e.constant().tail(kNu) = ref.policy.feedforward[k] + kref * zi;
        p.add_constraint({ConeKind::soc, e});
        obj.add(0, t, i, w(i));
      }
    }
  }

  // penalty on slacks
  int quad_rows = 0;
  for (int k = 0; k < segs; ++k) {
    if (sub.xi[k].id < 0) continue;
    for (int r = 0; r < len; ++r) {
      const double l = state.lambda(static_cast<Eigen::Index>(k) * len + r);
      if (l != 0.0) obj.add(0, sub.xi[k], r, l);
    }
    quad_rows += len;
  }
  for (std::size_t b = 0; b < sub.zeta.size(); ++b)
    if (state.mu(b) != 0.0) obj.add(0, sub.zeta[b], 0, state.mu(b));
  quad_rows += static_cast<int>(sub.zeta.size());
  if (quad_rows > 0) {
    const VariableHandle s = p.add_variable(1, "penalty");
    sub.counts.auxiliary += 1;
    // (w/2) ||v||^2 <= s  as  ||(s - 1, sqrt(2w) v)|| <= s + 1
    const double g = std::sqrt(2.0 * state.w_p);
    AffineExpr e(2 + quad_rows);
    e.add(0, s, 0, 1.0);
    e.constant()(0) = 1.0;
    e.add(1, s, 0, 1.0);
    e.constant()(1) = -1.0;
    int row = 2;
    for (int k = 0; k < segs; ++k) {
      if (sub.xi[k].id < 0) continue;
      e.add_diagonal(row, sub.xi[k], len, g);
      row += len;
    }
    for (const auto& zv : sub.zeta) e.add(row++, zv, 0, g);
    p.add_constraint({ConeKind::soc, e});
    obj.add(0, s, 0, 1.0);
  }
  return sub;
}

namespace {

Mat36 gain_step(const Eigen::VectorXd& d) {
  Mat36 g;
  for (int r = 0; r < kNu; ++r)
    for (int c = 0; c < kNx; ++c) g(r, c) = d(r * kNx + c);
  return g;
}

}  // namespace

Reference apply_step(const Reference& ref, const Subproblem& sub, const conic::Solution& sol) {
  if (sol.status != conic::SolveStatus::optimal) throw Error(ErrorCode::solver, "cannot apply a non-optimal solution");
  Reference out = ref;
  for (std::size_t k = 0; k < out.nodes.size(); ++k) out.nodes[k].data += sol.value(sub.dx[k]);
  for (int k = 0; k < out.policy.segments(); ++k) {
    out.policy.feedforward[k] += sol.value(sub.du[k]);
    out.policy.gain[k] += gain_step(sol.value(sub.dk[k]));
  }
  return out;
}

double convex_model_value(const SteeringProblem& problem, const ScvxState& state, const Linearization& lin,
                          const Subproblem& sub, const conic::Solution& sol) {
  if (sol.status != conic::SolveStatus::optimal) throw Error(ErrorCode::solver, "cannot evaluate a non-optimal solution");
  const Reference& ref = state.reference;
  const int segs = problem.segments();
  const int ns = ref.nodes[0].n_s();
  const int len = ns * kNx;
  double total = 0.0;
  for (int k = 0; k < segs; ++k) {
    const Vec3 ff = ref.policy.feedforward[k] + sol.value(sub.du[k]);
    const Mat36& kref = ref.policy.gain[k];
    const Mat36 dk = gain_step(sol.value(sub.dk[k]));
    if (problem.objective == ObjectiveKind::dv99_ub) {
      const Mat6 s = symmetric_factor(moments::full_covariance(lin.centered[k]));
      const Eigen::Matrix<double, 6, 3> m = s.transpose() * (kref + dk).transpose();
      double tk = 0.0;
      for (const Vec3& a : feedback_directions(kref * s)) tk = std::max(tk, (m * a).norm());
      total += ff.norm() + std::sqrt(kChiSquare3Quantile99) * tk;
    } else {
      const AggregatedState& z = lin.centered[k];
      const Eigen::VectorXd& dx = sol.value(sub.dx[k]);
      const Vec6 dmu = sol.value(sub.dmu[k]);
      for (int i = 0; i < ns; ++i) {
        const Vec6 zi = z.as_matrix().col(i);
        const Vec6 dz = dx.segment<kNx>(i * kNx) - dmu;
        total += z.weights(i) * (ff + kref * (zi + dz) + dk * zi).norm();
      }
    }
  }
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(segs) * len);
  for (int k = 0; k < segs; ++k)
    if (sub.xi[k].id >= 0) xi.segment(static_cast<Eigen::Index>(k) * len, len) = sol.value(sub.xi[k]);
  Eigen::VectorXd zeta(sub.zeta.size());
  for (std::size_t b = 0; b < sub.zeta.size(); ++b) zeta(b) = sol.value(sub.zeta[b])(0);
  return total + penalty(state.w_p, xi, state.lambda, zeta, state.mu);
}

// --- objectives and penalty --------------------------------------------------

double penalty(double w_p, const Eigen::VectorXd& xi, const Eigen::VectorXd& lambda, const Eigen::VectorXd& zeta,
               const Eigen::VectorXd& mu) {
  if (xi.size() != lambda.size() || zeta.size() != mu.size())
    throw Error(ErrorCode::shape, "penalty inputs have inconsistent sizes");
  const Eigen::VectorXd zp = zeta.cwiseMax(0.0);
  return lambda.dot(xi) + 0.5 * w_p * xi.squaredNorm() + mu.dot(zp) + 0.5 * w_p * zp.squaredNorm();
}

double objective_dv99(const Reference& ref) {
  const double sq = std::sqrt(kChiSquare3Quantile99);
  double total = 0.0;
  for (int k = 0; k < ref.policy.segments(); ++k) {
    total += ref.policy.feedforward[k].norm();
    const Eigen::MatrixXd root = moments::sqrt_covariance(moments::centralize(ref.nodes[k]));
    total += sq * moments::spectral_norm(ref.policy.gain[k] * root);
  }
  return total;
}

double objective_expected_fuel(const Reference& ref) {
  double total = 0.0;
  for (int k = 0; k < ref.policy.segments(); ++k) {
    const AggregatedState z = moments::centralize(ref.nodes[k]);
    for (int i = 0; i < z.n_s(); ++i) total += z.weights(i) * control_at(ref.policy, k, z, i).norm();
  }
  return total;
}

double objective_value(ObjectiveKind kind, const Reference& ref) {
  return kind == ObjectiveKind::dv99_ub ? objective_dv99(ref) : objective_expected_fuel(ref);
}

NonlinearEvaluation evaluate_nonlinear(const SteeringProblem& problem, const Reference& cand, double w_p,
                                       const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu) {
  NonlinearEvaluation ev;
  const int segs = problem.segments();
  const int ns = cand.nodes[0].n_s();
  const int len = ns * kNx;
  ev.defects = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(segs) * len);
  bool failed = false;
  std::string failure;
  for (int k = 0; k < segs && !failed; ++k) {
    const AggregatedState z = moments::centralize(cand.nodes[k]);
    const double dt = problem.grid.dt(k);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ns; ++i) {
      const Vec6 x = cand.nodes[k].as_matrix().col(i);
      try {
        const Vec6 y = dyn::propagate(problem.model, dyn::apply_impulse(x, control_at(cand.policy, k, z, i)), dt);
        ev.defects.segment(static_cast<Eigen::Index>(k) * len + i * kNx, kNx) =
            cand.nodes[k + 1].as_matrix().col(i) - y;
      } catch (const Error& e) {
#pragma omp critical
        {
          failed = true;
          failure = std::string(e.what()) + " segment=" + std::to_string(k) + " point=" + std::to_string(i);
        }
      }
    }
  }
  if (failed) {
    ev.failure = failure;
    ev.objective = ev.merit = ev.chi = std::numeric_limits<double>::infinity();
    return ev;
  }

  try {
    ev.objective = objective_value(problem.objective, cand);
    ev.box_violations = Eigen::VectorXd::Zero(mu.size());
    int box = 0;
    for (const auto& con : problem.constraints) {
      const std::vector<int> axes = axis_indices(con.axes);
      for (int k : constraint_nodes(con, problem.nodes())) {
        const AggregatedState& x = cand.nodes[k];
        if (con.kind == MomentKind::mean_eq) {
          const Vec6 m = moments::mean(x);
          for (int a : axes) ev.constraint_violation = std::max(ev.constraint_violation, std::abs(m(a) - con.target(a)));
        } else if (con.kind == MomentKind::sqrt_cov_norm_le) {
          const Eigen::MatrixXd root = moments::sqrt_covariance(moments::centralize(x));
          Eigen::MatrixXd sel(axes.size(), root.cols());
          for (std::size_t a = 0; a < axes.size(); ++a) sel.row(a) = root.row(axes[a]);
          ev.constraint_violation = std::max(ev.constraint_violation, moments::spectral_norm(sel) - con.bound);
        } else {
          const Eigen::VectorXd m = moments::standardized_moments(moments::centralize(x), con.order);
          double worst = 0.0;
          for (int a : axes) worst = std::max(worst, std::abs(m(a) - con.center));
          ev.box_violations(box) = std::max(0.0, worst - con.bound);
        }
      }
      if (con.kind == MomentKind::standardized_moment_box) ++box;
    }
  } catch (const Error& e) {
    ev.failure = e.what();
    ev.objective = ev.merit = ev.chi = std::numeric_limits<double>::infinity();
    return ev;
  }
  ev.chi = ev.defects.size() ? ev.defects.cwiseAbs().maxCoeff() : 0.0;
  if (ev.box_violations.size()) ev.chi = std::max(ev.chi, ev.box_violations.maxCoeff());
  ev.chi = std::max(ev.chi, ev.constraint_violation);
  ev.penalty = penalty(w_p, ev.defects, lambda, ev.box_violations, mu);
  ev.merit = ev.objective + ev.penalty;
  ev.ok = true;
  return ev;
}

// --- outer loop --------------------------------------------------------------

bool scvx_iterate(ScvxState& state, const SteeringProblem& problem, const ScvxParams& params, Linearization& lin,
                  NonlinearEvaluation& ref_eval) {
  IterationRecord rec;
  rec.iteration = static_cast<int>(state.log.size()) + 1;
  rec.delta = state.delta;
  rec.w_p = state.w_p;
  rec.j_reference = ref_eval.merit;

  const Subproblem sub = build_subproblem(problem, state, lin);
  const conic::Solution sol = sub.program.solve(sub.objective);
  rec.solver_status = conic::status_name(sol.status);
  if (sol.inaccurate) rec.solver_status += "_inaccurate";
  rec.solver_diagnostics = sol.diagnostics;

  bool accepted = false;
  bool converged = false;
  double rho = -std::numeric_limits<double>::infinity();
  if (sol.status == conic::SolveStatus::optimal) {
    Reference cand = apply_step(state.reference, sub, sol);
    NonlinearEvaluation ev = evaluate_nonlinear(problem, cand, state.w_p, state.lambda, state.mu);
    rec.j_cvx = convex_model_value(problem, state, lin, sub, sol);
    rec.j_candidate = ev.merit;
    if (ev.ok) {
      const double predicted = ref_eval.merit - rec.j_cvx;
      const double actual = ref_eval.merit - ev.merit;
      const double scale = std::max(1.0, std::abs(ref_eval.merit));
      rho = std::abs(predicted) <= 1e-9 * scale ? 1.0 : actual / predicted;
      accepted = rho >= params.eta2;
      if (accepted) {
        rec.optimality = std::abs(actual) / scale;
        converged = rec.optimality <= params.eps_opt && ev.chi <= params.eps_feas;
        const double chi_before = ref_eval.chi;
        state.reference = std::move(cand);
        ref_eval = std::move(ev);
        if (!converged && ref_eval.chi > 0.5 * chi_before) {
          state.lambda += state.w_p * ref_eval.defects;
          state.mu = (state.mu + state.w_p * ref_eval.box_violations).cwiseMax(0.0);
          state.w_p = std::min(params.beta * state.w_p, params.w_max);
          ref_eval.penalty = penalty(state.w_p, ref_eval.defects, state.lambda, ref_eval.box_violations, state.mu);
          ref_eval.merit = ref_eval.objective + ref_eval.penalty;
        }
        if (!converged) lin = linearize_reference(problem, state.reference);
      }
    }
  }
  rec.rho = rho;
  rec.accepted = accepted;
  if (!accepted || rho < params.eta1) {
    state.delta = std::max(state.delta / params.alpha1, params.delta_min);
  } else if (rho >= params.eta0 - 1e-9) {
    state.delta = std::min(state.delta * params.alpha2, params.delta_max);
  }
  rec.j_nl = ref_eval.merit;
  rec.penalty = ref_eval.penalty;
  rec.chi = ref_eval.chi;
  state.log.push_back(rec);
  return converged;
}

NodeMoments node_moments(const AggregatedState& x) {
  NodeMoments m;
  const AggregatedState z = moments::centralize(x);
  m.mean = moments::mean(x);
  const Mat6 p = moments::full_covariance(z);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int a = 0; a < kNx; ++a) {
    m.three_sigma(a) = 3.0 * std::sqrt(std::max(0.0, p(a, a)));
    if (p(a, a) > moments::kVarianceFloor) {
      m.skewness(a) = moments::standardized_moment(z, 3, a);
      m.kurtosis(a) = moments::standardized_moment(z, 4, a);
    } else {
      m.skewness(a) = m.kurtosis(a) = nan;
    }
  }
  return m;
}

ConvergedPolicy summarize(const SteeringProblem& problem, const Reference& ref) {
  ConvergedPolicy out;
  out.policy = ref.policy;
  out.reference = ref;
  for (const auto& x : ref.nodes) {
    out.cut_means.push_back(moments::mean(x));
    out.moments.push_back(node_moments(x));
  }
  out.dv99_ub = objective_dv99(ref);
  out.expected_fuel = objective_expected_fuel(ref);
  int boxes = 0;
  for (const auto& c : problem.constraints) boxes += c.kind == MomentKind::standardized_moment_box;
  const auto ev = evaluate_nonlinear(problem, ref, 0.0,
                                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.segments()) * ref.nodes[0].data.size()),
                                     Eigen::VectorXd::Zero(boxes));
  out.chi = ev.chi;
  out.merit = ev.merit;
  return out;
}

ConvergedPolicy solve_moment_steering(const SteeringProblem& problem, const ScvxParams& params, const Reference& initial,
                                      const IterationCallback& on_iteration) {
  ScvxState state = initial_state(problem, params, initial);
  Linearization lin = linearize_reference(problem, state.reference);
  NonlinearEvaluation ev = evaluate_nonlinear(problem, state.reference, state.w_p, state.lambda, state.mu);
  if (!ev.ok) throw Error(ErrorCode::reference, "initial reference cannot be evaluated", ev.failure);
  bool converged = false;
  for (int it = 0; it < params.max_iterations && !converged; ++it) {
    converged = scvx_iterate(state, problem, params, lin, ev);
    if (on_iteration) on_iteration(state.log.back());
    if (!converged && !state.log.back().accepted && state.delta <= params.delta_min) break;
  }
  ConvergedPolicy out = summarize(problem, state.reference);
  out.converged = converged;
  out.iterations = static_cast<int>(state.log.size());
  out.merit = ev.merit;
  out.chi = ev.chi;
  out.log = std::move(state.log);
  return out;
}

void write_iteration_csv(std::ostream& os, const std::vector<IterationRecord>& log) {
  os << "iteration,accepted,j_nl,penalty,chi,delta_tr,w_p,rho,j_cvx,optimality,solver_status\n";
  for (const auto& r : log) {
    os << r.iteration << ',' << (r.accepted ? 1 : 0) << ',' << fmt(r.j_nl) << ',' << fmt(r.penalty) << ','
       << fmt(r.chi) << ',' << fmt(r.delta) << ',' << fmt(r.w_p) << ',' << fmt(r.rho) << ',' << fmt(r.j_cvx) << ','
       << fmt(r.optimality) << ',' << r.solver_status << '\n';
  }
}

}  // namespace cutsteer::scvx
