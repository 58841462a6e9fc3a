#include <cmath>
#include <sstream>

#include "cutsteer/error.hpp"
#include "cutsteer/scvx_engine.hpp"
#include "doctest.h"

using namespace cutsteer;
using namespace cutsteer::scvx;

namespace {

// Free-space transfer from rest at the origin to position d with velocity d/T.
// One impulse of d/T reaches the target exactly; the dynamics are linear and
// the offset fits inside the initial trust region.
SteeringProblem free_space_transfer(int nodes, ObjectiveKind objective) {
  SteeringProblem p;
  p.model = dyn::DynamicsModel::free_space();
  p.grid = dyn::NodeGrid::uniform(0.0, 2.0, nodes);
  p.initial.covariance = Mat6::Identity() * 1e-4;
  p.objective = objective;
  MomentConstraint c;
  c.kind = MomentKind::mean_eq;
  c.node = nodes - 1;
  c.target = Vec6::Zero();
  c.target.head<3>() << 0.2, -0.1, 0.05;
  c.target.tail<3>() = c.target.head<3>() / 2.0;
  p.constraints.push_back(c);
  return p;
}

SteeringProblem small_two_body() {
  SteeringProblem p;
  p.model = dyn::DynamicsModel::two_body(398600.0, 5000.0);
  const double v = p.model.velocity_unit_km_s();
  p.initial.mean << 8000.0 / 5000.0, 0, 0, 0, 6.1130 / v, 3.5293 / v;
  p.initial.covariance.setZero();
  for (int i = 0; i < 3; ++i) {
    p.initial.covariance(i, i) = std::pow(50.0 / 3.0 / 5000.0, 2);
    p.initial.covariance(i + 3, i + 3) = std::pow(0.01 / 3.0 / v, 2);
  }
  p.grid = dyn::NodeGrid::uniform(0.0, 1.9781 * 3600.0 / p.model.time_unit_s, 4);
  MomentConstraint c;
  c.kind = MomentKind::mean_eq;
  c.node = 3;
  c.target = Vec6::Zero();
  c.target << 9000.0 / 5000.0, 0, 0, 0, 3.327 / v, 5.763 / v;
  p.constraints.push_back(c);
  p.guess = GuessKind::element_interpolation;
  p.guess_target = c.target;
  return p;
}

// Chi-squared CDF with three degrees of freedom.
double chi3_cdf(double x) {
  return std::erf(std::sqrt(x / 2.0)) - std::sqrt(2.0 * x / M_PI) * std::exp(-x / 2.0);
}

conic::Solution zero_solution(const Subproblem& sub) {
  conic::Solution s;
  s.status = conic::SolveStatus::optimal;
  for (int v = 0; v < sub.program.num_variables(); ++v)
    s.values.push_back(Eigen::VectorXd::Zero(sub.program.variable_length(v)));
  return s;
}

}  // namespace

TEST_CASE("chi-square quantile constant matches the CDF") {
  double lo = 0.0, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi3_cdf(mid) < 0.99 ? lo : hi) = mid;
  }
  CHECK(kChiSquare3Quantile99 == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
}

TEST_CASE("penalty expands to linear plus quadratic terms") {
  Eigen::VectorXd xi(3), lambda(3), zeta(2), mu(2);
  xi << 0.1, -0.2, 0.3;
  lambda << 1.0, 2.0, -1.0;
  zeta << 0.5, -0.4;
  mu << 2.0, 7.0;
  const double w = 10.0;
  // negative box violations do not count
  const double expected = (0.1 - 0.4 - 0.3) + 5.0 * (0.01 + 0.04 + 0.09) + 2.0 * 0.5 + 5.0 * 0.25;
  CHECK(penalty(w, xi, lambda, zeta, mu) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(penalty(w, Eigen::VectorXd::Zero(3), lambda, Eigen::VectorXd::Zero(2), mu) == 0.0);
  CHECK_THROWS_AS(penalty(w, xi, Eigen::VectorXd::Zero(2), zeta, mu), Error);
}

TEST_CASE("parameter presets") {
  const ScvxParams tb = ScvxParams::two_body();
  CHECK(tb.eta0 == 1.0);
  CHECK(tb.eta1 == 0.85);
  CHECK(tb.eta2 == 0.1);
  CHECK(tb.alpha1 == 2.0);
  CHECK(tb.alpha2 == 3.0);
  const ScvxParams cr = ScvxParams::cr3bp();
  CHECK(cr.eps_opt == 1e-4);
  CHECK(cr.eps_feas == 1e-7);
  CHECK(cr.eta1 == 0.2);
  CHECK(cr.alpha1 == 3.0);
  CHECK(cr.alpha2 == 2.0);
  CHECK(cr.delta_init == 0.1);
  CHECK(cr.delta_max == 0.1);
  CHECK(cr.delta_min == 1e-10);
  ScvxParams bad = tb;
  bad.eta2 = 0.9;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("feedback directions are unit vectors led by singular vectors") {
  Eigen::MatrixXd m(3, 6);
  m.setZero();
  m(0, 0) = 3.0;
  m(1, 1) = 2.0;
  m(2, 2) = 1.0;
  const auto dirs = feedback_directions(m);
  REQUIRE(dirs.size() == 16);
  for (const auto& d : dirs) CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(dirs[0](0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subproblem variable counts") {
  SteeringProblem p = free_space_transfer(3, ObjectiveKind::dv99_ub);
  const Reference ref = initial_reference(p).reference;
  const ScvxState st = initial_state(p, ScvxParams::two_body(), ref);
  const Linearization lin = linearize_reference(p, st.reference);
  const Subproblem sub = build_subproblem(p, st, lin);
  const int ns = cut::cut_standard(4, 6).count();
  CHECK(sub.counts.states == 3 * ns * 6);
  CHECK(sub.counts.feedforward == 2 * 3);
  CHECK(sub.counts.gains == 2 * 18);
  CHECK(sub.counts.slacks == ns * 6);  // final segment only
  CHECK(sub.xi[0].id == -1);
  CHECK(sub.xi[1].length == ns * 6);

  p.slack = SlackPlacement::all_segments;
  const ScvxState st2 = initial_state(p, ScvxParams::two_body(), ref);
  CHECK(build_subproblem(p, st2, lin).counts.slacks == 2 * ns * 6);
  p.slack = SlackPlacement::none;
  const ScvxState st3 = initial_state(p, ScvxParams::two_body(), ref);
  CHECK(build_subproblem(p, st3, lin).counts.slacks == 0);
}

TEST_CASE("convex model at a zero step equals the nonlinear objective") {
  for (ObjectiveKind kind : {ObjectiveKind::dv99_ub, ObjectiveKind::expected_fuel}) {
    SteeringProblem p = free_space_transfer(3, kind);
    Reference ref = initial_reference(p).reference;
    ref.policy.feedforward[0] << 0.1, 0.2, -0.3;
    ref.policy.gain[1].setConstant(0.05);
    ScvxState st = initial_state(p, ScvxParams::two_body(), propagate_reference(p, ref.policy));
    st.lambda.setConstant(0.3);
    const Linearization lin = linearize_reference(p, st.reference);
    const Subproblem sub = build_subproblem(p, st, lin);
    const double model = convex_model_value(p, st, lin, sub, zero_solution(sub));
    CHECK(model == doctest::Approx(objective_value(kind, st.reference)).epsilon(1e-12));
  }
}

TEST_CASE("objectives of a pure feedforward policy") {
  SteeringProblem p = free_space_transfer(3, ObjectiveKind::dv99_ub);
  dyn::ImpulsivePolicy pol = dyn::ImpulsivePolicy::zeros(2);
  pol.feedforward[0] << 3.0, 4.0, 0.0;
  pol.feedforward[1] << 0.0, 0.0, 1.0;
  const Reference ref = propagate_reference(p, pol);
  CHECK(objective_dv99(ref) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(objective_expected_fuel(ref) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("propagated reference has zero defects") {
  SteeringProblem p = small_two_body();
  dyn::ImpulsivePolicy pol = dyn::ImpulsivePolicy::zeros(3);
  pol.feedforward[1] << 0.01, 0.0, -0.02;
  pol.gain[0](0, 3) = -0.1;
  const Reference ref = propagate_reference(p, pol);
  const auto ev = evaluate_nonlinear(p, ref, 1.0, Eigen::VectorXd::Zero(3 * ref.nodes[0].data.size()),
                                     Eigen::VectorXd::Zero(0));
  REQUIRE(ev.ok);
  CHECK(ev.defects.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scaled linear covariance keeps the initial eigenvalues") {
  const SteeringProblem p = small_two_body();
  const ReferenceGuess g = initial_reference(p);
  Eigen::SelfAdjointEigenSolver<Mat6> e0(g.covariances[0]);
  for (std::size_t k = 1; k < g.covariances.size(); ++k) {
    Eigen::SelfAdjointEigenSolver<Mat6> ek(g.covariances[k]);
    for (int i = 0; i < 6; ++i)
      CHECK(ek.eigenvalues()(i) == doctest::Approx(e0.eigenvalues()(i)).epsilon(1e-9));
  }
  // guessed means follow the Keplerian interpolation endpoints
  CHECK((g.means.back() - p.guess_target).norm() < 1e-9);
}

TEST_CASE("linear toy problem converges in a few iterations") {
  for (ObjectiveKind kind : {ObjectiveKind::dv99_ub, ObjectiveKind::expected_fuel}) {
    const SteeringProblem p = free_space_transfer(2, kind);
    const Reference ref = initial_reference(p).reference;
    const ConvergedPolicy out = solve_moment_steering(p, ScvxParams::two_body(), ref);
    CHECK(out.converged);
    CHECK(out.iterations <= 3);
    const Vec3 expected(0.1, -0.05, 0.025);
    CHECK((out.policy.feedforward[0] - expected).norm() < 1e-5);
    CHECK((out.cut_means.back() - p.constraints[0].target).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("rejected steps leave the reference untouched and steps respect the trust region") {
  const SteeringProblem p = small_two_body();
  ScvxParams params = ScvxParams::two_body();
  // strict acceptance forces rejections on this nonlinear problem
  params.eta2 = 0.999;
  params.eta1 = 0.9995;
  params.delta_init = 0.5;
  ScvxState st = initial_state(p, params, initial_reference(p).reference);
  Linearization lin = linearize_reference(p, st.reference);
  NonlinearEvaluation ev = evaluate_nonlinear(p, st.reference, st.w_p, st.lambda, st.mu);
  int rejected = 0;
  for (int it = 0; it < 6; ++it) {
    const Reference before = st.reference;
    const double delta = st.delta;
    scvx_iterate(st, p, params, lin, ev);
    const IterationRecord& rec = st.log.back();
    CHECK(rec.delta == delta);
    if (!rec.accepted) {
      ++rejected;
      for (std::size_t k = 0; k < before.nodes.size(); ++k) CHECK(st.reference.nodes[k].data == before.nodes[k].data);
      for (int k = 0; k < before.policy.segments(); ++k) {
        CHECK(st.reference.policy.feedforward[k] == before.policy.feedforward[k]);
        CHECK(st.reference.policy.gain[k] == before.policy.gain[k]);
      }
      CHECK(st.delta < delta);
    } else {
      for (std::size_t k = 1; k < before.nodes.size(); ++k)
        CHECK((st.reference.nodes[k].data - before.nodes[k].data).cwiseAbs().maxCoeff() <= delta * (1 + 1e-6));
      for (int k = 0; k < before.policy.segments(); ++k)
        CHECK((st.reference.policy.gain[k] - before.policy.gain[k]).cwiseAbs().maxCoeff() <= delta * (1 + 1e-6));
      CHECK(st.reference.nodes[0].data == before.nodes[0].data);
    }
  }
  CHECK(rejected > 0);
}

TEST_CASE("accepted steps never raise the merit under the multipliers they were taken with") {
  const SteeringProblem p = small_two_body();
  ScvxParams params = ScvxParams::two_body();
  params.max_iterations = 12;
  std::vector<IterationRecord> log;
  solve_moment_steering(p, params, initial_reference(p).reference, [&](const IterationRecord& r) { log.push_back(r); });
  REQUIRE(!log.empty());
  int accepted = 0;
  for (const IterationRecord& r : log) {
    if (!r.accepted) continue;
    ++accepted;
    CHECK(r.j_candidate <= r.j_reference);
    CHECK(r.rho >= params.eta2);
  }
  CHECK(accepted > 0);
}

TEST_CASE("unslacked subproblem is feasible at a propagated reference") {
  SteeringProblem p = small_two_body();
  p.constraints.clear();
  p.slack = SlackPlacement::none;
  dyn::ImpulsivePolicy pol = dyn::ImpulsivePolicy::zeros(3);
  pol.feedforward[0] << 0.001, 0.0, 0.0;
  const ScvxState st = initial_state(p, ScvxParams::two_body(), propagate_reference(p, pol));
  const Linearization lin = linearize_reference(p, st.reference);
  const Subproblem sub = build_subproblem(p, st, lin);
  const conic::Solution sol = sub.program.solve(sub.objective);
  REQUIRE(sol.status == conic::SolveStatus::optimal);
  // the optimum drops the feedforward
  CHECK(convex_model_value(p, st, lin, sub, sol) < 1e-6);
}

TEST_CASE("problem validation") {
  SteeringProblem p = free_space_transfer(3, ObjectiveKind::dv99_ub);
  p.cut_order = 5;
  CHECK_THROWS_AS(p.validate(), Error);
  p.cut_order = 4;
  MomentConstraint box;
  box.kind = MomentKind::standardized_moment_box;
  box.node = kAllNodes;
  box.bound = 0.01;
  p.constraints.push_back(box);
  CHECK_THROWS_AS(p.validate(), Error);
  p.constraints.back().node = 2;
  CHECK_NOTHROW(p.validate());
  p.constraints.back().node = 3;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("iteration log CSV") {
  IterationRecord r;
  r.iteration = 1;
  r.accepted = true;
  r.j_nl = 0.5;
  r.solver_status = "optimal";
  std::ostringstream os;
  write_iteration_csv(os, {r});
  const std::string s = os.str();
  CHECK(s.rfind("iteration,accepted,j_nl", 0) == 0);
  CHECK(s.find("\n1,1,0.5,") != std::string::npos);
}
