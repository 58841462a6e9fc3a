#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cutsteer/astro_dynamics.hpp"
#include "cutsteer/conic_program.hpp"
#include "cutsteer/cut_sampling.hpp"
#include "cutsteer/moment_algebra.hpp"

namespace cutsteer::scvx {

using dyn::Mat36;
using dyn::Mat6;
using dyn::Vec3;
using dyn::Vec6;

/// 0.99 quantile of a chi-squared variable with three degrees of freedom.
inline constexpr double kChiSquare3Quantile99 = 11.344866730144373;

enum class ObjectiveKind { dv99_ub, expected_fuel };
enum class MomentKind { mean_eq, sqrt_cov_norm_le, standardized_moment_box };
enum class AxisSelector { position, velocity, full };
enum class SlackPlacement { final_segment, all_segments, none };
enum class GuessKind { ballistic, element_interpolation };

inline constexpr int kAllNodes = -1;

struct MomentConstraint {
  MomentKind kind = MomentKind::mean_eq;
  int node = kAllNodes;
  AxisSelector axes = AxisSelector::full;
  Eigen::VectorXd target;  // mean_eq: full state target
  double bound = 0.0;      // sqrt_cov_norm_le: max spectral norm; box: half width
  int order = 3;           // box: standardized moment order
  double center = 0.0;     // box: 0 for skewness, 3 for kurtosis
};

struct InitialDistribution {
  Vec6 mean = Vec6::Zero();
  Mat6 covariance = Mat6::Identity();
  double lead_in = 0.0;  // uncontrolled propagation before the first node
};

struct SteeringProblem {
  dyn::DynamicsModel model;
  dyn::NodeGrid grid;
  InitialDistribution initial;
  int cut_order = 4;
  ObjectiveKind objective = ObjectiveKind::dv99_ub;
  std::vector<MomentConstraint> constraints;
  SlackPlacement slack = SlackPlacement::final_segment;
  GuessKind guess = GuessKind::ballistic;
  Vec6 guess_target = Vec6::Zero();  // final mean for element interpolation

  int nodes() const { return grid.size(); }
  int segments() const { return grid.size() - 1; }
  bool slacked(int segment) const;
  void validate() const;

  /// Sigma points at the first node: CUT of the initial Gaussian, propagated
  /// through the lead-in when one is configured.
  moments::AggregatedState initial_sigma_points(const dyn::IntegratorOptions& opt = {}) const;
};

struct ScvxParams {
  double eps_opt = 1e-4;
  double eps_feas = 1e-6;
  double eta0 = 1.0;
  double eta1 = 0.85;
  double eta2 = 0.1;
  double alpha1 = 2.0;
  double alpha2 = 3.0;
  double beta = 1.5;
  double gamma = 0.99;
  double delta_init = 0.5;
  double delta_min = 1e-10;
  double delta_max = 20.0;
  double w_init = 100.0;
  double w_max = 1e10;
  int max_iterations = 100;

  static ScvxParams two_body();
  static ScvxParams cr3bp();
  void validate() const;
};

/// Sigma points per node plus the policy that drives them.
struct Reference {
  std::vector<moments::AggregatedState> nodes;
  dyn::ImpulsivePolicy policy;
};

struct IterationRecord {
  int iteration = 0;
  bool accepted = false;
  double j_nl = 0.0;       // merit of the reference after this iteration
  double penalty = 0.0;
  double chi = 0.0;
  double delta = 0.0;      // trust region used by this iteration's subproblem
  double w_p = 0.0;
  double rho = 0.0;
  double j_cvx = 0.0;
  double j_candidate = 0.0;
  double j_reference = 0.0;  // merit of the pre-step reference, same multipliers
  double optimality = 0.0;
  std::string solver_status;
  std::string solver_diagnostics;
};

struct ScvxState {
  Reference reference;
  double w_p = 0.0;
  Eigen::VectorXd lambda;  // one per dynamics defect entry, all segments
  Eigen::VectorXd mu;      // one per moment box
  double delta = 0.0;
  std::vector<IterationRecord> log;
};

ScvxState initial_state(const SteeringProblem& problem, const ScvxParams& params, Reference reference);

// --- initial references ------------------------------------------------------

struct ReferenceGuess {
  Reference reference;
  std::vector<Vec6> means;
  std::vector<Mat6> covariances;  // scaled covariances, first entry is the initial one
};

/// Mean guess plus scaled linear covariance. Sigma points after the first
/// node are resampled from the guessed Gaussians.
ReferenceGuess initial_reference(const SteeringProblem& problem);

/// Propagates the problem's first-node sigma points under an existing policy
/// with feedback about each node's own sigma mean. The result has zero defects.
Reference propagate_reference(const SteeringProblem& problem, const dyn::ImpulsivePolicy& policy);

// --- subproblem --------------------------------------------------------------

/// Per-segment, per-sigma linearization and per-node reference moments.
struct Linearization {
  std::vector<std::vector<dyn::SegmentLinearization>> segments;  // [k][i]
  std::vector<moments::AggregatedState> centered;                // z* per node
  std::vector<Vec6> means;
};

Linearization linearize_reference(const SteeringProblem& problem, const Reference& ref);

struct VariableCounts {
  int states = 0;
  int feedforward = 0;
  int gains = 0;
  int slacks = 0;
  int auxiliary = 0;  // mean maps and epigraph variables
};

struct Subproblem {
  conic::ConeProgram program;
  conic::AffineExpr objective;
  std::vector<conic::VariableHandle> dx, dmu, du, dk, xi;  // xi indexed by segment, id -1 if unslacked
  std::vector<conic::VariableHandle> zeta;                 // one per moment box
  std::vector<int> box_constraints;                        // indices into problem.constraints
  VariableCounts counts;
};

Subproblem build_subproblem(const SteeringProblem& problem, const ScvxState& state,
                            const Linearization& lin);

/// Reference plus the solution's deltas.
Reference apply_step(const Reference& ref, const Subproblem& sub, const conic::Solution& sol);

/// Convex model (objective plus penalty) evaluated at the solution's primal values.
double convex_model_value(const SteeringProblem& problem, const ScvxState& state, const Linearization& lin,
                          const Subproblem& sub, const conic::Solution& sol);

// --- objectives and penalty --------------------------------------------------

double penalty(double w_p, const Eigen::VectorXd& xi, const Eigen::VectorXd& lambda,
               const Eigen::VectorXd& zeta, const Eigen::VectorXd& mu);

/// Sum over segments of ||u_bar|| + sqrt(Q) ||K P^(1/2)||_2 with P from the node's points.
double objective_dv99(const Reference& ref);
/// Sum over segments and sigma points of w_i ||u_bar + K z_i||.
double objective_expected_fuel(const Reference& ref);
double objective_value(ObjectiveKind kind, const Reference& ref);

/// Unit directions used to model the spectral norm in the feedback term: the
/// left singular vectors of `product` followed by 13 fixed directions.
std::vector<Vec3> feedback_directions(const Eigen::MatrixXd& product);

struct NonlinearEvaluation {
  bool ok = false;
  std::string failure;
  double objective = 0.0;
  Eigen::VectorXd defects;         // x_{k+1} - phi(x_k, u), all segments
  Eigen::VectorXd box_violations;  // [max |moment - center| - eps]_+ per box
  double constraint_violation = 0.0;  // mean residual and sqrt-cov excess, max-norm
  double chi = 0.0;
  double penalty = 0.0;
  double merit = 0.0;
};

NonlinearEvaluation evaluate_nonlinear(const SteeringProblem& problem, const Reference& candidate,
                                       double w_p, const Eigen::VectorXd& lambda,
                                       const Eigen::VectorXd& mu);

// --- outer loop --------------------------------------------------------------

/// One subproblem solve plus acceptance, multiplier and trust-region updates.
/// `lin` and `ref_eval` describe the current reference and are refreshed on acceptance.
/// Returns true when the convergence criteria are met.
bool scvx_iterate(ScvxState& state, const SteeringProblem& problem, const ScvxParams& params,
                  Linearization& lin, NonlinearEvaluation& ref_eval);

struct NodeMoments {
  Vec6 mean;
  Vec6 three_sigma;
  Vec6 skewness;
  Vec6 kurtosis;
};

NodeMoments node_moments(const moments::AggregatedState& x);

struct ConvergedPolicy {
  dyn::ImpulsivePolicy policy;
  Reference reference;
  std::vector<Vec6> cut_means;
  std::vector<NodeMoments> moments;
  bool converged = false;
  int iterations = 0;
  double merit = 0.0;
  double chi = 0.0;
  double dv99_ub = 0.0;
  double expected_fuel = 0.0;
  std::vector<IterationRecord> log;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

ConvergedPolicy solve_moment_steering(const SteeringProblem& problem, const ScvxParams& params,
                                      const Reference& initial, const IterationCallback& on_iteration = {});

/// Summary of a reference: moments, objectives and feasibility.
ConvergedPolicy summarize(const SteeringProblem& problem, const Reference& ref);

void write_iteration_csv(std::ostream& os, const std::vector<IterationRecord>& log);

}  // namespace cutsteer::scvx
