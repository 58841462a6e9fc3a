#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace cutsteer::dyn {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Equations of motion in scaled units.
///   two_body:   mu == 1 after scaling; length/time units set the scaling
///   cr3bp:      mu is the mass ratio; units convert nondimensional values
///   free_space: no forces (linear test dynamics)
struct DynamicsModel {
  enum class Kind { two_body, cr3bp, free_space };

  Kind kind = Kind::free_space;
  double mu = 0.0;
  double length_unit_km = 1.0;
  double time_unit_s = 1.0;

  static DynamicsModel two_body(double mu_km3_s2, double length_unit_km);
  static DynamicsModel cr3bp(double mass_ratio, double length_unit_km, double time_unit_s);
  static DynamicsModel free_space();

  double velocity_unit_km_s() const { return length_unit_km / time_unit_s; }
};

struct NodeGrid {
  std::vector<double> epochs;

  static NodeGrid uniform(double t0, double tf, int nodes);
  int size() const { return static_cast<int>(epochs.size()); }
  double dt(int k) const { return epochs[k + 1] - epochs[k]; }
};

struct ImpulsivePolicy {
  std::vector<Vec3> feedforward;  // per node 0..N-2
  std::vector<Mat36> gain;

  static ImpulsivePolicy zeros(int segments);
  int segments() const { return static_cast<int>(feedforward.size()); }
};

struct SegmentLinearization {
  Mat6 A;
  Mat63 B;
  Vec6 c;
  Vec6 endpoint;  // propagated reference end state
};

struct IntegratorOptions {
  double rel_tol = 1e-14;
  double abs_tol = 1e-14;
  long max_steps = 2000000;
};

Vec6 acceleration_field(const DynamicsModel& model, const Vec6& x);  // returns [v; a]
Mat6 field_jacobian(const DynamicsModel& model, const Vec6& x);

Vec6 propagate(const DynamicsModel& model, const Vec6& x, double dt,
               const IntegratorOptions& opt = {});

struct StateAndStm {
  Vec6 state;
  Mat6 stm;
};
StateAndStm propagate_with_stm(const DynamicsModel& model, const Vec6& x, double dt,
                               const IntegratorOptions& opt = {});

Vec6 apply_impulse(const Vec6& x, const Vec3& u);

SegmentLinearization linearize_segment(const DynamicsModel& model, const Vec6& x_ref,
                                       const Vec3& u_ref, double t0, double t1,
                                       const IntegratorOptions& opt = {});

// --- orbit utilities -------------------------------------------------------

/// Classical elements. For circular orbits the argument of periapsis is 0 and
/// true_anomaly holds the argument of latitude.
struct KeplerElements {
  double a, e, i, raan, argp, true_anomaly;
};

KeplerElements cartesian_to_kepler(const Vec6& x, double mu);
Vec6 kepler_to_cartesian(const KeplerElements& el, double mu);

/// Element-space interpolation between two states. Slow angles take the
/// shorter arc. The argument of latitude is unwrapped so that the swept angle
/// is consistent with the average mean motion over the flight time.
Vec6 kepler_interpolate(const Vec6& x0, const Vec6& x1, double mu, double time_of_flight,
                        double fraction);

double jacobi_constant(double mass_ratio, const Vec6& x);

struct PeriodicOrbit {
  Vec6 state;
  double period;
  double residual;  // ||x(T) - x(0)||
};

/// Symmetric halo closure: x position fixed, z position, y velocity and the
/// half period corrected so the next xz-plane crossing is perpendicular.
PeriodicOrbit correct_halo(const DynamicsModel& model, const Vec6& guess, double period_guess,
                           const IntegratorOptions& opt = {});

inline constexpr double kStableMarker = std::numeric_limits<double>::infinity();

/// 1 / (Re[ln lambda_max(monodromy)] * T); +inf when the orbit is not unstable.
double time_constant(const DynamicsModel& model, const Vec6& state, double period,
                     const IntegratorOptions& opt = {});

}  // namespace cutsteer::dyn
