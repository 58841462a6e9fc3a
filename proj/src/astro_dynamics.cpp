#include "cutsteer/astro_dynamics.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "cutsteer/error.hpp"

namespace cutsteer::dyn {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Position part of the acceleration and its gradient, without Coriolis terms.
void gravity(const DynamicsModel& m, const double* r, double* a, double* g /* 3x3 row-major or null */) {
  a[0] = a[1] = a[2] = 0.0;
  if (g) for (int i = 0; i < 9; ++i) g[i] = 0.0;

  auto point_mass = [&](double gm, double px, double py, double pz) {
    const double d[3] = {r[0] - px, r[1] - py, r[2] - pz};
    const double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    const double rn = std::sqrt(r2);
    const double inv3 = 1.0 / (r2 * rn);
    for (int i = 0; i < 3; ++i) a[i] -= gm * d[i] * inv3;
    if (g) {
      const double inv5 = inv3 / r2;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          g[3 * i + j] += gm * (3.0 * d[i] * d[j] * inv5 - (i == j ? inv3 : 0.0));
    }
  };

  switch (m.kind) {
    case DynamicsModel::Kind::two_body:
      point_mass(m.mu, 0.0, 0.0, 0.0);
      break;
    case DynamicsModel::Kind::cr3bp:
      point_mass(1.0 - m.mu, -m.mu, 0.0, 0.0);
      point_mass(m.mu, 1.0 - m.mu, 0.0, 0.0);
      a[0] += r[0];
      a[1] += r[1];
      if (g) {
        g[0] += 1.0;
        g[4] += 1.0;
      }
      break;
    case DynamicsModel::Kind::free_space:
      break;
  }
}

template <std::size_t N>
struct Field {
  const DynamicsModel* model;

  void operator()(const std::array<double, N>& s, std::array<double, N>& ds, double) const {
    const bool rot = model->kind == DynamicsModel::Kind::cr3bp;
    double a[3];
    double g[9];
    gravity(*model, s.data(), a, N > 6 ? g : nullptr);
    ds[0] = s[3];
    ds[1] = s[4];
    ds[2] = s[5];
    ds[3] = a[0] + (rot ? 2.0 * s[4] : 0.0);
    ds[4] = a[1] - (rot ? 2.0 * s[3] : 0.0);
    ds[5] = a[2];
    if constexpr (N > 6) {
      // Phi is stored row-major after the state; dPhi = A Phi with
      // A = [0 I; G W], W the Coriolis block.
      const double* phi = s.data() + 6;
      double* dphi = ds.data() + 6;
      for (int c = 0; c < 6; ++c) {
        for (int i = 0; i < 3; ++i) dphi[6 * i + c] = phi[6 * (i + 3) + c];
        for (int i = 0; i < 3; ++i) {
          double v = g[3 * i] * phi[c] + g[3 * i + 1] * phi[6 + c] + g[3 * i + 2] * phi[12 + c];
          if (rot) {
            if (i == 0) v += 2.0 * phi[6 * 4 + c];
            if (i == 1) v -= 2.0 * phi[6 * 3 + c];
          }
          dphi[6 * (i + 3) + c] = v;
        }
      }
    }
  }
};

template <std::size_t N>
void integrate(const DynamicsModel& model, std::array<double, N>& s, double dt,
               const IntegratorOptions& opt) {
  if (dt < 0.0 || !std::isfinite(dt)) {
    throw Error(ErrorCode::invalid_argument, "propagation interval must be finite and non-negative");
  }
  if (dt == 0.0) return;
  using Stepper = odeint::runge_kutta_fehlberg78<std::array<double, N>>;
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, Stepper());
  Field<N> field{&model};

  double t = 0.0;
  double h = dt / 16.0;
  long steps = 0;
  while (t < dt) {
    if (t + h > dt) h = dt - t;
    const double t_prev = t;
    odeint::controlled_step_result res;
    try {
      res = stepper.try_step(field, s, t, h);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::propagation, std::string("integrator failure: ") + e.what(),
                  "t=" + std::to_string(t_prev));
    }
    if (++steps > opt.max_steps || !(h > 1e-15 * dt)) {
      throw Error(ErrorCode::propagation, "integrator step limit reached",
                  "t=" + std::to_string(t_prev));
    }
    if (res == odeint::success) {
      for (double v : s) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::propagation, "non-finite state during propagation",
                      "last_good_t=" + std::to_string(t_prev));
        }
      }
      // guard against rounding leaving a sliver
      if (dt - t < 1e-14 * dt) t = dt;
    }
  }
}

double wrap_pi(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

}  // namespace

DynamicsModel DynamicsModel::two_body(double mu_km3_s2, double length_unit_km) {
  if (!(mu_km3_s2 > 0.0) || !(length_unit_km > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "two-body parameters must be positive");
  }
  DynamicsModel m;
  m.kind = Kind::two_body;
  m.mu = 1.0;
  m.length_unit_km = length_unit_km;
  m.time_unit_s = std::sqrt(length_unit_km * length_unit_km * length_unit_km / mu_km3_s2);
  return m;
}

DynamicsModel DynamicsModel::cr3bp(double mass_ratio, double length_unit_km, double time_unit_s) {
  if (!(mass_ratio > 0.0 && mass_ratio < 0.5)) {
    throw Error(ErrorCode::invalid_argument, "mass ratio must lie in (0, 0.5)");
  }
  DynamicsModel m;
  m.kind = Kind::cr3bp;
  m.mu = mass_ratio;
  m.length_unit_km = length_unit_km;
  m.time_unit_s = time_unit_s;
  return m;
}

DynamicsModel DynamicsModel::free_space() { return DynamicsModel{}; }

NodeGrid NodeGrid::uniform(double t0, double tf, int nodes) {
  if (nodes < 2 || !(tf > t0)) {
    throw Error(ErrorCode::invalid_argument, "grid needs at least two increasing epochs");
  }
  NodeGrid g;
  g.epochs.resize(nodes);
  for (int k = 0; k < nodes; ++k) g.epochs[k] = t0 + (tf - t0) * k / (nodes - 1);
  g.epochs.back() = tf;
  return g;
}

ImpulsivePolicy ImpulsivePolicy::zeros(int segments) {
  ImpulsivePolicy p;
  p.feedforward.assign(segments, Vec3::Zero());
  p.gain.assign(segments, Mat36::Zero());
  return p;
}

Vec6 acceleration_field(const DynamicsModel& model, const Vec6& x) {
  std::array<double, 6> s;
  std::array<double, 6> ds;
  for (int i = 0; i < 6; ++i) s[i] = x(i);
  Field<6>{&model}(s, ds, 0.0);
  return Eigen::Map<const Vec6>(ds.data());
}

Mat6 field_jacobian(const DynamicsModel& model, const Vec6& x) {
  double a[3];
  double g[9];
  gravity(model, x.data(), a, g);
  Mat6 j = Mat6::Zero();
  j.block<3, 3>(0, 3).setIdentity();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) j(3 + i, k) = g[3 * i + k];
  if (model.kind == DynamicsModel::Kind::cr3bp) {
    j(3, 4) = 2.0;
    j(4, 3) = -2.0;
  }
  return j;
}

Vec6 propagate(const DynamicsModel& model, const Vec6& x, double dt, const IntegratorOptions& opt) {
  if (!x.allFinite()) throw Error(ErrorCode::propagation, "non-finite initial state", "last_good_t=0");
  std::array<double, 6> s;
  for (int i = 0; i < 6; ++i) s[i] = x(i);
  integrate(model, s, dt, opt);
  return Eigen::Map<const Vec6>(s.data());
}

StateAndStm propagate_with_stm(const DynamicsModel& model, const Vec6& x, double dt,
                               const IntegratorOptions& opt) {
  if (!x.allFinite()) throw Error(ErrorCode::propagation, "non-finite initial state", "last_good_t=0");
  std::array<double, 42> s{};
  for (int i = 0; i < 6; ++i) {
    s[i] = x(i);
    s[6 + 7 * i] = 1.0;
  }
  integrate(model, s, dt, opt);
  StateAndStm out;
  out.state = Eigen::Map<const Vec6>(s.data());
  out.stm = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(s.data() + 6);
  return out;
}

Vec6 apply_impulse(const Vec6& x, const Vec3& u) {
  Vec6 y = x;
  y.tail<3>() += u;
  return y;
}

SegmentLinearization linearize_segment(const DynamicsModel& model, const Vec6& x_ref,
                                       const Vec3& u_ref, double t0, double t1,
                                       const IntegratorOptions& opt) {
  const StateAndStm p = propagate_with_stm(model, apply_impulse(x_ref, u_ref), t1 - t0, opt);
  SegmentLinearization lin;
  lin.A = p.stm;
  lin.B = p.stm.rightCols<3>();
  lin.endpoint = p.state;
  lin.c = p.state - lin.A * x_ref - lin.B * u_ref;
  return lin;
}

KeplerElements cartesian_to_kepler(const Vec6& x, double mu) {
  const Vec3 r = x.head<3>();
  const Vec3 v = x.tail<3>();
  const double rn = r.norm();
  const Vec3 h = r.cross(v);
  const double hn = h.norm();
  if (!(rn > 0.0) || !(hn > 0.0)) {
    throw Error(ErrorCode::unsupported_elements, "degenerate state (zero radius or angular momentum)");
  }
  const double energy = 0.5 * v.squaredNorm() - mu / rn;
  if (!(energy < 0.0)) {
    throw Error(ErrorCode::unsupported_elements, "orbit is not elliptic");
  }
  KeplerElements el{};
  el.a = -mu / (2.0 * energy);
  const Vec3 evec = v.cross(h) / mu - r / rn;
  el.e = evec.norm();
  el.i = std::acos(std::clamp(h.z() / hn, -1.0, 1.0));
  const double sin_i = std::sin(el.i);
  if (sin_i < 1e-10) {
    throw Error(ErrorCode::unsupported_elements, "equatorial orbit: node line undefined");
  }
  const Vec3 node = Vec3::UnitZ().cross(h);
  el.raan = wrap_2pi(std::atan2(node.y(), node.x()));
  const Vec3 nhat = node.normalized();
  const Vec3 q = h.cross(nhat) / hn;  // in-plane, 90 deg ahead of the node
  const double u = wrap_2pi(std::atan2(r.dot(q), r.dot(nhat)));
  if (el.e < 1e-11) {
    el.e = 0.0;
    el.argp = 0.0;
    el.true_anomaly = u;
  } else {
    el.argp = wrap_2pi(std::atan2(evec.dot(q), evec.dot(nhat)));
    el.true_anomaly = wrap_2pi(u - el.argp);
  }
  return el;
}

Vec6 kepler_to_cartesian(const KeplerElements& el, double mu) {
  if (!(el.a > 0.0) || !(el.e >= 0.0 && el.e < 1.0)) {
    throw Error(ErrorCode::unsupported_elements, "elements must describe an elliptic orbit");
  }
  const double p = el.a * (1.0 - el.e * el.e);
  const double nu = el.true_anomaly;
  const double rn = p / (1.0 + el.e * std::cos(nu));
  const Vec3 r_pf(rn * std::cos(nu), rn * std::sin(nu), 0.0);
  const double k = std::sqrt(mu / p);
  const Vec3 v_pf(-k * std::sin(nu), k * (el.e + std::cos(nu)), 0.0);
  const Eigen::Matrix3d rot = (Eigen::AngleAxisd(el.raan, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(el.i, Vec3::UnitX()) *
                               Eigen::AngleAxisd(el.argp, Vec3::UnitZ()))
                                  .toRotationMatrix();
  Vec6 x;
  x.head<3>() = rot * r_pf;
  x.tail<3>() = rot * v_pf;
  return x;
}

Vec6 kepler_interpolate(const Vec6& x0, const Vec6& x1, double mu, double time_of_flight,
                        double fraction) {
  const KeplerElements e0 = cartesian_to_kepler(x0, mu);
  const KeplerElements e1 = cartesian_to_kepler(x1, mu);
  const double s = fraction;
  auto lerp = [s](double a, double b) { return a + s * (b - a); };
  auto lerp_angle = [s](double a, double b) { return a + s * wrap_pi(b - a); };

  KeplerElements el{};
  el.a = lerp(e0.a, e1.a);
  el.e = lerp(e0.e, e1.e);
  el.i = lerp(e0.i, e1.i);
  el.raan = lerp_angle(e0.raan, e1.raan);
  el.argp = lerp_angle(e0.argp, e1.argp);

  const double u0 = e0.argp + e0.true_anomaly;
  const double u1 = e1.argp + e1.true_anomaly;
  const double a_avg = 0.5 * (e0.a + e1.a);
  const double swept = std::sqrt(mu / (a_avg * a_avg * a_avg)) * time_of_flight;
  const double base = wrap_2pi(u1 - u0);
  const double turns = std::round((swept - base) / (2.0 * kPi));
  const double u = u0 + s * (base + 2.0 * kPi * turns);
  el.true_anomaly = u - el.argp;
  return kepler_to_cartesian(el, mu);
}

double jacobi_constant(double mass_ratio, const Vec6& x) {
  const double m = mass_ratio;
  const double r1 = std::sqrt((x(0) + m) * (x(0) + m) + x(1) * x(1) + x(2) * x(2));
  const double r2 = std::sqrt((x(0) - 1.0 + m) * (x(0) - 1.0 + m) + x(1) * x(1) + x(2) * x(2));
  const double u = 0.5 * (x(0) * x(0) + x(1) * x(1)) + (1.0 - m) / r1 + m / r2;
  return 2.0 * u - x.tail<3>().squaredNorm();
}

PeriodicOrbit correct_halo(const DynamicsModel& model, const Vec6& guess, double period_guess,
                           const IntegratorOptions& opt) {
  if (model.kind != DynamicsModel::Kind::cr3bp) {
    throw Error(ErrorCode::invalid_argument, "halo correction needs CR3BP dynamics");
  }
  Vec6 x0 = guess;
  x0(1) = 0.0;
  x0(3) = 0.0;
  x0(5) = 0.0;
  double half = 0.5 * period_guess;
  for (int it = 0; it < 50; ++it) {
    const StateAndStm p = propagate_with_stm(model, x0, half, opt);
    const Vec6 f = acceleration_field(model, p.state);
    const Eigen::Vector3d res(p.state(1), p.state(3), p.state(5));
    if (res.lpNorm<Eigen::Infinity>() < 1e-13) break;
    Eigen::Matrix3d j;
    const int rows[3] = {1, 3, 5};
    for (int r = 0; r < 3; ++r) {
      j(r, 0) = p.stm(rows[r], 2);
      j(r, 1) = p.stm(rows[r], 4);
      j(r, 2) = f(rows[r]);
    }
    const Eigen::Vector3d d = j.fullPivLu().solve(res);
    x0(2) -= d(0);
    x0(4) -= d(1);
    half -= d(2);
  }
  PeriodicOrbit out;
  out.state = x0;
  out.period = 2.0 * half;
  out.residual = (propagate(model, x0, out.period, opt) - x0).norm();
  if (!(out.residual <= 1e-10)) {
    std::ostringstream os;
    os << "residual=" << out.residual;
    throw Error(ErrorCode::periodicity, "halo differential correction did not close the orbit", os.str());
  }
  return out;
}

double time_constant(const DynamicsModel& model, const Vec6& state, double period,
                     const IntegratorOptions& opt) {
  if (model.kind != DynamicsModel::Kind::cr3bp) {
    throw Error(ErrorCode::invalid_argument, "time constant is defined for CR3BP orbits");
  }
  const StateAndStm p = propagate_with_stm(model, state, period, opt);
  const double residual = (p.state - state).norm();
  if (!(residual <= 1e-8)) {
    throw Error(ErrorCode::periodicity, "state is not periodic with the given period",
                "residual=" + std::to_string(residual));
  }
  Eigen::EigenSolver<Mat6> es(p.stm, false);
  std::complex<double> lmax = es.eigenvalues()(0);
  for (int i = 1; i < 6; ++i)
    if (std::abs(es.eigenvalues()(i)) > std::abs(lmax)) lmax = es.eigenvalues()(i);
  const double re = std::log(std::abs(lmax));  // Re[Ln z] = ln|z|
  // eigenvalues on the unit circle carry integration noise of this order
  if (re <= 1e-9) return kStableMarker;
  return 1.0 / (re * period);
}

}  // namespace cutsteer::dyn
