#include <cmath>

#include "cutsteer/astro_dynamics.hpp"
#include "cutsteer/error.hpp"
#include "doctest.h"

using namespace cutsteer;
using namespace cutsteer::dyn;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMuEarth = 398600.0;
constexpr double kMoonRatio = 0.01215058560962404;

Mat6 symplectic_form() {
  Mat6 j = Mat6::Zero();
  j.block<3, 3>(0, 3).setIdentity();
  j.block<3, 3>(3, 0) = -Eigen::Matrix3d::Identity();
  return j;
}

Vec6 halo_guess() {
  Vec6 x;
  x << 1.16, 0, -0.1247, 0, -0.2087, 0;
  return x;
}

}  // namespace

TEST_CASE("two-body circular orbit returns after one period") {
  const auto m = DynamicsModel::two_body(kMuEarth, 5000.0);
  const double r = 8000.0 / m.length_unit_km;
  Vec6 x;
  x << r, 0, 0, 0, std::sqrt(1.0 / r), 0;
  CHECK(x(4) * m.velocity_unit_km_s() == doctest::Approx(7.05867).epsilon(2e-6));
  const double period = 2 * kPi * std::sqrt(r * r * r);
  const Vec6 y = propagate(m, x, period);
  CHECK((y - x).head<3>().norm() * m.length_unit_km <= 1e-8);
}

TEST_CASE("two-body invariants and STM structure") {
  const auto m = DynamicsModel::two_body(kMuEarth, 5000.0);
  Vec6 x;
  x << 1.6, 0.1, 0.05, 0.02, 0.7, 0.38;
  auto energy = [](const Vec6& s) { return 0.5 * s.tail<3>().squaredNorm() - 1.0 / s.head<3>().norm(); };
  const double period = 2 * kPi * std::pow(-1.0 / (2 * energy(x)), 1.5);
  const StateAndStm p = propagate_with_stm(m, x, period);
  CHECK(std::abs(energy(p.state) / energy(x) - 1.0) <= 1e-10);
  const Vec3 h0 = x.head<3>().cross(x.tail<3>());
  const Vec3 h1 = p.state.head<3>().cross(p.state.tail<3>());
  CHECK((h1 - h0).norm() / h0.norm() <= 1e-10);

  const StateAndStm seg = propagate_with_stm(m, x, 0.7);
  const Mat6 j = symplectic_form();
  CHECK((seg.stm.transpose() * j * seg.stm - j).cwiseAbs().maxCoeff() <= 1e-8);

  const StateAndStm zero = propagate_with_stm(m, x, 0.0);
  CHECK(zero.state == x);
  CHECK(zero.stm == Mat6::Identity());
}

TEST_CASE("impulses") {
  Vec6 x;
  x << 1, 2, 3, 4, 5, 6;
  const Vec3 u(0.3, -0.2, 0.1);
  CHECK(apply_impulse(x, Vec3::Zero()) == x);
  CHECK((apply_impulse(apply_impulse(x, u), -u) - x).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((apply_impulse(x, u) - x).norm() == doctest::Approx(u.norm()));
  CHECK(apply_impulse(x, u).head<3>() == x.head<3>());
}

TEST_CASE("segment linearization agrees with finite differences") {
  for (const auto& m : {DynamicsModel::two_body(kMuEarth, 5000.0), DynamicsModel::cr3bp(kMoonRatio, 384400.0, 375190.25852)}) {
    Vec6 x;
    Vec3 u;
    double dt;
    if (m.kind == DynamicsModel::Kind::two_body) {
      x << 1.6, 0.0, 0.0, 0.0, 0.68, 0.39;
      u << 0.01, -0.02, 0.005;
      dt = 0.8;
    } else {
      x = halo_guess();
      u << 1e-3, -2e-3, 5e-4;
      dt = 0.36;
    }
    const SegmentLinearization lin = linearize_segment(m, x, u, 0.0, dt);
    CHECK((lin.A * x + lin.B * u + lin.c - lin.endpoint).cwiseAbs().maxCoeff() <= 1e-10);

    const double h = 1e-7;
    Mat6 fdA;
    for (int c = 0; c < 6; ++c) {
      Vec6 xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      fdA.col(c) = (propagate(m, apply_impulse(xp, u), dt) - propagate(m, apply_impulse(xm, u), dt)) / (2 * h);
    }
    CHECK((lin.A - fdA).norm() / fdA.norm() <= 1e-5);
    Mat63 fdB;
    for (int c = 0; c < 3; ++c) {
      Vec3 up = u, um = u;
      up(c) += h;
      um(c) -= h;
      fdB.col(c) = (propagate(m, apply_impulse(x, up), dt) - propagate(m, apply_impulse(x, um), dt)) / (2 * h);
    }
    CHECK((lin.B - fdB).norm() / fdB.norm() <= 1e-5);
  }
}

TEST_CASE("Kepler conversion round trips") {
  const double mu = kMuEarth;
  const double v9 = std::sqrt(mu / 9000.0);
  Vec6 target;
  target << 9000, 0, 0, 0, v9 * std::cos(kPi / 3), v9 * std::sin(kPi / 3);
  CHECK(target(4) == doctest::Approx(3.327).epsilon(2e-4));
  CHECK(target(5) == doctest::Approx(5.763).epsilon(2e-4));
  const Vec6 back = kepler_to_cartesian(cartesian_to_kepler(target, mu), mu);
  CHECK((back - target).norm() / target.norm() <= 1e-9);

  KeplerElements el{8000.0, 0.0, kPi / 6, 0.0, 0.0, 0.0};
  const Vec6 pre = kepler_to_cartesian(el, mu);
  CHECK(std::round(pre(4) * 1e4) / 1e4 == doctest::Approx(6.1130));
  CHECK(std::round(pre(5) * 1e4) / 1e4 == doctest::Approx(3.5293));

  Vec6 ecc;
  ecc << 7000, 1200, -300, -0.8, 7.1, 2.2;
  const Vec6 ecc_back = kepler_to_cartesian(cartesian_to_kepler(ecc, mu), mu);
  CHECK((ecc_back - ecc).norm() / ecc.norm() <= 1e-9);

  Vec6 equatorial;
  equatorial << 8000, 0, 0, 0, std::sqrt(mu / 8000), 0;
  try {
    cartesian_to_kepler(equatorial, mu);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_elements);
  }
  Vec6 hyper = target;
  hyper.tail<3>() *= 2.0;
  CHECK_THROWS_AS(cartesian_to_kepler(hyper, mu), Error);
}

TEST_CASE("Kepler interpolation endpoints and sweep") {
  const double mu = 1.0;
  KeplerElements a{1.6, 0.0, kPi / 6, 0.0, 0.0, 0.0};
  KeplerElements b{1.8, 0.0, kPi / 3, 0.0, 0.0, 0.0};
  const Vec6 x0 = kepler_to_cartesian(a, mu);
  const Vec6 x1 = kepler_to_cartesian(b, mu);
  const double tof = 2 * kPi * std::pow(1.6, 1.5);
  CHECK((kepler_interpolate(x0, x1, mu, tof, 0.0) - x0).norm() <= 1e-12);
  CHECK((kepler_interpolate(x0, x1, mu, tof, 1.0) - x1).norm() <= 1e-12);
  // one revolution of flight: the midpoint sits half way around
  const Vec6 mid = kepler_interpolate(x0, x1, mu, tof, 0.5);
  CHECK(mid(0) < 0.0);
}

TEST_CASE("CR3BP halo closure, Jacobi constant and time constant") {
  const auto m = DynamicsModel::cr3bp(kMoonRatio, 384400.0, 375190.25852);
  const PeriodicOrbit orbit = correct_halo(m, halo_guess(), 3.2690);
  CHECK(orbit.residual <= 1e-10);
  CHECK(orbit.period * 2 == doctest::Approx(6.5379).epsilon(1e-4));
  CHECK(orbit.state(2) == doctest::Approx(-0.1247).epsilon(1e-3));
  CHECK(orbit.state(4) == doctest::Approx(-0.2087).epsilon(1e-3));

  const double c0 = jacobi_constant(m.mu, orbit.state);
  const Vec6 end = propagate(m, orbit.state, orbit.period);
  CHECK(std::abs(jacobi_constant(m.mu, end) - c0) <= 1e-10);

  const StateAndStm seg = propagate_with_stm(m, orbit.state, 0.36);
  // rotating frame: the STM preserves the form built from the Coriolis-shifted momenta
  Mat6 t = Mat6::Identity();
  t(3, 1) = -1.0;
  t(4, 0) = 1.0;
  const Mat6 tinv = t.inverse();
  const Mat6 phi = t * seg.stm * tinv;
  const Mat6 j = symplectic_form();
  CHECK((phi.transpose() * j * phi - j).cwiseAbs().maxCoeff() <= 1e-8);

  const double tau = time_constant(m, orbit.state, orbit.period);
  CHECK(tau < 1.0);
  CHECK(tau > 0.0);
  CHECK(tau == doctest::Approx(0.0519497829).epsilon(1e-6));

  Vec6 off = orbit.state;
  off(0) += 1e-3;
  CHECK_THROWS_AS(time_constant(m, off, orbit.period), Error);

  // L4 is linearly stable for this mass ratio
  Vec6 l4;
  l4 << 0.5 - m.mu, std::sqrt(3.0) / 2.0, 0, 0, 0, 0;
  CHECK(time_constant(m, l4, 3.0) == kStableMarker);
}

TEST_CASE("propagation errors carry context") {
  const auto m = DynamicsModel::two_body(kMuEarth, 5000.0);
  Vec6 bad;
  bad << std::nan(""), 0, 0, 0, 1, 0;
  CHECK_THROWS_AS(propagate(m, bad, 1.0), Error);
  Vec6 plunge;
  plunge << 1.0, 0, 0, 0, 0, 0;
  try {
    IntegratorOptions opt;
    opt.max_steps = 20000;
    propagate(m, plunge, 10.0, opt);
    FAIL("expected propagation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::propagation);
    CHECK(!e.context().empty());
  }
}
