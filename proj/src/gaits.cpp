#include "swimfem/gaits.hpp"

#include "swimfem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace swimfem {

namespace {

double ramp(const SpermWaveParams& p, double t) {
  if (p.ramp_time <= 0.0) return 1.0;
  return std::clamp(t / p.ramp_time, 0.0, 1.0);
}

}  // namespace

Vec2 sperm_velocity(const SpermWaveParams& p, double t, double X) {
  const double amp = p.amplitude * ramp(p, t);
  const double s = amp * std::max(X - p.junction, 0.0) / p.length;
  const double phase = t / p.period - X / p.wavelength;
  const double ux = 2.0 * kPi / (4.0 * p.period) * s * s * (2.0 * kPi / p.wavelength) * std::cos(4.0 * kPi * phase);
  const double uy = 2.0 * kPi / p.period * s * std::cos(2.0 * kPi * phase);
  return {ux, uy};
}

double sperm_wave_shape(const SpermWaveParams& p, double t, double X) {
  return p.amplitude * std::max(X - p.junction, 0.0) / p.length * std::sin(2.0 * kPi * (t / p.period - X / p.wavelength));
}

SpermWaveGait::SpermWaveGait(SpermWaveParams p) : p_(p) {
  if (!(p_.amplitude > 0.0 && p_.wavelength > 0.0 && p_.period > 0.0 && p_.length > 0.0))
    throw ValidationError("sperm wave needs positive amplitude, wavelength, period and length");
  if (p_.ramp_time < 0.0) throw ValidationError("sperm wave ramp_time must be non-negative");
}

Vec2 SpermWaveGait::velocity(double t, const Vec2& X) const {
  return sperm_velocity(p_, t, X.x() + p_.frame_offset.x());
}

Vec2 squirmer_velocity(const Vec2& x, const Vec2& x_cm, double B1, double beta, const Vec2& e) {
  const Vec2 d = x - x_cm;
  const double n = d.norm();
  if (n == 0.0) throw ValidationError("squirmer velocity is undefined at the center of mass");
  const Vec2 r = d / n;
  const double er = e.dot(r);
  return B1 * (1.0 + beta * er) * (er * r - e);
}

SquirmerGait::SquirmerGait(double B1, double beta, Vec2 heading) : B1_(B1), beta_(beta), e_(heading) {
  if (std::abs(e_.norm() - 1.0) > 1e-12) throw ValidationError("squirmer heading must be a unit vector");
}

Vec2 SquirmerGait::velocity(double, const Vec2& X) const { return squirmer_velocity(X, Vec2::Zero(), B1_, beta_, e_); }

namespace {

/// Forward schedule; `left_limit` picks the phase ending at t on boundaries.
ThreeSphereState forward_schedule(double t, const ThreeSphereParams& p, bool left_limit) {
  const double tau = p.phase_time;
  const double cycle = 4.0 * tau;
  double s = std::fmod(t, cycle);
  if (s < 0.0) s += cycle;
  int phase = static_cast<int>(std::floor(s / tau));
  if (left_limit && s == phase * tau) {
    phase -= 1;
    if (phase < 0) {
      phase = 3;
      s = cycle;
    }
  }
  phase = std::clamp(phase, 0, 3);
  const double f = std::clamp((s - phase * tau) / tau, 0.0, 1.0);
  const double l0 = p.rest_length, a = p.amplitude, rate = a / tau;
  ThreeSphereState st;
  switch (phase) {
    case 0:
      st = {l0 - a * f, l0, -rate, 0.0};
      break;
    case 1:
      st = {l0 - a, l0 - a * f, 0.0, -rate};
      break;
    case 2:
      st = {l0 - a + a * f, l0 - a, rate, 0.0};
      break;
    default:
      st = {l0, l0 - a + a * f, 0.0, rate};
      break;
  }
  return st;
}

}  // namespace

ThreeSphereState three_sphere_schedule(double t, const ThreeSphereParams& p) {
  if (!p.reversed) return forward_schedule(t, p, false);
  const double cycle = 4.0 * p.phase_time;
  double s = std::fmod(t, cycle);
  if (s < 0.0) s += cycle;
  // Lengths follow L(4 tau - t); the rate just after t is minus the forward
  // rate just before 4 tau - t.
  ThreeSphereState st = forward_schedule(cycle - s, p, true);
  st.left_rate = -st.left_rate;
  st.right_rate = -st.right_rate;
  return st;
}

ThreeSphereGait::ThreeSphereGait(ThreeSphereParams p) : p_(p) {
  if (!(p_.amplitude > 0.0 && p_.amplitude < p_.rest_length))
    throw ValidationError("three-sphere amplitude must satisfy 0 < a < l0");
  if (!(p_.phase_time > 0.0)) throw ValidationError("three-sphere phase time must be positive");
}

int ThreeSphereGait::sphere_of(const Vec2& X) const {
  if (X.x() < -0.5 * p_.rest_length) return -1;
  if (X.x() > 0.5 * p_.rest_length) return 1;
  return 0;
}

Vec2 ThreeSphereGait::velocity(double t, const Vec2& X) const {
  const auto st = three_sphere_schedule(t, p_);
  switch (sphere_of(X)) {
    case -1: return {-st.left_rate, 0.0};
    case 1: return {st.right_rate, 0.0};
    default: return Vec2::Zero();
  }
}

Vec2 ThreeSphereGait::increment(double t0, double t1, const Vec2& X) const {
  const auto a = three_sphere_schedule(t0, p_);
  const auto b = three_sphere_schedule(t1, p_);
  switch (sphere_of(X)) {
    case -1: return {-(b.left_length - a.left_length), 0.0};
    case 1: return {b.right_length - a.right_length, 0.0};
    default: return Vec2::Zero();
  }
}

bool ThreeSphereGait::rate_jump(double t) const {
  const double k = t / p_.phase_time;
  return std::abs(k - std::round(k)) <= 1e-9;
}

}  // namespace swimfem
