#pragma once

#include "swimfem/geometry.hpp"

#include <memory>
#include <string>

namespace swimfem {

/// Prescribed deformation velocity u_d of a swimmer, expressed in the body
/// frame as a function of the material (reference) body-frame point.
class Gait {
 public:
  virtual ~Gait() = default;
  virtual std::string kind() const = 0;
  /// False for gaits that only prescribe a surface slip and never move the
  /// boundary relative to the body frame.
  virtual bool deforms_boundary() const { return true; }
  virtual Vec2 velocity(double t, const Vec2& X) const = 0;
  /// Deformation gained over [t0, t1] at material point X. Midpoint rule
  /// unless the gait integrates exactly.
  virtual Vec2 increment(double t0, double t1, const Vec2& X) const {
    return (t1 - t0) * velocity(0.5 * (t0 + t1), X);
  }
  /// True when the deformation rate jumps at t.
  virtual bool rate_jump(double /*t*/) const { return false; }
};

class PassiveGait final : public Gait {
 public:
  std::string kind() const override { return "passive"; }
  bool deforms_boundary() const override { return false; }
  Vec2 velocity(double, const Vec2&) const override { return Vec2::Zero(); }
  Vec2 increment(double, double, const Vec2&) const override { return Vec2::Zero(); }
};

struct SpermWaveParams {
  double amplitude = 4.0;   // A_max, reached at the distal end
  double wavelength = 1.0;  // lambda
  double period = 1.0;      // T
  double length = 1.0;      // flagellum length L
  double junction = 0.0;    // head-flagellum abscissa X_j
  double ramp_time = 0.0;   // linear amplitude ramp; 0 disables it
  /// Added to body-frame coordinates to get the abscissa X used by the wave.
  Vec2 frame_offset = Vec2::Zero();
};

/// Travelling wave of linearly growing amplitude along the flagellum.
/// Material points with X < X_j (the head) do not move.
Vec2 sperm_velocity(const SpermWaveParams& p, double t, double X);
/// Lateral wave shape Y(t, X) whose time derivative is the y velocity.
double sperm_wave_shape(const SpermWaveParams& p, double t, double X);

class SpermWaveGait final : public Gait {
 public:
  explicit SpermWaveGait(SpermWaveParams p);
  std::string kind() const override { return "sperm_wave"; }
  Vec2 velocity(double t, const Vec2& X) const override;
  const SpermWaveParams& params() const { return p_; }

 private:
  SpermWaveParams p_;
};

/// Squirmer slip u_d = B1 [1 + beta (e.r)] [(e.r) r - e], r = (x - x_cm)/|x - x_cm|.
Vec2 squirmer_velocity(const Vec2& x, const Vec2& x_cm, double B1, double beta, const Vec2& e);

class SquirmerGait final : public Gait {
 public:
  SquirmerGait(double B1, double beta, Vec2 heading);
  std::string kind() const override { return "squirmer"; }
  bool deforms_boundary() const override { return false; }
  Vec2 velocity(double t, const Vec2& X) const override;
  double B1() const { return B1_; }
  double beta() const { return beta_; }
  const Vec2& heading() const { return e_; }

 private:
  double B1_, beta_;
  Vec2 e_;
};

struct ThreeSphereParams {
  double rest_length = 1.0;  // l0, center-to-center rod length
  double amplitude = 0.2;    // a, stroke amplitude
  double phase_time = 1.0;   // tau_s
  bool reversed = false;     // run the cycle backwards (phases 4, 3, 2, 1)
};

struct ThreeSphereState {
  double left_length = 0.0;
  double right_length = 0.0;
  double left_rate = 0.0;   // d/dt of the left rod length
  double right_rate = 0.0;
};

/// Four-phase stroke: left rod shortens, right rod shortens, left rod
/// extends, right rod extends, each over tau_s at rate a / tau_s.
ThreeSphereState three_sphere_schedule(double t, const ThreeSphereParams& p);

/// Spheres sit on the body-frame x axis at -l0, 0 and +l0; the central sphere
/// is the body-frame origin.
class ThreeSphereGait final : public Gait {
 public:
  explicit ThreeSphereGait(ThreeSphereParams p);
  std::string kind() const override { return "three_sphere"; }
  Vec2 velocity(double t, const Vec2& X) const override;
  Vec2 increment(double t0, double t1, const Vec2& X) const override;
  bool rate_jump(double t) const override;
  const ThreeSphereParams& params() const { return p_; }

 private:
  /// -1 left sphere, 0 central, +1 right.
  int sphere_of(const Vec2& X) const;
  ThreeSphereParams p_;
};

}  // namespace swimfem
