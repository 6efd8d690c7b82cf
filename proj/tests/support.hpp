#pragma once

#include "swimfem/fem.hpp"
#include "swimfem/mesh.hpp"

#include <cmath>

namespace swimfem::testing {

/// Plane Poiseuille flow in [0, L] x [0, 1] with centerline speed U and
/// viscosity mu: u = 4 U y (1 - y), p = 8 mu U (L - x).
struct Poiseuille {
  double length = 4.0;
  double U = 1.0;
  double mu = 1.0;
  Vec2 u(const Vec2& x) const { return {4.0 * U * x.y() * (1.0 - x.y()), 0.0}; }
  double p(const Vec2& x) const { return 8.0 * mu * U * (length - x.x()); }
};

/// Parabolic inflow on the left, exact traction on the right, no-slip walls.
inline FluidParams poiseuille_params(const Mesh& mesh, const Poiseuille& flow) {
  FluidParams params;
  params.mu = flow.mu;
  params.dirichlet.resize(mesh.tags.size());
  params.traction.resize(mesh.tags.size());
  params.dirichlet[static_cast<std::size_t>(mesh.find_tag("left"))] = [flow](double, const Vec2& x) { return flow.u(x); };
  params.traction[static_cast<std::size_t>(mesh.find_tag("right"))] = [flow](double, const Vec2& x) {
    // sigma n with n = (1, 0): (-p + 2 mu du/dx, mu du/dy).
    return Vec2(-flow.p(x), flow.mu * 4.0 * flow.U * (1.0 - 2.0 * x.y()));
  };
  return params;
}

/// 4 x 1 channel with its right side as a Neumann outflow.
inline Mesh poiseuille_mesh(double h, double length = 4.0) {
  Mesh m = generate_channel(length, 1.0, {}, h);
  m.tags[static_cast<std::size_t>(m.find_tag("right"))].kind = BoundaryKind::NeumannOutflow;
  m.tags[static_cast<std::size_t>(m.find_tag("left"))].kind = BoundaryKind::DirichletInflow;
  return m;
}

/// Smooth divergence-free Stokes solution on the unit square.
inline ExactStokes smooth_stokes(double mu = 1.0) {
  ExactStokes e;
  e.mu = mu;
  e.u = [](const Vec2& x) {
    return Vec2(kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()), -kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()));
  };
  e.p = [](const Vec2& x) { return std::cos(kPi * x.x()) * std::cos(kPi * x.y()); };
  e.f = [mu, u = e.u](const Vec2& x) {
    const Vec2 grad_p(-kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()), -kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()));
    return Vec2(2.0 * kPi * kPi * mu * u(x) + grad_p);
  };
  return e;
}

}  // namespace swimfem::testing
