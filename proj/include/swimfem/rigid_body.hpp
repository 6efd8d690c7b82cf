#pragma once

#include "swimfem/fem.hpp"
#include "swimfem/gaits.hpp"

#include <memory>
#include <vector>

namespace swimfem {

/// Rotation matrix [cos, sin; -sin, cos]. Positive angles turn clockwise.
Mat2 rotation_matrix(double theta);

/// Counter-clockwise orientation used for body states: rotation_matrix(-theta).
inline Mat2 orientation(double theta) { return rotation_matrix(-theta); }

struct MassProperties {
  double mass = 0.0;
  double inertia = 0.0;  // about the centroid
  Vec2 centroid = Vec2::Zero();
  double area = 0.0;
};

/// Exact polygon integrals for one or more disjoint simple polygons.
MassProperties compute_mass_inertia(const std::vector<std::vector<Vec2>>& polygons, double density);
MassProperties compute_mass_inertia(const std::vector<Vec2>& polygon, double density);

/// Rigid swimmer. `x_cm` is the body-frame origin in the laboratory frame,
/// theta the counter-clockwise orientation and omega the counter-clockwise
/// angular velocity. Boundary vertices are tracked by mesh index together
/// with their material body-frame coordinates and gait deformation.
struct Body {
  int id = 0;
  double density = 0.0;
  double mass = 0.0;
  double inertia = 0.0;
  Vec2 x_cm = Vec2::Zero();
  Vec2 X_cm = Vec2::Zero();  // reference position of the origin
  double theta = 0.0;
  Vec2 l = Vec2::Zero();
  double omega = 0.0;
  std::shared_ptr<const Gait> gait = std::make_shared<PassiveGait>();
  std::string tag;  // boundary tag of the body loops

  std::vector<int> vertices;        // mesh vertex indices on the boundary
  std::vector<Vec2> material;       // body-frame reference coordinates
  std::vector<Vec2> deformation;    // accumulated gait deformation D

  /// Laboratory position of boundary point k for the given pose and deformation.
  Vec2 boundary_point(std::size_t k, const Vec2& center, double angle, const Vec2& D) const {
    return center + orientation(angle) * (material[k] + D);
  }
};

/// Builds the body-frame boundary description from the current mesh: every
/// vertex of the body's loops gets its material coordinates relative to
/// (x_cm, theta) and zero deformation.
void attach_boundary(Body& body, const Mesh& mesh);

/// Rigid constraint: full = P reduced + lift over the unknowns
/// (u, p, l_0, omega_0, l_1, omega_1, ...).
struct Projection {
  SparseMatrix P;
  int num_bodies = 0;
  int body_offset = 0;  // index of the first body unknown in the full vector
  std::vector<int> body_column;  // first reduced column of each body
  bool pinned_pressure = false;
};

/// Gamma velocity dofs at x of body i satisfy u = l_i + omega_i (x - x_cm,i)^perp;
/// interior and Neumann dofs and pressure are free; outer Dirichlet dofs are fixed.
Projection build_projection(const DofMap& dofs, const std::vector<Body>& bodies, bool pressure_gauge = true);

/// Per body collision load with torque in the counter-clockwise convention.
struct BodyLoad {
  Vec2 force = Vec2::Zero();
  double torque = 0.0;
};

struct CoupledInput {
  double dt = 0.0;
  /// Boundary data on velocity dofs: outer Dirichlet values and u_d on Gamma dofs.
  const Vector* boundary_values = nullptr;
  std::vector<BodyLoad> loads;
  /// Velocities at t_n for the momentum terms.
  std::vector<Vec2> l_prev;
  std::vector<double> omega_prev;
};

/// Reduced coupled fluid-body system. Body rows carry mass_block = m/dt and
/// I/dt (omitted when dt = 0 or the body has no mass) plus the collision
/// load and previous momentum on the right-hand side.
LinearSystem assemble_coupled(const DofMap& dofs, const SystemBlocks& blocks, const Projection& projection,
                              const std::vector<Body>& bodies, const CoupledInput& input);

struct CoupledSolution {
  Vector u;
  Vector p;
  std::vector<Vec2> l;
  std::vector<double> omega;
  SolveReport report;
};

CoupledSolution solve_coupled(const DofMap& dofs, const LinearSystem& system, int num_bodies);

/// New pose from the trapezoidal rule on the velocities at t_n (stored in
/// the bodies) and the solved ones; theta is wrapped to [-pi, pi].
void update_bodies(std::vector<Body>& bodies, const std::vector<Vec2>& l_new, const std::vector<double>& omega_new,
                   double dt);

}  // namespace swimfem
