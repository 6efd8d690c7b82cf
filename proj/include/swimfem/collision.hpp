#pragma once

#include "swimfem/mesh.hpp"

#include <vector>

namespace swimfem {

/// Distance from a seed set over the mesh vertices, computed only up to
/// d_max. Vertices outside the band hold exactly d_max.
struct NarrowBandField {
  std::vector<double> value;
  std::vector<int> accepted;  // vertices in acceptance order
  double d_max = 0.0;
};

/// Fast marching on the triangulation from the given seed vertices (value 0).
NarrowBandField fast_march(const Mesh& mesh, const std::vector<int>& seeds, double d_max);

struct CollisionParams {
  double w_col = 0.1;
  double epsilon = 1.0;       // body-body stiffness
  double epsilon_wall = 1.0;  // body-wall stiffness
  double d_max = 0.2;

  void validate() const;
};

enum class ContactKind { BodyBody, BodyWall };

struct ContactPair {
  ContactKind kind = ContactKind::BodyBody;
  int body_i = 0;
  int partner = 0;  // body j, or the wall tag index
  double d = 0.0;
  Vec2 X_i = Vec2::Zero();
  Vec2 X_j = Vec2::Zero();  // contact point on body j or on the wall
  int vertex_i = -1;
  int vertex_j = -1;
  bool active = false;
};

/// Per body and per wall distance fields used for contact detection.
struct DistanceFields {
  std::vector<NarrowBandField> body;
  std::vector<int> wall_tags;
  std::vector<NarrowBandField> wall;
};

/// Walls are the DirichletWall tags of the mesh; inflow and outflow
/// boundaries never collide.
DistanceFields compute_distance_fields(const Mesh& mesh, int num_bodies, double d_max);

/// Every unordered body pair and every body-wall pair.
std::vector<ContactPair> find_contacts(const Mesh& mesh, const DistanceFields& fields, const CollisionParams& params);
std::vector<ContactPair> find_contacts(const Mesh& mesh, int num_bodies, const CollisionParams& params);

/// Activation ((w - d) / w)^2 inside the collision zone, 0 outside.
double activation(double d, double w_col);

/// Force on body i of the pair.
Vec2 repulsion_force(const ContactPair& pair, const CollisionParams& params);

/// T = -(X - x_cm) x F.
double repulsion_torque(const Vec2& x_cm, const Vec2& contact_point, const Vec2& force);

struct ExternalLoad {
  Vec2 force = Vec2::Zero();
  double torque = 0.0;  // sign as repulsion_torque
};

/// Sum over the active pairs involving `body`; each pair's torque uses the
/// body's own contact point.
ExternalLoad total_external(int body, const Vec2& x_cm, const std::vector<ContactPair>& contacts,
                            const CollisionParams& params);

}  // namespace swimfem
