#include "swimfem/rigid_body.hpp"

#include "swimfem/errors.hpp"

#include <cmath>

namespace swimfem {

Mat2 rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat2 r;
  r << c, s, -s, c;
  return r;
}

MassProperties compute_mass_inertia(const std::vector<std::vector<Vec2>>& polygons, double density) {
  if (polygons.empty()) throw ValidationError("mass properties need at least one polygon");
  const Vec2 shift = polygons.front().front();
  double area = 0.0, j = 0.0;
  Vec2 first = Vec2::Zero();
  for (const auto& poly : polygons) {
    if (!polygon_is_simple(poly)) throw ValidationError("body polygon is self-intersecting");
    double a = 0.0, jj = 0.0;
    Vec2 f = Vec2::Zero();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p = poly[i] - shift;
      const Vec2 q = poly[(i + 1) % n] - shift;
      const double c = cross(p, q);
      a += c;
      f += (p + q) * c;
      jj += c * (p.dot(p) + p.dot(q) + q.dot(q));
    }
    // Clockwise loops count with their absolute area.
    const double sign = a < 0.0 ? -1.0 : 1.0;
    area += sign * a / 2.0;
    first += sign * f / 6.0;
    j += sign * jj / 12.0;
  }
  MassProperties m;
  m.area = area;
  const Vec2 c = first / area;
  m.centroid = c + shift;
  m.mass = density * area;
  m.inertia = density * (j - area * c.squaredNorm());
  return m;
}

MassProperties compute_mass_inertia(const std::vector<Vec2>& polygon, double density) {
  return compute_mass_inertia(std::vector<std::vector<Vec2>>{polygon}, density);
}

void attach_boundary(Body& body, const Mesh& mesh) {
  body.vertices = mesh.body_vertices(body.id);
  if (body.vertices.empty()) throw ValidationError("body " + std::to_string(body.id) + " has no boundary in the mesh");
  const Mat2 qt = orientation(body.theta).transpose();
  body.material.clear();
  for (int v : body.vertices) body.material.push_back(qt * (mesh.vertices[static_cast<std::size_t>(v)] - body.x_cm));
  body.deformation.assign(body.vertices.size(), Vec2::Zero());
}

Projection build_projection(const DofMap& dofs, const std::vector<Body>& bodies, bool pressure_gauge) {
  const int nu = dofs.velocity_dofs();
  const int np = dofs.pressure_dofs();
  const int nb = static_cast<int>(bodies.size());
  Projection pr;
  pr.num_bodies = nb;
  pr.body_offset = nu + np;
  pr.pinned_pressure = pressure_gauge && !dofs.has_neumann();

  int free = 0;
  for (int n = 0; n < dofs.num_nodes(); ++n) {
    const auto c = dofs.node_class[static_cast<std::size_t>(n)];
    if (c == DofClass::Interior || c == DofClass::OuterNeumann) free += 2;
  }
  pr.body_column.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) pr.body_column[static_cast<std::size_t>(b)] = free + 3 * b;
  int pcol = free + 3 * nb;

  std::vector<Eigen::Triplet<double>> t;
  int col = 0;
  for (int n = 0; n < dofs.num_nodes(); ++n) {
    const auto c = dofs.node_class[static_cast<std::size_t>(n)];
    if (c == DofClass::Interior || c == DofClass::OuterNeumann) {
      t.emplace_back(2 * n, col++, 1.0);
      t.emplace_back(2 * n + 1, col++, 1.0);
    } else if (c == DofClass::Swimmer) {
      const int b = dofs.node_body[static_cast<std::size_t>(n)];
      if (b < 0 || b >= nb) throw ValidationError("boundary dof of body " + std::to_string(b) + " has no owning body");
      const Vec2 r = dofs.node_coords[static_cast<std::size_t>(n)] - bodies[static_cast<std::size_t>(b)].x_cm;
      const int bc = pr.body_column[static_cast<std::size_t>(b)];
      t.emplace_back(2 * n, bc, 1.0);
      t.emplace_back(2 * n, bc + 2, -r.y());
      t.emplace_back(2 * n + 1, bc + 1, 1.0);
      t.emplace_back(2 * n + 1, bc + 2, r.x());
    }
  }
  for (int b = 0; b < nb; ++b)
    for (int k = 0; k < 3; ++k) t.emplace_back(pr.body_offset + 3 * b + k, pr.body_column[static_cast<std::size_t>(b)] + k, 1.0);
  for (int k = 0; k < np; ++k) {
    if (pr.pinned_pressure && k == 0) continue;
    t.emplace_back(nu + k, pcol++, 1.0);
  }
  pr.P.resize(nu + np + 3 * nb, pcol);
  pr.P.setFromTriplets(t.begin(), t.end());
  return pr;
}

LinearSystem assemble_coupled(const DofMap& dofs, const SystemBlocks& blocks, const Projection& projection,
                              const std::vector<Body>& bodies, const CoupledInput& input) {
  const int nu = dofs.velocity_dofs();
  const int nb = static_cast<int>(bodies.size());
  const int n = dofs.total_dofs() + 3 * nb;
  if (projection.P.rows() != n || projection.num_bodies != nb || blocks.A.rows() != nu)
    throw ValidationError("dimension mismatch between projection and system blocks");
  LinearSystem sys;
  sys.K = block_matrix(blocks, 3 * nb);
  sys.F = Vector::Zero(n);
  sys.F.head(nu) = blocks.G;
  std::vector<Eigen::Triplet<double>> t;
  for (int b = 0; b < nb; ++b) {
    const Body& body = bodies[static_cast<std::size_t>(b)];
    const int r = projection.body_offset + 3 * b;
    if (static_cast<std::size_t>(b) < input.loads.size()) {
      sys.F[r] += input.loads[static_cast<std::size_t>(b)].force.x();
      sys.F[r + 1] += input.loads[static_cast<std::size_t>(b)].force.y();
      sys.F[r + 2] += input.loads[static_cast<std::size_t>(b)].torque;
    }
    if (input.dt > 0.0 && body.mass > 0.0) {
      const double mass_block = body.mass / input.dt;
      const double inertia_block = body.inertia / input.dt;  // scalar inertia, independent of theta in 2D
      t.emplace_back(r, r, mass_block);
      t.emplace_back(r + 1, r + 1, mass_block);
      t.emplace_back(r + 2, r + 2, inertia_block);
      const Vec2 lp = static_cast<std::size_t>(b) < input.l_prev.size() ? input.l_prev[static_cast<std::size_t>(b)] : body.l;
      const double wp =
          static_cast<std::size_t>(b) < input.omega_prev.size() ? input.omega_prev[static_cast<std::size_t>(b)] : body.omega;
      sys.F[r] += mass_block * lp.x();
      sys.F[r + 1] += mass_block * lp.y();
      sys.F[r + 2] += inertia_block * wp;
    }
  }
  if (!t.empty()) {
    SparseMatrix D(n, n);
    D.setFromTriplets(t.begin(), t.end());
    sys.K += D;
  }
  sys.P = projection.P;
  sys.lift = Vector::Zero(n);
  if (input.boundary_values) {
    for (int node = 0; node < dofs.num_nodes(); ++node) {
      const auto c = dofs.node_class[static_cast<std::size_t>(node)];
      if (c != DofClass::OuterDirichlet && c != DofClass::Swimmer) continue;
      sys.lift[2 * node] = (*input.boundary_values)[2 * node];
      sys.lift[2 * node + 1] = (*input.boundary_values)[2 * node + 1];
    }
  }
  sys.description = "suspected cause: disconnected mesh, a body without boundary dofs, or missing pressure gauge";
  return sys;
}

CoupledSolution solve_coupled(const DofMap& dofs, const LinearSystem& system, int num_bodies) {
  CoupledSolution s;
  const Vector x = solve_saddle_point(system, &s.report);
  const int nu = dofs.velocity_dofs(), np = dofs.pressure_dofs();
  s.u = x.head(nu);
  s.p = x.segment(nu, np);
  for (int b = 0; b < num_bodies; ++b) {
    const int r = nu + np + 3 * b;
    s.l.emplace_back(x[r], x[r + 1]);
    s.omega.push_back(x[r + 2]);
  }
  return s;
}

void update_bodies(std::vector<Body>& bodies, const std::vector<Vec2>& l_new, const std::vector<double>& omega_new,
                   double dt) {
  if (l_new.size() != bodies.size() || omega_new.size() != bodies.size())
    throw ValidationError("velocity count does not match body count");
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    Body& body = bodies[b];
    body.x_cm += 0.5 * dt * (body.l + l_new[b]);
    body.theta = wrap_angle(body.theta + 0.5 * dt * (body.omega + omega_new[b]));
    body.l = l_new[b];
    body.omega = omega_new[b];
  }
}

}  // namespace swimfem
