#include "swimfem/ale.hpp"

#include "swimfem/errors.hpp"

#include <algorithm>

namespace swimfem {

std::vector<double> compute_tau(const Mesh& reference) {
  std::vector<double> vol(reference.cells.size());
  double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
  for (int c = 0; c < reference.num_cells(); ++c) {
    const double v = reference.signed_area(c);
    if (!(v > 0.0)) throw InvertedElementError(c, "cell " + std::to_string(c) + " has non-positive area");
    vol[static_cast<std::size_t>(c)] = v;
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  std::vector<double> tau(vol.size());
  for (std::size_t c = 0; c < vol.size(); ++c) tau[c] = (1.0 - vmin / vmax) / (vol[c] / vmax);
  return tau;
}

ExtensionSolver::ExtensionSolver(const Mesh& reference, const std::vector<double>& tau) {
  if (tau.size() != reference.cells.size()) throw ValidationError("tau must have one value per cell");
  const auto boundary = reference.boundary_vertex_mask();
  const int n = reference.num_vertices();
  free_index_.assign(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v)
    if (!boundary[static_cast<std::size_t>(v)]) free_index_[static_cast<std::size_t>(v)] = num_free_++;

  std::vector<Eigen::Triplet<double>> kff, kfb;
  for (int c = 0; c < reference.num_cells(); ++c) {
    const auto& t = reference.cells[static_cast<std::size_t>(c)];
    const Vec2 p[3] = {reference.vertices[static_cast<std::size_t>(t[0])], reference.vertices[static_cast<std::size_t>(t[1])],
                       reference.vertices[static_cast<std::size_t>(t[2])]};
    const double area = reference.signed_area(c);
    Vec2 g[3];
    for (int i = 0; i < 3; ++i) {
      const Vec2 e = p[(i + 2) % 3] - p[(i + 1) % 3];
      g[i] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    const double w = (1.0 + tau[static_cast<std::size_t>(c)]) * area;
    for (int i = 0; i < 3; ++i) {
      const int fi = free_index_[static_cast<std::size_t>(t[i])];
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const double k = w * g[i].dot(g[j]);
        const int fj = free_index_[static_cast<std::size_t>(t[j])];
        if (fj >= 0)
          kff.emplace_back(fi, fj, k);
        else
          kfb.emplace_back(fi, t[j], k);
      }
    }
  }
  coupling_.resize(num_free_, n);
  coupling_.setFromTriplets(kfb.begin(), kfb.end());
  if (num_free_ > 0) {
    SparseMatrix K(num_free_, num_free_);
    K.setFromTriplets(kff.begin(), kff.end());
    ldlt_.compute(K);
    if (ldlt_.info() != Eigen::Success) throw NumericalError("extension system is singular (disconnected mesh?)");
  }
}

std::vector<Vec2> ExtensionSolver::solve(const std::vector<Vec2>& boundary) const {
  const std::size_t n = free_index_.size();
  if (boundary.size() != n) throw ValidationError("extension data needs one value per vertex");
  std::vector<Vec2> phi(n, Vec2::Zero());
  Vector bx = Vector::Zero(static_cast<Eigen::Index>(n)), by = bx;
  for (std::size_t v = 0; v < n; ++v) {
    if (free_index_[v] >= 0) continue;
    phi[v] = boundary[v];
    bx[static_cast<Eigen::Index>(v)] = boundary[v].x();
    by[static_cast<Eigen::Index>(v)] = boundary[v].y();
  }
  if (num_free_ == 0) return phi;
  const Vector x = ldlt_.solve(-(coupling_ * bx));
  const Vector y = ldlt_.solve(-(coupling_ * by));
  for (std::size_t v = 0; v < n; ++v) {
    const int f = free_index_[v];
    if (f >= 0) phi[v] = Vec2(x[f], y[f]);
  }
  return phi;
}

std::vector<Vec2> solve_extension(const Mesh& reference, const std::vector<double>& tau,
                                  const std::vector<Vec2>& swimmer_disp) {
  std::vector<Vec2> data(reference.vertices.size(), Vec2::Zero());
  for (const auto& e : reference.boundary_edges) {
    if (reference.kind_of(e.tag) != BoundaryKind::Swimmer) continue;
    for (int v : e.v) data[static_cast<std::size_t>(v)] = swimmer_disp[static_cast<std::size_t>(v)];
  }
  return ExtensionSolver(reference, tau).solve(data);
}

void boundary_displacement(const Body& body, const Vec2& center, double angle, const std::vector<Vec2>& D,
                           const Mesh& reference, std::vector<Vec2>& disp) {
  for (std::size_t k = 0; k < body.vertices.size(); ++k) {
    const auto v = static_cast<std::size_t>(body.vertices[k]);
    disp[v] = body.boundary_point(k, center, angle, D[k]) - reference.vertices[v];
  }
}

void AleState::rebase(Mesh ref) {
  reference = std::move(ref);
  tau = compute_tau(reference);
  phi.assign(reference.vertices.size(), Vec2::Zero());
  solver = std::make_shared<const ExtensionSolver>(reference, tau);
}

Mesh AleState::current() const { return displace(reference, phi); }

DomainStep predict_domain(const AleState& state, const std::vector<Vec2>& disp, double dt) {
  DomainStep s;
  s.phi = state.solver->solve(disp);
  s.mesh = displace(state.reference, s.phi);
  s.min_quality = mesh_quality(s.mesh).min_quality;
  s.mesh_velocity.resize(s.phi.size());
  for (std::size_t v = 0; v < s.phi.size(); ++v)
    s.mesh_velocity[v] = dt > 0.0 ? Vec2((s.phi[v] - state.phi[v]) / dt) : Vec2::Zero();
  return s;
}

DomainStep step_domain(AleState& state, const std::function<std::vector<Vec2>(const Mesh& reference)>& targets,
                       double dt, double quality_threshold,
                       const std::function<void(const Mesh& old_mesh, const RemeshResult&)>& on_remesh) {
  if (!(dt > 0.0)) throw ValidationError("mesh motion needs dt > 0");
  try {
    DomainStep s = predict_domain(state, targets(state.reference), dt);
    if (s.min_quality >= quality_threshold) return s;
  } catch (const InvertedElementError&) {
  }
  const Mesh old = state.current();
  RemeshResult r = remesh_with_map(old);
  if (on_remesh) on_remesh(old, r);
  state.rebase(std::move(r.mesh));
  DomainStep s = predict_domain(state, targets(state.reference), dt);
  s.remeshed = true;
  s.vertex_map = std::move(r.vertex_map);
  return s;
}

Vector p1_to_p2(const DofMap& dofs, const std::vector<Vec2>& vertex_values) {
  Vector u(dofs.velocity_dofs());
  for (int v = 0; v < dofs.num_vertices; ++v) {
    u[2 * v] = vertex_values[static_cast<std::size_t>(v)].x();
    u[2 * v + 1] = vertex_values[static_cast<std::size_t>(v)].y();
  }
  for (int e = 0; e < dofs.num_edges; ++e) {
    const auto& ev = dofs.edge_vertices[static_cast<std::size_t>(e)];
    const Vec2 m = 0.5 * (vertex_values[static_cast<std::size_t>(ev[0])] + vertex_values[static_cast<std::size_t>(ev[1])]);
    const int n = dofs.num_vertices + e;
    u[2 * n] = m.x();
    u[2 * n + 1] = m.y();
  }
  return u;
}

Vector transfer_velocity(const Mesh& from, const DofMap& from_dofs, const Vector& u, const DofMap& to_dofs) {
  const PointLocator loc(from);
  Vector out(to_dofs.velocity_dofs());
  for (int n = 0; n < to_dofs.num_nodes(); ++n) {
    const auto hit = loc.locate(to_dofs.node_coords[static_cast<std::size_t>(n)]);
    const Vec2 v = eval_velocity(from_dofs, u, hit.cell, hit.bary);
    out[2 * n] = v.x();
    out[2 * n + 1] = v.y();
  }
  return out;
}

std::vector<double> transfer_scalar(const Mesh& from, const std::vector<double>& values, const Mesh& to) {
  const PointLocator loc(from);
  std::vector<double> out(to.vertices.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const auto hit = loc.locate(to.vertices[v]);
    const auto& c = from.cells[static_cast<std::size_t>(hit.cell)];
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += hit.bary[static_cast<std::size_t>(k)] * values[static_cast<std::size_t>(c[static_cast<std::size_t>(k)])];
    out[v] = s;
  }
  return out;
}

}  // namespace swimfem
