#include "swimfem/collision.hpp"

#include "swimfem/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

namespace swimfem {

namespace {

/// Candidate value at C from accepted A and B in one triangle, or +inf when
/// the characteristic does not pass through the triangle.
double triangle_update(const Vec2& C, const Vec2& A, double ta, const Vec2& B, double tb) {
  Eigen::Matrix2d E;
  E.row(0) = (A - C).transpose();
  E.row(1) = (B - C).transpose();
  const Eigen::Matrix2d M = E * E.transpose();
  if (std::abs(M.determinant()) <= 1e-14 * M.squaredNorm()) return std::numeric_limits<double>::infinity();
  const Eigen::Matrix2d Q = M.inverse();
  const Eigen::Vector2d one(1.0, 1.0), v(ta, tb);
  const double a = one.dot(Q * one);
  const double b = -2.0 * one.dot(Q * v);
  const double c = v.dot(Q * v) - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = (-b + std::sqrt(disc)) / (2.0 * a);
  if (t < std::max(ta, tb)) return std::numeric_limits<double>::infinity();
  // Gradient from the two edge relations; -g must lie in the cone of the edges.
  const Eigen::Vector2d g = E.inverse() * Eigen::Vector2d(ta - t, tb - t);
  const Eigen::Vector2d ab = E.transpose().inverse() * (-g);
  if (ab.x() < -1e-12 || ab.y() < -1e-12) return std::numeric_limits<double>::infinity();
  return t;
}

std::vector<std::vector<int>> vertex_cells(const Mesh& mesh) {
  std::vector<std::vector<int>> vc(mesh.vertices.size());
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.cells[static_cast<std::size_t>(c)]) vc[static_cast<std::size_t>(v)].push_back(c);
  return vc;
}

NarrowBandField march(const Mesh& mesh, const std::vector<std::vector<int>>& vc, const std::vector<int>& seeds,
                      double d_max) {
  const std::size_t n = mesh.vertices.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> T(n, inf);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int s : seeds) {
    T[static_cast<std::size_t>(s)] = 0.0;
    heap.emplace(0.0, s);
  }
  NarrowBandField f;
  f.d_max = d_max;
  while (!heap.empty()) {
    const auto [t, v] = heap.top();
    heap.pop();
    const auto vi = static_cast<std::size_t>(v);
    if (done[vi] || t > T[vi]) continue;
    if (t > d_max) break;
    done[vi] = 1;
    f.accepted.push_back(v);
    for (int c : vc[vi]) {
      const auto& cell = mesh.cells[static_cast<std::size_t>(c)];
      for (int k = 0; k < 3; ++k) {
        const int w = cell[static_cast<std::size_t>(k)];
        const auto wi = static_cast<std::size_t>(w);
        if (done[wi]) continue;
        int other = -1;
        for (int m : cell)
          if (m != v && m != w) other = m;
        const Vec2& C = mesh.vertices[wi];
        double cand = t + (C - mesh.vertices[vi]).norm();
        const auto oi = static_cast<std::size_t>(other);
        if (done[oi]) {
          cand = std::min(cand, T[oi] + (C - mesh.vertices[oi]).norm());
          cand = std::min(cand, triangle_update(C, mesh.vertices[vi], t, mesh.vertices[oi], T[oi]));
        }
        if (cand < T[wi]) {
          T[wi] = cand;
          heap.emplace(cand, w);
        }
      }
    }
  }
  f.value.assign(n, d_max);
  for (int v : f.accepted) f.value[static_cast<std::size_t>(v)] = T[static_cast<std::size_t>(v)];
  return f;
}

/// Seed vertex minimizing the field, smallest index on ties.
int argmin_over(const std::vector<int>& vertices, const std::vector<double>& field) {
  int best = -1;
  for (int v : vertices)
    if (best < 0 || field[static_cast<std::size_t>(v)] < field[static_cast<std::size_t>(best)] ||
        (field[static_cast<std::size_t>(v)] == field[static_cast<std::size_t>(best)] && v < best))
      best = v;
  return best;
}

/// Vertex of `set` closest to x, ties to the smallest index.
int nearest_to(const Mesh& mesh, const std::vector<int>& set, const Vec2& x) {
  int best = -1;
  double best_d = 0.0;
  for (int v : set) {
    const double d = (mesh.vertices[static_cast<std::size_t>(v)] - x).squaredNorm();
    if (best < 0 || d < best_d) {
      best = v;
      best_d = d;
    }
  }
  return best;
}

/// Closest vertex pair between two sets, ties to the smallest indices.
std::pair<int, int> nearest_pair(const Mesh& mesh, const std::vector<int>& a, const std::vector<int>& b) {
  std::pair<int, int> best{-1, -1};
  double best_d = 0.0;
  for (int i : a)
    for (int j : b) {
      const double d = (mesh.vertices[static_cast<std::size_t>(i)] - mesh.vertices[static_cast<std::size_t>(j)]).squaredNorm();
      if (best.first < 0 || d < best_d) {
        best = {i, j};
        best_d = d;
      }
    }
  return best;
}

}  // namespace

NarrowBandField fast_march(const Mesh& mesh, const std::vector<int>& seeds, double d_max) {
  if (seeds.empty()) throw ValidationError("fast marching needs a non-empty seed");
  return march(mesh, vertex_cells(mesh), seeds, d_max);
}

void CollisionParams::validate() const {
  if (!(w_col > 0.0)) throw ValidationError("collision.w_col must be positive");
  if (!(d_max >= w_col)) throw ValidationError("collision.d_max must be at least w_col");
  if (!(epsilon > 0.0) || !(epsilon_wall > 0.0)) throw ValidationError("collision stiffnesses must be positive");
}

DistanceFields compute_distance_fields(const Mesh& mesh, int num_bodies, double d_max) {
  const auto vc = vertex_cells(mesh);
  DistanceFields f;
  for (int b = 0; b < num_bodies; ++b) {
    const auto seeds = mesh.body_vertices(b);
    if (seeds.empty()) throw ValidationError("body " + std::to_string(b) + " has no boundary vertices");
    f.body.push_back(march(mesh, vc, seeds, d_max));
  }
  for (int t = 0; t < static_cast<int>(mesh.tags.size()); ++t) {
    if (mesh.tags[static_cast<std::size_t>(t)].kind != BoundaryKind::DirichletWall) continue;
    const auto seeds = mesh.tag_vertices(t);
    if (seeds.empty()) continue;
    f.wall_tags.push_back(t);
    f.wall.push_back(march(mesh, vc, seeds, d_max));
  }
  return f;
}

std::vector<ContactPair> find_contacts(const Mesh& mesh, const DistanceFields& fields, const CollisionParams& params) {
  const int nb = static_cast<int>(fields.body.size());
  std::vector<std::vector<int>> boundary(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) boundary[static_cast<std::size_t>(b)] = mesh.body_vertices(b);
  std::vector<ContactPair> pairs;
  // A saturated field says nothing about where the partner is, so that side
  // falls back to the nearest vertex.
  auto finish = [&](ContactPair& p, const NarrowBandField& fi, const NarrowBandField& fj, const std::vector<int>& vi,
                    const std::vector<int>& vj) {
    const bool out_i = fi.value[static_cast<std::size_t>(p.vertex_i)] >= fi.d_max;
    const bool out_j = fj.value[static_cast<std::size_t>(p.vertex_j)] >= fj.d_max;
    if (out_i && out_j)
      std::tie(p.vertex_i, p.vertex_j) = nearest_pair(mesh, vi, vj);
    else if (out_j)
      p.vertex_j = nearest_to(mesh, vj, mesh.vertices[static_cast<std::size_t>(p.vertex_i)]);
    else if (out_i)
      p.vertex_i = nearest_to(mesh, vi, mesh.vertices[static_cast<std::size_t>(p.vertex_j)]);
    p.X_i = mesh.vertices[static_cast<std::size_t>(p.vertex_i)];
    p.X_j = mesh.vertices[static_cast<std::size_t>(p.vertex_j)];
    p.d = (p.X_j - p.X_i).norm();
    p.active = p.d <= params.w_col;
    pairs.push_back(p);
  };
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) {
      ContactPair p;
      p.kind = ContactKind::BodyBody;
      p.body_i = i;
      p.partner = j;
      const auto& fi = fields.body[static_cast<std::size_t>(j)];
      const auto& fj = fields.body[static_cast<std::size_t>(i)];
      p.vertex_i = argmin_over(boundary[static_cast<std::size_t>(i)], fi.value);
      p.vertex_j = argmin_over(boundary[static_cast<std::size_t>(j)], fj.value);
      finish(p, fi, fj, boundary[static_cast<std::size_t>(i)], boundary[static_cast<std::size_t>(j)]);
    }
  for (int i = 0; i < nb; ++i)
    for (std::size_t w = 0; w < fields.wall.size(); ++w) {
      ContactPair p;
      p.kind = ContactKind::BodyWall;
      p.body_i = i;
      p.partner = fields.wall_tags[w];
      const auto wall = mesh.tag_vertices(fields.wall_tags[w]);
      const auto& fi = fields.wall[w];
      const auto& fj = fields.body[static_cast<std::size_t>(i)];
      p.vertex_i = argmin_over(boundary[static_cast<std::size_t>(i)], fi.value);
      p.vertex_j = argmin_over(wall, fj.value);
      finish(p, fi, fj, boundary[static_cast<std::size_t>(i)], wall);
    }
  return pairs;
}

std::vector<ContactPair> find_contacts(const Mesh& mesh, int num_bodies, const CollisionParams& params) {
  return find_contacts(mesh, compute_distance_fields(mesh, num_bodies, params.d_max), params);
}

double activation(double d, double w_col) {
  if (d > w_col) return 0.0;
  const double s = (w_col - d) / w_col;
  return s * s;
}

Vec2 repulsion_force(const ContactPair& pair, const CollisionParams& params) {
  const double a = activation(pair.d, params.w_col);
  if (a == 0.0) return Vec2::Zero();
  const double eps = pair.kind == ContactKind::BodyBody ? params.epsilon : params.epsilon_wall;
  return -eps * a * (pair.X_j - pair.X_i);
}

double repulsion_torque(const Vec2& x_cm, const Vec2& contact_point, const Vec2& force) {
  return -cross(contact_point - x_cm, force);
}

ExternalLoad total_external(int body, const Vec2& x_cm, const std::vector<ContactPair>& contacts,
                            const CollisionParams& params) {
  ExternalLoad load;
  for (const auto& p : contacts) {
    if (!p.active) continue;
    if (p.body_i == body) {
      const Vec2 f = repulsion_force(p, params);
      load.force += f;
      load.torque += repulsion_torque(x_cm, p.X_i, f);
    } else if (p.kind == ContactKind::BodyBody && p.partner == body) {
      const Vec2 f = -repulsion_force(p, params);
      load.force += f;
      load.torque += repulsion_torque(x_cm, p.X_j, f);
    }
  }
  return load;
}

}  // namespace swimfem
