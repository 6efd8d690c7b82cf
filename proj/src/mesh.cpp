#include "swimfem/mesh.hpp"

#include "swimfem/delaunay.hpp"
#include "swimfem/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace swimfem {
namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

const std::string kAxisTag = "__mirror_axis";

}  // namespace

// ---------------------------------------------------------------------------
// Mesh

double Mesh::signed_area(int cell) const {
  const auto& c = cells[static_cast<std::size_t>(cell)];
  return swimfem::signed_area(vertices[static_cast<std::size_t>(c[0])], vertices[static_cast<std::size_t>(c[1])],
                              vertices[static_cast<std::size_t>(c[2])]);
}

int Mesh::find_tag(const std::string& name) const {
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i].name == name) return static_cast<int>(i);
  return -1;
}

void Mesh::validate() {
  const int nv = num_vertices();
  for (int c = 0; c < num_cells(); ++c) {
    for (int v : cells[static_cast<std::size_t>(c)])
      if (v < 0 || v >= nv) throw ValidationError("cell " + std::to_string(c) + " references a missing vertex");
    if (!(signed_area(c) > 0.0))
      throw InvertedElementError(c, "cell " + std::to_string(c) + " has non-positive signed area");
  }
  // Directed edge of its owning cell for every edge seen once.
  std::unordered_map<std::uint64_t, std::pair<int, std::array<int, 2>>> edges;
  edges.reserve(cells.size() * 3);
  for (const auto& c : cells) {
    for (int k = 0; k < 3; ++k) {
      const int a = c[static_cast<std::size_t>(k)];
      const int b = c[static_cast<std::size_t>((k + 1) % 3)];
      auto [it, fresh] = edges.try_emplace(edge_key(a, b), 1, std::array<int, 2>{a, b});
      if (!fresh) {
        if (++it->second.first > 2) throw ValidationError("edge shared by more than two cells");
      }
    }
  }
  std::unordered_map<std::uint64_t, int> seen;
  for (std::size_t i = 0; i < boundary_edges.size(); ++i) {
    auto& e = boundary_edges[i];
    if (e.tag < -1 || e.tag >= static_cast<int>(tags.size()))
      throw ValidationError("boundary edge " + std::to_string(i) + " has an unknown tag");
    const auto key = edge_key(e.v[0], e.v[1]);
    auto it = edges.find(key);
    if (it == edges.end() || it->second.first != 1)
      throw ValidationError("boundary edge " + std::to_string(i) + " does not belong to exactly one cell");
    if (!seen.emplace(key, static_cast<int>(i)).second)
      throw ValidationError("duplicate boundary edge " + std::to_string(i));
    e.v = it->second.second;
  }
  std::vector<int> balance(static_cast<std::size_t>(nv), 0);
  for (const auto& [key, info] : edges) {
    if (info.first != 1) continue;
    if (!seen.count(key)) throw ValidationError("free edge without a boundary tag");
    ++balance[static_cast<std::size_t>(info.second[0])];
    --balance[static_cast<std::size_t>(info.second[1])];
  }
  for (int v = 0; v < nv; ++v)
    if (balance[static_cast<std::size_t>(v)] != 0) throw ValidationError("boundary edges do not form closed loops");
  for (const auto& t : tags)
    if (t.kind == BoundaryKind::Swimmer && t.body < 0) throw ValidationError("swimmer tag " + t.name + " has no body");
}

std::vector<int> Mesh::tag_vertices(int tag) const {
  std::vector<int> out;
  for (const auto& e : boundary_edges)
    if (e.tag == tag) out.insert(out.end(), e.v.begin(), e.v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> Mesh::body_vertices(int body) const {
  std::vector<int> out;
  for (const auto& e : boundary_edges) {
    if (e.tag < 0) continue;
    const auto& t = tags[static_cast<std::size_t>(e.tag)];
    if (t.kind == BoundaryKind::Swimmer && t.body == body) out.insert(out.end(), e.v.begin(), e.v.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<bool> Mesh::boundary_vertex_mask() const {
  std::vector<bool> mask(vertices.size(), false);
  for (const auto& e : boundary_edges) {
    mask[static_cast<std::size_t>(e.v[0])] = true;
    mask[static_cast<std::size_t>(e.v[1])] = true;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Quality

double triangle_quality(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = signed_area(a, b, c);
  if (!(area > 0.0)) return 0.0;
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  const double q = 16.0 * area * area / ((la + lb + lc) * la * lb * lc);
  return std::clamp(q, 0.0, 1.0);
}

double cell_quality(const Mesh& mesh, int cell) {
  const auto& c = mesh.cells[static_cast<std::size_t>(cell)];
  return triangle_quality(mesh.vertices[static_cast<std::size_t>(c[0])], mesh.vertices[static_cast<std::size_t>(c[1])],
                          mesh.vertices[static_cast<std::size_t>(c[2])]);
}

QualityReport mesh_quality(const Mesh& mesh) {
  QualityReport r;
  r.cell_quality.resize(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double q = cell_quality(mesh, c);
    r.cell_quality[static_cast<std::size_t>(c)] = q;
    if (r.min_cell < 0 || q < r.min_quality) {
      r.min_quality = q;
      r.min_cell = c;
    }
  }
  return r;
}

Mesh with_vertices(const Mesh& mesh, std::vector<Vec2> positions) {
  if (positions.size() != mesh.vertices.size()) throw ValidationError("vertex count mismatch in displacement");
  Mesh out = mesh;
  out.vertices = std::move(positions);
  for (int c = 0; c < out.num_cells(); ++c)
    if (!(out.signed_area(c) > 0.0)) throw InvertedElementError(c, "displacement inverts cell " + std::to_string(c));
  return out;
}

Mesh displace(const Mesh& mesh, std::span<const Vec2> displacement) {
  if (displacement.size() != mesh.vertices.size()) throw ValidationError("vertex count mismatch in displacement");
  std::vector<Vec2> pos(mesh.vertices.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = mesh.vertices[i] + displacement[i];
  return with_vertices(mesh, std::move(pos));
}

Mesh refine_uniform(const Mesh& mesh) {
  Mesh out;
  out.tags = mesh.tags;
  out.symmetry_axis = mesh.symmetry_axis;
  out.grading = mesh.grading;
  out.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, int> mid;
  auto midpoint = [&](int a, int b) {
    auto [it, fresh] = mid.try_emplace(edge_key(a, b), static_cast<int>(out.vertices.size()));
    if (fresh)
      out.vertices.push_back(0.5 * (mesh.vertices[static_cast<std::size_t>(a)] + mesh.vertices[static_cast<std::size_t>(b)]));
    return it->second;
  };
  for (const auto& c : mesh.cells) {
    const int m01 = midpoint(c[0], c[1]);
    const int m12 = midpoint(c[1], c[2]);
    const int m20 = midpoint(c[2], c[0]);
    out.cells.push_back({c[0], m01, m20});
    out.cells.push_back({m01, c[1], m12});
    out.cells.push_back({m20, m12, c[2]});
    out.cells.push_back({m01, m12, m20});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint(e.v[0], e.v[1]);
    out.boundary_edges.push_back({{e.v[0], m}, e.tag});
    out.boundary_edges.push_back({{m, e.v[1]}, e.tag});
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Point location

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.cells.empty()) throw ValidationError("cannot locate points in an empty mesh");
  lo_ = mesh.vertices.front();
  Vec2 hi = lo_;
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec2 ext = (hi - lo_).cwiseMax(Vec2(1e-12, 1e-12));
  const double per = std::sqrt(ext.x() * ext.y() / std::max<std::size_t>(1, mesh.cells.size()));
  nx_ = std::clamp(static_cast<int>(ext.x() / per), 1, 4096);
  ny_ = std::clamp(static_cast<int>(ext.y() / per), 1, 4096);
  cell_size_ = Vec2(ext.x() / nx_, ext.y() / ny_);
  std::vector<int> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  auto range = [&](int c, int& x0, int& x1, int& y0, int& y1) {
    const auto& t = mesh.cells[static_cast<std::size_t>(c)];
    Vec2 a = mesh.vertices[static_cast<std::size_t>(t[0])], b = a;
    for (int v : t) {
      a = a.cwiseMin(mesh.vertices[static_cast<std::size_t>(v)]);
      b = b.cwiseMax(mesh.vertices[static_cast<std::size_t>(v)]);
    }
    x0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / cell_size_.x()), 0, nx_ - 1);
    x1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / cell_size_.x()), 0, nx_ - 1);
    y0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / cell_size_.y()), 0, ny_ - 1);
    y1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / cell_size_.y()), 0, ny_ - 1);
  };
  for (int c = 0; c < mesh.num_cells(); ++c) {
    int x0, x1, y0, y1;
    range(c, x0, x1, y0, y1);
    for (int j = y0; j <= y1; ++j)
      for (int i = x0; i <= x1; ++i) ++count[static_cast<std::size_t>(j * nx_ + i) + 1];
  }
  for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
  start_ = count;
  items_.resize(static_cast<std::size_t>(count.back()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    int x0, x1, y0, y1;
    range(c, x0, x1, y0, y1);
    for (int j = y0; j <= y1; ++j)
      for (int i = x0; i <= x1; ++i) items_[static_cast<std::size_t>(count[static_cast<std::size_t>(j * nx_ + i)]++)] = c;
  }
}

namespace {

std::array<double, 3> barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d = orient(a, b, c);
  const double l1 = orient(p, b, c) / d;
  const double l2 = orient(a, p, c) / d;
  return {l1, l2, 1.0 - l1 - l2};
}

}  // namespace

PointLocator::Hit PointLocator::locate(const Vec2& p) const {
  const Mesh& m = *mesh_;
  auto test = [&](int c, Hit& best, double& best_violation) {
    const auto& t = m.cells[static_cast<std::size_t>(c)];
    const auto bary = barycentric(p, m.vertices[static_cast<std::size_t>(t[0])], m.vertices[static_cast<std::size_t>(t[1])],
                                  m.vertices[static_cast<std::size_t>(t[2])]);
    const double violation = -std::min({bary[0], bary[1], bary[2]});
    if (violation < best_violation) {
      best_violation = violation;
      best.cell = c;
      best.bary = bary;
    }
  };
  Hit best;
  double violation = std::numeric_limits<double>::infinity();
  const int ix = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_size_.x()));
  const int iy = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_size_.y()));
  for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
    for (int j = iy - ring; j <= iy + ring; ++j) {
      for (int i = ix - ring; i <= ix + ring; ++i) {
        if (std::max(std::abs(i - ix), std::abs(j - iy)) != ring) continue;
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
        const int b = j * nx_ + i;
        for (int k = start_[static_cast<std::size_t>(b)]; k < start_[static_cast<std::size_t>(b) + 1]; ++k)
          test(items_[static_cast<std::size_t>(k)], best, violation);
      }
    }
    if (violation <= 1e-12) break;
    // Outside points: one extra ring beyond the first candidate is enough.
    if (best.cell >= 0 && ring >= 1 && ix >= 0 && iy >= 0 && ix < nx_ && iy < ny_) break;
    if (best.cell >= 0 && ring >= 2) break;
  }
  if (best.cell < 0) {
    for (int c = 0; c < m.num_cells(); ++c) test(c, best, violation);
  }
  best.inside = violation <= 1e-12;
  if (!best.inside) {
    // Snap onto the cell by clamping the barycentric coordinates.
    double s = 0.0;
    for (double& l : best.bary) {
      l = std::max(l, 0.0);
      s += l;
    }
    for (double& l : best.bary) l /= s;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Generation

Hole Hole::circle(const Vec2& center, double radius, int segments, std::string tag, int body) {
  return ellipse(center, radius, radius, 0.0, segments, std::move(tag), body);
}

Hole Hole::ellipse(const Vec2& center, double semi_x, double semi_y, double angle, int segments, std::string tag,
                   int body) {
  if (segments < 3) throw ValidationError("a hole needs at least three segments");
  if (!(semi_x > 0.0 && semi_y > 0.0)) throw ValidationError("hole radii must be positive");
  Hole h;
  h.tag = std::move(tag);
  h.body = body;
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int k = 0; k < segments; ++k) {
    const double t = 2.0 * kPi * k / segments;
    const Vec2 local(semi_x * std::cos(t), semi_y * std::sin(t));
    h.polygon.push_back(center + Vec2(ca * local.x() - sa * local.y(), sa * local.x() + ca * local.y()));
  }
  return h;
}

OuterBoundary rectangle_boundary(double length, double height) {
  if (!(length > 0.0 && height > 0.0)) throw ValidationError("rectangle sides must be positive");
  return {{{0.0, 0.0}, {length, 0.0}, {length, height}, {0.0, height}}, {"bottom", "right", "top", "left"}};
}

BoundaryTag tag_from_name(const std::string& name) {
  BoundaryTag t;
  t.name = name;
  auto numbered = [&](const std::string& prefix) -> bool {
    if (name.rfind(prefix, 0) != 0) return false;
    const std::string rest = name.substr(prefix.size());
    if (rest.empty()) {
      t.body = 0;
      return true;
    }
    if (!std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
    t.body = std::stoi(rest);
    return true;
  };
  if (name.rfind("inflow", 0) == 0) {
    t.kind = BoundaryKind::DirichletInflow;
  } else if (name.rfind("outflow", 0) == 0) {
    t.kind = BoundaryKind::NeumannOutflow;
  } else if (numbered("swimmer") || numbered("body")) {
    t.kind = BoundaryKind::Swimmer;
  } else {
    t.kind = BoundaryKind::DirichletWall;
    t.body = -1;
  }
  return t;
}

namespace {

/// Triangulated domain before tags are resolved into a table.
struct Draft {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryEdge> edges;  // tag indexes `tags`
  std::vector<BoundaryTag> tags;

  int tag_index(const BoundaryTag& t) {
    for (std::size_t i = 0; i < tags.size(); ++i)
      if (tags[i].name == t.name) return static_cast<int>(i);
    tags.push_back(t);
    return static_cast<int>(tags.size()) - 1;
  }
};

struct Loop {
  std::vector<Vec2> points;
  std::vector<BoundaryTag> edge_tags;  // edge k joins points k and k+1
  std::vector<bool> subdivide;         // split edge k following the size field
};

using SizeField = std::function<double(const Vec2&)>;

/// Points strictly between a and b (a included, b excluded) spaced by the size field.
void subdivide_edge(const Vec2& a, const Vec2& b, const SizeField& size, std::vector<Vec2>& out) {
  constexpr int kSamples = 64;
  std::array<double, kSamples + 1> cumulative{};
  for (int i = 0; i < kSamples; ++i) {
    const Vec2 m = a + (b - a) * ((i + 0.5) / kSamples);
    cumulative[static_cast<std::size_t>(i) + 1] = cumulative[static_cast<std::size_t>(i)] + 1.0 / size(m);
  }
  const double len = (b - a).norm();
  const double total = cumulative.back() * len / kSamples;
  const int n = std::max(1, static_cast<int>(std::lround(total)));
  out.push_back(a);
  int seg = 0;
  for (int k = 1; k < n; ++k) {
    const double target = cumulative.back() * k / n;
    while (cumulative[static_cast<std::size_t>(seg) + 1] < target) ++seg;
    const double c0 = cumulative[static_cast<std::size_t>(seg)];
    const double c1 = cumulative[static_cast<std::size_t>(seg) + 1];
    const double s = (seg + (target - c0) / (c1 - c0)) / kSamples;
    out.push_back(a + (b - a) * s);
  }
}

Draft triangulate_loops(const std::vector<Loop>& loops, const SizeField& size, int smoothing_passes) {
  Draft d;
  PlanarStraightLineGraph g;
  std::vector<int> seg_tag;
  for (const auto& loop : loops) {
    const std::size_t n = loop.points.size();
    const int first = static_cast<int>(g.points.size());
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& a = loop.points[k];
      const Vec2& b = loop.points[(k + 1) % n];
      const std::size_t before = g.points.size();
      if (loop.subdivide[k]) {
        subdivide_edge(a, b, size, g.points);
      } else {
        g.points.push_back(a);
      }
      const int tag = d.tag_index(loop.edge_tags[k]);
      for (std::size_t i = before; i < g.points.size(); ++i) {
        seg_tag.push_back(tag);
        g.segments.push_back({static_cast<int>(i), static_cast<int>(i) + 1});
      }
    }
    g.segments.back()[1] = first;
  }
  RefinementOptions opt;
  opt.size = size;
  opt.smoothing_passes = smoothing_passes;
  const Triangulation tri = triangulate(g, opt);
  d.points = tri.points;
  d.cells = tri.triangles;
  for (std::size_t s = 0; s < g.segments.size(); ++s) d.edges.push_back({g.segments[s], seg_tag[s]});
  return d;
}

Mesh finish(Draft d, std::optional<double> axis) {
  Mesh m;
  m.vertices = std::move(d.points);
  m.cells = std::move(d.cells);
  m.tags = std::move(d.tags);
  m.boundary_edges = std::move(d.edges);
  m.symmetry_axis = axis;
  m.validate();
  return m;
}

/// Reflects a lower-half draft about y = y0. Edges tagged with the axis tag
/// become interior; `partner` maps lower tag indices to the tags of their
/// mirror images.
Draft mirror_draft(const Draft& lower, double y0, const std::vector<BoundaryTag>& partner) {
  Draft full;
  full.points = lower.points;
  std::vector<int> image(lower.points.size());
  for (std::size_t v = 0; v < lower.points.size(); ++v) {
    const Vec2& p = lower.points[v];
    if (p.y() == y0) {
      image[v] = static_cast<int>(v);
    } else {
      image[v] = static_cast<int>(full.points.size());
      full.points.emplace_back(p.x(), 2.0 * y0 - p.y());
    }
  }
  full.cells = lower.cells;
  for (const auto& c : lower.cells)
    full.cells.push_back({image[static_cast<std::size_t>(c[0])], image[static_cast<std::size_t>(c[2])],
                          image[static_cast<std::size_t>(c[1])]});
  for (const auto& e : lower.edges) {
    const auto& t = lower.tags[static_cast<std::size_t>(e.tag)];
    if (t.name == kAxisTag) continue;
    full.edges.push_back({e.v, full.tag_index(t)});
  }
  for (const auto& e : lower.edges) {
    const auto& t = lower.tags[static_cast<std::size_t>(e.tag)];
    if (t.name == kAxisTag) continue;
    full.edges.push_back({{image[static_cast<std::size_t>(e.v[1])], image[static_cast<std::size_t>(e.v[0])]},
                          full.tag_index(partner[static_cast<std::size_t>(e.tag)])});
  }
  return full;
}

std::vector<Vec2> prepared_hole(const Hole& h) {
  if (h.polygon.size() < 3) throw ValidationError("hole " + h.tag + " needs at least three vertices");
  std::vector<Vec2> pts;
  const std::size_t n = h.polygon.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = h.polygon[k];
    const Vec2& b = h.polygon[(k + 1) % n];
    const int pieces = h.spacing > 0.0 ? std::max(1, static_cast<int>(std::ceil((b - a).norm() / h.spacing - 1e-9))) : 1;
    for (int i = 0; i < pieces; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / pieces));
  }
  if (polygon_signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());
  return pts;
}

void check_layout(const std::vector<Vec2>& outer, const std::vector<std::vector<Vec2>>& holes) {
  if (!polygon_is_simple(outer)) throw ValidationError("outer boundary is not a simple polygon");
  for (std::size_t i = 0; i < holes.size(); ++i) {
    const auto& h = holes[i];
    if (!polygon_is_simple(h)) throw ValidationError("hole " + std::to_string(i) + " is not a simple polygon");
    for (const auto& p : h) {
      if (!point_in_polygon(p, outer) || polygon_distance(p, outer) <= 0.0)
        throw ValidationError("hole " + std::to_string(i) + " is not strictly inside the domain");
    }
    for (std::size_t k = 0; k < outer.size(); ++k)
      for (std::size_t m = 0; m < h.size(); ++m)
        if (segments_intersect(outer[k], outer[(k + 1) % outer.size()], h[m], h[(m + 1) % h.size()]))
          throw ValidationError("hole " + std::to_string(i) + " touches the outer boundary");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = holes[j];
      if (point_in_polygon(h.front(), o) || point_in_polygon(o.front(), h))
        throw ValidationError("holes " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      for (std::size_t k = 0; k < o.size(); ++k)
        for (std::size_t m = 0; m < h.size(); ++m)
          if (segments_intersect(o[k], o[(k + 1) % o.size()], h[m], h[(m + 1) % h.size()]))
            throw ValidationError("holes " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    }
  }
}

SizeField graded_size(const std::vector<std::vector<Vec2>>& holes, double target_h, double grading,
                      const OuterBoundary* outer = nullptr, const std::map<std::string, double>& edge_spacing = {}) {
  struct Source {
    std::vector<Vec2> polygon;
    double spacing;
    Vec2 center;
    double radius;
  };
  std::vector<Source> sources;
  for (const auto& h : holes) {
    Source s;
    s.polygon = h;
    s.spacing = polygon_perimeter(h) / static_cast<double>(h.size());
    s.center = Vec2::Zero();
    for (const auto& p : h) s.center += p;
    s.center /= static_cast<double>(h.size());
    s.radius = 0.0;
    for (const auto& p : h) s.radius = std::max(s.radius, (p - s.center).norm());
    sources.push_back(std::move(s));
  }
  if (outer)
    for (std::size_t k = 0; k < outer->polygon.size(); ++k) {
      auto it = edge_spacing.find(outer->edge_tags[k]);
      if (it == edge_spacing.end()) continue;
      if (!(it->second > 0.0)) throw ValidationError("edge spacing for " + it->first + " must be positive");
      Source s;
      s.polygon = {outer->polygon[k], outer->polygon[(k + 1) % outer->polygon.size()]};
      s.spacing = it->second;
      s.center = 0.5 * (s.polygon[0] + s.polygon[1]);
      s.radius = 0.5 * (s.polygon[1] - s.polygon[0]).norm();
      sources.push_back(std::move(s));
    }
  return [sources, target_h, grading](const Vec2& x) {
    double h = target_h;
    for (const auto& s : sources) {
      // Cheap lower bound first; exact polygon distance only when it matters.
      const double bound = std::max(0.0, (x - s.center).norm() - s.radius);
      if (s.spacing + grading * bound >= h) continue;
      h = std::min(h, s.spacing + grading * polygon_distance(x, s.polygon));
    }
    return h;
  };
}

}  // namespace

Mesh generate_domain(const OuterBoundary& outer, const std::vector<Hole>& holes, double target_h,
                     const GenerateOptions& options) {
  if (!(target_h > 0.0)) throw ValidationError("target_h must be positive");
  if (outer.polygon.size() < 3 || outer.edge_tags.size() != outer.polygon.size())
    throw ValidationError("outer boundary needs one tag per edge");
  std::vector<std::vector<Vec2>> hole_pts;
  for (const auto& h : holes) hole_pts.push_back(prepared_hole(h));
  check_layout(outer.polygon, hole_pts);
  if (polygon_signed_area(outer.polygon) <= 0.0) throw ValidationError("outer boundary must be counter-clockwise");

  const SizeField size = graded_size(hole_pts, target_h, options.grading, &outer, options.edge_spacing);
  std::vector<Loop> loops;
  Loop o;
  o.points = outer.polygon;
  for (const auto& name : outer.edge_tags) {
    o.edge_tags.push_back(tag_from_name(name));
    o.subdivide.push_back(true);
  }
  loops.push_back(std::move(o));
  for (std::size_t i = 0; i < holes.size(); ++i) {
    Loop l;
    l.points = hole_pts[i];
    BoundaryTag t{holes[i].tag, BoundaryKind::Swimmer, holes[i].body};
    l.edge_tags.assign(l.points.size(), t);
    l.subdivide.assign(l.points.size(), false);
    loops.push_back(std::move(l));
  }
  Mesh m = finish(triangulate_loops(loops, size, options.smoothing_passes), std::nullopt);
  m.grading = options.grading;
  return m;
}

Mesh generate_channel(double length, double height, const std::vector<Hole>& holes, double target_h,
                      const GenerateOptions& options) {
  const OuterBoundary outer = rectangle_boundary(length, height);
  if (!options.mirror_symmetric) return generate_domain(outer, holes, target_h, options);
  if (!(target_h > 0.0)) throw ValidationError("target_h must be positive");

  const double y0 = 0.5 * height;
  const double snap = 1e-9 * std::max(length, height);
  std::vector<std::vector<Vec2>> hole_pts;
  for (const auto& h : holes) hole_pts.push_back(prepared_hole(h));
  check_layout(outer.polygon, hole_pts);
  const SizeField size = graded_size(hole_pts, target_h, options.grading, &outer, options.edge_spacing);

  struct Crossing {
    double x_right, x_left;
    std::vector<Vec2> arc;  // lower arc from the right axis point to the left one
    BoundaryTag tag;
  };
  std::vector<Crossing> crossing;
  std::vector<Loop> lower_holes;
  std::vector<BoundaryTag> partner_of_lower;  // aligned with lower_holes
  std::vector<std::size_t> upper;
  for (std::size_t i = 0; i < holes.size(); ++i) {
    auto& pts = hole_pts[i];
    double ymin = pts[0].y(), ymax = pts[0].y();
    for (auto& p : pts) {
      if (std::abs(p.y() - y0) <= snap) p.y() = y0;
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
    const BoundaryTag tag{holes[i].tag, BoundaryKind::Swimmer, holes[i].body};
    if (ymax < y0) {
      Loop l;
      l.points = pts;
      l.edge_tags.assign(pts.size(), tag);
      l.subdivide.assign(pts.size(), false);
      lower_holes.push_back(std::move(l));
      partner_of_lower.push_back(tag);
    } else if (ymin > y0) {
      upper.push_back(i);
    } else {
      std::vector<std::size_t> on_axis;
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (pts[k].y() == y0) on_axis.push_back(k);
      if (on_axis.size() != 2)
        throw ValidationError("hole " + holes[i].tag + " crosses the mirror axis without two vertices on it");
      std::size_t r = on_axis[0], l = on_axis[1];
      if (pts[r].x() < pts[l].x()) std::swap(r, l);
      const std::size_t n = pts.size();
      // Counter-clockwise polygon: walking backwards from the right point goes below the axis.
      Crossing c;
      c.tag = tag;
      c.x_right = pts[r].x();
      c.x_left = pts[l].x();
      for (std::size_t k = r;; k = (k + n - 1) % n) {
        c.arc.push_back(pts[k]);
        if (k == l) break;
      }
      for (const auto& p : c.arc)
        if (p.y() > y0) throw ValidationError("hole " + holes[i].tag + " is not symmetric about the mirror axis");
      crossing.push_back(std::move(c));
    }
  }
  for (std::size_t i : upper) {
    // Match every upper hole with the lower hole it mirrors.
    Vec2 c = Vec2::Zero();
    for (const auto& p : hole_pts[i]) c += p;
    c /= static_cast<double>(hole_pts[i].size());
    const Vec2 mirrored(c.x(), 2.0 * y0 - c.y());
    bool found = false;
    for (std::size_t k = 0; k < lower_holes.size(); ++k) {
      Vec2 lc = Vec2::Zero();
      for (const auto& p : lower_holes[k].points) lc += p;
      lc /= static_cast<double>(lower_holes[k].points.size());
      if ((lc - mirrored).norm() <= 1e-6 * std::max(length, height)) {
        partner_of_lower[k] = BoundaryTag{holes[i].tag, BoundaryKind::Swimmer, holes[i].body};
        found = true;
      }
    }
    if (!found) throw ValidationError("hole " + holes[i].tag + " has no mirror image below the axis");
  }
  std::sort(crossing.begin(), crossing.end(), [](const Crossing& a, const Crossing& b) { return a.x_right > b.x_right; });

  const BoundaryTag axis{kAxisTag, BoundaryKind::DirichletWall, -1};
  Loop o;
  auto add = [&](const Vec2& p, const BoundaryTag& t, bool sub) {
    o.points.push_back(p);
    o.edge_tags.push_back(t);
    o.subdivide.push_back(sub);
  };
  add({0.0, 0.0}, tag_from_name("bottom"), true);
  add({length, 0.0}, tag_from_name("right"), true);
  add({length, y0}, axis, true);
  for (const auto& c : crossing) {
    for (std::size_t k = 0; k + 1 < c.arc.size(); ++k) add(c.arc[k], c.tag, false);
    add(c.arc.back(), axis, true);
  }
  add({0.0, y0}, tag_from_name("left"), true);

  std::vector<Loop> loops{o};
  loops.insert(loops.end(), lower_holes.begin(), lower_holes.end());
  Draft lower = triangulate_loops(loops, size, options.smoothing_passes);

  std::vector<BoundaryTag> partner = lower.tags;
  for (auto& t : partner) {
    if (t.name == "bottom") t = tag_from_name("top");
    for (std::size_t k = 0; k < lower_holes.size(); ++k)
      if (t.name == lower_holes[k].edge_tags[0].name) t = partner_of_lower[k];
  }
  // Keep tag order stable: outer sides first as in the plain generator.
  Draft full = mirror_draft(lower, y0, partner);
  Mesh m = finish(std::move(full), y0);
  m.grading = options.grading;
  return m;
}

// ---------------------------------------------------------------------------
// Remeshing

namespace {

std::vector<std::vector<int>> boundary_loops(const Mesh& mesh) {
  std::unordered_map<int, int> out_edge;
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    if (!out_edge.emplace(mesh.boundary_edges[i].v[0], static_cast<int>(i)).second)
      throw ValidationError("boundary loop touches itself at vertex " + std::to_string(mesh.boundary_edges[i].v[0]));
  }
  std::vector<bool> used(mesh.boundary_edges.size(), false);
  std::vector<std::vector<int>> loops;
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    if (used[i]) continue;
    std::vector<int> loop;
    int e = static_cast<int>(i);
    while (!used[static_cast<std::size_t>(e)]) {
      used[static_cast<std::size_t>(e)] = true;
      loop.push_back(e);
      auto it = out_edge.find(mesh.boundary_edges[static_cast<std::size_t>(e)].v[1]);
      if (it == out_edge.end()) throw ValidationError("open boundary loop");
      e = it->second;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

void check_loops_simple(const Mesh& mesh, const std::vector<std::vector<int>>& loops) {
  std::vector<std::vector<Vec2>> polys;
  for (const auto& l : loops) {
    std::vector<Vec2> p;
    for (int e : l) p.push_back(mesh.vertices[static_cast<std::size_t>(mesh.boundary_edges[static_cast<std::size_t>(e)].v[0])]);
    if (!polygon_is_simple(p)) throw ValidationError("self-intersecting boundary loop");
    polys.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < polys.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      for (std::size_t a = 0; a < polys[i].size(); ++a)
        for (std::size_t b = 0; b < polys[j].size(); ++b)
          if (segments_intersect(polys[i][a], polys[i][(a + 1) % polys[i].size()], polys[j][b],
                                 polys[j][(b + 1) % polys[j].size()]))
            throw ValidationError("boundary loops intersect each other");
}

/// Size field grown from the boundary: each boundary vertex contributes its
/// mean edge length plus grading times the distance, capped by the longest
/// boundary edge. Frozen boundary vertices keep it fixed across remeshes.
SizeField boundary_size(const Mesh& mesh) {
  struct Source {
    Vec2 x;
    double h;
  };
  std::vector<double> sum(mesh.vertices.size(), 0.0);
  std::vector<int> count(mesh.vertices.size(), 0);
  double cap = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    const double l = (mesh.vertices[static_cast<std::size_t>(e.v[0])] - mesh.vertices[static_cast<std::size_t>(e.v[1])]).norm();
    cap = std::max(cap, l);
    for (int v : e.v) {
      sum[static_cast<std::size_t>(v)] += l;
      ++count[static_cast<std::size_t>(v)];
    }
  }
  auto sources = std::make_shared<std::vector<Source>>();
  for (std::size_t v = 0; v < sum.size(); ++v)
    if (count[v] > 0) sources->push_back({mesh.vertices[v], sum[v] / count[v]});
  std::sort(sources->begin(), sources->end(), [](const Source& a, const Source& b) { return a.h < b.h; });
  const double g = mesh.grading;
  return [sources, cap, g](const Vec2& x) {
    double h = cap;
    for (const auto& s : *sources) {
      if (s.h >= h) break;
      h = std::min(h, s.h + g * (x - s.x).norm());
    }
    return h;
  };
}

Draft remesh_draft(const Mesh& mesh, const std::vector<BoundaryEdge>& edges, const std::vector<BoundaryTag>& tags,
                   const SizeField& size, std::vector<int>& vertex_map) {
  // Boundary vertices in increasing old index become the first new points.
  std::vector<int> bverts;
  for (const auto& e : edges) bverts.insert(bverts.end(), e.v.begin(), e.v.end());
  std::sort(bverts.begin(), bverts.end());
  bverts.erase(std::unique(bverts.begin(), bverts.end()), bverts.end());
  vertex_map.assign(mesh.vertices.size(), -1);
  PlanarStraightLineGraph g;
  for (std::size_t i = 0; i < bverts.size(); ++i) {
    vertex_map[static_cast<std::size_t>(bverts[i])] = static_cast<int>(i);
    g.points.push_back(mesh.vertices[static_cast<std::size_t>(bverts[i])]);
  }
  for (const auto& e : edges)
    g.segments.push_back({vertex_map[static_cast<std::size_t>(e.v[0])], vertex_map[static_cast<std::size_t>(e.v[1])]});
  RefinementOptions opt;
  opt.size = size;
  const Triangulation tri = triangulate(g, opt);
  Draft d;
  d.points = tri.points;
  d.cells = tri.triangles;
  d.tags = tags;
  for (const auto& e : edges)
    d.edges.push_back({{vertex_map[static_cast<std::size_t>(e.v[0])], vertex_map[static_cast<std::size_t>(e.v[1])]}, e.tag});
  return d;
}

std::optional<RemeshResult> remesh_symmetric(const Mesh& mesh, const SizeField& size) {
  const double y0 = *mesh.symmetry_axis;
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double tol = 1e-9 * (hi - lo).maxCoeff();
  Mesh half;
  half.vertices = mesh.vertices;
  for (auto& v : half.vertices)
    if (std::abs(v.y() - y0) <= tol) v.y() = y0;
  for (const auto& c : mesh.cells) {
    double cy = 0.0;
    for (int v : c) cy += half.vertices[static_cast<std::size_t>(v)].y();
    if (cy / 3.0 < y0) half.cells.push_back(c);
  }
  if (2 * half.cells.size() != mesh.cells.size()) return std::nullopt;
  std::unordered_map<std::uint64_t, int> boundary_tag;
  for (const auto& e : mesh.boundary_edges) boundary_tag[edge_key(e.v[0], e.v[1])] = e.tag;
  std::unordered_map<std::uint64_t, std::pair<int, std::array<int, 2>>> edges;
  for (const auto& c : half.cells)
    for (int k = 0; k < 3; ++k) {
      const int a = c[static_cast<std::size_t>(k)], b = c[static_cast<std::size_t>((k + 1) % 3)];
      auto [it, fresh] = edges.try_emplace(edge_key(a, b), 1, std::array<int, 2>{a, b});
      if (!fresh) ++it->second.first;
    }
  std::vector<BoundaryTag> tags = mesh.tags;
  tags.push_back({kAxisTag, BoundaryKind::DirichletWall, -1});
  const int axis_tag = static_cast<int>(tags.size()) - 1;
  std::vector<BoundaryEdge> half_edges;
  for (const auto& [key, info] : edges) {
    if (info.first != 1) continue;
    auto it = boundary_tag.find(key);
    if (it != boundary_tag.end()) {
      half_edges.push_back({info.second, it->second});
    } else {
      const auto& a = half.vertices[static_cast<std::size_t>(info.second[0])];
      const auto& b = half.vertices[static_cast<std::size_t>(info.second[1])];
      if (a.y() != y0 || b.y() != y0) return std::nullopt;
      half_edges.push_back({info.second, axis_tag});
    }
  }
  std::sort(half_edges.begin(), half_edges.end(), [](const BoundaryEdge& a, const BoundaryEdge& b) { return a.v < b.v; });

  // Tag of the mirror image of every lower boundary edge.
  std::vector<int> mirror_of(mesh.vertices.size(), -1);
  std::vector<int> bverts;
  for (const auto& e : mesh.boundary_edges) bverts.insert(bverts.end(), e.v.begin(), e.v.end());
  std::sort(bverts.begin(), bverts.end());
  bverts.erase(std::unique(bverts.begin(), bverts.end()), bverts.end());
  std::vector<std::pair<double, int>> by_x;
  for (int v : bverts) by_x.emplace_back(half.vertices[static_cast<std::size_t>(v)].x(), v);
  std::sort(by_x.begin(), by_x.end());
  const double match_tol = 1e-7 * (hi - lo).maxCoeff();
  for (int v : bverts) {
    const Vec2& p = half.vertices[static_cast<std::size_t>(v)];
    const Vec2 target(p.x(), 2.0 * y0 - p.y());
    auto it = std::lower_bound(by_x.begin(), by_x.end(), std::make_pair(target.x() - match_tol, -1));
    for (; it != by_x.end() && it->first <= target.x() + match_tol; ++it)
      if ((half.vertices[static_cast<std::size_t>(it->second)] - target).norm() <= match_tol) {
        mirror_of[static_cast<std::size_t>(v)] = it->second;
        break;
      }
    if (mirror_of[static_cast<std::size_t>(v)] < 0) return std::nullopt;
  }
  std::vector<BoundaryTag> partner = tags;
  for (const auto& e : half_edges) {
    if (e.tag == axis_tag) continue;
    const auto key = edge_key(mirror_of[static_cast<std::size_t>(e.v[0])], mirror_of[static_cast<std::size_t>(e.v[1])]);
    auto it = boundary_tag.find(key);
    if (it == boundary_tag.end()) return std::nullopt;
    partner[static_cast<std::size_t>(e.tag)] = mesh.tags[static_cast<std::size_t>(it->second)];
  }

  std::vector<int> half_map;
  Draft lower = remesh_draft(half, half_edges, tags, size, half_map);
  Draft full = mirror_draft(lower, y0, partner);
  // Full tag table must keep the original order so tag indices stay valid.
  Draft ordered;
  ordered.points = full.points;
  ordered.cells = full.cells;
  ordered.tags = mesh.tags;
  for (const auto& e : full.edges) ordered.edges.push_back({e.v, ordered.tag_index(full.tags[static_cast<std::size_t>(e.tag)])});

  RemeshResult r;
  r.mesh = finish(std::move(ordered), y0);
  r.mesh.grading = mesh.grading;
  r.vertex_map.assign(mesh.vertices.size(), -1);
  // Lower-half vertices keep their draft index; upper ones go to the mirrored copy.
  std::vector<int> image(lower.points.size(), -1);
  {
    int next = static_cast<int>(lower.points.size());
    for (std::size_t v = 0; v < lower.points.size(); ++v) image[v] = lower.points[v].y() == y0 ? static_cast<int>(v) : next++;
  }
  for (int v : bverts) {
    const int lv = half_map[static_cast<std::size_t>(v)];
    if (lv >= 0) {
      r.vertex_map[static_cast<std::size_t>(v)] = lv;
    } else {
      const int m = half_map[static_cast<std::size_t>(mirror_of[static_cast<std::size_t>(v)])];
      if (m < 0) return std::nullopt;
      r.vertex_map[static_cast<std::size_t>(v)] = image[static_cast<std::size_t>(m)];
    }
  }
  return r;
}

}  // namespace

RemeshResult remesh_with_map(const Mesh& mesh) {
  const auto loops = boundary_loops(mesh);
  check_loops_simple(mesh, loops);
  const SizeField size = boundary_size(mesh);

  std::optional<RemeshResult> result;
  if (mesh.symmetry_axis) result = remesh_symmetric(mesh, size);
  if (!result) {
    std::vector<int> map;
    Draft d = remesh_draft(mesh, mesh.boundary_edges, mesh.tags, size, map);
    RemeshResult r;
    r.mesh = finish(std::move(d), std::nullopt);
    r.mesh.grading = mesh.grading;
    r.vertex_map = std::move(map);
    result = std::move(r);
  }
  if (mesh_quality(result->mesh).min_quality < mesh_quality(mesh).min_quality) {
    RemeshResult keep;
    keep.mesh = mesh;
    keep.replaced = false;
    keep.vertex_map.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < keep.vertex_map.size(); ++i) keep.vertex_map[i] = static_cast<int>(i);
    return keep;
  }
  return std::move(*result);
}

Mesh remesh(const Mesh& mesh) { return remesh_with_map(mesh).mesh; }

// ---------------------------------------------------------------------------
// MSH 2.2

Mesh parse_msh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<int, std::string> names;
  std::unordered_map<long, int> node_index;
  Mesh mesh;
  struct RawEdge {
    int a, b, phys;
  };
  std::vector<RawEdge> raw_edges;
  bool have_format = false, have_nodes = false, have_elements = false;
  auto expect_end = [&](const std::string& end) {
    if (!std::getline(in, line) || line.rfind(end, 0) != 0) throw ValidationError("MSH: missing " + end);
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "$MeshFormat") {
      std::getline(in, line);
      std::istringstream f(line);
      double version = 0.0;
      int type = -1;
      f >> version >> type;
      if (version < 2.0 || version >= 3.0 || type != 0) throw ValidationError("MSH: only ASCII format 2.x is supported");
      have_format = true;
      expect_end("$EndMeshFormat");
    } else if (line == "$PhysicalNames") {
      std::getline(in, line);
      const int n = std::stoi(line);
      for (int i = 0; i < n; ++i) {
        std::getline(in, line);
        std::istringstream f(line);
        int dim = 0, tag = 0;
        f >> dim >> tag;
        const auto q0 = line.find('"'), q1 = line.rfind('"');
        if (q0 == std::string::npos || q1 == q0) throw ValidationError("MSH: malformed physical name");
        names[tag] = line.substr(q0 + 1, q1 - q0 - 1);
      }
      expect_end("$EndPhysicalNames");
    } else if (line == "$Nodes") {
      std::getline(in, line);
      const int n = std::stoi(line);
      for (int i = 0; i < n; ++i) {
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(in >> id >> x >> y >> z)) throw ValidationError("MSH: truncated node list");
        node_index[id] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.emplace_back(x, y);
      }
      std::getline(in, line);
      expect_end("$EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      std::getline(in, line);
      const int n = std::stoi(line);
      for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ValidationError("MSH: truncated element list");
        std::istringstream f(line);
        long id = 0;
        int type = 0, ntags = 0;
        f >> id >> type >> ntags;
        std::vector<int> tags(static_cast<std::size_t>(std::max(ntags, 0)));
        for (auto& t : tags) f >> t;
        auto node = [&]() {
          long nid = 0;
          if (!(f >> nid)) throw ValidationError("MSH: truncated element " + std::to_string(id));
          auto it = node_index.find(nid);
          if (it == node_index.end()) throw ValidationError("MSH: element references unknown node");
          return it->second;
        };
        if (type == 1) {
          const int a = node(), b = node();
          if (tags.empty()) throw ValidationError("MSH: line element without physical tag");
          raw_edges.push_back({a, b, tags[0]});
        } else if (type == 2) {
          std::array<int, 3> c{node(), node(), node()};
          mesh.cells.push_back(c);
        } else {
          throw ValidationError("MSH: unsupported element type " + std::to_string(type));
        }
      }
      expect_end("$EndElements");
      have_elements = true;
    }
  }
  if (!have_format || !have_nodes || !have_elements) throw ValidationError("MSH: missing required section");
  for (auto& c : mesh.cells) {
    const double a = orient(mesh.vertices[static_cast<std::size_t>(c[0])], mesh.vertices[static_cast<std::size_t>(c[1])],
                            mesh.vertices[static_cast<std::size_t>(c[2])]);
    if (a < 0.0) std::swap(c[1], c[2]);
  }
  std::map<int, int> tag_of_phys;
  for (const auto& e : raw_edges) {
    auto it = names.find(e.phys);
    if (it == names.end()) throw ValidationError("MSH: physical tag " + std::to_string(e.phys) + " has no name");
    auto [pos, fresh] = tag_of_phys.try_emplace(e.phys, static_cast<int>(mesh.tags.size()));
    if (fresh) mesh.tags.push_back(tag_from_name(it->second));
    mesh.boundary_edges.push_back({{e.a, e.b}, pos->second});
  }
  mesh.validate();
  return mesh;
}

Mesh load_msh(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open mesh file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_msh(ss.str());
}

void save_msh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write mesh file " + path.string());
  f.precision(17);
  f << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  f << "$PhysicalNames\n" << mesh.tags.size() + 1 << "\n";
  for (std::size_t i = 0; i < mesh.tags.size(); ++i) f << "1 " << i + 1 << " \"" << mesh.tags[i].name << "\"\n";
  f << "2 " << mesh.tags.size() + 1 << " \"fluid\"\n$EndPhysicalNames\n";
  f << "$Nodes\n" << mesh.vertices.size() << "\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    f << i + 1 << " " << mesh.vertices[i].x() << " " << mesh.vertices[i].y() << " 0\n";
  f << "$EndNodes\n$Elements\n" << mesh.boundary_edges.size() + mesh.cells.size() << "\n";
  std::size_t id = 1;
  for (const auto& e : mesh.boundary_edges)
    f << id++ << " 1 2 " << e.tag + 1 << " " << e.tag + 1 << " " << e.v[0] + 1 << " " << e.v[1] + 1 << "\n";
  for (const auto& c : mesh.cells)
    f << id++ << " 2 2 " << mesh.tags.size() + 1 << " 1 " << c[0] + 1 << " " << c[1] + 1 << " " << c[2] + 1 << "\n";
  f << "$EndElements\n";
}

}  // namespace swimfem
