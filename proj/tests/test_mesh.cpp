#include "swimfem/errors.hpp"
#include "swimfem/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace swimfem;

namespace {

const char* kUnitSquare = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "wall"
2 2 "fluid"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 1 1 1 2
2 1 2 1 1 2 3
3 1 2 1 1 3 4
4 1 2 1 1 4 1
5 2 2 2 1 1 2 3
6 2 2 2 1 1 3 4
$EndElements
)";

std::string with_elements(const std::string& elements) {
  std::string text = kUnitSquare;
  const auto a = text.find("$Elements");
  return text.substr(0, a) + "$Elements\n" + elements + "$EndElements\n";
}

std::set<std::pair<double, double>> boundary_points(const Mesh& m) {
  std::set<std::pair<double, double>> s;
  for (const auto& e : m.boundary_edges)
    for (int v : e.v) s.emplace(m.vertices[v].x(), m.vertices[v].y());
  return s;
}

std::multiset<std::string> boundary_tag_names(const Mesh& m) {
  std::multiset<std::string> s;
  for (const auto& e : m.boundary_edges) s.insert(m.tags[e.tag].name);
  return s;
}

}  // namespace

TEST(Quality, EquilateralIsOne) {
  EXPECT_NEAR(triangle_quality({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}), 1.0, 1e-12);
}

TEST(Quality, CollinearIsZero) { EXPECT_EQ(triangle_quality({0, 0}, {1, 0}, {2, 0}), 0.0); }

TEST(Quality, RightIsoscelesMatchesRadiusRatio) {
  const double r_in = (2.0 - std::sqrt(2.0)) / 2.0;
  const double r_circ = std::sqrt(2.0) / 2.0;
  EXPECT_NEAR(triangle_quality({0, 0}, {1, 0}, {0, 1}), 2.0 * r_in / r_circ, 1e-12);
  EXPECT_NEAR(triangle_quality({0, 0}, {1, 0}, {0, 1}), 0.8284, 1e-4);
}

TEST(Quality, InvariantUnderRigidMotionAndScaling) {
  const Vec2 a(0.1, 0.2), b(1.3, -0.4), c(0.7, 0.9);
  const double q = triangle_quality(a, b, c);
  for (double angle : {0.3, 1.7, -2.9})
    for (double s : {1e-3, 0.5, 7.0}) {
      Mat2 R;
      R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
      const Vec2 t(3.0, -11.0);
      EXPECT_NEAR(triangle_quality(s * R * a + t, s * R * b + t, s * R * c + t), q, 1e-12);
    }
}

TEST(Quality, InvertedIsZero) { EXPECT_EQ(triangle_quality({0, 0}, {0, 1}, {1, 0}), 0.0); }

TEST(GenerateChannel, PlainRectangleMeetsCellBound) {
  const Mesh m = generate_channel(4.0, 1.0, {}, 0.25);
  EXPECT_GE(m.num_cells(), 2 * 16 * 4);
  const auto q = mesh_quality(m);
  EXPECT_GT(q.min_quality, 0.3);
  for (int c = 0; c < m.num_cells(); ++c) EXPECT_GT(m.signed_area(c), 0.0);
  for (const char* tag : {"bottom", "right", "top", "left"}) EXPECT_GE(m.find_tag(tag), 0) << tag;
}

TEST(GenerateChannel, DiskLoopTaggedAsSwimmer) {
  const Mesh m = generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.5}, 0.2, 32, "swimmer0", 0)}, 0.1);
  const int tag = m.find_tag("swimmer0");
  ASSERT_GE(tag, 0);
  EXPECT_EQ(m.tags[tag].kind, BoundaryKind::Swimmer);
  EXPECT_EQ(m.tags[tag].body, 0);
  double perimeter = 0.0;
  for (const auto& e : m.boundary_edges)
    if (e.tag == tag) perimeter += (m.vertices[e.v[1]] - m.vertices[e.v[0]]).norm();
  EXPECT_NEAR(perimeter, 2.0 * kPi * 0.2, 0.02 * 2.0 * kPi * 0.2);
  for (int v : m.tag_vertices(tag)) EXPECT_NEAR((m.vertices[v] - Vec2(1.0, 0.5)).norm(), 0.2, 1e-12);
}

TEST(GenerateChannel, DiskTouchingWallIsRejected) {
  EXPECT_THROW(generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.2}, 0.2, 32, "swimmer0", 0)}, 0.1), ValidationError);
}

TEST(GenerateChannel, OverlappingHolesAreRejected) {
  EXPECT_THROW(generate_channel(4.0, 2.0,
                                {Hole::circle({1.0, 1.0}, 0.3, 32, "swimmer0", 0),
                                 Hole::circle({1.4, 1.0}, 0.3, 32, "swimmer1", 1)},
                                0.1),
               ValidationError);
}

TEST(GenerateChannel, NonPositiveSizeIsRejected) {
  EXPECT_THROW(generate_channel(1.0, 1.0, {}, 0.0), ValidationError);
  EXPECT_THROW(generate_channel(1.0, 1.0, {}, -0.1), ValidationError);
}

TEST(GenerateChannel, MirrorSymmetricMeshIsSymmetric) {
  GenerateOptions opt;
  opt.mirror_symmetric = true;
  const Mesh m = generate_channel(3.0, 2.0, {Hole::circle({1.5, 1.0}, 0.3, 32, "swimmer0", 0)}, 0.2, opt);
  ASSERT_TRUE(m.symmetry_axis.has_value());
  std::set<std::pair<long long, long long>> pts;
  auto key = [](const Vec2& x) { return std::pair{std::llround(x.x() * 1e9), std::llround(x.y() * 1e9)}; };
  for (const auto& v : m.vertices) pts.insert(key(v));
  for (const auto& v : m.vertices) EXPECT_TRUE(pts.count(key({v.x(), 2.0 - v.y()}))) << v.transpose();
}

TEST(GenerateChannel, EdgeSpacingRefinesThatEdge) {
  GenerateOptions opt;
  opt.edge_spacing = {{"bottom", 0.1}};
  const Mesh m = generate_channel(4.0, 2.0, {}, 0.5, opt);
  const int bottom = m.find_tag("bottom");
  const int top = m.find_tag("top");
  int nb = 0, nt = 0;
  for (const auto& e : m.boundary_edges) {
    nb += e.tag == bottom;
    nt += e.tag == top;
  }
  EXPECT_GE(nb, 40);
  EXPECT_LT(nt, nb / 2);
  opt.edge_spacing = {{"bottom", 0.0}};
  EXPECT_THROW(generate_channel(4.0, 2.0, {}, 0.5, opt), ValidationError);
}

TEST(Displace, ZeroDisplacementIsIdentity) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.2);
  const Mesh d = displace(m, std::vector<Vec2>(m.vertices.size(), Vec2::Zero()));
  EXPECT_EQ(d.vertices, m.vertices);
  EXPECT_EQ(d.cells, m.cells);
}

TEST(Displace, TranslationKeepsQuality) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.2);
  const Mesh d = displace(m, std::vector<Vec2>(m.vertices.size(), Vec2(3.5, -2.0)));
  const auto q0 = mesh_quality(m), q1 = mesh_quality(d);
  for (int c = 0; c < m.num_cells(); ++c) EXPECT_NEAR(q0.cell_quality[c], q1.cell_quality[c], 1e-12);
}

TEST(Displace, CollapsingVertexNamesCell) {
  const Mesh m = parse_msh(kUnitSquare);
  std::vector<Vec2> d(4, Vec2::Zero());
  // Vertex 1 at (1,0) pushed past the diagonal from (0,0) to (1,1).
  d[1] = Vec2(-0.5, 0.8);
  try {
    displace(m, d);
    FAIL() << "expected an inverted element";
  } catch (const InvertedElementError& e) {
    EXPECT_EQ(e.cell(), 0);
  }
}

TEST(LoadMsh, UnitSquare) {
  const Mesh m = parse_msh(kUnitSquare);
  EXPECT_EQ(m.num_vertices(), 4);
  EXPECT_EQ(m.num_cells(), 2);
  EXPECT_EQ(m.boundary_edges.size(), 4u);
  ASSERT_GE(m.find_tag("wall"), 0);
}

TEST(LoadMsh, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "swimfem_msh_test";
  std::filesystem::create_directories(dir);
  const Mesh m = generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.5}, 0.2, 24, "swimmer0", 0)}, 0.2);
  save_msh(m, dir / "m.msh");
  const Mesh r = load_msh(dir / "m.msh");
  EXPECT_EQ(r.num_vertices(), m.num_vertices());
  EXPECT_EQ(r.num_cells(), m.num_cells());
  EXPECT_EQ(boundary_tag_names(r), boundary_tag_names(m));
  const int s = r.find_tag("swimmer0");
  ASSERT_GE(s, 0);
  EXPECT_EQ(r.tags[s].kind, BoundaryKind::Swimmer);
  std::filesystem::remove_all(dir);
}

TEST(LoadMsh, QuadrangleIsUnsupported) {
  const std::string text = with_elements("5\n1 1 2 1 1 1 2\n2 1 2 1 1 2 3\n3 1 2 1 1 3 4\n4 1 2 1 1 4 1\n5 3 2 2 1 1 2 3 4\n");
  EXPECT_THROW(parse_msh(text), ValidationError);
}

TEST(LoadMsh, OrphanBoundaryEdgeIsRejected) {
  const std::string text = with_elements(
      "7\n1 1 2 1 1 1 2\n2 1 2 1 1 2 3\n3 1 2 1 1 3 4\n4 1 2 1 1 4 1\n5 1 2 1 1 1 3\n6 2 2 2 1 1 2 3\n7 2 2 2 1 1 3 4\n");
  EXPECT_THROW(parse_msh(text), ValidationError);
}

TEST(LoadMsh, MissingPhysicalNameIsRejected) {
  const std::string text = with_elements("6\n1 1 2 7 1 1 2\n2 1 2 1 1 2 3\n3 1 2 1 1 3 4\n4 1 2 1 1 4 1\n5 2 2 2 1 1 2 3\n6 2 2 2 1 1 3 4\n");
  EXPECT_THROW(parse_msh(text), ValidationError);
}

TEST(TagNames, KindsFromNames) {
  EXPECT_EQ(tag_from_name("inflow").kind, BoundaryKind::DirichletInflow);
  EXPECT_EQ(tag_from_name("outflow_upper").kind, BoundaryKind::NeumannOutflow);
  EXPECT_EQ(tag_from_name("swimmer3").kind, BoundaryKind::Swimmer);
  EXPECT_EQ(tag_from_name("swimmer3").body, 3);
  EXPECT_EQ(tag_from_name("side").kind, BoundaryKind::DirichletWall);
}

TEST(Remesh, HighQualityMeshDoesNotDegrade) {
  const Mesh m = generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.5}, 0.2, 32, "swimmer0", 0)}, 0.1);
  const Mesh r = remesh(m);
  EXPECT_GE(mesh_quality(r).min_quality, mesh_quality(m).min_quality - 1e-9);
}

TEST(Remesh, DistortedInteriorRecovers) {
  const Mesh m = generate_channel(2.0, 1.0, {}, 0.1);
  const auto mask = m.boundary_vertex_mask();
  Mesh distorted = m;
  for (double s = 0.05;; s += 0.05) {
    std::vector<Vec2> d(m.vertices.size(), Vec2::Zero());
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (mask[i]) continue;
      const Vec2& x = m.vertices[i];
      d[i] = s * std::sin(kPi * x.y()) * Vec2(std::sin(kPi * x.x()), 0.0);
    }
    try {
      distorted = displace(m, d);
    } catch (const InvertedElementError&) {
      break;
    }
    if (mesh_quality(distorted).min_quality < 0.05) break;
  }
  ASSERT_LT(mesh_quality(distorted).min_quality, 0.2);
  const Mesh r = remesh(distorted);
  EXPECT_GE(mesh_quality(r).min_quality, 0.3);
}

TEST(Remesh, PreservesBoundaryVerticesAndTags) {
  const Mesh m0 = generate_channel(3.0, 1.5, {Hole::ellipse({1.5, 0.75}, 0.4, 0.2, 0.3, 40, "swimmer0", 0)}, 0.15);
  std::vector<Vec2> d(m0.vertices.size(), Vec2::Zero());
  const int tag = m0.find_tag("swimmer0");
  for (int v : m0.tag_vertices(tag)) d[v] = Vec2(0.01, 0.005);
  const Mesh m = displace(m0, d);
  const auto r = remesh_with_map(m);
  EXPECT_EQ(boundary_points(r.mesh), boundary_points(m));
  EXPECT_EQ(boundary_tag_names(r.mesh), boundary_tag_names(m));
  const auto mask = m.boundary_vertex_mask();
  for (int v = 0; v < m.num_vertices(); ++v)
    if (mask[v]) {
      ASSERT_GE(r.vertex_map[v], 0);
      EXPECT_EQ(r.mesh.vertices[r.vertex_map[v]], m.vertices[v]);
    }
  for (int c = 0; c < r.mesh.num_cells(); ++c) EXPECT_GT(r.mesh.signed_area(c), 0.0);
}

TEST(Remesh, SelfIntersectingLoopIsRejected) {
  Mesh m;
  m.vertices = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  m.tags = {tag_from_name("wall")};
  m.boundary_edges = {{{0, 1}, 0}, {{1, 2}, 0}, {{2, 3}, 0}, {{3, 0}, 0}};
  EXPECT_THROW(remesh(m), ValidationError);
}

TEST(Remesh, RepeatedRemeshKeepsCellCount) {
  Mesh m = generate_channel(4.0, 2.0, {Hole::circle({2.0, 1.0}, 0.3, 40, "swimmer0", 0)}, 0.3);
  const int n0 = remesh(m).num_cells();
  for (int i = 0; i < 5; ++i) m = remesh(m);
  EXPECT_LT(std::abs(m.num_cells() - n0), n0 / 10 + 1);
}

TEST(PointLocator, FindsContainingCell) {
  const Mesh m = generate_channel(2.0, 1.0, {}, 0.1);
  const PointLocator loc(m);
  for (const Vec2& p : {Vec2(0.31, 0.77), Vec2(1.9, 0.05), Vec2(1.0, 0.5)}) {
    const auto hit = loc.locate(p);
    ASSERT_TRUE(hit.inside);
    Vec2 q = Vec2::Zero();
    for (int k = 0; k < 3; ++k) q += hit.bary[k] * m.vertices[m.cells[hit.cell][k]];
    EXPECT_NEAR((q - p).norm(), 0.0, 1e-12);
  }
}

TEST(RefineUniform, QuadruplesCells) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.25);
  const Mesh r = refine_uniform(m);
  EXPECT_EQ(r.num_cells(), 4 * m.num_cells());
  EXPECT_EQ(r.boundary_edges.size(), 2 * m.boundary_edges.size());
}
