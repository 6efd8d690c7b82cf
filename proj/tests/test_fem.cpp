#include "support.hpp"

#include "swimfem/errors.hpp"
#include "swimfem/fem.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace swimfem;
using swimfem::testing::Poiseuille;

namespace {

Mesh unit_square() {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.cells = {{0, 1, 2}, {0, 2, 3}};
  m.tags = {tag_from_name("wall")};
  m.boundary_edges = {{{0, 1}, 0}, {{1, 2}, 0}, {{2, 3}, 0}, {{3, 0}, 0}};
  m.validate();
  return m;
}

FluidParams stokes_params(const Mesh& mesh) {
  FluidParams p;
  p.dirichlet.resize(mesh.tags.size());
  p.traction.resize(mesh.tags.size());
  return p;
}

}  // namespace

TEST(DofMap, UnitSquareCounts) {
  const DofMap d = build_taylor_hood(unit_square());
  EXPECT_EQ(d.velocity_dofs(), 18);
  EXPECT_EQ(d.pressure_dofs(), 4);
  EXPECT_EQ(d.num_edges, 5);
}

TEST(DofMap, CountsMatchVerticesAndEdges) {
  const Mesh m = generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.5}, 0.2, 24, "swimmer0", 0)}, 0.15);
  const DofMap d = build_taylor_hood(m);
  // Euler characteristic of a domain with one hole is zero.
  EXPECT_EQ(d.num_edges, m.num_vertices() + m.num_cells());
  EXPECT_EQ(d.velocity_dofs(), 2 * (m.num_vertices() + d.num_edges));
  EXPECT_EQ(d.pressure_dofs(), m.num_vertices());
}

TEST(DofMap, SwimmerLoopIsGamma) {
  const Mesh m = generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.5}, 0.2, 24, "swimmer0", 0)}, 0.15);
  const DofMap d = build_taylor_hood(m);
  const int tag = m.find_tag("swimmer0");
  int count = 0;
  for (const auto& e : d.boundary_edges) {
    if (e[3] != tag) continue;
    for (int k = 0; k < 3; ++k) {
      EXPECT_EQ(d.node_class[e[k]], DofClass::Swimmer);
      EXPECT_EQ(d.node_body[e[k]], 0);
    }
    ++count;
  }
  EXPECT_GT(count, 0);
  for (int n = 0; n < d.num_nodes(); ++n)
    if (d.node_class[n] == DofClass::Swimmer) {
      EXPECT_NEAR((d.node_coords[n] - Vec2(1.0, 0.5)).norm(), 0.2, 0.01);
    }
}

TEST(DofMap, UntaggedBoundaryDefaultsToDirichlet) {
  Mesh m = unit_square();
  m.tags.clear();
  for (auto& e : m.boundary_edges) e.tag = -1;
  const DofMap d = build_taylor_hood(m);
  int boundary = 0;
  for (int n = 0; n < d.num_nodes(); ++n)
    if (d.node_class[n] != DofClass::Interior) {
      EXPECT_EQ(d.node_class[n], DofClass::OuterDirichlet);
      ++boundary;
    }
  EXPECT_EQ(boundary, 8);
}

TEST(Assembly, StokesBlockIsSymmetric) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.2);
  const DofMap d = build_taylor_hood(m);
  const auto blocks = assemble_blocks(d, stokes_params(m), {});
  const Eigen::MatrixXd A(blocks.A);
  EXPECT_LT((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assembly, ConstantsAreDivergenceFree) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.2);
  const DofMap d = build_taylor_hood(m);
  const auto blocks = assemble_blocks(d, stokes_params(m), {});
  Vector u(d.velocity_dofs());
  for (int n = 0; n < d.num_nodes(); ++n) u.segment<2>(2 * n) = Vec2(0.7, -1.3);
  EXPECT_LT((blocks.B * u).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, ConvectionVanishesWhenMeshFollowsFlow) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.25);
  const DofMap d = build_taylor_hood(m);
  Vector w(d.velocity_dofs());
  for (int n = 0; n < d.num_nodes(); ++n) w.segment<2>(2 * n) = Vec2(std::sin(3.0 * d.node_coords[n].y()), d.node_coords[n].x());
  FluidParams p = stokes_params(m);
  p.rho = 2.0;
  AssemblyInput in;
  in.u_conv = &w;
  in.u_ale = &w;
  const auto moving = assemble_blocks(d, p, in);
  const auto still = assemble_blocks(d, p, {});
  EXPECT_EQ(Eigen::MatrixXd(moving.A - still.A).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assembly, ViscousBlockPositiveOnFreeDofs) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.5);
  const DofMap d = build_taylor_hood(m);
  const Eigen::MatrixXd A(assemble_blocks(d, stokes_params(m), {}).A);
  std::vector<int> free;
  for (int n = 0; n < d.num_nodes(); ++n)
    if (d.node_class[n] == DofClass::Interior) free.insert(free.end(), {2 * n, 2 * n + 1});
  ASSERT_FALSE(free.empty());
  Eigen::MatrixXd Af(free.size(), free.size());
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j) Af(i, j) = A(free[i], free[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Af);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Solve, PoiseuilleIsExact) {
  const Poiseuille flow;
  const Mesh m = swimfem::testing::poiseuille_mesh(0.15);
  const DofMap d = build_taylor_hood(m);
  SolveReport report;
  const auto sol = solve_flow(d, swimfem::testing::poiseuille_params(m, flow), {}, &report);
  double err = 0.0;
  for (int n = 0; n < d.num_nodes(); ++n) err = std::max(err, (sol.u.segment<2>(2 * n) - flow.u(d.node_coords[n])).cwiseAbs().maxCoeff());
  EXPECT_LT(err, 1e-9);
  double perr = 0.0;
  for (int v = 0; v < d.num_vertices; ++v) perr = std::max(perr, std::abs(sol.p[v] - flow.p(d.node_coords[v])));
  EXPECT_LT(perr, 1e-8);
  EXPECT_LT(report.residual, 1e-10);
  const auto blocks = assemble_blocks(d, swimfem::testing::poiseuille_params(m, flow), {});
  EXPECT_LT((blocks.B * sol.u).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Solve, ZeroDataGivesZero) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.2);
  const DofMap d = build_taylor_hood(m);
  const auto sol = solve_flow(d, stokes_params(m), {});
  EXPECT_EQ(sol.u.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sol.p.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, CavityWithoutGaugeIsSingular) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.25);
  const DofMap d = build_taylor_hood(m);
  FluidParams p = stokes_params(m);
  p.pressure_gauge = false;
  p.dirichlet[static_cast<std::size_t>(m.find_tag("top"))] = [](double, const Vec2&) { return Vec2(1.0, 0.0); };
  EXPECT_THROW(solve_flow(d, p, {}), NumericalError);
}

TEST(Solve, DrivenCavityIsDiscretelyIncompressible) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.1);
  const DofMap d = build_taylor_hood(m);
  FluidParams p = stokes_params(m);
  p.dirichlet[static_cast<std::size_t>(m.find_tag("top"))] = [](double, const Vec2& x) {
    return Vec2(16.0 * x.x() * x.x() * (1 - x.x()) * (1 - x.x()), 0.0);
  };
  const auto sol = solve_flow(d, p, {});
  const auto blocks = assemble_blocks(d, p, {});
  EXPECT_LT((blocks.B * sol.u).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Solve, QuadraticManufacturedSolutionIsExact) {
  const Mesh m = generate_channel(1.0, 1.0, {}, 0.2);
  const DofMap d = build_taylor_hood(m);
  FluidParams p = stokes_params(m);
  // u = (y^2, x^2), p = x: -lap u + grad p = (-1, -2).
  for (auto& f : p.dirichlet) f = [](double, const Vec2& x) { return Vec2(x.y() * x.y(), x.x() * x.x()); };
  p.force = [](double, const Vec2&) { return Vec2(-1.0, -2.0); };
  const auto sol = solve_flow(d, p, {});
  double err = 0.0;
  for (int n = 0; n < d.num_nodes(); ++n) {
    const Vec2 x = d.node_coords[n];
    err = std::max(err, (sol.u.segment<2>(2 * n) - Vec2(x.y() * x.y(), x.x() * x.x())).norm());
  }
  EXPECT_LT(err, 1e-9);
  // Pressure is fixed up to a constant; compare differences.
  const double shift = sol.p[0] - d.node_coords[0].x();
  for (int v = 0; v < d.num_vertices; ++v) EXPECT_NEAR(sol.p[v] - shift, d.node_coords[v].x(), 1e-8);
}

TEST(Convergence, SmoothSolutionOrders) {
  std::vector<Mesh> meshes{generate_channel(1.0, 1.0, {}, 0.25)};
  meshes.push_back(refine_uniform(meshes.back()));
  meshes.push_back(refine_uniform(meshes.back()));
  const auto r = convergence_study(swimfem::testing::smooth_stokes(), meshes);
  ASSERT_EQ(r.order_u.size(), 2u);
  EXPECT_FALSE(r.exact);
  EXPECT_GE(r.order_u.back(), 2.7);
  EXPECT_GE(r.order_p.back(), 1.7);
}

TEST(Convergence, SolutionInSpaceIsExact) {
  ExactStokes e;
  e.u = [](const Vec2& x) { return Vec2(x.y() * x.y(), x.x() * x.x()); };
  e.p = [](const Vec2& x) { return x.x(); };
  e.f = [](const Vec2&) { return Vec2(-1.0, -2.0); };
  std::vector<Mesh> meshes{generate_channel(1.0, 1.0, {}, 0.5)};
  meshes.push_back(refine_uniform(meshes.back()));
  meshes.push_back(refine_uniform(meshes.back()));
  const auto r = convergence_study(e, meshes);
  EXPECT_TRUE(r.exact);
  for (double err : r.error_u) EXPECT_LT(err, 1e-10);
}

TEST(Convergence, NeedsThreeMeshes) {
  EXPECT_THROW(convergence_study(swimfem::testing::smooth_stokes(), {generate_channel(1.0, 1.0, {}, 0.5)}), ValidationError);
}

TEST(Evaluation, TractionOfPoiseuilleOnWallBalancesPressureDrop) {
  // Shear stress on the bottom wall: mu du/dy = 4 mu U over the length.
  const Poiseuille flow;
  Mesh m = swimfem::testing::poiseuille_mesh(0.2);
  const DofMap d = build_taylor_hood(m);
  const auto params = swimfem::testing::poiseuille_params(m, flow);
  const auto sol = solve_flow(d, params, {});
  EXPECT_LT(max_divergence(m, d, sol.u), 1e-9);
  const PointLocator loc(m);
  const auto hit = loc.locate({1.3, 0.4});
  EXPECT_NEAR((eval_velocity(d, sol.u, hit.cell, hit.bary) - flow.u({1.3, 0.4})).norm(), 0.0, 1e-9);
  EXPECT_NEAR(eval_pressure(d, sol.p, hit.cell, hit.bary), flow.p({1.3, 0.4}), 1e-8);
}
