#include "swimfem/fem.hpp"

#include "swimfem/errors.hpp"
#include "swimfem/quadrature.hpp"
#include "swimfem/sparse_lu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace swimfem {

bool DofMap::has_neumann() const {
  return std::any_of(node_class.begin(), node_class.end(), [](DofClass c) { return c == DofClass::OuterNeumann; });
}

namespace {

int priority(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Swimmer: return 3;
    case BoundaryKind::DirichletWall: return 2;
    case BoundaryKind::DirichletInflow: return 1;
    case BoundaryKind::NeumannOutflow: return 0;
  }
  return 0;
}

DofClass class_of(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Swimmer: return DofClass::Swimmer;
    case BoundaryKind::NeumannOutflow: return DofClass::OuterNeumann;
    default: return DofClass::OuterDirichlet;
  }
}

struct CellGeometry {
  std::array<Vec2, 3> x;
  std::array<Vec2, 3> grad_lambda;
  double area = 0.0;
};

CellGeometry cell_geometry(const DofMap& dofs, int cell) {
  CellGeometry g;
  const auto& n = dofs.cell_nodes[static_cast<std::size_t>(cell)];
  for (int i = 0; i < 3; ++i) g.x[static_cast<std::size_t>(i)] = dofs.node_coords[static_cast<std::size_t>(n[static_cast<std::size_t>(i)])];
  const double twice = orient(g.x[0], g.x[1], g.x[2]);
  if (!(twice > 0.0) || !std::isfinite(twice))
    throw InvertedElementError(cell, "cell " + std::to_string(cell) + " is degenerate or inverted");
  g.area = 0.5 * twice;
  for (int i = 0; i < 3; ++i) {
    const Vec2& b = g.x[static_cast<std::size_t>((i + 1) % 3)];
    const Vec2& c = g.x[static_cast<std::size_t>((i + 2) % 3)];
    g.grad_lambda[static_cast<std::size_t>(i)] = Vec2(b.y() - c.y(), c.x() - b.x()) / twice;
  }
  return g;
}

std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& gl) {
  return {(4.0 * l[0] - 1.0) * gl[0],
          (4.0 * l[1] - 1.0) * gl[1],
          (4.0 * l[2] - 1.0) * gl[2],
          4.0 * (l[0] * gl[1] + l[1] * gl[0]),
          4.0 * (l[1] * gl[2] + l[2] * gl[1]),
          4.0 * (l[2] * gl[0] + l[0] * gl[2])};
}

Vec2 nodal(const Vector& u, int node) { return {u[2 * node], u[2 * node + 1]}; }

}  // namespace

std::array<double, 6> p2_shape(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],          4.0 * l[1] * l[2],          4.0 * l[2] * l[0]};
}

DofMap build_taylor_hood(const Mesh& mesh) {
  DofMap d;
  d.num_vertices = mesh.num_vertices();
  std::unordered_map<std::uint64_t, int> edge_id;
  edge_id.reserve(mesh.cells.size() * 2);
  auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };
  auto edge = [&](int a, int b) {
    auto [it, fresh] = edge_id.try_emplace(key(a, b), d.num_edges);
    if (fresh) {
      d.edge_vertices.push_back({a, b});
      ++d.num_edges;
    }
    return d.num_vertices + it->second;
  };
  d.cell_nodes.reserve(mesh.cells.size());
  for (const auto& c : mesh.cells)
    d.cell_nodes.push_back({c[0], c[1], c[2], edge(c[0], c[1]), edge(c[1], c[2]), edge(c[2], c[0])});
  d.node_coords = mesh.vertices;
  for (const auto& e : d.edge_vertices)
    d.node_coords.push_back(0.5 * (mesh.vertices[static_cast<std::size_t>(e[0])] + mesh.vertices[static_cast<std::size_t>(e[1])]));
  const auto n = static_cast<std::size_t>(d.num_nodes());
  d.node_class.assign(n, DofClass::Interior);
  d.node_tag.assign(n, -1);
  d.node_body.assign(n, -1);
  std::vector<int> best(n, -1);
  auto claim = [&](int node, int tag) {
    const BoundaryKind kind = mesh.kind_of(tag);
    const int pr = priority(kind);
    if (pr <= best[static_cast<std::size_t>(node)]) return;
    best[static_cast<std::size_t>(node)] = pr;
    d.node_class[static_cast<std::size_t>(node)] = class_of(kind);
    d.node_tag[static_cast<std::size_t>(node)] = tag;
    d.node_body[static_cast<std::size_t>(node)] =
        kind == BoundaryKind::Swimmer ? mesh.tags[static_cast<std::size_t>(tag)].body : -1;
  };
  for (const auto& e : mesh.boundary_edges) {
    auto it = edge_id.find(key(e.v[0], e.v[1]));
    if (it == edge_id.end()) throw ValidationError("boundary edge is not an edge of the mesh");
    const int mid = d.num_vertices + it->second;
    claim(e.v[0], e.tag);
    claim(e.v[1], e.tag);
    claim(mid, e.tag);
    d.boundary_edges.push_back({e.v[0], mid, e.v[1], e.tag});
  }
  return d;
}

SystemBlocks assemble_blocks(const DofMap& dofs, const FluidParams& params, const AssemblyInput& in) {
  if (!(params.mu > 0.0)) throw ValidationError("viscosity must be positive");
  if (params.rho < 0.0) throw ValidationError("density must be non-negative");
  const int nu = dofs.velocity_dofs();
  const int np = dofs.pressure_dofs();
  const bool unsteady = params.rho > 0.0 && in.dt > 0.0 && in.u_prev != nullptr;
  const bool bdf2 = unsteady && params.bdf_order == 2 && in.u_prev2 != nullptr;
  const bool convect = params.rho > 0.0 && (in.u_conv != nullptr || in.u_ale != nullptr);
  const double time_coef = unsteady ? params.rho * (bdf2 ? 1.5 : 1.0) / in.dt : 0.0;

  std::vector<Eigen::Triplet<double>> ta, tb;
  ta.reserve(dofs.cell_nodes.size() * 144);
  tb.reserve(dofs.cell_nodes.size() * 36);
  Vector G = Vector::Zero(nu);

  const auto& rule = quadrature::triangle_degree4();
  for (int cell = 0; cell < static_cast<int>(dofs.cell_nodes.size()); ++cell) {
    const auto& nodes = dofs.cell_nodes[static_cast<std::size_t>(cell)];
    const CellGeometry g = cell_geometry(dofs, cell);
    double Ae[12][12] = {};
    double Be[3][12] = {};
    double Ge[12] = {};
    for (const auto& qp : rule) {
      const double w = qp.weight * g.area;
      const auto phi = p2_shape(qp.bary);
      const auto dphi = p2_gradients(qp.bary, g.grad_lambda);
      Vec2 wconv = Vec2::Zero();
      Vec2 history = Vec2::Zero();
      for (int k = 0; k < 6; ++k) {
        const int node = nodes[static_cast<std::size_t>(k)];
        if (convect) {
          if (in.u_conv) wconv += phi[static_cast<std::size_t>(k)] * nodal(*in.u_conv, node);
          if (in.u_ale) wconv -= phi[static_cast<std::size_t>(k)] * nodal(*in.u_ale, node);
        }
        if (unsteady) {
          Vec2 h = nodal(*in.u_prev, node);
          if (bdf2) h = 2.0 * h - 0.5 * nodal(*in.u_prev2, node);
          history += phi[static_cast<std::size_t>(k)] * h;
        }
      }
      Vec2 rhs = Vec2::Zero();
      if (params.force) {
        const Vec2 x = qp.bary[0] * g.x[0] + qp.bary[1] * g.x[1] + qp.bary[2] * g.x[2];
        rhs += params.force(in.t, x);
      }
      if (unsteady) rhs += params.rho / in.dt * history;
      for (int a = 0; a < 6; ++a) {
        const double pa = phi[static_cast<std::size_t>(a)];
        const Vec2& da = dphi[static_cast<std::size_t>(a)];
        Ge[2 * a] += w * rhs.x() * pa;
        Ge[2 * a + 1] += w * rhs.y() * pa;
        for (int b = 0; b < 6; ++b) {
          const Vec2& db = dphi[static_cast<std::size_t>(b)];
          const double pb = phi[static_cast<std::size_t>(b)];
          double diag = params.mu * da.dot(db);
          if (unsteady) diag += time_coef * pa * pb;
          if (convect) diag += params.rho * wconv.dot(db) * pa;
          for (int c = 0; c < 2; ++c)
            for (int e = 0; e < 2; ++e) {
              double v = params.mu * db[c] * da[e];
              if (c == e) v += diag;
              Ae[2 * a + c][2 * b + e] += w * v;
            }
        }
      }
      for (int k = 0; k < 3; ++k)
        for (int b = 0; b < 6; ++b)
          for (int e = 0; e < 2; ++e) Be[k][2 * b + e] -= w * qp.bary[static_cast<std::size_t>(k)] * dphi[static_cast<std::size_t>(b)][e];
    }
    int gdof[12];
    for (int a = 0; a < 6; ++a) {
      gdof[2 * a] = 2 * nodes[static_cast<std::size_t>(a)];
      gdof[2 * a + 1] = 2 * nodes[static_cast<std::size_t>(a)] + 1;
    }
    for (int i = 0; i < 12; ++i) {
      if (!std::isfinite(Ge[i])) throw NumericalError("non-finite load in cell " + std::to_string(cell));
      G[gdof[i]] += Ge[i];
      for (int j = 0; j < 12; ++j) {
        if (!std::isfinite(Ae[i][j])) throw NumericalError("non-finite matrix entry in cell " + std::to_string(cell));
        if (Ae[i][j] != 0.0) ta.emplace_back(gdof[i], gdof[j], Ae[i][j]);
      }
    }
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 12; ++j)
        if (Be[k][j] != 0.0) tb.emplace_back(nodes[static_cast<std::size_t>(k)], gdof[j], Be[k][j]);
  }

  // Neumann traction on outflow edges.
  const double s = std::sqrt(0.15);
  const double gs[3] = {0.5 - s, 0.5, 0.5 + s};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (const auto& e : dofs.boundary_edges) {
    const int tag = e[3];
    if (tag < 0 || dofs.node_class[static_cast<std::size_t>(e[1])] != DofClass::OuterNeumann) continue;
    if (static_cast<std::size_t>(tag) >= params.traction.size() || !params.traction[static_cast<std::size_t>(tag)]) continue;
    const Vec2& a = dofs.node_coords[static_cast<std::size_t>(e[0])];
    const Vec2& b = dofs.node_coords[static_cast<std::size_t>(e[2])];
    const double len = (b - a).norm();
    for (int q = 0; q < 3; ++q) {
      const double t = gs[q];
      const Vec2 g = params.traction[static_cast<std::size_t>(tag)](in.t, a + t * (b - a));
      const double N[3] = {(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)};
      for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 2; ++c) G[2 * e[static_cast<std::size_t>(k)] + c] += gw[q] * len * N[k] * g[c];
    }
  }

  SystemBlocks out;
  out.A.resize(nu, nu);
  out.A.setFromTriplets(ta.begin(), ta.end());
  out.B.resize(np, nu);
  out.B.setFromTriplets(tb.begin(), tb.end());
  out.G = std::move(G);
  return out;
}

SparseMatrix block_matrix(const SystemBlocks& blocks, int extra) {
  const int nu = static_cast<int>(blocks.A.rows());
  const int np = static_cast<int>(blocks.B.rows());
  const int n = nu + np + extra;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(blocks.A.nonZeros() + 2 * blocks.B.nonZeros()));
  for (int k = 0; k < blocks.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(blocks.A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < blocks.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(blocks.B, k); it; ++it) {
      t.emplace_back(nu + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nu + it.row(), it.value());
    }
  SparseMatrix K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

Vector dirichlet_values(const DofMap& dofs, const FluidParams& params, double t) {
  Vector v = Vector::Zero(dofs.velocity_dofs());
  for (int n = 0; n < dofs.num_nodes(); ++n) {
    const auto cls = dofs.node_class[static_cast<std::size_t>(n)];
    if (cls != DofClass::OuterDirichlet && cls != DofClass::Swimmer) continue;
    const int tag = dofs.node_tag[static_cast<std::size_t>(n)];
    if (tag < 0 || static_cast<std::size_t>(tag) >= params.dirichlet.size() || !params.dirichlet[static_cast<std::size_t>(tag)])
      continue;
    const Vec2 h = params.dirichlet[static_cast<std::size_t>(tag)](t, dofs.node_coords[static_cast<std::size_t>(n)]);
    v[2 * n] = h.x();
    v[2 * n + 1] = h.y();
  }
  return v;
}

void fluid_constraints(const DofMap& dofs, const FluidParams& params, const Vector& boundary_values,
                       LinearSystem& system) {
  const int nu = dofs.velocity_dofs();
  const int np = dofs.pressure_dofs();
  const bool pin = params.pressure_gauge && !dofs.has_neumann();
  std::vector<Eigen::Triplet<double>> t;
  system.lift = Vector::Zero(nu + np);
  int col = 0;
  for (int n = 0; n < dofs.num_nodes(); ++n) {
    const auto cls = dofs.node_class[static_cast<std::size_t>(n)];
    for (int c = 0; c < 2; ++c) {
      const int dof = 2 * n + c;
      if (cls == DofClass::Interior || cls == DofClass::OuterNeumann) {
        t.emplace_back(dof, col++, 1.0);
      } else {
        system.lift[dof] = boundary_values[dof];
      }
    }
  }
  for (int k = 0; k < np; ++k) {
    if (pin && k == 0) continue;
    t.emplace_back(nu + k, col++, 1.0);
  }
  system.P.resize(nu + np, col);
  system.P.setFromTriplets(t.begin(), t.end());
}

Vector solve_saddle_point(const LinearSystem& system, SolveReport* report) {
  if (system.K.rows() != system.P.rows() || system.F.size() != system.K.rows() || system.lift.size() != system.K.rows())
    throw ValidationError("dimension mismatch between system matrix and constraint projection");
  const SparseMatrix PT = system.P.transpose();
  SparseMatrix Kr = PT * system.K * system.P;
  Kr.makeCompressed();
  const Vector rr = PT * (system.F - system.K * system.lift);
  SparseLU lu;
  try {
    lu.factorize(Kr);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + (system.description.empty() ? "" : " (" + system.description + ")"));
  }
  Vector y = lu.solve(rr);
  double err = SparseLU::backward_error(Kr, y, rr);
  for (int k = 0; k < 3 && err > 1e-14; ++k) {
    y += lu.solve(rr - Kr * y);
    err = SparseLU::backward_error(Kr, y, rr);
  }
  if (!y.allFinite()) throw NumericalError("solver produced non-finite values");
  if (err >= 1e-10) throw NumericalError("saddle-point solve residual " + std::to_string(err) + " above tolerance");
  if (report) {
    report->residual = err;
    report->rcond = lu.rcond();
  }
  return system.P * y + system.lift;
}

FlowSolution solve_flow(const DofMap& dofs, const FluidParams& params, const AssemblyInput& input, SolveReport* report) {
  const SystemBlocks blocks = assemble_blocks(dofs, params, input);
  LinearSystem sys;
  sys.K = block_matrix(blocks);
  sys.F = Vector::Zero(dofs.total_dofs());
  sys.F.head(dofs.velocity_dofs()) = blocks.G;
  fluid_constraints(dofs, params, dirichlet_values(dofs, params, input.t), sys);
  if (!params.pressure_gauge && !dofs.has_neumann())
    sys.description = "suspected cause: no pressure gauge on a fully Dirichlet boundary";
  else
    sys.description = "suspected cause: disconnected mesh";
  const Vector x = solve_saddle_point(sys, report);
  return {x.head(dofs.velocity_dofs()), x.tail(dofs.pressure_dofs())};
}

Vec2 eval_velocity(const DofMap& dofs, const Vector& u, int cell, const std::array<double, 3>& bary) {
  const auto phi = p2_shape(bary);
  const auto& n = dofs.cell_nodes[static_cast<std::size_t>(cell)];
  Vec2 v = Vec2::Zero();
  for (int k = 0; k < 6; ++k) v += phi[static_cast<std::size_t>(k)] * nodal(u, n[static_cast<std::size_t>(k)]);
  return v;
}

double eval_pressure(const DofMap& dofs, const Vector& p, int cell, const std::array<double, 3>& bary) {
  const auto& n = dofs.cell_nodes[static_cast<std::size_t>(cell)];
  return bary[0] * p[n[0]] + bary[1] * p[n[1]] + bary[2] * p[n[2]];
}

double max_divergence(const Mesh&, const DofMap& dofs, const Vector& u) {
  double m = 0.0;
  for (int cell = 0; cell < static_cast<int>(dofs.cell_nodes.size()); ++cell) {
    const CellGeometry g = cell_geometry(dofs, cell);
    const auto& n = dofs.cell_nodes[static_cast<std::size_t>(cell)];
    for (const auto& qp : quadrature::triangle_degree4()) {
      const auto dphi = p2_gradients(qp.bary, g.grad_lambda);
      double div = 0.0;
      for (int k = 0; k < 6; ++k) div += dphi[static_cast<std::size_t>(k)].dot(nodal(u, n[static_cast<std::size_t>(k)]));
      m = std::max(m, std::abs(div));
    }
  }
  return m;
}

Vec2 traction_force(const Mesh& mesh, const DofMap& dofs, const FluidParams& params, const Vector& u, const Vector& p,
                    int body) {
  std::unordered_map<std::uint64_t, int> owner;
  auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int k = 0; k < 3; ++k)
      owner[key(mesh.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)],
                mesh.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>((k + 1) % 3)])] = c;
  Vec2 force = Vec2::Zero();
  const double s = std::sqrt(0.15);
  const double gs[3] = {0.5 - s, 0.5, 0.5 + s};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (const auto& e : dofs.boundary_edges) {
    if (dofs.node_body[static_cast<std::size_t>(e[1])] != body) continue;
    const int cell = owner.at(key(e[0], e[2]));
    const CellGeometry g = cell_geometry(dofs, cell);
    const auto& n = dofs.cell_nodes[static_cast<std::size_t>(cell)];
    const Vec2& a = dofs.node_coords[static_cast<std::size_t>(e[0])];
    const Vec2& b = dofs.node_coords[static_cast<std::size_t>(e[2])];
    const double len = (b - a).norm();
    const Vec2 normal = perp((b - a) / len);  // out of the body, into the fluid
    for (int q = 0; q < 3; ++q) {
      const Vec2 x = a + gs[q] * (b - a);
      std::array<double, 3> l{};
      for (int i = 0; i < 3; ++i) l[static_cast<std::size_t>(i)] = 1.0 / 3.0 + g.grad_lambda[static_cast<std::size_t>(i)].dot(x - (g.x[0] + g.x[1] + g.x[2]) / 3.0);
      const auto dphi = p2_gradients(l, g.grad_lambda);
      Mat2 grad = Mat2::Zero();
      for (int k = 0; k < 6; ++k) grad += nodal(u, n[static_cast<std::size_t>(k)]) * dphi[static_cast<std::size_t>(k)].transpose();
      const double pq = l[0] * p[n[0]] + l[1] * p[n[1]] + l[2] * p[n[2]];
      const Mat2 sigma = -pq * Mat2::Identity() + params.mu * (grad + grad.transpose());
      force += gw[q] * len * (sigma * normal);
    }
  }
  return force;
}

ConvergenceResult convergence_study(const ExactStokes& exact, const std::vector<Mesh>& meshes) {
  if (meshes.size() < 3) throw ValidationError("convergence study needs at least three meshes");
  ConvergenceResult r;
  for (const Mesh& input : meshes) {
    Mesh mesh = input;
    // Every boundary edge carries the exact velocity.
    const int tag = static_cast<int>(mesh.tags.size());
    mesh.tags.push_back({"exact", BoundaryKind::DirichletWall, -1});
    for (auto& e : mesh.boundary_edges) e.tag = tag;
    const DofMap dofs = build_taylor_hood(mesh);
    FluidParams params;
    params.mu = exact.mu;
    params.force = [&](double, const Vec2& x) { return exact.f(x); };
    params.dirichlet.assign(mesh.tags.size(), VectorField{});
    params.dirichlet[static_cast<std::size_t>(tag)] = [&](double, const Vec2& x) { return exact.u(x); };
    const FlowSolution sol = solve_flow(dofs, params, AssemblyInput{});

    double eu = 0.0, area = 0.0, mean_h = 0.0, mean_e = 0.0;
    const auto& rule = quadrature::triangle_degree6();
    for (int cell = 0; cell < mesh.num_cells(); ++cell) {
      const CellGeometry g = cell_geometry(dofs, cell);
      for (const auto& qp : rule) {
        const Vec2 x = qp.bary[0] * g.x[0] + qp.bary[1] * g.x[1] + qp.bary[2] * g.x[2];
        const double w = qp.weight * g.area;
        eu += w * (eval_velocity(dofs, sol.u, cell, qp.bary) - exact.u(x)).squaredNorm();
        mean_h += w * eval_pressure(dofs, sol.p, cell, qp.bary);
        mean_e += w * exact.p(x);
        area += w;
      }
    }
    mean_h /= area;
    mean_e /= area;
    double ep = 0.0;
    for (int cell = 0; cell < mesh.num_cells(); ++cell) {
      const CellGeometry g = cell_geometry(dofs, cell);
      for (const auto& qp : rule) {
        const Vec2 x = qp.bary[0] * g.x[0] + qp.bary[1] * g.x[1] + qp.bary[2] * g.x[2];
        const double d = (eval_pressure(dofs, sol.p, cell, qp.bary) - mean_h) - (exact.p(x) - mean_e);
        ep += qp.weight * g.area * d * d;
      }
    }
    double h = 0.0;
    for (const auto& e : dofs.edge_vertices)
      h = std::max(h, (mesh.vertices[static_cast<std::size_t>(e[0])] - mesh.vertices[static_cast<std::size_t>(e[1])]).norm());
    r.h.push_back(h);
    r.error_u.push_back(std::sqrt(eu));
    r.error_p.push_back(std::sqrt(ep));
  }
  r.exact = true;
  for (std::size_t i = 0; i < r.h.size(); ++i)
    if (r.error_u[i] > 1e-9 || r.error_p[i] > 1e-9) r.exact = false;
  for (std::size_t i = 0; i + 1 < r.h.size(); ++i) {
    const double lh = std::log(r.h[i] / r.h[i + 1]);
    r.order_u.push_back(std::log(r.error_u[i] / r.error_u[i + 1]) / lh);
    r.order_p.push_back(std::log(r.error_p[i] / r.error_p[i + 1]) / lh);
  }
  return r;
}

}  // namespace swimfem
