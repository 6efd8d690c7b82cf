#pragma once

#include "swimfem/mesh.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace swimfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using VectorField = std::function<Vec2(double t, const Vec2& x)>;
using ScalarField = std::function<double(double t, const Vec2& x)>;

enum class DofClass { Interior, Swimmer, OuterDirichlet, OuterNeumann };

/// Taylor-Hood numbering. Nodes are the mesh vertices followed by one node
/// per edge midpoint; velocity dof of component c at node n is 2n + c and
/// pressure dof k lives on vertex k.
struct DofMap {
  int num_vertices = 0;
  int num_edges = 0;
  /// Local P2 nodes per cell: vertices 0..2, then edges 01, 12, 20.
  std::vector<std::array<int, 6>> cell_nodes;
  std::vector<std::array<int, 2>> edge_vertices;
  std::vector<Vec2> node_coords;
  std::vector<DofClass> node_class;
  /// Boundary tag deciding the class of a boundary node, -1 inside.
  std::vector<int> node_tag;
  /// Owning body of Swimmer nodes, -1 otherwise.
  std::vector<int> node_body;
  /// Boundary edges as (node a, midpoint node, node b, tag).
  std::vector<std::array<int, 4>> boundary_edges;

  int num_nodes() const { return num_vertices + num_edges; }
  int velocity_dofs() const { return 2 * num_nodes(); }
  int pressure_dofs() const { return num_vertices; }
  int total_dofs() const { return velocity_dofs() + pressure_dofs(); }
  bool has_neumann() const;
};

DofMap build_taylor_hood(const Mesh& mesh);

struct FluidParams {
  double mu = 1.0;
  double rho = 0.0;  // 0 gives the Stokes limit
  VectorField force;  // empty means zero
  /// Per boundary tag; empty entries mean zero.
  std::vector<VectorField> dirichlet;
  std::vector<VectorField> traction;
  int bdf_order = 1;
  /// Pin pressure dof 0 when no Neumann boundary exists.
  bool pressure_gauge = true;
};

struct AssemblyInput {
  double t = 0.0;   // time level of the unknowns
  double dt = 0.0;  // 0 assembles a steady problem
  const Vector* u_conv = nullptr;  // convecting velocity, velocity dofs
  const Vector* u_ale = nullptr;   // mesh velocity, velocity dofs
  const Vector* u_prev = nullptr;  // u^n
  const Vector* u_prev2 = nullptr;  // u^{n-1}, BDF2 only
};

/// Unconstrained blocks of the saddle-point system
///   [A  B^T] [u]   [G]
///   [B  0  ] [p] = [0]
/// over all velocity dofs. Dirichlet and body constraints are applied by the
/// projection in solve_saddle_point.
struct SystemBlocks {
  SparseMatrix A;  // velocity x velocity
  SparseMatrix B;  // pressure x velocity, B_kj = -int psi_k div phi_j
  Vector G;        // velocity right-hand side
};

SystemBlocks assemble_blocks(const DofMap& dofs, const FluidParams& params, const AssemblyInput& input);

/// Full system K x = F with unknowns x = (u, p, extra) where `extra` holds
/// rigid-body unknowns appended by the coupling layer.
struct LinearSystem {
  SparseMatrix K;
  Vector F;
  /// x = P y + lift, y being the reduced unknowns.
  SparseMatrix P;
  Vector lift;
  std::string description;
};

/// Monolithic block matrix [A B^T; B 0] padded to `extra` trailing unknowns.
SparseMatrix block_matrix(const SystemBlocks& blocks, int extra = 0);

/// Constraint operator for a fluid-only problem: Dirichlet and swimmer dofs
/// take the values in `boundary_values` (velocity dofs), every other dof is
/// free. Pressure dof 0 is pinned when gauge fixing applies.
void fluid_constraints(const DofMap& dofs, const FluidParams& params, const Vector& boundary_values,
                       LinearSystem& system);

/// Velocity dof values of the Dirichlet data at time t (zero elsewhere).
Vector dirichlet_values(const DofMap& dofs, const FluidParams& params, double t);

struct SolveReport {
  double residual = 0.0;  // normwise backward error of the reduced solve
  double rcond = 0.0;
};

/// Solves P^T K P y = P^T (F - K lift) with a sparse LU factorization and
/// returns x = P y + lift.
Vector solve_saddle_point(const LinearSystem& system, SolveReport* report = nullptr);

/// Assembles and solves a fluid-only problem; Dirichlet data comes from
/// params.dirichlet on every boundary tag, swimmer tags included.
struct FlowSolution {
  Vector u;
  Vector p;
};
FlowSolution solve_flow(const DofMap& dofs, const FluidParams& params, const AssemblyInput& input,
                        SolveReport* report = nullptr);

// ---------------------------------------------------------------------------
// Field evaluation

/// P2 shape functions at barycentric coordinates (vertex 0..2, edges 01, 12, 20).
std::array<double, 6> p2_shape(const std::array<double, 3>& bary);
Vec2 eval_velocity(const DofMap& dofs, const Vector& u, int cell, const std::array<double, 3>& bary);
double eval_pressure(const DofMap& dofs, const Vector& p, int cell, const std::array<double, 3>& bary);

/// Max over cells of |div u| at the cell quadrature points.
double max_divergence(const Mesh& mesh, const DofMap& dofs, const Vector& u);

/// Integral of the fluid traction sigma n over the edges of a swimmer body,
/// n pointing out of the fluid. Returns the force the fluid exerts on it.
Vec2 traction_force(const Mesh& mesh, const DofMap& dofs, const FluidParams& params, const Vector& u, const Vector& p,
                    int body);

// ---------------------------------------------------------------------------
// Convergence

struct ExactStokes {
  std::function<Vec2(const Vec2&)> u;
  std::function<double(const Vec2&)> p;
  std::function<Vec2(const Vec2&)> f;
  double mu = 1.0;
};

struct ConvergenceResult {
  std::vector<double> h;
  std::vector<double> error_u;  // L2
  std::vector<double> error_p;  // L2, mean-free
  std::vector<double> order_u;  // between consecutive meshes
  std::vector<double> order_p;
  bool exact = false;  // errors at solver tolerance on every mesh
};

/// Steady Stokes solves of the exact solution on each mesh with Dirichlet
/// data on the whole boundary; needs at least three meshes.
ConvergenceResult convergence_study(const ExactStokes& exact, const std::vector<Mesh>& meshes);

}  // namespace swimfem
