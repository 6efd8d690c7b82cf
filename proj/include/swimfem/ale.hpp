#pragma once

#include "swimfem/fem.hpp"
#include "swimfem/rigid_body.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <vector>

namespace swimfem {

/// Per-cell diffusion weight (1 - Vmin/Vmax) / (Ve/Vmax).
std::vector<double> compute_tau(const Mesh& reference);

/// P1 solver for div((1 + tau) grad phi) = 0 with phi prescribed on every
/// boundary vertex. The factorization is reused across solves.
class ExtensionSolver {
 public:
  ExtensionSolver(const Mesh& reference, const std::vector<double>& tau);
  /// `boundary` holds one value per vertex; only boundary vertices are read.
  std::vector<Vec2> solve(const std::vector<Vec2>& boundary) const;

 private:
  std::vector<int> free_index_;  // -1 on boundary vertices
  SparseMatrix coupling_;        // free x boundary block, boundary columns indexed by vertex
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  int num_free_ = 0;
};

/// One-shot extension: swimmer vertices take `swimmer_disp`, every other
/// boundary vertex is held at zero.
std::vector<Vec2> solve_extension(const Mesh& reference, const std::vector<double>& tau,
                                  const std::vector<Vec2>& swimmer_disp);

/// Displacement of the body's boundary vertices from their reference positions
/// to the pose (center, angle) with deformation D; other entries untouched.
void boundary_displacement(const Body& body, const Vec2& center, double angle, const std::vector<Vec2>& D,
                           const Mesh& reference, std::vector<Vec2>& disp);

/// Reference configuration of the moving mesh and its accumulated displacement.
struct AleState {
  Mesh reference;
  std::vector<double> tau;
  std::vector<Vec2> phi;
  std::shared_ptr<const ExtensionSolver> solver;

  AleState() = default;
  explicit AleState(Mesh ref) { rebase(std::move(ref)); }
  /// New reference with zero displacement; tau and the solver are rebuilt.
  void rebase(Mesh ref);
  Mesh current() const;
};

struct DomainStep {
  Mesh mesh;
  std::vector<Vec2> phi;
  std::vector<Vec2> mesh_velocity;  // per vertex
  double min_quality = 0.0;
  bool remeshed = false;
  std::vector<int> vertex_map;  // reference vertex map of the remesh, if any
};

/// Predicted domain for the boundary displacement; throws InvertedElementError
/// when a cell inverts.
DomainStep predict_domain(const AleState& state, const std::vector<Vec2>& disp, double dt);

/// Moves the domain to the configuration given by `targets` (boundary
/// displacement over the reference). When the prediction inverts a cell or
/// drops below `quality_threshold`, the current mesh is remeshed, `on_remesh`
/// is told so that fields and body indices follow, the reference is rebased
/// and the step is retried once. The state is not advanced; callers commit
/// the returned phi.
DomainStep step_domain(AleState& state, const std::function<std::vector<Vec2>(const Mesh& reference)>& targets,
                       double dt, double quality_threshold,
                       const std::function<void(const Mesh& old_mesh, const RemeshResult&)>& on_remesh);

/// Mesh velocity at P2 nodes from vertex values (midpoints average their ends).
Vector p1_to_p2(const DofMap& dofs, const std::vector<Vec2>& vertex_values);

/// Interpolation of fields onto the nodes of another mesh.
Vector transfer_velocity(const Mesh& from, const DofMap& from_dofs, const Vector& u, const DofMap& to_dofs);
std::vector<double> transfer_scalar(const Mesh& from, const std::vector<double>& values, const Mesh& to);

}  // namespace swimfem
