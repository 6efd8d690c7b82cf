#pragma once

#include "swimfem/ale.hpp"
#include "swimfem/collision.hpp"
#include "swimfem/scenario.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace swimfem {

/// One trajectory line: state of a body at the end of a step. `te` uses the
/// sign of repulsion_torque; dmin is NaN when no contact pair exists.
struct TrajectoryRecord {
  double t = 0.0;
  int body = 0;
  Vec2 x = Vec2::Zero();
  double theta = 0.0;
  Vec2 l = Vec2::Zero();
  double omega = 0.0;
  Vec2 fe = Vec2::Zero();
  double te = 0.0;
  double dmin = 0.0;
};

struct StepInfo {
  int fixed_point_iterations = 0;
  bool converged = true;
  bool remeshed = false;
  double residual = 0.0;
};

/// Time integration of a scenario: ALE mesh motion, collision loads and the
/// coupled fluid-body solve.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  /// Advances from t_n to t_{n+1} = (n + 1) dt.
  StepInfo step();

  /// Body velocities that balance the current configuration at time t
  /// without inertia. Stokes runs use it to start every step whose gait rates
  /// jump; the state is left untouched.
  std::pair<std::vector<Vec2>, std::vector<double>> instantaneous_velocities();

  double time() const { return static_cast<double>(step_) * scenario_.dt; }
  long long step_index() const { return step_; }
  const Scenario& scenario() const { return scenario_; }
  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const Vector& velocity() const { return u_; }
  const Vector& pressure() const { return p_; }
  const std::vector<Body>& bodies() const { return bodies_; }
  const AleState& ale() const { return ale_; }
  const std::vector<ContactPair>& contacts() const { return contacts_; }
  const DistanceFields& distance_fields() const { return fields_; }
  const std::vector<ExternalLoad>& loads() const { return loads_; }
  const FluidParams& fluid() const { return fluid_; }
  std::vector<TrajectoryRecord> records() const;

  void save_checkpoint(const std::filesystem::path& path) const;
  void load_checkpoint(const std::filesystem::path& path);

 private:
  struct Solve {
    Vector u, p;
    std::vector<Vec2> l;
    std::vector<double> omega;
    double residual = 0.0;
  };

  /// Outer Dirichlet data at t plus the gait velocity on the Gamma nodes of
  /// the posed bodies. With `D_new`, deforming gaits use the step average
  /// (D_new - D) / dt; otherwise the instantaneous gait velocity at t.
  Vector boundary_values(const DofMap& dofs, const std::vector<Body>& posed, double t,
                         const std::vector<std::vector<Vec2>>* D_new) const;
  Solve solve_system(const Mesh& mesh, const DofMap& dofs, const std::vector<Body>& posed, double t, double dt,
                     const Vector& boundary, const Vector* u_conv, const Vector* u_ale,
                     const std::vector<ExternalLoad>& loads);
  void update_contacts(const Mesh& mesh, const std::vector<Body>& posed);
  Solve instantaneous_solve();
  void on_remesh(const Mesh& old_mesh, const RemeshResult& r);

  Scenario scenario_;
  FluidParams fluid_;
  long long step_ = 0;
  AleState ale_;
  Mesh mesh_;
  DofMap dofs_;
  Vector u_, p_, u_prev_;
  bool has_prev_ = false;
  std::vector<Body> bodies_;
  std::vector<ContactPair> contacts_;
  DistanceFields fields_;
  std::vector<ExternalLoad> loads_;
};

void write_csv_header(std::ostream& out);
void write_csv_records(std::ostream& out, const std::vector<TrajectoryRecord>& records);

/// ASCII VTK unstructured grid with point fields u (three components), p and
/// phi, plus per-body distance fields when requested.
void write_vtu(const std::filesystem::path& path, const Simulation& sim, bool distance_fields);
/// ParaView collection referencing (time, file) pairs.
void write_pvd(const std::filesystem::path& path, const std::vector<std::pair<double, std::string>>& entries);

struct RunOptions {
  std::filesystem::path output_dir = ".";
  std::optional<double> t_final;
  std::optional<double> dt;
  std::optional<std::filesystem::path> resume;
  bool verbose = false;
  std::ostream* log = nullptr;
};

/// Runs the scenario to t_final writing the trajectory CSV, VTU snapshots and
/// checkpoints into the output directory. On a step failure a final
/// checkpoint is written before the error propagates.
void run(Scenario scenario, const RunOptions& options);

}  // namespace swimfem
