#pragma once

#include "swimfem/collision.hpp"
#include "swimfem/expression.hpp"
#include "swimfem/fem.hpp"
#include "swimfem/rigid_body.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace swimfem {

struct ShapeSpec {
  enum class Type { Circle, Ellipse, Polygon, ThreeSphere, Sperm, FromMesh };
  Type type = Type::Circle;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;                 // circle, three-sphere spheres
  Vec2 semi_axes = Vec2::Zero();       // ellipse, sperm head
  std::vector<Vec2> points;            // polygon, laboratory frame
  double rest_length = 0.0;            // three-sphere rod length
  double tail_length = 0.0;            // sperm flagellum
  double thickness = 0.0;              // sperm flagellum
  double spacing = 0.0;                // boundary spacing, 0 uses the mesh default
};

struct GaitSpec {
  std::string type = "passive";
  double B1 = 0.0, beta = 0.0;
  Vec2 heading = Vec2(1.0, 0.0);
  double amplitude = 0.0, phase_time = 1.0;
  bool reversed = false;
  double wavelength = 1.0, period = 1.0, ramp_time = 0.0;
};

struct BodySpec {
  ShapeSpec shape;
  double density = 0.0;
  GaitSpec gait;
  double theta = 0.0;
  Vec2 velocity = Vec2::Zero();
  double omega = 0.0;
};

struct BoundarySpec {
  enum class Type { NoSlip, Dirichlet, Neumann, ParabolicInflow };
  std::string tag;
  Type type = Type::NoSlip;
  std::array<Expression, 2> value;  // Dirichlet velocity or Neumann traction
  Expression speed;                 // parabolic inflow peak speed
  bool wall = false;                // Dirichlet boundary that takes part in collisions
};

struct MeshSpec {
  enum class Source { Channel, Polygon, File };
  Source source = Source::Channel;
  double length = 1.0, height = 1.0;
  OuterBoundary outer;
  std::filesystem::path file;
  double h = 0.1;
  double body_spacing = 0.0;  // 0 uses h
  double grading = 0.3;
  int smoothing_passes = 6;
  bool mirror_symmetric = false;
  std::map<std::string, double> edge_spacing;
};

struct OutputSpec {
  std::string csv = "trajectory.csv";
  int vtu_every = 0;  // 0 writes only the first and last snapshots
  int checkpoint_every = 0;
  bool distance_fields = false;
};

struct Scenario {
  std::string name = "scenario";
  MeshSpec mesh;
  double mu = 1.0, rho = 0.0;
  std::array<Expression, 2> force;
  std::vector<BoundarySpec> boundaries;
  std::vector<BodySpec> bodies;
  bool collisions = false;
  CollisionParams collision;
  double t_final = 0.0, dt = 0.0;
  int bdf_order = 1;
  double quality_threshold = 0.2;
  int fixed_point_iterations = 3;
  int picard_iterations = 25;
  double picard_tolerance = 1e-8;
  bool abort_on_nonconvergence = false;
  OutputSpec output;
  std::filesystem::path base_dir;
};

/// Reads a JSON scenario; schema errors name the offending field path.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Mesh described by the scenario with boundary kinds resolved from the
/// boundary table. Every swimmer tag must belong to a listed body.
Mesh build_mesh(const Scenario& scenario);

/// Fluid parameters with the scenario's boundary data bound to the mesh tags.
FluidParams fluid_params(const Scenario& scenario, const Mesh& mesh);

/// Bodies with mass properties, initial state, gait and boundary description.
std::vector<Body> build_bodies(const Scenario& scenario, const Mesh& mesh);

/// Boundary polygons of a body shape in the laboratory frame.
std::vector<Hole> shape_holes(const BodySpec& body, int id, double default_spacing);

}  // namespace swimfem
