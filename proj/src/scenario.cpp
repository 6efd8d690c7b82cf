#include "swimfem/scenario.hpp"

#include "swimfem/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace swimfem {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw ValidationError("scenario field '" + path + "': " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) schema_error(join(path, key), "missing");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "must be finite");
  return v;
}

double number(const json& j, const std::string& key, const std::string& path, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, join(path, key));
}

double number(const json& j, const std::string& key, const std::string& path) {
  return number(require(j, key, path), join(path, key));
}

int integer(const json& j, const std::string& key, const std::string& path, int fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) schema_error(join(path, key), "expected an integer");
  return it->get<int>();
}

bool boolean(const json& j, const std::string& key, const std::string& path, bool fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) schema_error(join(path, key), "expected true or false");
  return it->get<bool>();
}

std::string string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) schema_error(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::string string(const json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  return j.contains(key) ? string(j, key, path) : fallback;
}

Vec2 vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) schema_error(path, "expected [x, y]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

Vec2 vec2(const json& j, const std::string& key, const std::string& path, const Vec2& fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : vec2(*it, join(path, key));
}

Expression expression(const json& j, const std::string& path) {
  if (j.is_number()) return Expression::parse(j.dump());
  if (!j.is_string()) schema_error(path, "expected an expression string or a number");
  try {
    return Expression::parse(j.get<std::string>());
  } catch (const ValidationError& e) {
    schema_error(path, e.what());
  }
}

std::array<Expression, 2> expression_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) schema_error(path, "expected two expressions");
  return {expression(j[0], path + "[0]"), expression(j[1], path + "[1]")};
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0)) schema_error(path, "must be positive");
}

ShapeSpec parse_shape(const json& j, const std::string& path) {
  ShapeSpec s;
  const std::string type = string(j, "type", path);
  s.spacing = number(j, "spacing", path, 0.0);
  if (s.spacing < 0.0) schema_error(join(path, "spacing"), "must be non-negative");
  if (type == "circle") {
    s.type = ShapeSpec::Type::Circle;
    s.center = vec2(require(j, "center", path), join(path, "center"));
    s.radius = number(j, "radius", path);
    positive(s.radius, join(path, "radius"));
  } else if (type == "ellipse") {
    s.type = ShapeSpec::Type::Ellipse;
    s.center = vec2(require(j, "center", path), join(path, "center"));
    s.semi_axes = vec2(require(j, "semi_axes", path), join(path, "semi_axes"));
    positive(s.semi_axes.x(), join(path, "semi_axes[0]"));
    positive(s.semi_axes.y(), join(path, "semi_axes[1]"));
  } else if (type == "polygon") {
    s.type = ShapeSpec::Type::Polygon;
    const json& pts = require(j, "points", path);
    if (!pts.is_array() || pts.size() < 3) schema_error(join(path, "points"), "expected at least three points");
    for (std::size_t k = 0; k < pts.size(); ++k) s.points.push_back(vec2(pts[k], join(path, "points") + "[" + std::to_string(k) + "]"));
  } else if (type == "three_sphere") {
    s.type = ShapeSpec::Type::ThreeSphere;
    s.center = vec2(require(j, "center", path), join(path, "center"));
    s.radius = number(j, "radius", path);
    s.rest_length = number(j, "rest_length", path);
    positive(s.radius, join(path, "radius"));
    if (!(s.rest_length > 2.0 * s.radius)) schema_error(join(path, "rest_length"), "spheres overlap");
  } else if (type == "sperm") {
    s.type = ShapeSpec::Type::Sperm;
    s.center = vec2(require(j, "center", path), join(path, "center"));
    s.semi_axes = vec2(require(j, "head_semi_axes", path), join(path, "head_semi_axes"));
    s.tail_length = number(j, "tail_length", path);
    s.thickness = number(j, "thickness", path);
    positive(s.semi_axes.x(), join(path, "head_semi_axes[0]"));
    positive(s.semi_axes.y(), join(path, "head_semi_axes[1]"));
    positive(s.tail_length, join(path, "tail_length"));
    positive(s.thickness, join(path, "thickness"));
    if (!(s.thickness < 2.0 * s.semi_axes.y())) schema_error(join(path, "thickness"), "must be thinner than the head");
  } else if (type == "mesh") {
    s.type = ShapeSpec::Type::FromMesh;
  } else {
    schema_error(join(path, "type"), "unknown shape '" + type + "'");
  }
  return s;
}

GaitSpec parse_gait(const json& j, const std::string& path) {
  GaitSpec g;
  g.type = string(j, "type", path);
  if (g.type == "passive") {
  } else if (g.type == "squirmer") {
    g.B1 = number(j, "B1", path);
    g.beta = number(j, "beta", path, 0.0);
    g.heading = vec2(j, "heading", path, Vec2(1.0, 0.0));
    if (std::abs(g.heading.norm() - 1.0) > 1e-12) schema_error(join(path, "heading"), "must be a unit vector");
  } else if (g.type == "three_sphere") {
    g.amplitude = number(j, "amplitude", path);
    g.phase_time = number(j, "phase_time", path);
    g.reversed = boolean(j, "reversed", path, false);
    positive(g.amplitude, join(path, "amplitude"));
    positive(g.phase_time, join(path, "phase_time"));
  } else if (g.type == "sperm_wave") {
    g.amplitude = number(j, "amplitude", path);
    g.wavelength = number(j, "wavelength", path);
    g.period = number(j, "period", path);
    g.ramp_time = number(j, "ramp_time", path, 0.0);
    positive(g.amplitude, join(path, "amplitude"));
    positive(g.wavelength, join(path, "wavelength"));
    positive(g.period, join(path, "period"));
    if (g.ramp_time < 0.0) schema_error(join(path, "ramp_time"), "must be non-negative");
  } else {
    schema_error(join(path, "type"), "unknown gait '" + g.type + "'");
  }
  return g;
}

BoundarySpec parse_boundary(const std::string& tag, const json& j, const std::string& path) {
  BoundarySpec b;
  b.tag = tag;
  const std::string type = string(j, "type", path);
  if (type == "no_slip") {
    b.type = BoundarySpec::Type::NoSlip;
  } else if (type == "dirichlet") {
    b.type = BoundarySpec::Type::Dirichlet;
    b.value = expression_pair(require(j, "value", path), join(path, "value"));
    b.wall = boolean(j, "wall", path, false);
  } else if (type == "neumann") {
    b.type = BoundarySpec::Type::Neumann;
    if (j.contains("traction")) b.value = expression_pair(j["traction"], join(path, "traction"));
  } else if (type == "parabolic_inflow") {
    b.type = BoundarySpec::Type::ParabolicInflow;
    b.speed = expression(require(j, "speed", path), join(path, "speed"));
  } else {
    schema_error(join(path, "type"), "unknown boundary type '" + type + "'");
  }
  return b;
}

MeshSpec parse_mesh(const json& j, const std::string& path, const std::filesystem::path& base) {
  MeshSpec m;
  const std::string source = string(j, "source", path, "channel");
  if (source == "channel") {
    m.source = MeshSpec::Source::Channel;
    m.length = number(j, "length", path);
    m.height = number(j, "height", path);
    positive(m.length, join(path, "length"));
    positive(m.height, join(path, "height"));
  } else if (source == "polygon") {
    m.source = MeshSpec::Source::Polygon;
    const json& pts = require(j, "points", path);
    const json& tags = require(j, "edge_tags", path);
    if (!pts.is_array() || pts.size() < 3) schema_error(join(path, "points"), "expected at least three points");
    if (!tags.is_array() || tags.size() != pts.size()) schema_error(join(path, "edge_tags"), "expected one tag per edge");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      m.outer.polygon.push_back(vec2(pts[k], join(path, "points") + "[" + std::to_string(k) + "]"));
      if (!tags[k].is_string()) schema_error(join(path, "edge_tags") + "[" + std::to_string(k) + "]", "expected a string");
      m.outer.edge_tags.push_back(tags[k].get<std::string>());
    }
  } else if (source == "file") {
    m.source = MeshSpec::Source::File;
    m.file = string(j, "file", path);
    if (m.file.is_relative()) m.file = base / m.file;
  } else {
    schema_error(join(path, "source"), "unknown mesh source '" + source + "'");
  }
  m.h = number(j, "h", path, m.source == MeshSpec::Source::File ? 1.0 : 0.1);
  positive(m.h, join(path, "h"));
  m.body_spacing = number(j, "body_spacing", path, 0.0);
  if (m.body_spacing < 0.0) schema_error(join(path, "body_spacing"), "must be non-negative");
  m.grading = number(j, "grading", path, 0.3);
  positive(m.grading, join(path, "grading"));
  m.smoothing_passes = integer(j, "smoothing_passes", path, 6);
  m.mirror_symmetric = boolean(j, "mirror_symmetric", path, false);
  if (j.contains("edge_spacing")) {
    const auto& e = j.at("edge_spacing");
    const auto epath = join(path, "edge_spacing");
    if (!e.is_object()) schema_error(epath, "expected an object of tag spacings");
    for (const auto& [tag, v] : e.items()) {
      m.edge_spacing[tag] = number(e, tag, epath, 0.0);
      positive(m.edge_spacing[tag], join(epath, tag));
    }
  }
  if (m.mirror_symmetric && m.source != MeshSpec::Source::Channel)
    schema_error(join(path, "mirror_symmetric"), "only available for channel meshes");
  return m;
}

Scenario parse(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) schema_error("", "expected a JSON object");
  Scenario s;
  s.base_dir = base;
  s.name = string(j, "name", "", "scenario");
  s.mesh = parse_mesh(require(j, "mesh", ""), "mesh", base);

  const json& fluid = require(j, "fluid", "");
  s.mu = number(fluid, "mu", "fluid");
  positive(s.mu, "fluid.mu");
  s.rho = number(fluid, "rho", "fluid", 0.0);
  if (s.rho < 0.0) schema_error("fluid.rho", "must be non-negative");
  if (fluid.contains("force")) s.force = expression_pair(fluid["force"], "fluid.force");

  if (j.contains("boundaries")) {
    const json& b = j["boundaries"];
    if (!b.is_object()) schema_error("boundaries", "expected an object keyed by tag name");
    for (const auto& [tag, spec] : b.items()) s.boundaries.push_back(parse_boundary(tag, spec, "boundaries." + tag));
  }

  if (j.contains("bodies")) {
    const json& bodies = j["bodies"];
    if (!bodies.is_array()) schema_error("bodies", "expected an array");
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      const std::string p = "bodies[" + std::to_string(i) + "]";
      const json& b = bodies[i];
      BodySpec body;
      body.shape = parse_shape(require(b, "shape", p), p + ".shape");
      body.density = number(b, "density", p, 0.0);
      if (body.density < 0.0) schema_error(p + ".density", "must be non-negative");
      if (b.contains("gait")) body.gait = parse_gait(b["gait"], p + ".gait");
      body.theta = number(b, "theta", p, 0.0);
      body.velocity = vec2(b, "velocity", p, Vec2::Zero());
      body.omega = number(b, "omega", p, 0.0);
      if (body.gait.type == "three_sphere" && body.shape.type != ShapeSpec::Type::ThreeSphere)
        schema_error(p + ".shape.type", "the three_sphere gait needs a three_sphere shape");
      if (body.gait.type == "three_sphere" && !(body.gait.amplitude < body.shape.rest_length - 2.0 * body.shape.radius))
        schema_error(p + ".gait.amplitude", "spheres would touch during the stroke");
      if (body.gait.type == "sperm_wave" && body.shape.type != ShapeSpec::Type::Sperm)
        schema_error(p + ".shape.type", "the sperm_wave gait needs a sperm shape");
      s.bodies.push_back(body);
    }
  }

  if (j.contains("collision")) {
    const json& c = j["collision"];
    s.collisions = boolean(c, "enabled", "collision", true);
    s.collision.w_col = number(c, "w_col", "collision");
    s.collision.epsilon = number(c, "epsilon", "collision");
    s.collision.epsilon_wall = number(c, "epsilon_wall", "collision", s.collision.epsilon);
    s.collision.d_max = number(c, "d_max", "collision", 2.0 * s.collision.w_col);
    try {
      s.collision.validate();
    } catch (const ValidationError& e) {
      schema_error("collision", e.what());
    }
  }

  const json& time = require(j, "time", "");
  s.t_final = number(time, "t_final", "time");
  s.dt = number(time, "dt", "time");
  positive(s.dt, "time.dt");
  if (s.t_final < 0.0) schema_error("time.t_final", "must be non-negative");
  s.bdf_order = integer(time, "bdf_order", "time", 1);
  if (s.bdf_order != 1 && s.bdf_order != 2) schema_error("time.bdf_order", "must be 1 or 2");

  if (j.contains("ale")) {
    const json& a = j["ale"];
    s.quality_threshold = number(a, "quality_threshold", "ale", 0.2);
    if (!(s.quality_threshold >= 0.0 && s.quality_threshold < 1.0)) schema_error("ale.quality_threshold", "must lie in [0, 1)");
    s.fixed_point_iterations = integer(a, "fixed_point_iterations", "ale", 3);
    if (s.fixed_point_iterations < 1) schema_error("ale.fixed_point_iterations", "must be at least 1");
    s.picard_iterations = integer(a, "picard_iterations", "ale", 25);
    if (s.picard_iterations < 1) schema_error("ale.picard_iterations", "must be at least 1");
    s.picard_tolerance = number(a, "picard_tolerance", "ale", 1e-8);
    s.abort_on_nonconvergence = boolean(a, "abort_on_nonconvergence", "ale", false);
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    s.output.csv = string(o, "csv", "output", "trajectory.csv");
    s.output.vtu_every = integer(o, "vtu_every", "output", 0);
    s.output.checkpoint_every = integer(o, "checkpoint_every", "output", 0);
    s.output.distance_fields = boolean(o, "distance_fields", "output", false);
    if (s.output.vtu_every < 0) schema_error("output.vtu_every", "must be non-negative");
    if (s.output.checkpoint_every < 0) schema_error("output.checkpoint_every", "must be non-negative");
  }
  return s;
}

/// Even counts keep a vertex at both ends of every diameter through vertex 0.
int body_segments(double perimeter, double spacing, int minimum) {
  const int n = std::max(minimum, static_cast<int>(std::ceil(perimeter / spacing - 1e-9)));
  return n + n % 2;
}

Mat2 ccw(double angle) { return orientation(angle); }

/// Sperm outline in shape coordinates: head ellipse centered at the origin,
/// flagellum along +x with a rounded end.
std::vector<Vec2> sperm_outline(const ShapeSpec& s, double spacing) {
  const double a = s.semi_axes.x(), b = s.semi_axes.y(), w = 0.5 * s.thickness;
  const double xj = a * std::sqrt(1.0 - (w / b) * (w / b));
  const double a0 = std::atan2(w / b, xj / a);
  const double x_end = a + s.tail_length;
  std::vector<Vec2> poly;
  const double head_perimeter = kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
  const int nh = body_segments(head_perimeter * (2.0 * kPi - 2.0 * a0) / (2.0 * kPi), spacing, 12);
  for (int k = 0; k <= nh; ++k) {
    const double t = a0 + (2.0 * kPi - 2.0 * a0) * k / nh;
    poly.emplace_back(a * std::cos(t), b * std::sin(t));
  }
  const Vec2 cap(x_end - w, 0.0);
  const int nl = body_segments(cap.x() - xj, spacing, 1);
  for (int k = 1; k < nl; ++k) poly.emplace_back(xj + (cap.x() - xj) * k / nl, -w);
  const int nc = body_segments(kPi * w, spacing, 4);
  for (int k = 0; k <= nc; ++k) {
    const double t = -0.5 * kPi + kPi * k / nc;
    poly.push_back(cap + w * Vec2(std::cos(t), std::sin(t)));
  }
  for (int k = nl - 1; k >= 1; --k) poly.emplace_back(xj + (cap.x() - xj) * k / nl, w);
  return poly;
}

struct ShapeGeometry {
  std::vector<Hole> holes;
  Vec2 origin = Vec2::Zero();  // body-frame origin in the laboratory frame
  Vec2 frame_offset = Vec2::Zero();
  double junction = 0.0, flagellum = 0.0;
};

ShapeGeometry shape_geometry(const BodySpec& body, int id, double spacing) {
  const ShapeSpec& s = body.shape;
  if (s.spacing > 0.0) spacing = s.spacing;
  const std::string tag = "swimmer" + std::to_string(id);
  ShapeGeometry g;
  switch (s.type) {
    case ShapeSpec::Type::Circle:
      g.holes.push_back(Hole::circle(s.center, s.radius, body_segments(2.0 * kPi * s.radius, spacing, 16), tag, id));
      g.origin = s.center;
      break;
    case ShapeSpec::Type::Ellipse: {
      const double a = s.semi_axes.x(), b = s.semi_axes.y();
      const double per = kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
      g.holes.push_back(Hole::ellipse(s.center, a, b, body.theta, body_segments(per, spacing, 16), tag, id));
      g.origin = s.center;
      break;
    }
    case ShapeSpec::Type::Polygon: {
      Hole h;
      h.polygon = s.points;
      if (polygon_signed_area(h.polygon) < 0.0) std::reverse(h.polygon.begin(), h.polygon.end());
      h.tag = tag;
      h.body = id;
      h.spacing = spacing;
      g.origin = compute_mass_inertia(h.polygon, 1.0).centroid;
      g.holes.push_back(std::move(h));
      break;
    }
    case ShapeSpec::Type::ThreeSphere: {
      const Mat2 q = ccw(body.theta);
      const int n = body_segments(2.0 * kPi * s.radius, spacing, 16);
      for (int k = -1; k <= 1; ++k)
        g.holes.push_back(Hole::circle(s.center + q * Vec2(k * s.rest_length, 0.0), s.radius, n, tag, id));
      g.origin = s.center;
      break;
    }
    case ShapeSpec::Type::Sperm: {
      const auto outline = sperm_outline(s, spacing);
      const Vec2 c = compute_mass_inertia(outline, 1.0).centroid;
      const Mat2 q = ccw(body.theta);
      Hole h;
      for (const auto& p : outline) h.polygon.push_back(s.center + q * (p - c));
      h.tag = tag;
      h.body = id;
      g.holes.push_back(std::move(h));
      g.origin = s.center;
      const double a = s.semi_axes.x(), b = s.semi_axes.y(), w = 0.5 * s.thickness;
      const double xj = a * std::sqrt(1.0 - (w / b) * (w / b));
      g.frame_offset = Vec2(c.x() + a, 0.0);
      g.junction = a + xj;
      g.flagellum = s.tail_length - (xj - a);
      break;
    }
    case ShapeSpec::Type::FromMesh:
      break;
  }
  return g;
}

/// Mass properties of a body straight from its boundary edges (fluid on the
/// left, so hole loops run clockwise).
MassProperties mesh_body_mass(const Mesh& mesh, int body, double density) {
  double area = 0.0, j = 0.0;
  Vec2 first = Vec2::Zero();
  bool any = false;
  Vec2 shift = Vec2::Zero();
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag < 0 || mesh.tags[static_cast<std::size_t>(e.tag)].kind != BoundaryKind::Swimmer ||
        mesh.tags[static_cast<std::size_t>(e.tag)].body != body)
      continue;
    if (!any) shift = mesh.vertices[static_cast<std::size_t>(e.v[0])];
    any = true;
    const Vec2 p = mesh.vertices[static_cast<std::size_t>(e.v[1])] - shift;
    const Vec2 q = mesh.vertices[static_cast<std::size_t>(e.v[0])] - shift;
    const double c = cross(p, q);
    area += c / 2.0;
    first += (p + q) * c / 6.0;
    j += c * (p.dot(p) + p.dot(q) + q.dot(q)) / 12.0;
  }
  if (!any || !(area > 0.0)) throw ValidationError("body " + std::to_string(body) + " has no closed boundary in the mesh");
  MassProperties m;
  m.area = area;
  const Vec2 c = first / area;
  m.centroid = c + shift;
  m.mass = density * area;
  m.inertia = density * (j - area * c.squaredNorm());
  return m;
}

/// Ends of a straight inflow segment and its inward normal.
struct Segment {
  Vec2 a, b, normal;
};

Segment tag_segment(const Mesh& mesh, int tag) {
  Segment s{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  Vec2 dir = Vec2::Zero();
  for (const auto& e : mesh.boundary_edges)
    if (e.tag == tag) dir += mesh.vertices[static_cast<std::size_t>(e.v[1])] - mesh.vertices[static_cast<std::size_t>(e.v[0])];
  if (dir.norm() == 0.0) throw ValidationError("inflow tag '" + mesh.tags[static_cast<std::size_t>(tag)].name + "' has no edges");
  dir.normalize();
  s.normal = Vec2(-dir.y(), dir.x());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int v : mesh.tag_vertices(tag)) {
    const Vec2& p = mesh.vertices[static_cast<std::size_t>(v)];
    const double t = p.dot(dir);
    if (t < lo) {
      lo = t;
      s.a = p;
    }
    if (t > hi) {
      hi = t;
      s.b = p;
    }
  }
  return s;
}

const BoundarySpec* find_boundary(const Scenario& s, const std::string& tag) {
  for (const auto& b : s.boundaries)
    if (b.tag == tag) return &b;
  return nullptr;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse(j, base_dir);
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path.parent_path());
}

std::vector<Hole> shape_holes(const BodySpec& body, int id, double default_spacing) {
  return shape_geometry(body, id, default_spacing).holes;
}

Mesh build_mesh(const Scenario& s) {
  const double spacing = s.mesh.body_spacing > 0.0 ? s.mesh.body_spacing : s.mesh.h;
  Mesh mesh;
  if (s.mesh.source == MeshSpec::Source::File) {
    mesh = load_msh(s.mesh.file);
    mesh.grading = s.mesh.grading;
  } else {
    std::vector<Hole> holes;
    for (std::size_t i = 0; i < s.bodies.size(); ++i) {
      if (s.bodies[i].shape.type == ShapeSpec::Type::FromMesh)
        throw ValidationError("scenario field 'bodies[" + std::to_string(i) + "].shape': mesh shapes need a mesh file");
      for (auto& h : shape_holes(s.bodies[i], static_cast<int>(i), spacing)) holes.push_back(std::move(h));
    }
    GenerateOptions opt;
    opt.grading = s.mesh.grading;
    opt.smoothing_passes = s.mesh.smoothing_passes;
    opt.mirror_symmetric = s.mesh.mirror_symmetric;
    opt.edge_spacing = s.mesh.edge_spacing;
    if (s.mesh.source == MeshSpec::Source::Channel)
      mesh = generate_channel(s.mesh.length, s.mesh.height, holes, s.mesh.h, opt);
    else
      mesh = generate_domain(s.mesh.outer, holes, s.mesh.h, opt);
  }
  std::set<std::string> names;
  for (auto& tag : mesh.tags) {
    names.insert(tag.name);
    if (tag.kind == BoundaryKind::Swimmer) {
      if (tag.body < 0 || tag.body >= static_cast<int>(s.bodies.size()))
        throw ValidationError("swimmer tag '" + tag.name + "' has no body entry in the scenario");
      continue;
    }
    const BoundarySpec* b = find_boundary(s, tag.name);
    if (!b) {
      if (tag.kind == BoundaryKind::DirichletInflow)
        throw ValidationError("scenario field 'boundaries." + tag.name + "': missing data for inflow boundary");
      continue;
    }
    switch (b->type) {
      case BoundarySpec::Type::NoSlip: tag.kind = BoundaryKind::DirichletWall; break;
      case BoundarySpec::Type::Dirichlet: tag.kind = b->wall ? BoundaryKind::DirichletWall : BoundaryKind::DirichletInflow; break;
      case BoundarySpec::Type::Neumann: tag.kind = BoundaryKind::NeumannOutflow; break;
      case BoundarySpec::Type::ParabolicInflow: tag.kind = BoundaryKind::DirichletInflow; break;
    }
  }
  for (const auto& b : s.boundaries)
    if (!names.count(b.tag)) throw ValidationError("scenario field 'boundaries." + b.tag + "': no such boundary tag in the mesh");
  for (std::size_t i = 0; i < s.bodies.size(); ++i)
    if (mesh.body_vertices(static_cast<int>(i)).empty())
      throw ValidationError("scenario field 'bodies[" + std::to_string(i) + "]': body has no boundary in the mesh");
  return mesh;
}

FluidParams fluid_params(const Scenario& s, const Mesh& mesh) {
  FluidParams p;
  p.mu = s.mu;
  p.rho = s.rho;
  p.bdf_order = s.bdf_order;
  const auto fx = s.force[0], fy = s.force[1];
  p.force = [fx, fy](double t, const Vec2& x) { return Vec2(fx(t, x.x(), x.y()), fy(t, x.x(), x.y())); };
  p.dirichlet.resize(mesh.tags.size());
  p.traction.resize(mesh.tags.size());
  for (std::size_t t = 0; t < mesh.tags.size(); ++t) {
    const BoundarySpec* b = find_boundary(s, mesh.tags[t].name);
    if (!b) continue;
    const auto ex = b->value[0], ey = b->value[1];
    auto pair = [ex, ey](double time, const Vec2& x) { return Vec2(ex(time, x.x(), x.y()), ey(time, x.x(), x.y())); };
    switch (b->type) {
      case BoundarySpec::Type::NoSlip: break;
      case BoundarySpec::Type::Dirichlet: p.dirichlet[t] = pair; break;
      case BoundarySpec::Type::Neumann: p.traction[t] = pair; break;
      case BoundarySpec::Type::ParabolicInflow: {
        const Segment seg = tag_segment(mesh, static_cast<int>(t));
        const auto speed = b->speed;
        p.dirichlet[t] = [seg, speed](double time, const Vec2& x) {
          const Vec2 d = seg.b - seg.a;
          const double r = std::clamp((x - seg.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
          return Vec2(4.0 * r * (1.0 - r) * speed(time, x.x(), x.y()) * seg.normal);
        };
        break;
      }
    }
  }
  return p;
}

std::vector<Body> build_bodies(const Scenario& s, const Mesh& mesh) {
  const double spacing = s.mesh.body_spacing > 0.0 ? s.mesh.body_spacing : s.mesh.h;
  std::vector<Body> bodies;
  for (std::size_t i = 0; i < s.bodies.size(); ++i) {
    const BodySpec& spec = s.bodies[i];
    const int id = static_cast<int>(i);
    Body b;
    b.id = id;
    b.density = spec.density;
    b.tag = "swimmer" + std::to_string(id);
    const auto geo = shape_geometry(spec, id, spacing);
    MassProperties mp;
    if (spec.shape.type == ShapeSpec::Type::FromMesh) {
      mp = mesh_body_mass(mesh, id, spec.density);
      b.x_cm = mp.centroid;
    } else {
      std::vector<std::vector<Vec2>> polys;
      for (const auto& h : geo.holes) polys.push_back(h.polygon);
      mp = compute_mass_inertia(polys, spec.density);
      b.x_cm = geo.origin;
    }
    b.mass = mp.mass;
    b.inertia = mp.inertia + mp.mass * (mp.centroid - b.x_cm).squaredNorm();
    b.X_cm = b.x_cm;
    b.theta = spec.theta;
    b.l = spec.velocity;
    b.omega = spec.omega;
    const GaitSpec& g = spec.gait;
    if (g.type == "squirmer") {
      b.gait = std::make_shared<SquirmerGait>(g.B1, g.beta, g.heading);
    } else if (g.type == "three_sphere") {
      ThreeSphereParams p;
      p.rest_length = spec.shape.rest_length;
      p.amplitude = g.amplitude;
      p.phase_time = g.phase_time;
      p.reversed = g.reversed;
      b.gait = std::make_shared<ThreeSphereGait>(p);
    } else if (g.type == "sperm_wave") {
      SpermWaveParams p;
      p.amplitude = g.amplitude;
      p.wavelength = g.wavelength;
      p.period = g.period;
      p.ramp_time = g.ramp_time;
      p.length = geo.flagellum;
      p.junction = geo.junction;
      p.frame_offset = geo.frame_offset;
      b.gait = std::make_shared<SpermWaveGait>(p);
    }
    attach_boundary(b, mesh);
    bodies.push_back(std::move(b));
  }
  return bodies;
}

}  // namespace swimfem
