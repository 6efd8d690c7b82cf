#include "swimfem/simulation.hpp"

#include "swimfem/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace swimfem {

using json = nlohmann::json;

namespace {

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Mesh vertex -> (body, boundary index).
std::unordered_map<int, std::pair<int, int>> boundary_lookup(const std::vector<Body>& bodies) {
  std::unordered_map<int, std::pair<int, int>> m;
  for (std::size_t b = 0; b < bodies.size(); ++b)
    for (std::size_t k = 0; k < bodies[b].vertices.size(); ++k)
      m[bodies[b].vertices[k]] = {static_cast<int>(b), static_cast<int>(k)};
  return m;
}

}  // namespace

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)) {
  if (!(scenario_.dt > 0.0)) throw ValidationError("scenario field 'time.dt': must be positive");
  Mesh mesh = build_mesh(scenario_);
  fluid_ = fluid_params(scenario_, mesh);
  bodies_ = build_bodies(scenario_, mesh);
  ale_.rebase(mesh);
  mesh_ = std::move(mesh);
  dofs_ = build_taylor_hood(mesh_);
  u_ = Vector::Zero(dofs_.velocity_dofs());
  u_prev_ = u_;
  p_ = Vector::Zero(dofs_.pressure_dofs());
  loads_.assign(bodies_.size(), ExternalLoad{});
  if (scenario_.collisions) update_contacts(mesh_, bodies_);
}

Vector Simulation::boundary_values(const DofMap& dofs, const std::vector<Body>& posed, double t,
                                   const std::vector<std::vector<Vec2>>* D_new) const {
  Vector v = dirichlet_values(dofs, fluid_, t);
  const auto lookup = boundary_lookup(posed);
  std::vector<Vec2> vertex_ud(static_cast<std::size_t>(dofs.num_vertices), Vec2::Zero());
  auto gait_at_node = [&](const Body& body, const Vec2& x) {
    const Mat2 q = orientation(body.theta);
    return Vec2(q * body.gait->velocity(t, q.transpose() * (x - body.x_cm)));
  };
  for (int n = 0; n < dofs.num_vertices; ++n) {
    if (dofs.node_class[static_cast<std::size_t>(n)] != DofClass::Swimmer) continue;
    const auto it = lookup.find(n);
    if (it == lookup.end()) throw NumericalError("swimmer vertex " + std::to_string(n) + " is not tracked by its body");
    const Body& body = posed[static_cast<std::size_t>(it->second.first)];
    const auto k = static_cast<std::size_t>(it->second.second);
    Vec2 ud;
    if (!body.gait->deforms_boundary())
      ud = gait_at_node(body, dofs.node_coords[static_cast<std::size_t>(n)]);
    else if (D_new)
      ud = orientation(body.theta) * ((*D_new)[static_cast<std::size_t>(it->second.first)][k] - body.deformation[k]) /
           scenario_.dt;
    else
      ud = orientation(body.theta) * body.gait->velocity(t, body.material[k]);
    vertex_ud[static_cast<std::size_t>(n)] = ud;
    v[2 * n] = ud.x();
    v[2 * n + 1] = ud.y();
  }
  for (int e = 0; e < dofs.num_edges; ++e) {
    const int n = dofs.num_vertices + e;
    if (dofs.node_class[static_cast<std::size_t>(n)] != DofClass::Swimmer) continue;
    const Body& body = posed[static_cast<std::size_t>(dofs.node_body[static_cast<std::size_t>(n)])];
    Vec2 ud;
    if (!body.gait->deforms_boundary()) {
      ud = gait_at_node(body, dofs.node_coords[static_cast<std::size_t>(n)]);
    } else {
      const auto& ev = dofs.edge_vertices[static_cast<std::size_t>(e)];
      ud = 0.5 * (vertex_ud[static_cast<std::size_t>(ev[0])] + vertex_ud[static_cast<std::size_t>(ev[1])]);
    }
    v[2 * n] = ud.x();
    v[2 * n + 1] = ud.y();
  }
  return v;
}

Simulation::Solve Simulation::solve_system(const Mesh&, const DofMap& dofs, const std::vector<Body>& posed, double t,
                                           double dt, const Vector& boundary, const Vector* u_conv,
                                           const Vector* u_ale, const std::vector<ExternalLoad>& loads) {
  AssemblyInput in;
  in.t = t;
  in.dt = dt;
  in.u_conv = u_conv;
  in.u_ale = u_ale;
  in.u_prev = dt > 0.0 ? &u_ : nullptr;
  in.u_prev2 = dt > 0.0 && has_prev_ && scenario_.bdf_order == 2 ? &u_prev_ : nullptr;
  const SystemBlocks blocks = assemble_blocks(dofs, fluid_, in);
  const Projection proj = build_projection(dofs, posed, fluid_.pressure_gauge);
  CoupledInput ci;
  ci.dt = dt;
  ci.boundary_values = &boundary;
  for (std::size_t b = 0; b < posed.size(); ++b) {
    // Body rows take counter-clockwise torques.
    ci.loads.push_back({loads[b].force, -loads[b].torque});
    ci.l_prev.push_back(bodies_[b].l);
    ci.omega_prev.push_back(bodies_[b].omega);
  }
  const LinearSystem sys = assemble_coupled(dofs, blocks, proj, posed, ci);
  const CoupledSolution cs = solve_coupled(dofs, sys, static_cast<int>(posed.size()));
  Solve s{cs.u, cs.p, cs.l, cs.omega, cs.report.residual};
  if (!s.u.allFinite() || !s.p.allFinite()) throw NumericalError("non-finite values in the flow solution");
  return s;
}

void Simulation::update_contacts(const Mesh& mesh, const std::vector<Body>& posed) {
  const int nb = static_cast<int>(posed.size());
  fields_ = compute_distance_fields(mesh, nb, scenario_.collision.d_max);
  contacts_ = find_contacts(mesh, fields_, scenario_.collision);
  loads_.assign(posed.size(), ExternalLoad{});
  for (int b = 0; b < nb; ++b)
    loads_[static_cast<std::size_t>(b)] = total_external(b, posed[static_cast<std::size_t>(b)].x_cm, contacts_, scenario_.collision);
  for (const auto& c : contacts_)
    if (c.active && !(c.d > 0.0))
      throw NumericalError("bodies interpenetrate (contact distance " + std::to_string(c.d) + ")");
}

Simulation::Solve Simulation::instantaneous_solve() {
  if (scenario_.collisions) update_contacts(mesh_, bodies_);
  const Vector bv = boundary_values(dofs_, bodies_, time(), nullptr);
  return solve_system(mesh_, dofs_, bodies_, time(), 0.0, bv, nullptr, nullptr, loads_);
}

std::pair<std::vector<Vec2>, std::vector<double>> Simulation::instantaneous_velocities() {
  const Solve s = instantaneous_solve();
  return {s.l, s.omega};
}

void Simulation::on_remesh(const Mesh& old_mesh, const RemeshResult& r) {
  for (auto& body : bodies_)
    for (int& v : body.vertices) {
      const int m = r.vertex_map[static_cast<std::size_t>(v)];
      if (m < 0) throw NumericalError("remeshing lost a boundary vertex of body " + std::to_string(body.id));
      v = m;
    }
  const DofMap dofs = build_taylor_hood(r.mesh);
  u_ = transfer_velocity(old_mesh, dofs_, u_, dofs);
  u_prev_ = transfer_velocity(old_mesh, dofs_, u_prev_, dofs);
  const std::vector<double> p_old(p_.data(), p_.data() + p_.size());
  const auto p_new = transfer_scalar(old_mesh, p_old, r.mesh);
  p_ = Eigen::Map<const Vector>(p_new.data(), static_cast<Eigen::Index>(p_new.size()));
  mesh_ = r.mesh;
  dofs_ = dofs;
}

StepInfo Simulation::step() {
  const double dt = scenario_.dt;
  const double tn = time();
  const double tn1 = static_cast<double>(step_ + 1) * dt;
  const bool stokes = fluid_.rho == 0.0;
  const std::size_t nb = bodies_.size();
  StepInfo info;

  if (stokes && nb > 0) {
    bool jump = step_ == 0;
    for (const auto& b : bodies_) jump = jump || b.gait->rate_jump(tn);
    if (jump) {
      const Solve s = instantaneous_solve();
      for (std::size_t b = 0; b < nb; ++b) {
        bodies_[b].l = s.l[b];
        bodies_[b].omega = s.omega[b];
      }
    }
  }

  std::vector<std::vector<Vec2>> D_new(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Body& body = bodies_[b];
    D_new[b] = body.deformation;
    if (!body.gait->deforms_boundary()) continue;
    for (std::size_t k = 0; k < body.material.size(); ++k) D_new[b][k] += body.gait->increment(tn, tn1, body.material[k]);
  }

  const int iterations = stokes ? scenario_.fixed_point_iterations
                                : std::max(scenario_.fixed_point_iterations, scenario_.picard_iterations);
  std::vector<Vec2> x_pred(nb);
  std::vector<double> th_pred(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    x_pred[b] = bodies_[b].x_cm + dt * bodies_[b].l;
    th_pred[b] = bodies_[b].theta + dt * bodies_[b].omega;
  }

  auto targets = [&](const Mesh& reference) {
    std::vector<Vec2> disp(reference.vertices.size(), Vec2::Zero());
    for (std::size_t b = 0; b < nb; ++b) boundary_displacement(bodies_[b], x_pred[b], th_pred[b], D_new[b], reference, disp);
    return disp;
  };
  auto remeshed = [&](const Mesh& old, const RemeshResult& r) { on_remesh(old, r); };

  Vector u_conv = u_;
  DomainStep dom;
  DofMap dofs;
  Solve s;
  std::vector<Body> posed;
  bool converged = false;
  for (int k = 0; k < iterations; ++k) {
    dom = step_domain(ale_, targets, dt, scenario_.quality_threshold, remeshed);
    if (dom.remeshed) {
      info.remeshed = true;
      u_conv = u_;
    }
    dofs = build_taylor_hood(dom.mesh);
    const Vector u_ale = p1_to_p2(dofs, dom.mesh_velocity);
    posed = bodies_;
    for (std::size_t b = 0; b < nb; ++b) {
      posed[b].x_cm = x_pred[b];
      posed[b].theta = th_pred[b];
    }
    if (scenario_.collisions) update_contacts(dom.mesh, posed);
    const Vector bv = boundary_values(dofs, posed, tn1, &D_new);
    s = solve_system(dom.mesh, dofs, posed, tn1, dt, bv, stokes ? nullptr : &u_conv, stokes ? nullptr : &u_ale, loads_);
    info.fixed_point_iterations = k + 1;
    info.residual = s.residual;

    double dx = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const Vec2 xn = bodies_[b].x_cm + 0.5 * dt * (bodies_[b].l + s.l[b]);
      const double tn_ = bodies_[b].theta + 0.5 * dt * (bodies_[b].omega + s.omega[b]);
      dx = std::max({dx, (xn - x_pred[b]).norm(), std::abs(tn_ - th_pred[b])});
      x_pred[b] = xn;
      th_pred[b] = tn_;
    }
    bool picard = true;
    if (!stokes) picard = inf_norm(s.u - u_conv) <= scenario_.picard_tolerance * std::max(1.0, inf_norm(s.u));
    u_conv = s.u;
    if (dx < 1e-10 && picard) {
      converged = true;
      break;
    }
    if (stokes && k + 1 >= scenario_.fixed_point_iterations) converged = true;
  }
  info.converged = converged || stokes;
  if (!info.converged && scenario_.abort_on_nonconvergence)
    throw NumericalError("fixed-point iteration did not converge at t = " + std::to_string(tn1));

  ale_.phi = dom.phi;
  mesh_ = std::move(dom.mesh);
  dofs_ = std::move(dofs);
  u_prev_ = u_;
  has_prev_ = true;
  u_ = s.u;
  p_ = s.p;
  update_bodies(bodies_, s.l, s.omega, dt);
  for (std::size_t b = 0; b < nb; ++b) bodies_[b].deformation = std::move(D_new[b]);
  ++step_;
  return info;
}

std::vector<TrajectoryRecord> Simulation::records() const {
  std::vector<TrajectoryRecord> out;
  for (std::size_t b = 0; b < bodies_.size(); ++b) {
    const Body& body = bodies_[b];
    TrajectoryRecord r;
    r.t = time();
    r.body = static_cast<int>(b);
    r.x = body.x_cm;
    r.theta = body.theta;
    r.l = body.l;
    r.omega = body.omega;
    r.fe = loads_[b].force;
    r.te = loads_[b].torque;
    r.dmin = std::numeric_limits<double>::quiet_NaN();
    for (const auto& c : contacts_)
      if (c.body_i == r.body || (c.kind == ContactKind::BodyBody && c.partner == r.body))
        r.dmin = std::isnan(r.dmin) ? c.d : std::min(r.dmin, c.d);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json vec_json(const std::vector<Vec2>& v) {
  json a = json::array();
  for (const auto& p : v) {
    a.push_back(p.x());
    a.push_back(p.y());
  }
  return a;
}

std::vector<Vec2> json_vec(const json& a) {
  std::vector<Vec2> v;
  for (std::size_t i = 0; i + 1 < a.size(); i += 2) v.emplace_back(a[i].get<double>(), a[i + 1].get<double>());
  return v;
}

json eigen_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector json_eigen(const json& a) {
  const auto v = a.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void Simulation::save_checkpoint(const std::filesystem::path& path) const {
  json j;
  j["format"] = "swimfem-checkpoint";
  j["version"] = 1;
  j["scenario"] = scenario_.name;
  j["step"] = step_;
  j["dt"] = scenario_.dt;
  const Mesh& ref = ale_.reference;
  json m;
  m["vertices"] = vec_json(ref.vertices);
  json cells = json::array();
  for (const auto& c : ref.cells) cells.push_back({c[0], c[1], c[2]});
  m["cells"] = cells;
  json edges = json::array();
  for (const auto& e : ref.boundary_edges) edges.push_back({e.v[0], e.v[1], e.tag});
  m["edges"] = edges;
  json tags = json::array();
  for (const auto& t : ref.tags) tags.push_back({t.name, static_cast<int>(t.kind), t.body});
  m["tags"] = tags;
  m["axis"] = ref.symmetry_axis ? json(*ref.symmetry_axis) : json(nullptr);
  m["grading"] = ref.grading;
  j["reference"] = m;
  j["phi"] = vec_json(ale_.phi);
  j["u"] = eigen_json(u_);
  j["u_prev"] = eigen_json(u_prev_);
  j["p"] = eigen_json(p_);
  j["has_prev"] = has_prev_;
  json bodies = json::array();
  for (const auto& b : bodies_) {
    json o;
    o["x_cm"] = {b.x_cm.x(), b.x_cm.y()};
    o["theta"] = b.theta;
    o["l"] = {b.l.x(), b.l.y()};
    o["omega"] = b.omega;
    o["vertices"] = b.vertices;
    o["material"] = vec_json(b.material);
    o["deformation"] = vec_json(b.deformation);
    bodies.push_back(o);
  }
  j["bodies"] = bodies;
  const auto bytes = json::to_cbor(j);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

void Simulation::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j;
  try {
    j = json::from_cbor(bytes);
    if (j.at("format") != "swimfem-checkpoint" || j.at("version") != 1) throw ValidationError("unknown checkpoint format");
    if (j.at("dt").get<double>() != scenario_.dt) throw ValidationError("checkpoint was written with a different dt");
    if (j.at("bodies").size() != bodies_.size()) throw ValidationError("checkpoint body count does not match the scenario");
    Mesh ref;
    const json& m = j.at("reference");
    ref.vertices = json_vec(m.at("vertices"));
    for (const auto& c : m.at("cells")) ref.cells.push_back({c[0].get<int>(), c[1].get<int>(), c[2].get<int>()});
    for (const auto& e : m.at("edges")) ref.boundary_edges.push_back({{e[0].get<int>(), e[1].get<int>()}, e[2].get<int>()});
    for (const auto& t : m.at("tags"))
      ref.tags.push_back({t[0].get<std::string>(), static_cast<BoundaryKind>(t[1].get<int>()), t[2].get<int>()});
    if (!m.at("axis").is_null()) ref.symmetry_axis = m.at("axis").get<double>();
    ref.grading = m.at("grading").get<double>();
    if (ref.tags.size() != mesh_.tags.size()) throw ValidationError("checkpoint mesh tags do not match the scenario");
    ale_.rebase(std::move(ref));
    ale_.phi = json_vec(j.at("phi"));
    if (ale_.phi.size() != ale_.reference.vertices.size()) throw ValidationError("checkpoint displacement size mismatch");
    mesh_ = ale_.current();
    dofs_ = build_taylor_hood(mesh_);
    u_ = json_eigen(j.at("u"));
    u_prev_ = json_eigen(j.at("u_prev"));
    p_ = json_eigen(j.at("p"));
    if (u_.size() != dofs_.velocity_dofs() || u_prev_.size() != u_.size() || p_.size() != dofs_.pressure_dofs())
      throw ValidationError("checkpoint field sizes do not match its mesh");
    has_prev_ = j.at("has_prev").get<bool>();
    step_ = j.at("step").get<long long>();
    for (std::size_t b = 0; b < bodies_.size(); ++b) {
      const json& o = j.at("bodies")[b];
      Body& body = bodies_[b];
      body.x_cm = Vec2(o.at("x_cm")[0].get<double>(), o.at("x_cm")[1].get<double>());
      body.theta = o.at("theta").get<double>();
      body.l = Vec2(o.at("l")[0].get<double>(), o.at("l")[1].get<double>());
      body.omega = o.at("omega").get<double>();
      body.vertices = o.at("vertices").get<std::vector<int>>();
      body.material = json_vec(o.at("material"));
      body.deformation = json_vec(o.at("deformation"));
    }
  } catch (const json::exception& e) {
    throw ValidationError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  loads_.assign(bodies_.size(), ExternalLoad{});
  contacts_.clear();
  if (scenario_.collisions) update_contacts(mesh_, bodies_);
}

}  // namespace swimfem
