// Acceptance checks. Without arguments every criterion runs; otherwise only
// the listed criterion numbers. Prints one PASS/FAIL line per criterion and
// exits non-zero when any of them fails.

#include "../support.hpp"

#include "swimfem/ale.hpp"
#include "swimfem/collision.hpp"
#include "swimfem/errors.hpp"
#include "swimfem/scenario.hpp"
#include "swimfem/simulation.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace swimfem;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scenario_path(const std::string& name) { return fs::path(SWIMFEM_SCENARIO_DIR) / (name + ".json"); }

json scenario_json(const std::string& name) {
  std::ifstream in(scenario_path(name));
  return json::parse(in);
}

Scenario load(const json& j) { return parse_scenario_text(j.dump(), SWIMFEM_SCENARIO_DIR); }

/// Steps a scenario to its final time, calling `each` after every step.
void simulate(const Scenario& s, const std::function<void(const Simulation&)>& each) {
  Simulation sim(s);
  const long long n = static_cast<long long>(std::floor(s.t_final / s.dt + 1e-9));
  while (sim.step_index() < n) {
    sim.step();
    if (each) each(sim);
  }
}

// ---------------------------------------------------------------------------

Outcome poiseuille() {
  const auto t0 = std::chrono::steady_clock::now();
  const swimfem::testing::Poiseuille flow;
  const Mesh m = swimfem::testing::poiseuille_mesh(0.07);
  const DofMap d = build_taylor_hood(m);
  const auto sol = solve_flow(d, swimfem::testing::poiseuille_params(m, flow), {});
  double err = 0.0;
  for (int n = 0; n < d.num_nodes(); ++n)
    err = std::max(err, (sol.u.segment<2>(2 * n) - flow.u(d.node_coords[static_cast<std::size_t>(n)])).cwiseAbs().maxCoeff());
  const double t = seconds_since(t0);
  return {err < 1e-9 && t < 5.0, fmt("max velocity error %.2e on %d cells in %.2f s", err, m.num_cells(), t)};
}

Outcome convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Mesh> meshes{generate_channel(1.0, 1.0, {}, 0.2)};
  meshes.push_back(refine_uniform(meshes.back()));
  meshes.push_back(refine_uniform(meshes.back()));
  const auto r = convergence_study(swimfem::testing::smooth_stokes(), meshes);
  const double ou = *std::min_element(r.order_u.begin(), r.order_u.end());
  const double op = *std::min_element(r.order_p.begin(), r.order_p.end());
  const double t = seconds_since(t0);
  return {ou >= 2.7 && op >= 1.7 && t < 60.0, fmt("velocity order %.3f, pressure order %.3f in %.1f s", ou, op, t)};
}

Mesh column_strip(const std::vector<double>& xs) {
  Mesh m;
  for (double x : xs) m.vertices.emplace_back(x, 0.0);
  for (double x : xs) m.vertices.emplace_back(x, 1.0);
  const int n = static_cast<int>(xs.size());
  m.tags = {tag_from_name("wall")};
  for (int i = 0; i + 1 < n; ++i) {
    m.cells.push_back({i, i + 1, n + i + 1});
    m.cells.push_back({i, n + i + 1, n + i});
    m.boundary_edges.push_back({{i, i + 1}, 0});
    m.boundary_edges.push_back({{n + i + 1, n + i}, 0});
  }
  m.boundary_edges.push_back({{n - 1, 2 * n - 1}, 0});
  m.boundary_edges.push_back({{n, 0}, 0});
  m.validate();
  return m;
}

Outcome tau_formula() {
  std::vector<Mesh> meshes{column_strip({0, 1, 3, 7}), column_strip({0, 0.1, 0.25, 1.0, 1.05, 3.0}),
                           generate_channel(2.0, 1.0, {Hole::circle({1.0, 0.5}, 0.2, 24, "swimmer0", 0)}, 0.2)};
  double worst = 0.0;
  for (const auto& m : meshes) {
    std::vector<double> v;
    for (int c = 0; c < m.num_cells(); ++c) v.push_back(m.signed_area(c));
    const double vmin = *std::min_element(v.begin(), v.end()), vmax = *std::max_element(v.begin(), v.end());
    const auto tau = compute_tau(m);
    for (std::size_t c = 0; c < v.size(); ++c) worst = std::max(worst, std::abs(tau[c] - (1.0 - vmin / vmax) / (v[c] / vmax)));
  }
  return {worst <= 1e-14, fmt("max deviation from hand evaluation %.1e over 3 meshes", worst)};
}

Mesh annulus(double h) {
  OuterBoundary outer;
  for (int k = 0; k < 128; ++k) {
    const double a = 2.0 * kPi * k / 128;
    outer.polygon.emplace_back(std::cos(a), std::sin(a));
    outer.edge_tags.push_back("outer");
  }
  return generate_domain(outer, {Hole::circle({0, 0}, 0.3, 64, "swimmer0", 0)}, h);
}

Outcome max_principle() {
  const Mesh m = annulus(0.05);
  const Vec2 d(0.08, -0.05);
  const auto phi = solve_extension(m, compute_tau(m), std::vector<Vec2>(m.vertices.size(), d));
  double violation = 0.0;
  for (const auto& p : phi)
    for (int k = 0; k < 2; ++k) {
      violation = std::max(violation, std::min(0.0, d[k]) - p[k]);
      violation = std::max(violation, p[k] - std::max(0.0, d[k]));
    }
  return {violation <= 1e-10, fmt("largest excursion outside [min(0,d), max(0,d)] is %.1e on %d vertices", violation, m.num_vertices())};
}

Outcome fast_marching() {
  const double h = 0.04;
  const Vec2 c(1.0, 1.0);
  const double r = 0.5 * h;
  GenerateOptions opt;
  opt.grading = 0.0;
  const Mesh m = generate_channel(2.0, 2.0, {Hole::circle(c, r, 8, "swimmer0", 0)}, h, opt);
  const double d_max = 0.5;
  const auto f = fast_march(m, m.body_vertices(0), d_max);
  double err = 0.0;
  bool saturated = true;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const double exact = (m.vertices[static_cast<std::size_t>(v)] - c).norm() - r;
    const double val = f.value[static_cast<std::size_t>(v)];
    if (val < d_max) err = std::max(err, std::abs(val - exact));
    if (exact > d_max + 2.0 * h && val != d_max) saturated = false;
    if (val > d_max) saturated = false;
  }
  return {err <= 2.0 * h && saturated, fmt("max band error %.4f (2h = %.4f), outside band exactly d_max: %s", err, 2.0 * h,
                                            saturated ? "yes" : "no")};
}

Outcome collision_sanity() {
  std::string detail;
  bool pass = true;
  for (const std::string name : {"squirmer_pair_neutral", "squirmer_pair_puller"}) {
    const Scenario s = load(scenario_json(name));
    const double radius = s.bodies[0].shape.radius;
    const double w = s.collision.w_col;
    std::vector<double> y0;
    for (const auto& b : s.bodies) y0.push_back(b.shape.center.y());
    double min_d = 1e300, pre_dev = 0.0;
    bool activated = false;
    double t_activation = -1.0;
    simulate(s, [&](const Simulation& sim) {
      for (const auto& c : sim.contacts())
        if (c.kind == ContactKind::BodyBody) {
          min_d = std::min(min_d, c.d);
          if (c.d <= w && !activated) {
            activated = true;
            t_activation = sim.time();
          }
        }
      if (!activated)
        for (std::size_t b = 0; b < sim.bodies().size(); ++b)
          pre_dev = std::max(pre_dev, std::abs(sim.bodies()[b].x_cm.y() - y0[b]));
    });
    const bool ok = min_d > 0.0 && activated && pre_dev < 1e-3 * radius;
    pass = pass && ok;
    detail += fmt("%s: min d %.4f, activation at t=%.2f, lateral deviation before it %.1e; ", name.c_str(), min_d,
                  t_activation, pre_dev);
  }
  return {pass, detail};
}

struct SquirmerRun {
  double speed = 0.0;
  double drift = 0.0;
  double travel = 0.0;
  int cells = 0;
};

SquirmerRun lone_squirmer(double h, double spacing) {
  json j = json::parse(R"({
    "name": "lone_squirmer",
    "mesh": {"source": "channel", "length": 20, "height": 20, "grading": 0.3},
    "fluid": {"mu": 1, "rho": 0},
    "boundaries": {"bottom": {"type": "no_slip"}, "top": {"type": "no_slip"},
                   "left": {"type": "no_slip"}, "right": {"type": "no_slip"}},
    "bodies": [{"shape": {"type": "circle", "center": [9, 10], "radius": 1},
                "gait": {"type": "squirmer", "B1": 1, "beta": 0, "heading": [1, 0]}}],
    "time": {"t_final": 2, "dt": 0.1}
  })");
  j["mesh"]["h"] = h;
  j["mesh"]["body_spacing"] = spacing;
  const Scenario s = load(j);
  SquirmerRun r;
  const Vec2 x0 = s.bodies[0].shape.center;
  double sum = 0.0;
  int n = 0;
  simulate(s, [&](const Simulation& sim) {
    // Mean speed over the second half of the run.
    if (sim.time() > 1.0 + 1e-9) {
      sum += sim.bodies()[0].l.norm();
      ++n;
    }
    r.cells = sim.mesh().num_cells();
    r.drift = std::abs(sim.bodies()[0].x_cm.y() - x0.y());
    r.travel = (sim.bodies()[0].x_cm - x0).norm();
  });
  r.speed = sum / n;
  return r;
}

Outcome squirmer_straightness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto coarse = lone_squirmer(2.0, 0.2);
  const auto mid = lone_squirmer(1.5, 0.1);
  const auto fine = lone_squirmer(1.0, 0.05);
  const double change = std::abs(fine.speed - mid.speed) / fine.speed;
  const double drift = fine.drift / fine.travel;
  const double t = seconds_since(t0);
  return {drift < 0.01 && change < 0.02 && t < 600.0,
          fmt("speeds %.5f / %.5f / %.5f on %d / %d / %d cells, finest change %.3f%%, drift %.2e of travel, %.0f s", coarse.speed,
              mid.speed, fine.speed, coarse.cells, mid.cells, fine.cells, 100.0 * change, drift, t)};
}

Outcome three_sphere_free() {
  json j = scenario_json("three_sphere_free");
  const double period = 4.0 * j["bodies"][0]["gait"]["phase_time"].get<double>();
  j["time"]["t_final"] = period;
  auto displacement = [&](bool reversed) {
    j["bodies"][0]["gait"]["reversed"] = reversed;
    const Scenario s = load(j);
    Vec2 x = s.bodies[0].shape.center;
    const Vec2 start = x;
    simulate(s, [&](const Simulation& sim) { x = sim.bodies()[0].x_cm; });
    return Vec2(x - start);
  };
  const Vec2 fwd = displacement(false);
  const Vec2 rev = displacement(true);
  const double mismatch = (fwd + rev).norm() / fwd.norm();
  return {fwd.x() > 0.0 && mismatch < 0.05,
          fmt("cycle displacement (%.6f, %.1e), reversed (%.6f, %.1e), mismatch %.3f%%", fwd.x(), fwd.y(), rev.x(), rev.y(),
              100.0 * mismatch)};
}

Outcome three_sphere_wall() {
  const Scenario s = load(scenario_json("three_sphere_wall"));
  const auto* gait = dynamic_cast<const ThreeSphereGait*>(build_bodies(s, build_mesh(s))[0].gait.get());
  const double cycle = 4.0 * gait->params().phase_time;
  const long long per_cycle = std::llround(cycle / s.dt);
  std::vector<double> theta{s.bodies[0].theta};
  double first_d = -1.0, closest = 1e300, final_d = 0.0, peak_force = 0.0;
  simulate(s, [&](const Simulation& sim) {
    const auto rec = sim.records()[0];
    if (first_d < 0.0) first_d = rec.dmin;
    closest = std::min(closest, rec.dmin);
    final_d = rec.dmin;
    peak_force = std::max(peak_force, rec.fe.norm());
    if (sim.step_index() % per_cycle == 0) theta.push_back(rec.theta);
  });
  // Orientation sampled once per stroke cycle removes the intra-cycle wobble.
  bool down = false, up = false;
  for (std::size_t k = 1; k < theta.size(); ++k) {
    const double d = theta[k] - theta[k - 1];
    if (d < 0.0) down = true;
    if (d > 0.0) up = true;
  }
  const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
  const bool approach = closest < first_d;
  const bool pass = approach && peak_force > 0.0 && down && up && final_d > s.collision.w_col;
  return {pass, fmt("wall distance %.3f -> min %.3f -> final %.3f (w_col %.2f), peak contact force %.3f, "
                    "cycle-sampled theta %.3f..%.3f with decreasing and increasing cycles: %s",
                    first_d, closest, final_d, s.collision.w_col, peak_force, *lo, *hi, down && up ? "yes" : "no")};
}

Outcome sperm_cruise() {
  const json j = scenario_json("sperm2d");
  const Scenario s = load(j);
  const double period = j["bodies"][0]["gait"]["period"].get<double>();
  const double ramp = j["bodies"][0]["gait"]["ramp_time"].get<double>();
  const long long per_period = std::llround(period / s.dt);
  std::vector<Vec2> samples;
  simulate(s, [&](const Simulation& sim) {
    if (sim.time() >= ramp - 1e-9 && sim.step_index() % per_period == 0) samples.push_back(sim.bodies()[0].x_cm);
  });
  if (samples.size() < 3) return {false, "fewer than two full periods after the ramp"};
  std::vector<double> speed, heading;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const Vec2 d = samples[k] - samples[k - 1];
    speed.push_back(d.norm() / period);
    heading.push_back(std::atan2(d.y(), d.x()) * 180.0 / kPi);
  }
  double worst_speed = 0.0;
  for (std::size_t k = 1; k < speed.size(); ++k) worst_speed = std::max(worst_speed, std::abs(speed[k] - speed[k - 1]) / speed[k - 1]);
  // Headings relative to the first period, wrapped so a course along -x does
  // not straddle the branch cut.
  std::vector<double> rel;
  for (double h : heading) rel.push_back(std::remainder(h - heading.front(), 360.0));
  const auto [hlo, hhi] = std::minmax_element(rel.begin(), rel.end());
  const double spread = *hhi - *hlo;
  return {worst_speed < 0.05 && spread < 2.0,
          fmt("%zu periods after the ramp: speed %.4f..%.4f, largest change %.2f%%, heading %.2f deg, spread %.3f deg", speed.size(),
              *std::min_element(speed.begin(), speed.end()), *std::max_element(speed.begin(), speed.end()),
              100.0 * worst_speed, heading.front(), spread)};
}

Outcome rest_state() {
  const json j = json::parse(R"({
    "name": "rest",
    "mesh": {"source": "channel", "length": 4, "height": 4, "h": 0.5, "body_spacing": 0.12},
    "fluid": {"mu": 1, "rho": 1},
    "boundaries": {"bottom": {"type": "no_slip"}, "top": {"type": "no_slip"},
                   "left": {"type": "no_slip"}, "right": {"type": "no_slip"}},
    "bodies": [{"shape": {"type": "circle", "center": [2, 2], "radius": 0.5}, "density": 1}],
    "time": {"t_final": 1, "dt": 0.01}
  })");
  const Scenario s = load(j);
  double worst = 0.0;
  int steps = 0;
  simulate(s, [&](const Simulation& sim) {
    const auto& b = sim.bodies()[0];
    worst = std::max({worst, b.l.norm(), std::abs(b.omega), sim.velocity().cwiseAbs().maxCoeff()});
    ++steps;
  });
  return {steps == 100 && worst < 1e-12, fmt("%d steps, largest |l|, |omega| or |u| = %.1e", steps, worst)};
}

Outcome newton_third_law() {
  std::string detail;
  bool pass = true;
  for (const std::string name : {"squirmer_pair_neutral", "squirmer_pair_puller", "pulsatile_channel"}) {
    const Scenario s = load(scenario_json(name));
    double worst = 0.0, largest = 0.0;
    int active_steps = 0;
    simulate(s, [&](const Simulation& sim) {
      std::vector<ContactPair> body_pairs;
      for (const auto& c : sim.contacts())
        if (c.kind == ContactKind::BodyBody) body_pairs.push_back(c);
      Vec2 sum = Vec2::Zero();
      bool any = false;
      for (std::size_t b = 0; b < sim.bodies().size(); ++b) {
        const auto e = total_external(static_cast<int>(b), sim.bodies()[b].x_cm, body_pairs, s.collision);
        sum += e.force;
        largest = std::max(largest, e.force.norm());
        any = any || e.force.norm() > 0.0;
      }
      active_steps += any;
      worst = std::max(worst, sum.norm());
    });
    pass = pass && worst < 1e-10;
    detail += fmt("%s: max |sum F| %.1e (largest body force %.2f, %d active steps); ", name.c_str(), worst, largest, active_steps);
  }
  return {pass, detail};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "swimfem_acceptance_determinism";
  std::string detail;
  bool pass = true;
  for (const auto& entry : fs::directory_iterator(SWIMFEM_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const std::string name = entry.path().stem().string();
    Scenario s = parse_scenario(entry.path());
    RunOptions opt;
    opt.t_final = 5.0 * s.dt;
    std::string csv[2];
    for (int k = 0; k < 2; ++k) {
      opt.output_dir = root / name / std::to_string(k);
      fs::remove_all(opt.output_dir);
      run(s, opt);
      std::ifstream in(opt.output_dir / s.output.csv, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      csv[k] = ss.str();
    }
    const bool same = !csv[0].empty() && csv[0] == csv[1];
    pass = pass && same;
    detail += name + (same ? " identical; " : " DIFFERS; ");
  }
  fs::remove_all(root);
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*check)();
};

const std::vector<Criterion> kCriteria{
    {1, "Poiseuille exactness", poiseuille},
    {2, "convergence orders", convergence},
    {3, "tau formula", tau_formula},
    {4, "ALE maximum principle", max_principle},
    {5, "fast marching accuracy", fast_marching},
    {6, "collision sanity", collision_sanity},
    {7, "squirmer straightness and mesh independence", squirmer_straightness},
    {8, "three-sphere net motion and reversibility", three_sphere_free},
    {9, "three-sphere wall interaction", three_sphere_wall},
    {10, "sperm cruise", sperm_cruise},
    {11, "rest-state exactness", rest_state},
    {12, "Newton's third law", newton_third_law},
    {13, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << (c.id < 10 ? " " : "") << c.id << (o.pass ? " PASS " : " FAIL ") << c.title << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
