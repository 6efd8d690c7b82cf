#include "swimfem/errors.hpp"
#include "swimfem/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace swimfem {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void data_array(std::ostream& out, const std::string& name, int components, const std::vector<double>& values) {
  out << "        <DataArray type=\"Float64\" Name=\"" << name << "\" NumberOfComponents=\"" << components
      << "\" format=\"ascii\">\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << (i % 12 == 0 ? "          " : " ") << fmt(values[i]) << (i % 12 == 11 ? "\n" : "");
  if (values.size() % 12 != 0) out << "\n";
  out << "        </DataArray>\n";
}

}  // namespace

void write_csv_header(std::ostream& out) { out << "t,body,xc,yc,theta,lx,ly,omega,fex,fey,te,dmin\n"; }

void write_csv_records(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records)
    out << fmt(r.t) << ',' << r.body << ',' << fmt(r.x.x()) << ',' << fmt(r.x.y()) << ',' << fmt(r.theta) << ','
        << fmt(r.l.x()) << ',' << fmt(r.l.y()) << ',' << fmt(r.omega) << ',' << fmt(r.fe.x()) << ',' << fmt(r.fe.y())
        << ',' << fmt(r.te) << ',' << (std::isnan(r.dmin) ? std::string() : fmt(r.dmin)) << '\n';
}

void write_vtu(const std::filesystem::path& path, const Simulation& sim, bool distance_fields) {
  const Mesh& mesh = sim.mesh();
  const int nv = mesh.num_vertices();
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n"
      << "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
      << "  <UnstructuredGrid>\n"
      << "    <Piece NumberOfPoints=\"" << nv << "\" NumberOfCells=\"" << mesh.num_cells() << "\">\n"
      << "      <PointData Scalars=\"p\" Vectors=\"u\">\n";
  std::vector<double> u, p, phi;
  for (int v = 0; v < nv; ++v) {
    u.insert(u.end(), {sim.velocity()[2 * v], sim.velocity()[2 * v + 1], 0.0});
    p.push_back(sim.pressure()[v]);
    const Vec2& f = sim.ale().phi[static_cast<std::size_t>(v)];
    phi.insert(phi.end(), {f.x(), f.y(), 0.0});
  }
  data_array(out, "u", 3, u);
  data_array(out, "p", 1, p);
  data_array(out, "phi", 3, phi);
  if (distance_fields) {
    const auto& f = sim.distance_fields();
    for (std::size_t b = 0; b < f.body.size(); ++b)
      if (f.body[b].value.size() == static_cast<std::size_t>(nv)) data_array(out, "distance_body" + std::to_string(b), 1, f.body[b].value);
  }
  out << "      </PointData>\n      <Points>\n";
  std::vector<double> pts;
  for (const auto& x : mesh.vertices) pts.insert(pts.end(), {x.x(), x.y(), 0.0});
  data_array(out, "Points", 3, pts);
  out << "      </Points>\n      <Cells>\n"
      << "        <DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n";
  for (const auto& c : mesh.cells) out << "          " << c[0] << ' ' << c[1] << ' ' << c[2] << "\n";
  out << "        </DataArray>\n        <DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n";
  for (int c = 0; c < mesh.num_cells(); ++c) out << "          " << 3 * (c + 1) << "\n";
  out << "        </DataArray>\n        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n";
  for (int c = 0; c < mesh.num_cells(); ++c) out << "          5\n";
  out << "        </DataArray>\n      </Cells>\n    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n";
  auto f = open_out(path);
  f << out.str();
  if (!f) throw ValidationError("cannot write " + path.string());
}

void write_pvd(const std::filesystem::path& path, const std::vector<std::pair<double, std::string>>& entries) {
  auto out = open_out(path);
  out << "<?xml version=\"1.0\"?>\n<VTKFile type=\"Collection\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
      << "  <Collection>\n";
  for (const auto& [t, file] : entries)
    out << "    <DataSet timestep=\"" << fmt(t) << "\" group=\"\" part=\"0\" file=\"" << file << "\"/>\n";
  out << "  </Collection>\n</VTKFile>\n";
}

void run(Scenario scenario, const RunOptions& options) {
  if (options.t_final) scenario.t_final = *options.t_final;
  if (options.dt) scenario.dt = *options.dt;
  if (!(scenario.dt > 0.0)) throw ValidationError("dt must be positive");
  if (scenario.t_final < 0.0) throw ValidationError("t_final must be non-negative");
  std::ostream& log = options.log ? *options.log : std::cerr;
  const auto& dir = options.output_dir;
  std::filesystem::create_directories(dir);

  Simulation sim(scenario);
  if (options.resume) sim.load_checkpoint(*options.resume);
  const long long n_steps = static_cast<long long>(std::floor(scenario.t_final / scenario.dt + 1e-9));
  const std::size_t nb = sim.bodies().size();

  const auto csv_path = dir / scenario.output.csv;
  std::vector<std::string> kept;
  if (options.resume) {
    std::ifstream in(csv_path);
    std::string line;
    const std::size_t keep = 1 + static_cast<std::size_t>(sim.step_index()) * nb;
    while (kept.size() < keep && std::getline(in, line)) kept.push_back(line);
    if (kept.size() != keep) throw ValidationError("trajectory " + csv_path.string() + " is shorter than the checkpoint");
  }
  auto csv = open_out(csv_path);
  if (kept.empty())
    write_csv_header(csv);
  else
    for (const auto& l : kept) csv << l << '\n';
  csv.flush();

  const std::string stem = scenario.name;
  std::vector<std::pair<double, std::string>> snapshots;
  auto vtu_name = [&](long long step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "_%06lld.vtu", step);
    return stem + buf;
  };
  for (long long s = 0; s < sim.step_index(); ++s)
    if (std::filesystem::exists(dir / vtu_name(s))) snapshots.emplace_back(static_cast<double>(s) * scenario.dt, vtu_name(s));
  auto snapshot = [&] {
    const auto name = vtu_name(sim.step_index());
    write_vtu(dir / name, sim, scenario.output.distance_fields);
    snapshots.emplace_back(sim.time(), name);
    write_pvd(dir / (stem + ".pvd"), snapshots);
  };
  const auto checkpoint = dir / "checkpoint.cbor";
  if (sim.step_index() == 0 || sim.step_index() >= n_steps) snapshot();

  while (sim.step_index() < n_steps) {
    StepInfo info;
    try {
      info = sim.step();
    } catch (const Error&) {
      sim.save_checkpoint(checkpoint);
      throw;
    }
    write_csv_records(csv, sim.records());
    csv.flush();
    if (!info.converged) log << "warning: fixed-point iteration not converged at t = " << fmt(sim.time()) << "\n";
    if (options.verbose)
      log << "step " << sim.step_index() << " t = " << fmt(sim.time()) << " iterations " << info.fixed_point_iterations
          << (info.remeshed ? " remeshed" : "") << " cells " << sim.mesh().num_cells() << "\n";
    const long long s = sim.step_index();
    if (s == n_steps || (scenario.output.vtu_every > 0 && s % scenario.output.vtu_every == 0)) snapshot();
    if (scenario.output.checkpoint_every > 0 && s % scenario.output.checkpoint_every == 0) sim.save_checkpoint(checkpoint);
  }
  sim.save_checkpoint(checkpoint);
}

}  // namespace swimfem
