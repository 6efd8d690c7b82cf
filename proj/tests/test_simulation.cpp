#include "swimfem/errors.hpp"
#include "swimfem/expression.hpp"
#include "swimfem/scenario.hpp"
#include "swimfem/simulation.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace swimfem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json disk_scenario() {
  return json::parse(R"({
    "name": "disk",
    "mesh": {"source": "channel", "length": 4, "height": 4, "h": 0.6, "body_spacing": 0.15},
    "fluid": {"mu": 1, "rho": 1},
    "boundaries": {"bottom": {"type": "no_slip"}, "top": {"type": "no_slip"},
                   "left": {"type": "no_slip"}, "right": {"type": "no_slip"}},
    "bodies": [{"shape": {"type": "circle", "center": [2, 2], "radius": 0.5}, "density": 1}],
    "time": {"t_final": 0.5, "dt": 0.1}
  })");
}

json squirmer_scenario() {
  return json::parse(R"({
    "name": "squirmer",
    "mesh": {"source": "channel", "length": 20, "height": 20, "h": 2.5, "body_spacing": 0.25},
    "fluid": {"mu": 1, "rho": 0},
    "boundaries": {"bottom": {"type": "no_slip"}, "top": {"type": "no_slip"},
                   "left": {"type": "no_slip"}, "right": {"type": "no_slip"}},
    "bodies": [{"shape": {"type": "circle", "center": [8, 10], "radius": 1},
                "gait": {"type": "squirmer", "B1": 1, "beta": 0, "heading": [1, 0]}}],
    "time": {"t_final": 5, "dt": 0.1}
  })");
}

Scenario parse(const json& j) { return parse_scenario_text(j.dump()); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("swimfem_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string csv_line(const std::vector<TrajectoryRecord>& r) {
  std::ostringstream s;
  write_csv_records(s, r);
  return s.str();
}

/// Checks that every element opened in the document is closed in order.
bool balanced_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = text.find('<', i)) != std::string::npos) {
    const auto j = text.find('>', i);
    if (j == std::string::npos) return false;
    const std::string tag = text.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty() || tag[0] == '?') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
  }
  return stack.empty();
}

}  // namespace

TEST(Expression, PulsatileInflow) {
  const auto e = Expression::parse("35*abs(sin(pi/0.15*t))");
  EXPECT_NEAR(e(0.075, 0, 0), 35.0, 1e-12);
  EXPECT_EQ(e(0.0, 0, 0), 0.0);
  EXPECT_NEAR(e(0.15 + 0.075, 0, 0), 35.0, 1e-12);
}

TEST(Expression, PrecedenceAndVariables) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2*x - y/4")(0, 3, 2), 6.5);
  EXPECT_DOUBLE_EQ(Expression::parse("-(x+1)*cos(0)")(0, 2, 0), -3.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2*-t")(1.5, 0, 0), -3.0);
}

TEST(Expression, ErrorsReportPosition) {
  try {
    Expression::parse("1 + * 2");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find('4'), std::string::npos) << e.what();
  }
  EXPECT_THROW(Expression::parse("sin(t"), ValidationError);
  EXPECT_THROW(Expression::parse("foo(t)"), ValidationError);
}

TEST(Scenario, SchemaErrorNamesField) {
  auto j = disk_scenario();
  j["time"]["dt"] = "fast";
  try {
    parse(j);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("time.dt"), std::string::npos) << e.what();
  }
}

TEST(Scenario, ExpressionErrorIsValidation) {
  auto j = disk_scenario();
  j["boundaries"]["top"] = {{"type", "dirichlet"}, {"value", {"sin(", "0"}}};
  EXPECT_THROW(parse(j), ValidationError);
}

TEST(Scenario, SwimmerTagWithoutBodyIsRejected) {
  const auto dir = scratch("orphan_tag");
  const Mesh m = generate_channel(4.0, 4.0, {Hole::circle({2, 2}, 0.5, 24, "swimmer0", 0)}, 0.5);
  save_msh(m, dir / "m.msh");
  json j = disk_scenario();
  j["mesh"] = {{"source", "file"}, {"file", "m.msh"}};
  j["bodies"] = json::array();
  EXPECT_THROW(
      {
        const Scenario s = parse_scenario_text(j.dump(), dir);
        build_mesh(s);
      },
      ValidationError);
  fs::remove_all(dir);
}

TEST(Step, PassiveDiskStaysAtRest) {
  Simulation sim(parse(disk_scenario()));
  const Vec2 x0 = sim.bodies()[0].x_cm;
  for (int k = 1; k <= 5; ++k) {
    sim.step();
    EXPECT_DOUBLE_EQ(sim.time(), 0.1 * k);
    EXPECT_EQ(sim.bodies()[0].x_cm, x0);
    EXPECT_EQ(sim.bodies()[0].theta, 0.0);
    EXPECT_EQ(sim.velocity().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Step, StokesVelocitiesIgnoreTimeStep) {
  auto a = squirmer_scenario(), b = squirmer_scenario();
  a["time"]["dt"] = 0.1;
  b["time"]["dt"] = 0.01;
  Simulation sa(parse(a)), sb(parse(b));
  const auto va = sa.instantaneous_velocities(), vb = sb.instantaneous_velocities();
  EXPECT_LT((va.first[0] - vb.first[0]).norm(), 1e-8);
  EXPECT_LT(std::abs(va.second[0] - vb.second[0]), 1e-8);
  EXPECT_GT(va.first[0].x(), 0.0);
}

TEST(Step, SquirmerAdvancesAlongHeading) {
  Simulation sim(parse(squirmer_scenario()));
  double x = sim.bodies()[0].x_cm.x();
  const double y0 = sim.bodies()[0].x_cm.y();
  for (int k = 0; k < 50; ++k) {
    sim.step();
    EXPECT_GT(sim.bodies()[0].x_cm.x(), x);
    x = sim.bodies()[0].x_cm.x();
  }
  EXPECT_LT(std::abs(sim.bodies()[0].x_cm.y() - y0), 1e-3 * (x - 8.0));
}

TEST(Run, ZeroFinalTimeWritesOnlyInitialSnapshot) {
  const auto dir = scratch("t0");
  RunOptions opt;
  opt.output_dir = dir;
  opt.t_final = 0.0;
  run(parse(disk_scenario()), opt);
  EXPECT_EQ(count_lines(dir / "trajectory.csv"), 1);
  int vtu = 0;
  for (const auto& e : fs::directory_iterator(dir)) vtu += e.path().extension() == ".vtu";
  EXPECT_EQ(vtu, 1);
  const std::string text = slurp(dir / "disk_000000.vtu");
  EXPECT_TRUE(balanced_xml(text));
  EXPECT_TRUE(balanced_xml(slurp(dir / "disk.pvd")));
  fs::remove_all(dir);
}

TEST(Run, CsvHasOneLinePerBodyAndStep) {
  const auto dir = scratch("csv");
  auto j = disk_scenario();
  j["bodies"].push_back(j["bodies"][0]);
  j["bodies"][0]["shape"]["center"] = {1, 2};
  j["bodies"][1]["shape"]["center"] = {3, 2};
  j["bodies"][0]["shape"]["radius"] = 0.4;
  j["bodies"][1]["shape"]["radius"] = 0.4;
  j["time"]["t_final"] = 0.3;
  RunOptions opt;
  opt.output_dir = dir;
  run(parse(j), opt);
  EXPECT_EQ(count_lines(dir / "trajectory.csv"), 3 * 2 + 1);
  std::ifstream in(dir / "trajectory.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,body,xc,yc,theta,lx,ly,omega,fex,fey,te,dmin");
  fs::remove_all(dir);
}

TEST(Run, RestSnapshotHasZeroVelocity) {
  const auto dir = scratch("vtu");
  auto j = disk_scenario();
  j["time"]["t_final"] = 0.1;
  RunOptions opt;
  opt.output_dir = dir;
  run(parse(j), opt);
  const std::string text = slurp(dir / "disk_000001.vtu");
  ASSERT_TRUE(balanced_xml(text));
  const auto a = text.find("Name=\"u\"");
  const auto start = text.find('>', a) + 1;
  const auto end = text.find("</DataArray>", start);
  std::istringstream values(text.substr(start, end - start));
  double v = 0.0;
  int n = 0;
  while (values >> v) {
    EXPECT_EQ(v, 0.0);
    ++n;
  }
  EXPECT_GT(n, 0);
  EXPECT_EQ(n % 3, 0);
  fs::remove_all(dir);
}

TEST(Run, RerunIsBitwiseIdentical) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto j = squirmer_scenario();
  j["time"]["t_final"] = 1.0;
  RunOptions opt;
  opt.output_dir = a;
  run(parse(j), opt);
  opt.output_dir = b;
  run(parse(j), opt);
  EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
  EXPECT_EQ(slurp(a / "squirmer_000010.vtu"), slurp(b / "squirmer_000010.vtu"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Checkpoint, RoundTripReproducesNextStep) {
  const auto dir = scratch("ckpt");
  Simulation sim(parse(squirmer_scenario()));
  for (int k = 0; k < 3; ++k) sim.step();
  sim.save_checkpoint(dir / "c.cbor");
  sim.step();
  const std::string expected = csv_line(sim.records());
  Simulation resumed(parse(squirmer_scenario()));
  resumed.load_checkpoint(dir / "c.cbor");
  EXPECT_EQ(resumed.step_index(), 3);
  resumed.step();
  EXPECT_EQ(csv_line(resumed.records()), expected);
  fs::remove_all(dir);
}

TEST(Checkpoint, ResumedRunMatchesFullRun) {
  const auto full = scratch("full"), part = scratch("part");
  auto j = squirmer_scenario();
  j["time"]["t_final"] = 0.8;
  j["output"] = {{"checkpoint_every", 4}};
  RunOptions opt;
  opt.output_dir = full;
  run(parse(j), opt);
  opt.output_dir = part;
  opt.t_final = 0.4;
  run(parse(j), opt);
  opt.t_final.reset();
  opt.resume = part / "checkpoint.cbor";
  run(parse(j), opt);
  EXPECT_EQ(slurp(full / "trajectory.csv"), slurp(part / "trajectory.csv"));
  fs::remove_all(full);
  fs::remove_all(part);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string cli = SWIMFEM_CLI;
  auto status = [&](const std::string& args) {
    const int s = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("run " + (dir / "missing.json").string()), 2);
  {
    std::ofstream(dir / "bad.json") << "{\"mesh\": ";
  }
  EXPECT_EQ(status("run " + (dir / "bad.json").string()), 2);
  auto j = disk_scenario();
  j["time"]["t_final"] = 0.1;
  std::ofstream(dir / "ok.json") << j.dump();
  EXPECT_EQ(status("run " + (dir / "ok.json").string() + " --output-dir " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "trajectory.csv"));
  fs::remove_all(dir);
}
