#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mcflab/lab.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mcflab_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kSphere =
    "[scenario]\nkind = sphere\nn = 2\nradius = 1.0\nresolution = 512\nbackend = axi\n";

}  // namespace

TEST_CASE("minimal config gets documented defaults") {
  const auto c = parse_config_text(kSphere);
  CHECK(c.scenario.kind == ScenarioKind::sphere);
  CHECK(c.scenario.resolution == 512);
  CHECK(flow_config_equal(c.flow, FlowConfig{}));
  CHECK(c.checks == ChecksConfig{});
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH(parse_config_text("[flow]\ncfl = 1.5\n"), doctest::Contains("cfl out of (0,1]"));
  try {
    parse_config_text("[scenario]\nkind = dumbbel\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string w = e.what();
    CHECK(w.find("line 2") != std::string::npos);
    CHECK(w.find("unknown kind") != std::string::npos);
    for (const char* k : {"sphere", "perturbed_sphere", "ellipsoid", "dumbbell"}) CHECK(w.find(k) != std::string::npos);
  }
  CHECK_THROWS_WITH(parse_config_text("[flow]\nspeed = 3\n"), doctest::Contains("unknown key 'speed'"));
  CHECK_THROWS_WITH(parse_config_text("cfl = 0.1\n"), doctest::Contains("line 1"));
  CHECK_THROWS_WITH(parse_config_text("[flow]\ncfl = abc\n"), doctest::Contains("cfl"));
  CHECK_THROWS_WITH(parse_config_text("[scenario]\nkind = ellipsoid\nbackend = axi\n"), doctest::Contains("mesh"));
  CHECK_THROWS_AS(parse_config("/nonexistent/mcflab.cfg"), Error);
}

TEST_CASE("serialize round-trips random valid configs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    LabConfig c;
    c.scenario.kind = ScenarioKind(trial % 4);
    c.scenario.backend = c.scenario.kind == ScenarioKind::ellipsoid ? Backend::mesh : Backend::axi;
    c.scenario.radius = 0.1 + 3 * u(rng);
    c.scenario.amplitude = 0.4 * u(rng) - 0.2;
    c.scenario.neck_radius = 0.05 + 0.5 * u(rng);
    c.scenario.resolution = 16 + int(1000 * u(rng));
    c.scenario.seed = rng();
    c.flow.cfl = 1e-3 + 0.9 * u(rng);
    c.flow.dt_max = 1e-3 + u(rng);
    c.flow.steady_tol = 1e-9 + u(rng) * 1e-3;
    c.flow.mode = trial % 2 ? FlowMode::normalized : FlowMode::unnormalized;
    c.flow.method_explicitly_set = trial % 3 == 0;
    c.flow.method = trial % 5 ? Method::explicit_euler : Method::semi_implicit;
    c.flow.epsilon_knob = 1e-4 + u(rng);
    c.checks.kato_slack = 100 * u(rng) + 0.1;
    const auto back = parse_config_text(serialize_config(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
  }
  LabConfig a, b;
  b.flow.cfl = 0.2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("cmd_run on a small sphere") {
  const auto dir = scratch("run");
  std::ofstream(dir / "s.cfg") << "[scenario]\nkind = sphere\nresolution = 64\n";
  std::ostringstream log;
  CommandOptions q;
  q.quiet = true;
  CHECK(cmd_run(dir / "s.cfg", dir / "a", q, log) == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(m["cause"] == "extinction");
  CHECK(m["config_hash"] == config_hash(parse_config(dir / "s.cfg")));
  CHECK(m["singularity"]["T_est"].get<double>() == doctest::Approx(0.25).epsilon(0.02));
  // H stays below 100 until the 1% area stop (R = 0.1)
  CHECK(m["thresholds"]["c0_first_exceeded_step"] == -1);
  for (const auto& sn : m["files"]["snapshots"]) CHECK(fs::exists(dir / "a" / sn["path"].get<std::string>()));

  CHECK(cmd_run(dir / "s.cfg", dir / "b", q, log) == 0);
  CHECK(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));

  CHECK(cmd_export(dir / "a", "profile-csv", log) == 0);
  CHECK(cmd_export(dir / "a", "obj", log) == 0);
  const auto objs = std::distance(fs::directory_iterator(dir / "a" / "export" / "obj"), fs::directory_iterator{});
  CHECK(std::size_t(objs) == m["files"]["snapshots"].size());
  CHECK(cmd_export(dir / "missing", "obj", log) == 1);
}

TEST_CASE("blow-up threshold below the initial max |A|") {
  const auto dir = scratch("edge");
  std::ofstream(dir / "s.cfg") << "[scenario]\nkind = sphere\nresolution = 64\n[flow]\nmax_abs_A_stop = 1\n";
  std::ostringstream log;
  CommandOptions q;
  q.quiet = true;
  CHECK(cmd_run(dir / "s.cfg", dir / "out", q, log) == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(m["cause"] == "blow_up");
  CHECK(m["steps"] == 0);
  // a low c0 is crossed at once but is only reported
  std::ofstream(dir / "t.cfg") << "[scenario]\nkind = sphere\nresolution = 64\n[flow]\nc0_knob = 1\nmax_steps = 5\n";
  CHECK(cmd_run(dir / "t.cfg", dir / "t", q, log) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "t" / "manifest.json"))["thresholds"]["c0_first_exceeded_step"] == 0);
}

TEST_CASE("cmd_run errors exit 1") {
  std::ostringstream log;
  CHECK(cmd_run("/nonexistent/x.cfg", scratch("err"), {}, log) == 1);
}

TEST_CASE("sweeps") {
  const auto dir = scratch("sweep");
  std::ofstream(dir / "p.cfg") << "[scenario]\nkind = perturbed_sphere\nresolution = 64\n[flow]\nmax_steps = 50\n";
  std::ostringstream log;
  CommandOptions q;
  q.quiet = true;
  CHECK(cmd_sweep(dir / "p.cfg", "amplitude", {}, dir / "empty", q, log) == 0);
  CHECK(slurp(dir / "empty" / "summary.csv") == "value,initial_int_Ao2,cause,T_est,typeI_verdict,final_radius_spread\n");

  CHECK(cmd_sweep(dir / "p.cfg", "amplitude", {0.01, 0.05, 0.1}, dir / "amp", q, log) == 0);
  std::istringstream rows(slurp(dir / "amp" / "summary.csv"));
  std::string line;
  std::getline(rows, line);
  double prev = -1;
  int count = 0;
  while (std::getline(rows, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    const double v = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(v > prev);
    prev = v;
    ++count;
  }
  CHECK(count == 3);
  // rows match a standalone run of the same config
  LabConfig c = parse_config(dir / "p.cfg");
  c.scenario.amplitude = 0.05;
  CHECK(cmd_run(c, dir / "alone", q, log) == 0);
  CHECK(slurp(dir / "alone" / "series.csv") == slurp(dir / "amp" / "row_1" / "series.csv"));

  // a failing row is recorded and the sweep continues
  CHECK(cmd_sweep(dir / "p.cfg", "amplitude", {0.01, 0.9}, dir / "bad", q, log) == 1);
  CHECK(slurp(dir / "bad" / "summary.csv").find(",error,") != std::string::npos);
  CHECK(cmd_sweep(dir / "p.cfg", "volume", {1.0}, dir / "key", q, log) == 1);
}
