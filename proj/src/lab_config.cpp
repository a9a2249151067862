#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mcflab/lab.hpp"

namespace mcflab {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::sphere: return "sphere";
    case ScenarioKind::perturbed_sphere: return "perturbed_sphere";
    case ScenarioKind::ellipsoid: return "ellipsoid";
    case ScenarioKind::dumbbell: return "dumbbell";
  }
  return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::sphere, ScenarioKind::perturbed_sphere, ScenarioKind::ellipsoid, ScenarioKind::dumbbell})
    if (s == to_string(k)) return k;
  fail(ErrorCode::invalid_argument, "unknown kind '" + s + "' (valid: sphere, perturbed_sphere, ellipsoid, dumbbell)");
}

void validate_scenario(const ScenarioSpec& s) {
  require(s.n >= 2, ErrorCode::invalid_argument, "n must be >= 2");
  require(s.resolution >= 8, ErrorCode::invalid_argument, "resolution must be >= 8");
  switch (s.kind) {
    case ScenarioKind::sphere:
      require(s.radius > 0, ErrorCode::invalid_argument, "radius must be positive");
      break;
    case ScenarioKind::perturbed_sphere:
      require(s.radius > 0, ErrorCode::invalid_argument, "radius must be positive");
      require(s.mode >= 2, ErrorCode::invalid_argument, "mode must be >= 2");
      require(std::abs(s.amplitude) < 0.5, ErrorCode::invalid_argument, "amplitude out of range");
      break;
    case ScenarioKind::ellipsoid:
      require(s.a > 0 && s.b > 0 && s.c > 0, ErrorCode::invalid_argument, "semi-axes must be positive");
      require(s.backend == Backend::mesh && s.n == 2, ErrorCode::unsupported, "ellipsoid needs backend = mesh, n = 2");
      break;
    case ScenarioKind::dumbbell:
      require(s.backend == Backend::axi, ErrorCode::unsupported, "dumbbell needs backend = axi");
      require(s.neck_radius > 0 && s.neck_radius < s.bulb_radius, ErrorCode::invalid_argument,
              "neck_radius must lie in (0, bulb_radius)");
      require(s.bulb_separation > 0, ErrorCode::invalid_argument, "bulb_separation must be positive");
      break;
  }
  if (s.backend == Backend::mesh)
    require(s.n == 2, ErrorCode::unsupported, "mesh backend needs n = 2");
}

Hypersurface build_scenario(const ScenarioSpec& s) {
  validate_scenario(s);
  switch (s.kind) {
    case ScenarioKind::sphere: return build_sphere(s.backend, s.n, s.radius, s.resolution);
    case ScenarioKind::perturbed_sphere:
      return build_perturbed_sphere(s.backend, s.n, s.radius, s.mode, s.amplitude, s.resolution);
    case ScenarioKind::ellipsoid: return build_ellipsoid(s.a, s.b, s.c, s.resolution);
    case ScenarioKind::dumbbell:
      return build_dumbbell(s.n, s.neck_radius, s.bulb_radius, s.bulb_separation, s.resolution);
  }
  fail(ErrorCode::invalid_argument, "unknown kind");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out))
    fail(ErrorCode::parse, "key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

template <class T>
T parse_int(const std::string& key, const std::string& v) {
  T out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) fail(ErrorCode::parse, "key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::parse, "key '" + key + "': expected true or false, got '" + v + "'");
}

// One table entry per key: how to read it and how to write it back.
struct Field {
  std::function<void(LabConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const LabConfig&)> get;
};

template <class M>
Field dbl(M m) {
  return {[m](LabConfig& c, const std::string& k, const std::string& v) { m(c) = parse_double(k, v); },
          [m](const LabConfig& c) { return fmt_double(m(const_cast<LabConfig&>(c))); }};
}

template <class M>
Field integer(M m) {
  return {[m](LabConfig& c, const std::string& k, const std::string& v) {
            m(c) = parse_int<std::remove_reference_t<decltype(m(c))>>(k, v);
          },
          [m](const LabConfig& c) { return std::to_string(m(const_cast<LabConfig&>(c))); }};
}

template <class M>
Field boolean(M m) {
  return {[m](LabConfig& c, const std::string& k, const std::string& v) { m(c) = parse_bool(k, v); },
          [m](const LabConfig& c) { return std::string(m(const_cast<LabConfig&>(c)) ? "true" : "false"); }};
}

using Table = std::vector<std::pair<std::string, Field>>;

const std::map<std::string, Table>& tables() {
  static const std::map<std::string, Table> t = [] {
    std::map<std::string, Table> m;
    m["scenario"] = {
        {"kind", {[](LabConfig& c, const std::string&, const std::string& v) { c.scenario.kind = scenario_kind_from_string(v); },
                  [](const LabConfig& c) { return std::string(to_string(c.scenario.kind)); }}},
        {"backend", {[](LabConfig& c, const std::string&, const std::string& v) { c.scenario.backend = backend_from_string(v); },
                     [](const LabConfig& c) { return std::string(to_string(c.scenario.backend)); }}},
        {"n", integer([](LabConfig& c) -> int& { return c.scenario.n; })},
        {"radius", dbl([](LabConfig& c) -> double& { return c.scenario.radius; })},
        {"mode", integer([](LabConfig& c) -> int& { return c.scenario.mode; })},
        {"amplitude", dbl([](LabConfig& c) -> double& { return c.scenario.amplitude; })},
        {"a", dbl([](LabConfig& c) -> double& { return c.scenario.a; })},
        {"b", dbl([](LabConfig& c) -> double& { return c.scenario.b; })},
        {"c", dbl([](LabConfig& c) -> double& { return c.scenario.c; })},
        {"neck_radius", dbl([](LabConfig& c) -> double& { return c.scenario.neck_radius; })},
        {"bulb_radius", dbl([](LabConfig& c) -> double& { return c.scenario.bulb_radius; })},
        {"bulb_separation", dbl([](LabConfig& c) -> double& { return c.scenario.bulb_separation; })},
        {"resolution", integer([](LabConfig& c) -> int& { return c.scenario.resolution; })},
        {"seed", integer([](LabConfig& c) -> std::uint64_t& { return c.scenario.seed; })},
    };
    m["flow"] = {
        {"mode", {[](LabConfig& c, const std::string&, const std::string& v) { c.flow.mode = flow_mode_from_string(v); },
                  [](const LabConfig& c) { return std::string(to_string(c.flow.mode)); }}},
        {"method", {[](LabConfig& c, const std::string&, const std::string& v) {
                      if (v == "auto") {
                        c.flow.method_explicitly_set = false;
                        return;
                      }
                      c.flow.method = method_from_string(v);
                      c.flow.method_explicitly_set = true;
                    },
                    [](const LabConfig& c) {
                      return std::string(c.flow.method_explicitly_set ? to_string(c.flow.method) : "auto");
                    }}},
        {"cfl", dbl([](LabConfig& c) -> double& { return c.flow.cfl; })},
        {"diffusion_number", dbl([](LabConfig& c) -> double& { return c.flow.diffusion_number; })},
        {"dt_min", dbl([](LabConfig& c) -> double& { return c.flow.dt_min; })},
        {"dt_max", dbl([](LabConfig& c) -> double& { return c.flow.dt_max; })},
        {"max_abs_A_stop", dbl([](LabConfig& c) -> double& { return c.flow.max_abs_A_stop; })},
        {"area_stop_fraction", dbl([](LabConfig& c) -> double& { return c.flow.area_stop_fraction; })},
        {"steady_tol", dbl([](LabConfig& c) -> double& { return c.flow.steady_tol; })},
        {"steady_window", integer([](LabConfig& c) -> int& { return c.flow.steady_window; })},
        {"max_steps", integer([](LabConfig& c) -> long& { return c.flow.max_steps; })},
        {"remesh", boolean([](LabConfig& c) -> bool& { return c.flow.remesh.enabled; })},
        {"remesh_check_every", integer([](LabConfig& c) -> int& { return c.flow.remesh.check_every; })},
        {"remesh_density_gain", dbl([](LabConfig& c) -> double& { return c.flow.remesh.density_gain; })},
        {"remesh_trigger_ratio", dbl([](LabConfig& c) -> double& { return c.flow.remesh.trigger_ratio; })},
        {"remesh_max_adjacent_ratio", dbl([](LabConfig& c) -> double& { return c.flow.remesh.max_adjacent_ratio; })},
        {"remesh_curvature_gain", dbl([](LabConfig& c) -> double& { return c.flow.remesh.curvature_gain; })},
        {"m_max", integer([](LabConfig& c) -> int& { return c.flow.m_max; })},
        {"epsilon_knob", dbl([](LabConfig& c) -> double& { return c.flow.epsilon_knob; })},
        {"lambda0_knob", dbl([](LabConfig& c) -> double& { return c.flow.lambda0_knob; })},
        {"c0_knob", dbl([](LabConfig& c) -> double& { return c.flow.c0_knob; })},
        {"snapshot_every", integer([](LabConfig& c) -> int& { return c.flow.snapshot_every; })},
        {"seed", integer([](LabConfig& c) -> std::uint64_t& { return c.flow.seed; })},
    };
    m["checks"] = {
        {"monotone_rel_slack", dbl([](LabConfig& c) -> double& { return c.checks.monotone_rel_slack; })},
        {"monotone_abs_floor", dbl([](LabConfig& c) -> double& { return c.checks.monotone_abs_floor; })},
        {"area_rate_tol", dbl([](LabConfig& c) -> double& { return c.checks.area_rate_tol; })},
        {"area_rate_dt", dbl([](LabConfig& c) -> double& { return c.checks.area_rate_dt; })},
        {"kato_slack", dbl([](LabConfig& c) -> double& { return c.checks.kato_slack; })},
        {"gradient_pinch_slack", dbl([](LabConfig& c) -> double& { return c.checks.gradient_pinch_slack; })},
        {"identity_tol", dbl([](LabConfig& c) -> double& { return c.checks.identity_tol; })},
        {"typeI_factor", dbl([](LabConfig& c) -> double& { return c.checks.typeI_factor; })},
        {"typeII_growth", dbl([](LabConfig& c) -> double& { return c.checks.typeII_growth; })},
        {"h_blowup_slope", dbl([](LabConfig& c) -> double& { return c.checks.h_blowup_slope; })},
        {"h_bounded_slope", dbl([](LabConfig& c) -> double& { return c.checks.h_bounded_slope; })},
        {"battery_resolution", integer([](LabConfig& c) -> int& { return c.checks.battery_resolution; })},
        {"battery_mesh_resolution", integer([](LabConfig& c) -> int& { return c.checks.battery_mesh_resolution; })},
    };
    return m;
  }();
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string section_keys(const Table& t) {
  std::string out;
  for (const auto& [k, f] : t) out += (out.empty() ? "" : ", ") + k;
  return out;
}

void validate_checks(const ChecksConfig& c) {
  require(c.monotone_rel_slack >= 0 && c.monotone_abs_floor >= 0, ErrorCode::invalid_argument,
          "monotone slack must be non-negative");
  require(c.area_rate_tol > 0, ErrorCode::invalid_argument, "area_rate_tol must be positive");
  require(c.kato_slack >= 0 && c.gradient_pinch_slack >= 0, ErrorCode::invalid_argument, "slack must be non-negative");
  require(c.typeI_factor > 1 && c.typeII_growth > 1, ErrorCode::invalid_argument, "type thresholds must exceed 1");
  require(c.battery_resolution >= 64, ErrorCode::invalid_argument, "battery_resolution must be >= 64");
  require(c.battery_mesh_resolution >= 200, ErrorCode::invalid_argument, "battery_mesh_resolution must be >= 200");
}

}  // namespace

bool flow_config_equal(const FlowConfig& a, const FlowConfig& b) {
  LabConfig x, y;
  x.flow = a;
  y.flow = b;
  return serialize_config(x) == serialize_config(y);
}

bool operator==(const LabConfig& a, const LabConfig& b) { return serialize_config(a) == serialize_config(b); }

LabConfig parse_config_text(const std::string& text) {
  LabConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  const auto& tb = tables();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::parse, where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!tb.count(section)) fail(ErrorCode::parse, where + "unknown section [" + section + "] (valid: scenario, flow, checks)");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::parse, where + "expected 'key = value'");
    if (section.empty()) fail(ErrorCode::parse, where + "key outside of a section");
    try {
      set_config_value(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  validate_config(c);
  return c;
}

void set_config_value(LabConfig& c, const std::string& section, const std::string& key, const std::string& value) {
  const auto& tb = tables();
  if (!tb.count(section)) fail(ErrorCode::parse, "unknown section [" + section + "] (valid: scenario, flow, checks)");
  const auto& t = tb.at(section);
  auto it = std::find_if(t.begin(), t.end(), [&](const auto& e) { return e.first == key; });
  if (it == t.end())
    fail(ErrorCode::parse, "unknown key '" + key + "' in [" + section + "] (valid: " + section_keys(t) + ")");
  it->second.set(c, key, value);
}

void validate_config(const LabConfig& c) {
  validate_scenario(c.scenario);
  validate_config(c.flow);
  validate_checks(c.checks);
}

LabConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(bool(f), ErrorCode::io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const LabConfig& c) {
  std::string out;
  for (const char* sec : {"scenario", "flow", "checks"}) {
    out += std::string(out.empty() ? "" : "\n") + "[" + sec + "]\n";
    for (const auto& [k, f] : tables().at(sec)) out += k + " = " + f.get(c) + "\n";
  }
  return out;
}

std::string config_hash(const LabConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mcflab
