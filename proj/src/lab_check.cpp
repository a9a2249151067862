#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/lab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mcflab {

namespace {

struct BatteryItem {
  std::string name;
  ScenarioSpec spec;
  bool sphere_family = false;
};

std::vector<BatteryItem> battery(const LabConfig& c) {
  std::vector<BatteryItem> out;
  const int n = c.scenario.n;
  for (double R : {0.5, 1.0, 2.0}) {
    ScenarioSpec s;
    s.kind = ScenarioKind::sphere;
    s.n = n;
    s.radius = R;
    s.resolution = c.checks.battery_resolution;
    char name[32];
    std::snprintf(name, sizeof name, "sphere_R%g", R);
    out.push_back({name, s, true});
  }
  for (double d : {0.01, 0.05, 0.1}) {
    ScenarioSpec s;
    s.kind = ScenarioKind::perturbed_sphere;
    s.n = n;
    s.amplitude = d;
    s.resolution = c.checks.battery_resolution;
    char name[32];
    std::snprintf(name, sizeof name, "perturbed_d%g", d);
    out.push_back({name, s, false});
  }
  if (n == 2) {
    ScenarioSpec s;
    s.kind = ScenarioKind::ellipsoid;
    s.backend = Backend::mesh;
    s.resolution = c.checks.battery_mesh_resolution;
    out.push_back({"ellipsoid_2_1_1", s, false});
  }
  ScenarioSpec d;
  d.kind = ScenarioKind::dumbbell;
  d.n = n;
  d.resolution = c.checks.battery_resolution;
  out.push_back({"dumbbell_0.2_1_3", d, false});
  return out;
}

struct Row {
  std::string name;
  int resolution = 0;
  std::size_t nodes = 0;
  double identity_residual = 0, identity_min = 0;
  double kato_margin = 0, kato_slack = 0;
  std::size_t kato_exceeding = 0;
  bool gp_vacuous = true;
  double gp_ratio = 0;
  double ms_one = 0, ms_abs_Ao = std::numeric_limits<double>::quiet_NaN(), ms_H2 = 0;
  double hamilton = std::numeric_limits<double>::quiet_NaN();
  double topping = 0;
};

Row evaluate(const std::string& name, const ScenarioSpec& spec, const ChecksConfig& checks) {
  const Hypersurface s = build_scenario(spec);
  const int m = s.is_axi() ? 2 : 1;
  const auto f = curvature_field(s, m);
  Row r;
  r.name = name;
  r.resolution = spec.resolution;
  r.nodes = s.node_count();
  r.identity_residual = tensor_norm_identity_check(f);
  double amax = 0;
  for (double v : f.norm_A_sq) amax = std::max(amax, v);
  r.identity_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i)
    r.identity_min = std::min(r.identity_min, (f.norm_A_sq[i] - f.mean_curvature[i] * f.mean_curvature[i] / f.n) /
                                                  std::max(1.0, amax));
  const auto k = kato_check(s, f, checks.kato_slack);
  r.kato_margin = k.max_margin;
  r.kato_slack = k.slack;
  r.kato_exceeding = k.exceeding.size();
  const auto gp = gradient_pinch_check(s, f);
  r.gp_vacuous = gp.vacuous;
  r.gp_ratio = gp.max_ratio;
  r.ms_one = michael_simon_check(s, f, TestFunction::constant_one).ratio;
  const auto ms = michael_simon_check(s, f, TestFunction::abs_traceless);
  if (!ms.vacuous) r.ms_abs_Ao = ms.ratio;
  r.ms_H2 = michael_simon_check(s, f, TestFunction::mean_curvature_sq).ratio;
  if (s.is_axi()) {
    const auto h = hamilton_interpolation_check(s, f);
    if (!h.vacuous) r.hamilton = h.ratio;
  }
  r.topping = topping_check(s, f);
  return r;
}

std::string cell(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int cmd_check(const fs::path& config_path, const fs::path& out_dir, const CommandOptions& opts, std::ostream& log) {
  LabConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config(config_path);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return cmd_check(cfg, out_dir, opts, log);
}

int cmd_check(const LabConfig& cfg, const fs::path& out_dir, const CommandOptions& opts, std::ostream& log) {
  try {
    const double bound = gradient_pinch_bound(cfg.scenario.n);
    std::vector<Row> rows;
    std::vector<std::string> violations, soft;
    json report;
    json trends = json::array();
    for (const auto& item : battery(cfg)) {
      const Row coarse = evaluate(item.name, item.spec, cfg.checks);
      ScenarioSpec fine_spec = item.spec;
      fine_spec.resolution *= 2;
      const Row fine = evaluate(item.name, fine_spec, cfg.checks);
      for (const Row* r : {&coarse, &fine}) {
        if (r->kato_exceeding > 0) violations.push_back(r->name + ": Kato beyond slack");
        if (!r->gp_vacuous && r->gp_ratio > bound + cfg.checks.gradient_pinch_slack)
          violations.push_back(r->name + ": gradient-pinch ratio " + cell(r->gp_ratio));
        if (r->identity_min < -cfg.checks.identity_tol) violations.push_back(r->name + ": |A|^2 < H^2/n");
        rows.push_back(*r);
      }
      // refinement sanity: empirical constants should not grow when h halves
      auto grows = [](double a, double b) { return std::isfinite(a) && std::isfinite(b) && b > a * (1.0 + 1e-3); };
      json t = {{"surface", item.name},
                {"michael_simon_one", {coarse.ms_one, fine.ms_one}},
                {"topping", {coarse.topping, fine.topping}},
                {"michael_simon_abs_Ao", {cell(coarse.ms_abs_Ao), cell(fine.ms_abs_Ao)}},
                {"hamilton", {cell(coarse.hamilton), cell(fine.hamilton)}}};
      trends.push_back(t);
      if (grows(coarse.ms_one, fine.ms_one) || grows(coarse.topping, fine.topping) ||
          grows(coarse.ms_abs_Ao, fine.ms_abs_Ao) || grows(coarse.hamilton, fine.hamilton))
        soft.push_back(item.name + ": an empirical ratio grew under refinement");
    }

    std::string csv =
        "surface,resolution,nodes,identity_residual,identity_min,kato_max_margin,kato_slack,kato_exceeding,"
        "gradient_pinch_ratio,gradient_pinch_bound,michael_simon_one,michael_simon_abs_Ao,michael_simon_H2,"
        "hamilton,topping\n";
    double gp_max = 0, ms_max = 0, top_max = 0, ham_max = 0;
    for (const auto& r : rows) {
      csv += r.name + "," + std::to_string(r.resolution) + "," + std::to_string(r.nodes) + "," +
             cell(r.identity_residual) + "," + cell(r.identity_min) + "," + cell(r.kato_margin) + "," +
             cell(r.kato_slack) + "," + std::to_string(r.kato_exceeding) + "," +
             (r.gp_vacuous ? std::string() : cell(r.gp_ratio)) + "," + cell(bound) + "," + cell(r.ms_one) + "," +
             cell(r.ms_abs_Ao) + "," + cell(r.ms_H2) + "," + cell(r.hamilton) + "," + cell(r.topping) + "\n";
      if (!r.gp_vacuous) gp_max = std::max(gp_max, r.gp_ratio);
      if (std::isfinite(r.ms_abs_Ao)) ms_max = std::max(ms_max, r.ms_abs_Ao);
      if (std::isfinite(r.hamilton)) ham_max = std::max(ham_max, r.hamilton);
      top_max = std::max(top_max, r.topping);
    }
    report["maxima"] = {{"gradient_pinch", gp_max},
                        {"gradient_pinch_bound", bound},
                        {"michael_simon_abs_Ao", ms_max},
                        {"hamilton", ham_max},
                        {"topping", top_max}};
    report["refinement"] = trends;
    report["violations"] = violations;
    report["refinement_warnings"] = soft;
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream(out_dir / "check.csv", std::ios::binary) << csv;
      std::ofstream(out_dir / "check.json", std::ios::binary) << report.dump(2) << '\n';
    }
    if (!opts.quiet) {
      log << csv;
      for (const auto& w : soft) log << "warning: " << w << '\n';
    }
    for (const auto& v : violations) log << "violation: " << v << '\n';
    return violations.empty() ? 0 : 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mcflab
