// One PASS/FAIL line per acceptance criterion, with measured values.
// Usage: acceptance [criterion ids...]   (all when none given)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/lab.hpp"
#include "mcflab/run.hpp"
#include "mcflab/singularity.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void expect(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double r_eff(const DiagnosticsRecord& r) { return std::pow(r.area / unit_sphere_area(r.n), 1.0 / r.n); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mcflab_acceptance_" + name);
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

// cached so criteria 1 and 2 share the n = 2 sphere run
const RunResult& sphere_run(int n) {
  static std::map<int, RunResult> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    FlowConfig c;
    c.cfl = 0.1;
    it = cache.emplace(n, run_flow(build_sphere(Backend::axi, n, 1.0, 512), c)).first;
  }
  return it->second;
}

Outcome criterion1() {
  Outcome o;
  for (int n : {2, 3}) {
    const auto& res = sphere_run(n);
    const double T = 1.0 / (2 * n);
    double worst = 0;
    for (const auto& r : res.series) {
      if (r.t > 0.9 * T) break;
      worst = std::max(worst, std::abs(r_eff(r) / std::sqrt(1 - 2 * n * r.t) - 1));
    }
    o.expect(res.cause == StopCause::extinction, "n = " + std::to_string(n) + " cause " + to_string(res.cause));
    o.expect(worst <= 0.01, fmt("n = %.0f max |R_eff / sqrt(1 - 2nt) - 1| = %.3g for t <= 0.9 T", n, worst));
    const auto e = estimate_singular_time(res.series, res.cause);
    o.expect(e.determined && std::abs(e.T_est / T - 1) <= 0.02,
             fmt("n = %.0f T_est = %.7f (exact %.7f)", n, e.T_est, T));
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto& res = sphere_run(2);
  double worst = 0;
  std::size_t checked = 0, violations = 0;
  for (std::size_t i = 1; i < res.series.size(); ++i) {
    const auto& a = res.series[i - 1];
    const auto& b = res.series[i];
    if (b.dt > 1e-3 || b.remeshed) continue;
    const auto c = area_derivative_check(a, b, a.int_H2, 0.05, 1e-3);
    worst = std::max(worst, c.rel_error);
    violations += c.violation;
    ++checked;
  }
  o.expect(checked > 1000 && violations == 0 && worst <= 0.05,
           fmt("%.0f steps with dt <= 1e-3, max relative error %.3g, violations %.0f", double(checked), worst,
               double(violations)));
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.05, 512);
  FlowConfig c;
  const auto res = run_flow(s, c);
  const double I0 = res.series.front().int_Ao2;
  o.expect(I0 <= 0.05, fmt("initial int |Ao|^2 = %.4f (criterion asks <= 0.05 for delta = 0.05)", I0));
  const ChecksConfig checks;
  const SlackPolicy slack{checks.monotone_rel_slack, checks.monotone_abs_floor, true};
  const auto hit = monotonicity_monitor(res.series, "int_Ao2", slack);
  std::size_t remeshes = 0;
  for (const auto& r : res.series) remeshes += r.remeshed;
  o.expect(!hit.has_value(), hit ? "int |Ao|^2 increased at record " + std::to_string(*hit)
                                 : fmt("int |Ao|^2 non-increasing over %.0f records (%.0f remeshes)",
                                       double(res.series.size()), double(remeshes)));
  o.note(std::string("cause ") + to_string(res.cause) + fmt(", final int |Ao|^2 = %.3g", res.series.back().int_Ao2));
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, 0.05, 512);
  FlowConfig c;
  c.mode = FlowMode::normalized;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_flow(s, c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.expect(res.cause == StopCause::steady, std::string("cause ") + to_string(res.cause) +
                                               fmt(" at t~ = %.3f (%.0f s)", res.series.back().t_tilde, wall));
  const auto round = roundness_of_attractor(res.final_state.surface);
  o.expect(round.radius_spread <= 0.01, fmt("final radius spread %.3g", round.radius_spread));
  const double A0 = res.series.front().area;
  double drift = 0;
  for (const auto& r : res.series) drift = std::max(drift, std::abs(r.area / A0 - 1));
  o.expect(drift <= 1e-8, fmt("max relative area drift %.3g", drift));

  // middle two decades of the decay of int |Ao~|^2
  std::size_t end = 0;
  for (std::size_t i = 0; i < res.series.size(); ++i)
    if (res.series[i].int_Ao2 < res.series[end].int_Ao2) end = i;
  const double top = std::log10(res.series.front().int_Ao2), bot = std::log10(res.series[end].int_Ao2);
  const double mid = 0.5 * (top + bot);
  const double hi = top - bot > 2 ? mid + 1 : top, lo = top - bot > 2 ? mid - 1 : bot;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  double cnt = 0;
  for (std::size_t i = 0; i <= end; ++i) {
    const double y = std::log10(res.series[i].int_Ao2);
    if (y > hi || y < lo) continue;
    const double x = res.series[i].t_tilde;
    const double ly = std::log(res.series[i].int_Ao2);
    sx += x, sy += ly, sxx += x * x, syy += ly * ly, sxy += x * ly;
    ++cnt;
  }
  const double cov = sxy - sx * sy / cnt, vx = sxx - sx * sx / cnt, vy = syy - sy * sy / cnt;
  const double slope = cov / vx, corr = cov / std::sqrt(vx * vy);
  o.expect(cnt >= 10 && slope < 0 && std::abs(corr) >= 0.99,
           fmt("log-linear fit over decades [%.2f, %.2f]: slope %.4f", lo, hi, slope) +
               fmt(", |correlation| %.6f, %.0f points", std::abs(corr), cnt));
  o.note(fmt("decay spans %.2f decades; linearised l = 2 rate is -4", top - bot));
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (Backend b : {Backend::axi, Backend::mesh}) {
    const auto st = make_state(build_sphere(b, 2, 1.0, b == Backend::axi ? 512 : 2000), FlowMode::normalized);
    const auto f = curvature_field(st.surface, 0);
    FlowConfig c;
    const double dt = adaptive_dt(st, f, c);
    double hmax = 0;
    for (double h : f.mean_curvature) hmax = std::max(hmax, std::abs(h));
    for (Method m : {Method::explicit_euler, Method::semi_implicit}) {
      const auto next = step_normalized(st, f, dt, m);
      double disp = 0;
      for (std::size_t i = 0; i < st.surface.node_count(); ++i)
        disp = std::max(disp, (next.surface.position(i) - st.surface.position(i)).norm());
      const double bound = 1e-2 * dt * hmax;
      o.expect(disp <= bound, std::string(to_string(b)) + " " + to_string(m) +
                                  fmt(": displacement %.3g <= %.3g (dt~ = %.3g)", disp, bound, dt));
    }
  }
  return o;
}

nlohmann::json battery_report(std::ostringstream& log, int& rc) {
  const auto dir = scratch("check");
  CommandOptions q;
  q.quiet = true;
  rc = cmd_check(LabConfig{}, dir, q, log);
  return nlohmann::json::parse(slurp(dir / "check.json"));
}

struct BatteryRow {
  std::string surface;
  int resolution;
  std::map<std::string, double> v;
};

std::vector<BatteryRow> battery_rows() {
  const auto dir = fs::temp_directory_path() / "mcflab_acceptance_check";
  std::istringstream in(slurp(dir / "check.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cols;
  {
    std::istringstream h(line);
    std::string c;
    while (std::getline(h, c, ',')) cols.push_back(c);
  }
  std::vector<BatteryRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream l(line);
    std::string c;
    while (std::getline(l, c, ',')) cells.push_back(c);
    while (cells.size() < cols.size()) cells.emplace_back();
    BatteryRow r;
    r.surface = cells[0];
    r.resolution = std::stoi(cells[1]);
    for (std::size_t k = 2; k < cols.size(); ++k) r.v[cols[k]] = cells[k].empty() ? NAN : std::stod(cells[k]);
    rows.push_back(r);
  }
  return rows;
}

Outcome criterion6() {
  Outcome o;
  std::ostringstream log;
  int rc = -1;
  const auto rep = battery_report(log, rc);
  o.expect(rc == 0, "cmd_check exit code " + std::to_string(rc) + " (2 would flag a hard violation)");
  double gp = 0, kato_excess = -1e300, idmin = 1e300;
  std::size_t exceeding = 0;
  for (const auto& r : battery_rows()) {
    if (!std::isnan(r.v.at("gradient_pinch_ratio"))) gp = std::max(gp, r.v.at("gradient_pinch_ratio"));
    kato_excess = std::max(kato_excess, r.v.at("kato_max_margin") - r.v.at("kato_slack"));
    exceeding += std::size_t(r.v.at("kato_exceeding"));
    idmin = std::min(idmin, r.v.at("identity_min"));
  }
  const double slack = ChecksConfig{}.gradient_pinch_slack;
  o.expect(exceeding == 0 && kato_excess <= 0, fmt("Kato: max(margin - slack) = %.3g over the battery", kato_excess));
  o.expect(gp <= 4.0 + slack, fmt("gradient pinch max ratio %.5f <= 4 + %.2f", gp, slack));
  o.expect(idmin >= -ChecksConfig{}.identity_tol, fmt("min (|A|^2 - H^2/n) / max(1,|A|^2) = %.3g", idmin));
  if (!rep["violations"].empty()) o.note("violations: " + rep["violations"].dump());
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto rows = battery_rows();
  if (rows.empty()) {
    std::ostringstream log;
    int rc;
    battery_report(log, rc);
  }
  const auto all = battery_rows();
  const std::vector<std::string> keys = {"michael_simon_one", "michael_simon_abs_Ao", "michael_simon_H2", "topping"};
  bool finite = true;
  for (const auto& r : all)
    for (const auto& k : keys)
      if (k != "michael_simon_abs_Ao" && !std::isfinite(r.v.at(k))) finite = false;
  o.expect(finite, "all Michael-Simon and Topping ratios finite");

  auto sphere_spread = [&](const std::string& key) {
    double lo = 1e300, hi = -1e300;
    for (const auto& r : all)
      if (r.surface.rfind("sphere_R", 0) == 0) {
        lo = std::min(lo, r.v.at(key));
        hi = std::max(hi, r.v.at(key));
      }
    return hi / lo - 1;
  };
  const double top_spread = sphere_spread("topping"), ms_spread = sphere_spread("michael_simon_one");
  o.expect(top_spread <= 0.02, fmt("Topping radius spread on R = 0.5, 1, 2: %.3g", top_spread));
  o.expect(ms_spread <= 0.02, fmt("Michael-Simon (v = 1) radius spread: %.3g (the n = 2 form gives R^2/4)", ms_spread));

  std::size_t grew = 0, pairs = 0;
  for (std::size_t i = 0; i + 1 < all.size(); i += 2)
    for (const auto& k : keys) {
      const double a = all[i].v.at(k), b = all[i + 1].v.at(k);
      if (std::isnan(a) || std::isnan(b)) continue;
      ++pairs;
      if (b > a * (1 + 1e-3)) {
        ++grew;
        o.note(all[i].surface + " " + k + fmt(" grew %.6g -> %.6g", a, b));
      }
    }
  o.expect(grew == 0, fmt("%.0f of %.0f ratios grew by more than 0.1%% under one resolution doubling", double(grew),
                          double(pairs)));
  for (const auto& r : all)
    if (r.surface == "sphere_R1" && r.resolution == ChecksConfig{}.battery_resolution) {
      o.expect(std::abs(r.v.at("topping") / 0.125 - 1) <= 0.02, fmt("unit sphere Topping %.6f", r.v.at("topping")));
      o.expect(std::abs(r.v.at("michael_simon_one") / 0.25 - 1) <= 0.02,
               fmt("unit sphere Michael-Simon %.6f", r.v.at("michael_simon_one")));
    }
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (double d : {0.01, 0.05, 0.1}) {
    std::vector<double> ratio;
    for (int res : {512, 1024, 2048}) {
      const auto s = build_perturbed_sphere(Backend::axi, 2, 1.0, 2, d, res);
      ratio.push_back(hamilton_interpolation_check(s, curvature_field(s, 2)).ratio);
    }
    const bool dec = ratio[1] <= ratio[0] && ratio[2] <= ratio[1];
    o.expect(ratio[0] <= 1.05 && ratio[2] <= 1.01 && dec,
             fmt("delta %.2f: ratio %.6f (512)", d, ratio[0]) + fmt(" %.6f (1024) %.6f (2048)", ratio[1], ratio[2]));
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto s = build_dumbbell(2, 0.2, 1.0, 3.0, 2048);
  FlowConfig c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_flow(s, c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.expect(res.cause == StopCause::blow_up, std::string("cause ") + to_string(res.cause) +
                                                fmt(" after %.0f steps, %.0f remeshes", double(res.series.back().step),
                                                    double(res.remeshes.size())));
  const auto& a = res.series.front();
  const auto& b = res.series.back();
  double supA = 0, supH = 0;
  for (const auto& r : res.series) supA = std::max(supA, r.sup_A), supH = std::max(supH, r.sup_H);
  o.expect(supA >= 1e3 * a.sup_A, fmt("max|A| %.4g -> %.4g (x%.1f)", a.sup_A, supA, supA / a.sup_A));
  o.expect(supH >= 1e3 * a.sup_H, fmt("max|H| %.4g -> %.4g (x%.1f)", a.sup_H, supH, supH / a.sup_H));
  const auto h = h_blowup_comparison(res.series);
  o.expect(std::abs(h.slope - 1) <= 0.1, fmt("log-log slope of sup H against sup |A|: %.4f (%.0f samples)", h.slope,
                                             double(h.samples)));
  try {
    const auto T = estimate_singular_time(res.series, res.cause);
    const auto fit = classify_blowup(res.series, T);
    o.expect(fit.verdict == BlowupVerdict::typeI && fit.typeI_stat >= 0.3 && fit.typeI_stat <= 3,
             std::string("verdict ") + to_string(fit.verdict) + fmt(", typeI_stat %.4f, T_est %.6f", fit.typeI_stat, T.T_est));
  } catch (const Error& e) {
    o.expect(false, std::string("singular time: ") + e.what());
  }
  o.expect(wall <= 600, fmt("runtime %.0f s at 2048 nodes", wall));
  o.note(fmt("final t %.6f, final sup_H / sup_A %.4f", b.t, h.final_ratio));
  return o;
}

Outcome criterion10() {
  Outcome o;
  const double lam = 2.5;
  double worst_static = 0;
  for (int n : {2, 3})
    for (Backend b : {Backend::axi, Backend::mesh}) {
      if (b == Backend::mesh && n != 2) continue;
      auto st = make_state(b == Backend::axi ? build_perturbed_sphere(b, n, 1.0, 2, 0.1, 512)
                                             : build_ellipsoid(2, 1, 1, 2000),
                           FlowMode::unnormalized);
      const int m = b == Backend::axi ? 2 : 1;
      const auto r0 = record(st, curvature_field(st.surface, m));
      st.surface.scale(lam);
      const auto r1 = record(st, curvature_field(st.surface, m));
      worst_static = std::max({worst_static, std::abs(r1.area / (r0.area * std::pow(lam, n)) - 1),
                               std::abs(r1.sup_H * lam / r0.sup_H - 1),
                               std::abs(r1.int_Ao2 / (r0.int_Ao2 * std::pow(lam, n - 2)) - 1),
                               std::abs(r1.topping_ratio / r0.topping_ratio - 1)});
    }
  o.expect(worst_static <= 1e-8,
           fmt("area, sup_H, int |Ao|^2, Topping under lambda = %.1f: max relative deviation %.3g", lam, worst_static));

  // a parabolically rescaled flow: typeI_stat and T / lambda^2
  FlowConfig c;
  const auto ra = run_flow(build_sphere(Backend::axi, 2, 1.0, 128), c);
  const auto rb = run_flow(build_sphere(Backend::axi, 2, lam, 128), c);
  const auto Ta = estimate_singular_time(ra.series, ra.cause), Tb = estimate_singular_time(rb.series, rb.cause);
  const double sa = classify_blowup(ra.series, Ta).typeI_stat, sb = classify_blowup(rb.series, Tb).typeI_stat;
  o.expect(std::abs(Tb.T_est / (lam * lam * Ta.T_est) - 1) <= 1e-6,
           fmt("T_est %.8f vs lambda^2 x %.8f", Tb.T_est, Ta.T_est));
  o.expect(std::abs(sb / sa - 1) <= 1e-6, fmt("typeI_stat %.10f vs %.10f", sb, sa));
  return o;
}

Outcome criterion11() {
  Outcome o;
  const auto dir = scratch("determinism");
  std::ofstream(dir / "p.cfg") << "[scenario]\nkind = perturbed_sphere\namplitude = 0.1\nresolution = 256\n"
                                  "[flow]\nmode = normalized\nmax_steps = 3000\n";
  CommandOptions q;
  q.quiet = true;
  std::ostringstream log;
  const int a = cmd_run(dir / "p.cfg", dir / "a", q, log);
  const int b = cmd_run(dir / "p.cfg", dir / "b", q, log);
  const auto sa = slurp(dir / "a" / "series.csv"), sb = slurp(dir / "b" / "series.csv");
  o.expect(a == 0 && b == 0, "exit codes " + std::to_string(a) + ", " + std::to_string(b));
  o.expect(!sa.empty() && sa == sb, fmt("series.csv byte-identical (%.0f bytes)", double(sa.size())));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"shrinking sphere exactness", criterion1},
      {"area-derivative identity", criterion2},
      {"monotonicity of int |Ao|^2 (unnormalized perturbed sphere)", criterion3},
      {"normalized-flow convergence", criterion4},
      {"sphere stationarity of the normalized step", criterion5},
      {"pointwise inequality suite", criterion6},
      {"integral inequality stability", criterion7},
      {"Hamilton interpolation", criterion8},
      {"neckpinch H blow-up", criterion9},
      {"scale covariance", criterion10},
      {"determinism", criterion11},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  if (pick.empty())
    for (int i = 1; i <= int(criteria.size()); ++i) pick.push_back(i);

  int passed = 0;
  for (int id : pick) {
    if (id < 1 || id > int(criteria.size())) continue;
    const auto& [name, fn] = criteria[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.expect(false, std::string("error: ") + e.what());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), wall);
    for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    passed += out.pass;
  }
  std::printf("%d/%zu criteria passed\n", passed, pick.size());
  return passed == int(pick.size()) ? 0 : 1;
}
