#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mcflab/lab.hpp"
#include "mcflab/run.hpp"
#include "mcflab/singularity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mcflab {

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  require(bool(f), ErrorCode::io, "cannot write '" + p.string() + "'");
  f << content;
  require(bool(f), ErrorCode::io, "write failed for '" + p.string() + "'");
}

json scenario_json(const ScenarioSpec& s) {
  json j = {{"kind", to_string(s.kind)}, {"backend", to_string(s.backend)}, {"n", s.n},
            {"resolution", s.resolution}, {"seed", s.seed}};
  switch (s.kind) {
    case ScenarioKind::sphere: j["radius"] = s.radius; break;
    case ScenarioKind::perturbed_sphere:
      j["radius"] = s.radius;
      j["mode"] = s.mode;
      j["amplitude"] = s.amplitude;
      break;
    case ScenarioKind::ellipsoid: j["axes"] = {s.a, s.b, s.c}; break;
    case ScenarioKind::dumbbell:
      j["neck_radius"] = s.neck_radius;
      j["bulb_radius"] = s.bulb_radius;
      j["bulb_separation"] = s.bulb_separation;
      break;
  }
  return j;
}

std::string snapshot_name(long step, Backend b) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "step_%09ld.%s", step, b == Backend::axi ? "csv" : "obj");
  return buf;
}

LabConfig apply_options(LabConfig c, const CommandOptions& o) {
  if (o.seed_set) {
    c.scenario.seed = o.seed;
    c.flow.seed = o.seed;
  }
  return c;
}

// Everything cmd_run and sweep rows need from one run.
struct RunOutcome {
  int exit_code = 0;
  std::string cause;
  double initial_int_Ao2 = std::numeric_limits<double>::quiet_NaN();
  double T_est = std::numeric_limits<double>::quiet_NaN();
  std::string typeI_verdict;
  double radius_spread = std::numeric_limits<double>::quiet_NaN();
};

std::string monitor_verdict(const std::vector<DiagnosticsRecord>& s, const std::string& key, const SlackPolicy& p) {
  const auto hit = monotonicity_monitor(s, key, p);
  return hit ? "step " + std::to_string(s[*hit].step) : "none";
}

RunOutcome execute_run(const LabConfig& cfg, const fs::path& out_dir, bool quiet, std::ostream& log) {
  RunOutcome outcome;
  fs::create_directories(out_dir);
  json manifest;
  manifest["config_hash"] = config_hash(cfg);
  manifest["config"] = serialize_config(cfg);
  manifest["scenario"] = scenario_json(cfg.scenario);
  manifest["partial"] = true;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Hypersurface initial = build_scenario(cfg.scenario);
    const bool normalized = cfg.flow.mode == FlowMode::normalized;
    ProgressFn progress;
    if (!quiet)
      progress = [&log](const DiagnosticsRecord& r) {
        if (r.step % 10000 == 0) log << "  step " << r.step << "  t " << r.t << "  sup|A| " << r.sup_A << '\n';
        return true;
      };
    const RunResult res = run_flow(initial, cfg.flow, progress);
    const auto& S = res.series;
    outcome.cause = to_string(res.cause);
    outcome.initial_int_Ao2 = S.front().int_Ao2;

    {
      std::ostringstream os;
      write_series_csv(os, S);
      write_file(out_dir / "series.csv", os.str());
    }
    json snaps = json::array();
    if (!res.snapshots.empty()) {
      fs::create_directories(out_dir / "snapshots");
      for (const auto& sn : res.snapshots) {
        const std::string name = snapshot_name(sn.step, sn.surface.backend());
        std::ostringstream os;
        if (sn.surface.is_axi()) write_profile_csv(os, sn.surface.axi());
        else write_obj(os, sn.surface);
        write_file(out_dir / "snapshots" / name, os.str());
        snaps.push_back({{"step", sn.step}, {"t", sn.t}, {"path", "snapshots/" + name},
                         {"nodes", sn.surface.node_count()}});
      }
    }
    {
      std::ostringstream os;
      write_curvature_csv(os, curvature_field(res.final_state.surface, res.final_state.surface.is_mesh()
                                                                            ? std::min(cfg.flow.m_max, 1)
                                                                            : cfg.flow.m_max));
      write_file(out_dir / "curvature_final.csv", os.str());
    }

    // monitored invariants
    std::vector<std::string> violations;
    SlackPolicy slack{cfg.checks.monotone_rel_slack, cfg.checks.monotone_abs_floor, true};
    json mono;
    for (const char* key : {"area", "int_Ao2", "int_grad1A2"}) mono[key] = monitor_verdict(S, key, slack);
    const bool small_regime = outcome.initial_int_Ao2 <= cfg.flow.epsilon_knob;
    if (!normalized && mono["area"] != "none") violations.push_back("area increased at " + mono["area"].get<std::string>());
    if (small_regime && mono["int_Ao2"] != "none")
      violations.push_back("int |Ao|^2 increased at " + mono["int_Ao2"].get<std::string>());
    manifest["monotonicity"] = mono;
    manifest["small_regime"] = small_regime;
    // reporting thresholds only; crossing them is not a violation
    long lambda0_step = -1, c0_step = -1;
    for (const auto& r : S) {
      if (lambda0_step < 0 && std::max(r.sup_A, r.int_gradmA2[0]) > cfg.flow.lambda0_knob) lambda0_step = r.step;
      if (c0_step < 0 && r.sup_H > cfg.flow.c0_knob) c0_step = r.step;
    }
    manifest["thresholds"] = {{"epsilon_knob", cfg.flow.epsilon_knob},
                              {"lambda0_knob", cfg.flow.lambda0_knob},
                              {"lambda0_first_exceeded_step", lambda0_step},
                              {"c0_knob", cfg.flow.c0_knob},
                              {"c0_first_exceeded_step", c0_step}};

    const int n = initial.dimension();
    const double gp_bound = gradient_pinch_bound(n);
    double kato_max = -std::numeric_limits<double>::infinity(), gp_max = 0.0, ms_max = 0.0, ham_max = 0.0;
    double top_min = std::numeric_limits<double>::infinity(), top_max = 0.0, id_min = std::numeric_limits<double>::infinity();
    long kato_bad = -1, gp_bad = -1, id_bad = -1, area_bad = -1;
    std::size_t area_limited = 0;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const auto& r = S[i];
      if (std::isfinite(r.kato_margin)) {
        kato_max = std::max(kato_max, r.kato_margin);
        if (kato_bad < 0 && r.kato_margin > cfg.checks.kato_slack * r.kato_slack_unit) kato_bad = r.step;
      }
      if (std::isfinite(r.gradient_pinch_ratio)) {
        gp_max = std::max(gp_max, r.gradient_pinch_ratio);
        if (gp_bad < 0 && r.gradient_pinch_ratio > gp_bound + cfg.checks.gradient_pinch_slack) gp_bad = r.step;
      }
      if (std::isfinite(r.michael_simon)) ms_max = std::max(ms_max, r.michael_simon);
      if (std::isfinite(r.hamilton)) ham_max = std::max(ham_max, r.hamilton);
      top_min = std::min(top_min, r.topping_ratio);
      top_max = std::max(top_max, r.topping_ratio);
      id_min = std::min(id_min, r.identity_min);
      if (id_bad < 0 && r.identity_min < -cfg.checks.identity_tol) id_bad = r.step;
      if (!normalized && i > 0 && !r.remeshed && r.t > S[i - 1].t) {
        const auto a = area_derivative_check(S[i - 1], r, S[i - 1].int_H2, cfg.checks.area_rate_tol,
                                             cfg.checks.area_rate_dt);
        if (a.timestep_limited) ++area_limited;
        if (a.violation && area_bad < 0) area_bad = r.step;
      }
    }
    if (kato_bad >= 0) violations.push_back("Kato inequality beyond slack at step " + std::to_string(kato_bad));
    if (gp_bad >= 0) violations.push_back("gradient-pinch bound exceeded at step " + std::to_string(gp_bad));
    if (id_bad >= 0) violations.push_back("|A|^2 < H^2/n at step " + std::to_string(id_bad));
    if (area_bad >= 0) violations.push_back("area derivative identity off at step " + std::to_string(area_bad));
    manifest["inequalities"] = {{"kato_margin_max", num(kato_max)},
                                {"gradient_pinch_max", num(gp_max)},
                                {"gradient_pinch_bound", gp_bound},
                                {"michael_simon_abs_Ao_max", num(ms_max)},
                                {"hamilton_max", num(ham_max)},
                                {"topping_min", num(top_min)},
                                {"topping_max", num(top_max)},
                                {"identity_min", num(id_min)},
                                {"area_rate_timestep_limited", area_limited}};

    json sing = nullptr;
    if (!normalized && (res.cause == StopCause::extinction || res.cause == StopCause::blow_up)) {
      try {
        const auto T = estimate_singular_time(S, res.cause);
        const auto fit = classify_blowup(S, T, {cfg.checks.typeI_factor, cfg.checks.typeII_growth});
        const auto hb = h_blowup_comparison(S, {cfg.checks.h_blowup_slope, cfg.checks.h_bounded_slope});
        const auto pin = pinching_check(S);
        sing = {{"T_est", T.determined ? num(T.T_est) : json(nullptr)},
                {"determined", T.determined},
                {"method", to_string(fit.method)},
                {"typeI_stat", num(fit.typeI_stat)},
                {"typeI_verdict", to_string(fit.verdict)},
                {"fit_window", {fit.window_first_step, fit.window_last_step}},
                {"H_A_ratio_trend", fit.H_A_ratio_trend.empty()
                                        ? json::array()
                                        : json::array({fit.H_A_ratio_trend.front(), fit.H_A_ratio_trend.back()})},
                {"h_blowup", {{"final_ratio", num(hb.final_ratio)}, {"slope", num(hb.slope)}, {"verdict", hb.verdict}}},
                {"pinching", {{"vacuous", pin.vacuous}, {"running_max", pin.running_max},
                              {"onset_step", pin.onset_step}, {"bounded", pin.bounded}}}};
        if (T.determined) outcome.T_est = T.T_est;
        outcome.typeI_verdict = to_string(fit.verdict);
      } catch (const Error& e) {
        sing = {{"error", e.what()}};
      }
    }
    manifest["singularity"] = sing;
    const auto round = roundness_of_attractor(res.final_state.surface);
    outcome.radius_spread = round.radius_spread;
    manifest["roundness"] = {{"max_abs_Ao", round.max_abs_Ao}, {"radius_spread", round.radius_spread}};

    manifest["cause"] = outcome.cause;
    manifest["message"] = res.message;
    manifest["steps"] = res.final_state.step;
    manifest["final_t"] = res.final_state.t;
    manifest["final_t_tilde"] = res.final_state.t_tilde;
    manifest["final_psi"] = res.final_state.psi;
    manifest["remesh_events"] = res.remeshes.size();
    manifest["blow_up_threshold"] = res.blow_up_threshold;
    manifest["files"] = {{"series", "series.csv"}, {"curvature", "curvature_final.csv"}, {"snapshots", snaps}};
    manifest["violations"] = violations;
    manifest["partial"] = false;
    outcome.exit_code = violations.empty() ? 0 : 2;
    if (!quiet) {
      log << "cause " << outcome.cause << " after " << res.final_state.step << " steps, t = " << res.final_state.t << '\n';
      for (const auto& v : violations) log << "violation: " << v << '\n';
    }
  } catch (const std::exception& e) {
    manifest["error"] = e.what();
    outcome.cause = "error";
    outcome.exit_code = 1;
    log << "error: " << e.what() << '\n';
  }
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["exit_code"] = outcome.exit_code;
  try {
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    outcome.exit_code = 1;
  }
  return outcome;
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int cmd_run(const fs::path& config_path, const fs::path& out_dir, const CommandOptions& opts, std::ostream& log) {
  LabConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return cmd_run(cfg, out_dir, opts, log);
}

int cmd_run(const LabConfig& config, const fs::path& out_dir, const CommandOptions& opts, std::ostream& log) {
  return execute_run(apply_options(config, opts), out_dir, opts.quiet, log).exit_code;
}

int cmd_sweep(const fs::path& config_path, const std::string& key, const std::vector<double>& values,
              const fs::path& out_dir, const CommandOptions& opts, std::ostream& log) {
  LabConfig base;
  try {
    require(key == "amplitude" || key == "neck_radius" || key == "resolution" || key == "cfl",
            ErrorCode::invalid_argument, "sweep key must be one of amplitude, neck_radius, resolution, cfl");
    base = apply_options(parse_config(config_path), opts);
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<RunOutcome> rows(values.size());
  std::vector<std::string> logs(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < values.size();) {
      std::ostringstream row_log;
      LabConfig c = base;
      const double v = values[i];
      try {
        if (key == "amplitude") c.scenario.amplitude = v;
        else if (key == "neck_radius") c.scenario.neck_radius = v;
        else if (key == "resolution") {
          require(v == std::floor(v) && v >= 8 && v < 1e8, ErrorCode::invalid_argument, "resolution must be an integer");
          c.scenario.resolution = int(v);
        } else c.flow.cfl = v;
        validate_scenario(c.scenario);
        validate_config(c.flow);
        rows[i] = execute_run(c, out_dir / ("row_" + std::to_string(i)), true, row_log);
      } catch (const std::exception& e) {
        rows[i].cause = "error";
        rows[i].exit_code = 1;
        row_log << "error: " << e.what() << '\n';
      }
      logs[i] = row_log.str();
    }
  };
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MCF_LAB_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) threads = unsigned(t);
  }
  threads = std::min<unsigned>(threads, std::max<std::size_t>(values.size(), 1));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::string csv = "value,initial_int_Ao2,cause,T_est,typeI_verdict,final_radius_spread\n";
  int code = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& r = rows[i];
    csv += csv_num(values[i]) + "," + csv_num(r.initial_int_Ao2) + "," + r.cause + "," + csv_num(r.T_est) + "," +
           r.typeI_verdict + "," + csv_num(r.radius_spread) + "\n";
    if (r.exit_code == 2) code = 2;
    else if (r.exit_code == 1 && code == 0) code = 1;
    if (!opts.quiet && !logs[i].empty()) log << "row " << i << ": " << logs[i];
  }
  try {
    write_file(out_dir / "summary.csv", csv);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  if (!opts.quiet) log << csv;
  return code;
}

int cmd_export(const fs::path& run_dir, const std::string& format, std::ostream& log) {
  try {
    require(format == "obj" || format == "profile-csv", ErrorCode::invalid_argument,
            "format must be obj or profile-csv");
    std::ifstream f(run_dir / "manifest.json");
    require(bool(f), ErrorCode::io, "missing manifest in '" + run_dir.string() + "'");
    const json m = json::parse(f);
    const Backend backend = backend_from_string(m.at("scenario").at("backend").get<std::string>());
    const int n = m.at("scenario").at("n").get<int>();
    if (format == "profile-csv")
      require(backend == Backend::axi, ErrorCode::unsupported, "profile-csv export needs an axi run");
    else
      require(n == 2, ErrorCode::unsupported, "obj export needs n = 2");
    const fs::path dst = run_dir / "export" / format;
    fs::create_directories(dst);
    std::size_t count = 0;
    for (const auto& sn : m.at("files").at("snapshots")) {
      const fs::path src = run_dir / sn.at("path").get<std::string>();
      const Hypersurface s = read_snapshot(src, backend, n);
      std::ostringstream os;
      if (format == "obj") write_obj(os, s);
      else write_profile_csv(os, s.axi());
      fs::path name = src.filename();
      name.replace_extension(format == "obj" ? ".obj" : ".csv");
      write_file(dst / name, os.str());
      ++count;
    }
    log << "exported " << count << " snapshot(s) to " << dst.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

void write_profile_csv(std::ostream& os, const AxiProfileSurface& p) {
  const auto s = profile_arclength(p);
  os << "s,x,r\n";
  char buf[96];
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s[i], p.nodes[i].x, p.nodes[i].r);
    os << buf;
  }
}

void write_obj(std::ostream& os, const Hypersurface& surface, int angular) {
  char buf[96];
  if (surface.is_mesh()) {
    const auto& m = surface.mesh();
    for (const auto& v : m.vertices) {
      std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
      os << buf;
    }
    for (const auto& t : m.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    return;
  }
  const auto& p = surface.axi();
  require(p.n == 2, ErrorCode::unsupported, "obj tessellation needs n = 2");
  require(angular >= 3, ErrorCode::invalid_argument, "need at least 3 angular samples");
  const int N = int(p.nodes.size());
  // poles are single vertices, interior nodes become rings
  auto ring = [&](int i, int k) { return 2 + (i - 1) * angular + k; };
  std::snprintf(buf, sizeof buf, "v %.17g 0 0\n", p.nodes[0].x);
  os << buf;
  for (int i = 1; i < N - 1; ++i)
    for (int k = 0; k < angular; ++k) {
      const double th = 2.0 * std::numbers::pi * k / angular;
      std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.nodes[i].x, p.nodes[i].r * std::cos(th),
                    p.nodes[i].r * std::sin(th));
      os << buf;
    }
  const int last = 2 + (N - 2) * angular;
  std::snprintf(buf, sizeof buf, "v %.17g 0 0\n", p.nodes[N - 1].x);
  os << buf;
  for (int k = 0; k < angular; ++k) {
    const int k1 = (k + 1) % angular;
    os << "f 1 " << ring(1, k1) << ' ' << ring(1, k) << '\n';
    for (int i = 1; i < N - 2; ++i) {
      os << "f " << ring(i, k) << ' ' << ring(i, k1) << ' ' << ring(i + 1, k1) << '\n';
      os << "f " << ring(i, k) << ' ' << ring(i + 1, k1) << ' ' << ring(i + 1, k) << '\n';
    }
    os << "f " << last << ' ' << ring(N - 2, k) << ' ' << ring(N - 2, k1) << '\n';
  }
}

Hypersurface read_snapshot(const fs::path& path, Backend backend, int n) {
  std::ifstream f(path);
  require(bool(f), ErrorCode::io, "cannot open snapshot '" + path.string() + "'");
  std::string line;
  if (backend == Backend::axi) {
    std::getline(f, line);
    require(line.rfind("s,x,r", 0) == 0, ErrorCode::parse, "profile snapshot without 's,x,r' header");
    std::vector<ProfileNode> nodes;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      double s, x, r;
      require(std::sscanf(line.c_str(), "%lf,%lf,%lf", &s, &x, &r) == 3, ErrorCode::parse,
              "bad profile row in '" + path.string() + "'");
      nodes.push_back({x, r});
    }
    return Hypersurface::from_profile(n, std::move(nodes));
  }
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> t;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      v.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<int, 3> tri;
      ls >> tri[0] >> tri[1] >> tri[2];
      for (int& i : tri) --i;
      t.push_back(tri);
    }
  }
  return Hypersurface::from_mesh(std::move(v), std::move(t));
}

}  // namespace mcflab
