#include "mcflab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace mcflab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wsum(const std::vector<double>& w, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i];
  return acc;
}

double wsum_sq(const std::vector<double>& w, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i] * f[i];
  return acc;
}

double max_of(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

double max_abs_A(const CurvatureField& f) { return std::sqrt(std::max(0.0, max_of(f.norm_A_sq))); }

bool umbilic(const CurvatureField& f) {
  return std::sqrt(std::max(0.0, max_of(f.norm_Ao_sq))) < 1e-8 * max_abs_A(f);
}

void fmt(std::string& out, double v) {
  if (std::isnan(v)) return;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

DiagnosticsRecord record(const FlowState& state, const CurvatureField& f) {
  const auto& s = state.surface;
  const auto& w = s.weights();
  const int n = s.dimension();
  DiagnosticsRecord r;
  r.n = n;
  r.step = state.step;
  r.t = state.t;
  r.t_tilde = state.t_tilde;
  r.psi = state.psi;
  r.dt = state.dt_last;
  r.area = total_area(s);
  r.int_Ao2 = wsum(w, f.norm_Ao_sq);
  for (int m = 1; m <= 3; ++m) r.int_gradmA2[m - 1] = f.has_order(m) ? wsum_sq(w, f.grad_A[m - 1]) : kNaN;
  r.int_H2 = wsum_sq(w, f.mean_curvature);
  r.sup_A = max_abs_A(f);
  r.sup_H = 0.0;
  r.min_H = std::numeric_limits<double>::infinity();
  double int_Hn1 = 0.0;
  r.pinch_ratio = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double H = f.mean_curvature[i];
    r.sup_H = std::max(r.sup_H, std::abs(H));
    r.min_H = std::min(r.min_H, H);
    int_Hn1 += w[i] * std::pow(std::abs(H), n - 1);
    r.pinch_ratio = std::max(r.pinch_ratio, f.norm_A_sq[i] / (H * H + 1.0));
  }
  r.identity_min = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, r.sup_A * r.sup_A);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double H = f.mean_curvature[i];
    r.identity_min = std::min(r.identity_min, (f.norm_A_sq[i] - H * H / n) / scale);
  }
  r.sup_gradH = f.has_order(1) ? max_of(f.grad_H) : kNaN;
  r.h_tilde = r.int_H2 / r.area;
  r.diameter = s.is_mesh() ? mesh_graph_diameter(s.mesh(), false) : intrinsic_diameter(s);
  r.topping_ratio = r.diameter / int_Hn1;
  r.mean_convex = r.min_H > 0.0;
  r.convex = *std::min_element(f.principal.begin(), f.principal.end()) > 0.0;
  if (f.has_order(1)) {
    const auto k = kato_check(s, f, 1.0);
    r.kato_margin = k.max_margin;
    r.kato_slack_unit = k.slack;
    const auto gp = gradient_pinch_check(s, f);
    r.gradient_pinch_ratio = gp.vacuous ? kNaN : gp.max_ratio;
    const auto ms = michael_simon_check(s, f, TestFunction::abs_traceless);
    r.michael_simon = ms.vacuous ? kNaN : ms.ratio;
  } else {
    r.kato_margin = kNaN;
    r.kato_slack_unit = kNaN;
    r.gradient_pinch_ratio = kNaN;
    r.michael_simon = kNaN;
  }
  if (s.is_axi() && f.has_order(2)) {
    const auto h = hamilton_interpolation_check(s, f);
    r.hamilton = h.vacuous ? kNaN : h.ratio;
  } else {
    r.hamilton = kNaN;
  }
  return r;
}

const std::string& series_csv_header() {
  static const std::string h =
      "step,t,t_tilde,psi,area,int_Ao2,int_grad1A2,int_grad2A2,int_grad3A2,sup_A,sup_H,min_H,sup_gradH,h_tilde,"
      "diameter,topping_ratio,pinch_ratio,dt,kato_margin,gradient_pinch_ratio";
  return h;
}

std::string series_csv_row(const DiagnosticsRecord& r) {
  std::string out = std::to_string(r.step);
  const double vals[] = {r.t,       r.t_tilde,        r.psi,          r.area,           r.int_Ao2,
                         r.int_gradmA2[0], r.int_gradmA2[1], r.int_gradmA2[2], r.sup_A,   r.sup_H,
                         r.min_H,   r.sup_gradH,      r.h_tilde,      r.diameter,       r.topping_ratio,
                         r.pinch_ratio, r.dt,          r.kato_margin,  r.gradient_pinch_ratio};
  for (double v : vals) {
    out += ',';
    fmt(out, v);
  }
  return out;
}

void write_series_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& series) {
  os << series_csv_header() << '\n';
  for (const auto& r : series) os << series_csv_row(r) << '\n';
}

TestFunction test_function_from_string(const std::string& s) {
  if (s == "one" || s == "constant_one") return TestFunction::constant_one;
  if (s == "abs_Ao" || s == "abs_traceless") return TestFunction::abs_traceless;
  if (s == "H2" || s == "mean_curvature_sq") return TestFunction::mean_curvature_sq;
  fail(ErrorCode::invalid_argument, "unknown test function '" + s + "' (valid: one, abs_Ao, H2)");
}

const char* to_string(TestFunction v) {
  switch (v) {
    case TestFunction::constant_one: return "one";
    case TestFunction::abs_traceless: return "abs_Ao";
    case TestFunction::mean_curvature_sq: return "H2";
  }
  return "?";
}

RatioResult michael_simon_check(const Hypersurface& surface, const CurvatureField& f, TestFunction choice) {
  const auto& w = surface.weights();
  const int n = surface.dimension();
  const std::size_t N = f.size();
  std::vector<double> v(N), gv(N, 0.0);
  if (choice != TestFunction::constant_one)
    require(f.has_order(1), ErrorCode::precondition, "test function needs first-order derivative data");
  for (std::size_t i = 0; i < N; ++i) {
    const double H = f.mean_curvature[i];
    switch (choice) {
      case TestFunction::constant_one: v[i] = 1.0; break;
      case TestFunction::abs_traceless:
        v[i] = std::sqrt(std::max(0.0, f.norm_Ao_sq[i]));
        gv[i] = f.grad_abs_Ao[i];
        break;
      case TestFunction::mean_curvature_sq:
        v[i] = H * H;
        gv[i] = 2.0 * std::abs(H) * f.grad_H[i];
        break;
    }
  }
  RatioResult out;
  if (choice == TestFunction::abs_traceless && umbilic(f)) {
    out.vacuous = true;
    return out;
  }
  double rhs = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double H = f.mean_curvature[i];
    rhs += w[i] * (gv[i] * gv[i] + H * H * v[i] * v[i]);
  }
  double lhs;
  if (n == 2) {
    lhs = wsum_sq(w, v);
  } else {
    const double p = 2.0 * n / (n - 2);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) acc += w[i] * std::pow(v[i], p);
    lhs = std::pow(acc, double(n - 2) / n);
  }
  out.lhs = lhs;
  out.rhs = rhs;
  if (!(rhs > 0.0)) {
    out.vacuous = true;
    return out;
  }
  out.ratio = lhs / rhs;
  return out;
}

RatioResult hamilton_interpolation_check(const Hypersurface& surface, const CurvatureField& f) {
  require(f.has_order(2), ErrorCode::precondition, "insufficient derivative order (needs m_max >= 2)");
  const auto& w = surface.weights();
  const int n = surface.dimension();
  RatioResult out;
  if (umbilic(f)) {
    out.vacuous = true;
    return out;
  }
  const double g1 = wsum_sq(w, f.grad_Ao[0]);
  const double g2 = wsum_sq(w, f.grad_Ao[1]);
  const double a0 = wsum(w, f.norm_Ao_sq);
  const double coeff = n;  // 2r - 2 + n at r = 1
  out.lhs = g1;
  out.rhs = coeff * std::sqrt(g2) * std::sqrt(a0);
  if (!(out.rhs > 0.0)) {
    out.vacuous = true;
    return out;
  }
  out.ratio = out.lhs / out.rhs;
  return out;
}

double topping_check(const Hypersurface& surface, const CurvatureField& f) {
  const auto& w = surface.weights();
  const int n = surface.dimension();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * std::pow(std::abs(f.mean_curvature[i]), n - 1);
  require(acc > 0.0, ErrorCode::numerical, "integral of |H|^(n-1) vanishes");
  return intrinsic_diameter(surface) / acc;
}

AreaDerivativeResult area_derivative_check(const DiagnosticsRecord& prev, const DiagnosticsRecord& next,
                                           double int_H2_prev, double tolerance, double dt_resolved) {
  const double dt = next.t - prev.t;
  require(dt > 0.0, ErrorCode::invalid_argument, "area_derivative_check needs dt > 0");
  require(int_H2_prev > 0.0, ErrorCode::invalid_argument, "int H^2 must be positive");
  AreaDerivativeResult out;
  out.rel_error = std::abs((next.area - prev.area) / dt + int_H2_prev) / int_H2_prev;
  if (out.rel_error > tolerance) {
    out.timestep_limited = dt > dt_resolved;
    out.violation = !out.timestep_limited;
  }
  return out;
}

double series_value(const DiagnosticsRecord& r, const std::string& key) {
  if (key == "area") return r.area;
  if (key == "int_Ao2") return r.int_Ao2;
  if (key == "int_grad1A2") return r.int_gradmA2[0];
  if (key == "int_grad2A2") return r.int_gradmA2[1];
  if (key == "int_grad3A2") return r.int_gradmA2[2];
  fail(ErrorCode::invalid_argument,
       "unknown monitored key '" + key + "' (valid: area, int_Ao2, int_grad1A2, int_grad2A2, int_grad3A2)");
}

std::optional<std::size_t> monotonicity_monitor(const std::vector<DiagnosticsRecord>& series, const std::string& key,
                                                const SlackPolicy& slack) {
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double a = series_value(series[i - 1], key), b = series_value(series[i], key);
    if (std::isnan(a) || std::isnan(b)) continue;
    double allowed = slack.rel_per_step * std::abs(a) + slack.abs_floor;
    if (slack.include_remesh_drift && series[i].remeshed) {
      if (key == "area") allowed += std::abs(series[i].remesh_area_drift) * std::abs(a);
      else if (key == "int_Ao2") allowed += std::abs(series[i].remesh_int_Ao2_drift);
      else allowed += 5e-3 * std::abs(a);
    }
    if (b > a + allowed) return i;
  }
  return std::nullopt;
}

EvolutionResidual evolution_residual_check(const FlowState& prev, const FlowState& next) {
  require(prev.surface.is_axi() && next.surface.is_axi(), ErrorCode::unsupported,
          "backend without scalar Laplacian support");
  require(prev.surface.node_count() == next.surface.node_count(), ErrorCode::precondition,
          "states must share node identity (no remesh in between)");
  const bool normalized = prev.mode == FlowMode::normalized;
  const double dt = normalized ? next.t_tilde - prev.t_tilde : next.t - prev.t;
  require(dt > 0.0, ErrorCode::invalid_argument, "states must be separated by dt > 0");
  const auto& p0 = prev.surface.axi();
  const auto& p1 = next.surface.axi();
  const int n = p0.n;
  const int N = int(p0.nodes.size());
  const auto f0 = curvature_field(prev.surface, 1);
  const auto f1 = curvature_field(next.surface, 0);
  const double ht = normalized ? compute_h_tilde(prev.surface, f0) : 0.0;

  const auto lapH = profile_scalar_laplacian(p0, f0.mean_curvature);
  const auto lapAo = profile_scalar_laplacian(p0, f0.norm_Ao_sq);
  const auto s = profile_arclength(p0);
  auto dds = [&](const std::vector<double>& v, int i) {
    if (i == 0 || i == N - 1) return 0.0;
    const double hm = s[i] - s[i - 1], hp = s[i + 1] - s[i];
    return (-hp / (hm * (hm + hp))) * v[i - 1] + ((hp - hm) / (hm * hp)) * v[i] + (hm / (hp * (hm + hp))) * v[i + 1];
  };

  double amax2 = max_of(f0.norm_A_sq);
  EvolutionResidual out;
  for (int i = 0; i < N; ++i) {
    const double H = f0.mean_curvature[i], A2 = f0.norm_A_sq[i], Ao2 = f0.norm_Ao_sq[i];
    const double gAo = f0.grad_Ao[0][i];
    // tangential part of the node displacement advects the fields
    const Vec3& nu = f0.normal[i];
    const double tx = nu.y(), tr = -nu.x();
    const double tau = (p1.nodes[i].x - p0.nodes[i].x) * tx + (p1.nodes[i].r - p0.nodes[i].r) * tr;
    double rH = lapH[i] + A2 * H;
    double rA = lapAo[i] - 2.0 * gAo * gAo + 2.0 * A2 * Ao2;
    if (normalized) {
      rH -= ht / n * H;
      rA -= 2.0 / n * ht * Ao2;
    }
    const double predH = dt * rH + dds(f0.mean_curvature, i) * tau;
    const double predA = dt * rA + dds(f0.norm_Ao_sq, i) * tau;
    out.residual_H = std::max(out.residual_H, std::abs(f1.mean_curvature[i] - H - predH));
    out.residual_Ao2 = std::max(out.residual_Ao2, std::abs(f1.norm_Ao_sq[i] - Ao2 - predA));
  }
  out.residual_H /= dt * std::pow(amax2, 1.5);
  out.residual_Ao2 /= dt * amax2 * amax2;
  return out;
}

}  // namespace mcflab
