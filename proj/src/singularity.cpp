#include "mcflab/singularity.hpp"

#include <algorithm>
#include <cmath>

namespace mcflab {

const char* to_string(SingularMethod m) {
  return m == SingularMethod::area_extrapolation ? "area-extrapolation" : "rate-fit";
}

const char* to_string(BlowupVerdict v) {
  switch (v) {
    case BlowupVerdict::typeI: return "typeI";
    case BlowupVerdict::typeII: return "typeII";
    case BlowupVerdict::undetermined: return "undetermined";
  }
  return "?";
}

namespace {

struct Line {
  double a = 0.0, b = 0.0;  // y = a + b (x - x0)
  double x0 = 0.0;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
  Line L;
  L.x0 = x[hi - 1];
  const double m = double(hi - lo);
  double sx = 0, sy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sx += x[i] - L.x0;
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double dx = x[i] - L.x0 - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  L.b = sxx > 0 ? sxy / sxx : 0.0;
  L.a = my - L.b * mx;
  return L;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// First index of the tail with T - t <= 10 (T - t_last).
std::size_t decade_start(const std::vector<DiagnosticsRecord>& s, double T) {
  const double span = 10.0 * (T - s.back().t);
  std::size_t lo = s.size() - 1;
  while (lo > 0 && T - s[lo - 1].t <= span) --lo;
  return lo;
}

}  // namespace

SingularTimeEstimate estimate_singular_time(const std::vector<DiagnosticsRecord>& series, StopCause cause) {
  require(cause == StopCause::extinction || cause == StopCause::blow_up, ErrorCode::precondition,
          "singular time needs a run ending in extinction or blow_up");
  require(series.size() >= 20, ErrorCode::precondition, "insufficient terminal data");
  SingularTimeEstimate out;
  out.method = cause == StopCause::extinction ? SingularMethod::area_extrapolation : SingularMethod::rate_fit;
  const std::size_t N = series.size();
  std::vector<double> t(N), y(N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto& r = series[i];
    t[i] = r.t;
    y[i] = out.method == SingularMethod::area_extrapolation ? std::pow(r.area / unit_sphere_area(r.n), 2.0 / r.n)
                                                             : 1.0 / (r.sup_A * r.sup_A);
  }
  // initial window from the decade of y itself
  std::size_t lo = N - 1;
  while (lo > 0 && y[lo - 1] <= 10.0 * y[N - 1]) --lo;
  double T = 0.0;
  for (int it = 0; it < 8; ++it) {
    require(N - lo >= 20, ErrorCode::precondition, "insufficient terminal data");
    const Line L = fit_line(t, y, lo, N);
    if (!(L.b < 0.0)) return out;
    T = L.x0 - L.a / L.b;
    if (!(T > t[N - 1])) return out;
    const std::size_t next = decade_start(series, T);
    if (next == lo) break;
    lo = next;
  }
  out.window_begin = lo;
  out.window_end = N;
  out.T_est = T;
  std::size_t rises = 0;
  for (std::size_t i = lo + 1; i < N; ++i)
    if (y[i] > y[i - 1] * (1.0 + 1e-3)) ++rises;
  out.determined = rises * 10 <= (N - lo);
  return out;
}

BlowupFit classify_blowup(const std::vector<DiagnosticsRecord>& series, const SingularTimeEstimate& T,
                          const BlowupThresholds& th) {
  BlowupFit out;
  out.T_est = T.T_est;
  out.method = T.method;
  if (!T.determined || series.empty()) return out;
  const std::size_t lo = decade_start(series, T.T_est);
  std::vector<double> stat;
  for (std::size_t i = lo; i < series.size(); ++i) {
    const auto& r = series[i];
    stat.push_back(r.sup_A * r.sup_A * (T.T_est - r.t));
    out.H_A_ratio_trend.push_back(r.sup_H / r.sup_A);
  }
  out.window_first_step = series[lo].step;
  out.window_last_step = series.back().step;
  out.typeI_stat = *std::max_element(stat.begin(), stat.end());
  if (stat.size() < 3) return out;
  const double med = median(stat);
  const double mn = *std::min_element(stat.begin(), stat.end());
  if (out.typeI_stat <= th.typeI_factor * med && mn >= med / th.typeI_factor) {
    out.verdict = BlowupVerdict::typeI;
    return out;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < stat.size(); ++i)
    if (stat[i] < 0.99 * stat[i - 1]) monotone = false;
  if (monotone && stat.back() > th.typeII_growth * stat.front()) out.verdict = BlowupVerdict::typeII;
  return out;
}

HBlowupReport h_blowup_comparison(const std::vector<DiagnosticsRecord>& series, const HBlowupThresholds& th) {
  HBlowupReport out;
  out.verdict = "inconclusive";
  if (series.empty()) return out;
  const auto& last = series.back();
  out.final_ratio = last.sup_H / last.sup_A;
  std::vector<double> x, y;
  for (const auto& r : series)
    if (r.sup_A >= 0.1 * last.sup_A && r.sup_H > 0.0) {
      x.push_back(std::log(r.sup_A));
      y.push_back(std::log(r.sup_H));
    }
  out.samples = x.size();
  if (x.size() < 2) return out;
  const Line L = fit_line(x, y, 0, x.size());
  out.slope = L.b;
  if (out.slope > th.blows_up_slope) out.verdict = "H_blows_up";
  else if (out.slope < th.bounded_slope) out.verdict = "H_bounded";
  return out;
}

bool detect_mean_convex(const CurvatureField& f) {
  return !f.mean_curvature.empty() && *std::min_element(f.mean_curvature.begin(), f.mean_curvature.end()) > 0.0;
}

bool detect_convex(const CurvatureField& f) {
  return !f.principal.empty() && *std::min_element(f.principal.begin(), f.principal.end()) > 0.0;
}

PinchingResult pinching_check(const std::vector<DiagnosticsRecord>& series) {
  PinchingResult out;
  for (const auto& r : series) {
    if (out.vacuous) {
      if (!r.mean_convex) continue;
      out.vacuous = false;
      out.onset_step = r.step;
      out.onset_value = r.pinch_ratio;
    }
    out.running_max = std::max(out.running_max, r.pinch_ratio);
  }
  out.bounded = !out.vacuous && out.running_max <= 1.1 * std::max(out.onset_value, 1.0);
  return out;
}

Roundness roundness_of_attractor(const Hypersurface& surface) {
  const auto f = curvature_field(surface, 0);
  Roundness out;
  for (double v : f.norm_Ao_sq) out.max_abs_Ao = std::max(out.max_abs_Ao, std::sqrt(std::max(0.0, v)));
  const Vec3 c = area_centroid(surface);
  double lo = 1e300, hi = 0.0, sum = 0.0;
  const std::size_t N = surface.node_count();
  for (std::size_t i = 0; i < N; ++i) {
    const double d = (surface.position(i) - c).norm();
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += d;
  }
  out.radius_spread = (hi - lo) / (sum / double(N));
  return out;
}

}  // namespace mcflab
