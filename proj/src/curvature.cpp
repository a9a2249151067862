#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "curvature_internal.hpp"
#include "mcflab/curvature.hpp"

namespace mcflab {

void write_curvature_csv(std::ostream& os, const CurvatureField& f) {
  os << "node,H";
  for (int k = 1; k <= f.n; ++k) os << ",k" << k;
  os << ",normA2,normAo2,gradA,grad2A,grad3A\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  for (std::size_t i = 0; i < f.size(); ++i) {
    os << i;
    put(f.mean_curvature[i]);
    for (int k = 0; k < f.n; ++k) put(f.kappa(i, k));
    put(f.norm_A_sq[i]);
    put(f.norm_Ao_sq[i]);
    for (int m = 1; m <= 3; ++m) {
      if (f.has_order(m)) put(f.grad_A[m - 1][i]);
      else os << ',';
    }
    os << '\n';
  }
}


CurvatureField curvature_field(const Hypersurface& surface, int m_max) {
  require(m_max >= 0, ErrorCode::invalid_argument, "m_max must be non-negative");
  if (surface.is_mesh()) return detail::mesh_curvature(surface.mesh(), m_max);
  return detail::axi_curvature(surface.axi(), m_max);
}

double tensor_norm_identity_check(const CurvatureField& field) {
  double worst = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double H = field.mean_curvature[i];
    const double r = field.norm_Ao_sq[i] - (field.norm_A_sq[i] - H * H / field.n);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

KatoResult kato_check(const Hypersurface& surface, const CurvatureField& field, double slack_coeff) {
  (void)surface;
  require(field.has_order(1), ErrorCode::precondition, "kato_check needs first-order derivative data");
  KatoResult out;
  const auto& gAo = field.grad_Ao[0];
  double gmax = 0.0;
  for (double v : gAo) gmax = std::max(gmax, v);
  const double h = field.mean_spacing;
  out.slack = slack_coeff * h * h * gmax;
  out.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double margin = field.grad_abs_Ao[i] - gAo[i];
    out.max_margin = std::max(out.max_margin, margin);
    if (margin > out.slack) out.exceeding.push_back({i, margin});
  }
  return out;
}

double gradient_pinch_bound(int n) {
  require(n >= 2, ErrorCode::invalid_argument, "dimension must be at least 2");
  return double(n) * (n + 2) / (2.0 * (n - 1));
}

GradientPinchResult gradient_pinch_check(const Hypersurface& surface, const CurvatureField& field,
                                         double rel_threshold) {
  require(field.has_order(1), ErrorCode::precondition, "gradient_pinch_check needs first-order derivative data");
  GradientPinchResult out;
  out.bound = gradient_pinch_bound(field.n);
  const auto& gAo = field.grad_Ao[0];
  double gmax = 0.0;
  for (double v : gAo) gmax = std::max(gmax, v);
  // Round surfaces leave only rounding noise in grad Ao; treat it as zero.
  double amax = 0.0;
  for (double v : field.norm_A_sq) amax = std::max(amax, v);
  if (gmax <= 1e-7 * amax) return out;
  // Node spacing for the truncation floor h^2 |A|^4 of the gradient stencils;
  // below it the ratio compares discretisation error with itself.
  std::vector<double> h(field.size(), field.mean_spacing);
  if (surface.is_axi()) {
    const auto s = profile_arclength(surface.axi());
    const std::size_t N = s.size();
    for (std::size_t i = 0; i < N; ++i) h[i] = 0.5 * (s[std::min(i + 1, N - 1)] - s[i == 0 ? 0 : i - 1]);
  }
  const double thr = rel_threshold * gmax;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double a2 = field.norm_A_sq[i];
    const double floor = h[i] * h[i] * a2 * a2;
    if (field.derivative_extrapolated[i] || !(gAo[i] > thr) || !(gAo[i] > floor)) continue;
    const double ratio = field.grad_H[i] * field.grad_H[i] / (gAo[i] * gAo[i]);
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.qualifying_nodes;
  }
  out.vacuous = out.qualifying_nodes == 0;
  return out;
}

}  // namespace mcflab
