#pragma once

#include <iosfwd>

#include <array>
#include <optional>
#include <vector>

#include "mcflab/geometry.hpp"

namespace mcflab {

/// Per-node curvature data. Sign convention: outward normal, H is the sum
/// of the principal curvatures, so H = n/R on a round sphere of radius R.
struct CurvatureField {
  int n = 2;
  int m_max = 0;
  std::vector<Vec3> normal;  // axi: (nu_x, nu_r, 0) in the meridian plane
  std::vector<double> mean_curvature;
  std::vector<double> principal;  // n values per node, row-major
  std::vector<double> norm_A_sq;
  std::vector<double> norm_Ao_sq;
  /// grad_A[m-1][i] = |nabla^m A| at node i, for m = 1..m_max (empty above).
  std::array<std::vector<double>, 3> grad_A;
  std::array<std::vector<double>, 3> grad_Ao;
  std::vector<double> grad_H;       // |nabla H|, empty when m_max = 0
  std::vector<double> grad_abs_Ao;  // |nabla |Ao||, empty when m_max = 0
  /// Nodes where derivative data is extrapolated (axi poles).
  std::vector<bool> derivative_extrapolated;
  double mean_spacing = 0.0;

  std::size_t size() const { return mean_curvature.size(); }
  double kappa(std::size_t node, int k) const { return principal[node * std::size_t(n) + std::size_t(k)]; }
  bool has_order(int m) const { return m >= 1 && m <= m_max; }
};

CurvatureField curvature_field(const Hypersurface& surface, int m_max);

/// Max over nodes of | |Ao|^2 - (|A|^2 - H^2/n) |.
double tensor_norm_identity_check(const CurvatureField& field);

struct NodeMargin {
  std::size_t node;
  double margin;
};

struct KatoResult {
  std::vector<NodeMargin> exceeding;  // nodes with margin > slack
  double max_margin = 0.0;            // max over nodes of |grad|Ao|| - |grad Ao|
  double slack = 0.0;
};

/// Kato's inequality |grad |Ao|| <= |grad Ao| with slack
/// coeff * h^2 * max|grad Ao|.
KatoResult kato_check(const Hypersurface& surface, const CurvatureField& field, double slack_coeff = 10.0);

struct GradientPinchResult {
  bool vacuous = true;
  double max_ratio = 0.0;  // max |grad H|^2 / |grad Ao|^2 over qualifying nodes
  double bound = 0.0;      // n(n+2) / (2(n-1))
  std::size_t qualifying_nodes = 0;
};

double gradient_pinch_bound(int n);

/// Nodes with |grad Ao| below rel_threshold * max|grad Ao| or below the local
/// truncation floor h^2 |A|^4 are excluded.
GradientPinchResult gradient_pinch_check(const Hypersurface& surface, const CurvatureField& field,
                                         double rel_threshold = 1e-8);

/// One row per node: node,H,k1..kn,normA2,normAo2,gradA,grad2A,grad3A
/// (orders above m_max left empty).
void write_curvature_csv(std::ostream& os, const CurvatureField& field);

/// Weighted 1D Laplace-Beltrami of a node scalar on the profile backend.
std::vector<double> profile_scalar_laplacian(const AxiProfileSurface& p, const std::vector<double>& f);

}  // namespace mcflab
