#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcflab/curvature.hpp"
#include "mcflab/flow.hpp"

namespace mcflab {

/// One row of the monitored time series. Quantities that were not computed
/// (absent derivative orders, checks without data) hold NaN.
struct DiagnosticsRecord {
  int n = 2;
  long step = 0;
  double t = 0.0;
  double t_tilde = 0.0;
  double psi = 1.0;
  double area = 0.0;
  double int_Ao2 = 0.0;
  std::array<double, 3> int_gradmA2{};  // m = 1..3
  double int_H2 = 0.0;
  double sup_A = 0.0;
  double sup_H = 0.0;
  double min_H = 0.0;
  double sup_gradH = 0.0;
  double h_tilde = 0.0;
  double diameter = 0.0;
  double topping_ratio = 0.0;
  double pinch_ratio = 0.0;
  double dt = 0.0;
  double kato_margin = 0.0;
  double kato_slack_unit = 0.0;  // h^2 max|grad Ao|; Kato slack is coeff times this
  double gradient_pinch_ratio = 0.0;
  double identity_min = 0.0;  // min over nodes of (|A|^2 - H^2/n) / max(1, max|A|^2)
  double michael_simon = 0.0;  // v = |Ao| variant
  double hamilton = 0.0;
  bool mean_convex = false;
  bool convex = false;
  // logged remesh drift on this step (0 when no remesh happened)
  bool remeshed = false;
  double remesh_area_drift = 0.0;
  double remesh_int_Ao2_drift = 0.0;
};

DiagnosticsRecord record(const FlowState& state, const CurvatureField& field);

/// Exact header of the series CSV.
const std::string& series_csv_header();
void write_series_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& series);
std::string series_csv_row(const DiagnosticsRecord& r);

enum class TestFunction { constant_one, abs_traceless, mean_curvature_sq };
TestFunction test_function_from_string(const std::string& s);
const char* to_string(TestFunction v);

struct RatioResult {
  bool vacuous = false;
  double ratio = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// n = 2: int v^2 / (int |grad v|^2 + int H^2 v^2); n > 2: the 2n/(n-2) form.
RatioResult michael_simon_check(const Hypersurface& surface, const CurvatureField& field, TestFunction v);

/// int |grad Ao|^2 / ((2r - 2 + n) (int |grad^2 Ao|^2)^(1/2) (int |Ao|^2)^(1/2)), r = 1.
RatioResult hamilton_interpolation_check(const Hypersurface& surface, const CurvatureField& field);

/// diameter / int |H|^(n-1).
double topping_check(const Hypersurface& surface, const CurvatureField& field);

struct AreaDerivativeResult {
  double rel_error = 0.0;
  bool timestep_limited = false;  // dt above the resolved range
  bool violation = false;
};

AreaDerivativeResult area_derivative_check(const DiagnosticsRecord& prev, const DiagnosticsRecord& next,
                                           double int_H2_prev, double tolerance = 0.05, double dt_resolved = 1e-3);

struct SlackPolicy {
  double rel_per_step = 0.0;
  double abs_floor = 0.0;
  bool include_remesh_drift = true;
};

/// Value of a monitored key on a record; key is one of area, int_Ao2,
/// int_grad1A2, int_grad2A2, int_grad3A2.
double series_value(const DiagnosticsRecord& r, const std::string& key);

std::optional<std::size_t> monotonicity_monitor(const std::vector<DiagnosticsRecord>& series, const std::string& key,
                                                const SlackPolicy& slack);

struct EvolutionResidual {
  double residual_H = 0.0;
  double residual_Ao2 = 0.0;
};

/// Residuals of the pointwise evolution equations for H and |Ao|^2 between
/// two consecutive axi states (node identity transport).
EvolutionResidual evolution_residual_check(const FlowState& prev, const FlowState& next);

}  // namespace mcflab
