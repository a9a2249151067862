#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcflab/curvature.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/run.hpp"

namespace mcflab {

enum class SingularMethod { area_extrapolation, rate_fit };
const char* to_string(SingularMethod m);

struct SingularTimeEstimate {
  bool determined = false;  // false on a non-monotone tail
  double T_est = 0.0;
  SingularMethod method = SingularMethod::area_extrapolation;
  std::size_t window_begin = 0;  // record indices, [begin, end)
  std::size_t window_end = 0;
};

/// Extinction: root of a linear fit of R_eff^2 = (area / |S^n|)^(2/n).
/// Blow-up: root of a linear fit of 1 / sup_A^2. The fit window is the last
/// decade of (T_est - t), found by fixed-point iteration.
SingularTimeEstimate estimate_singular_time(const std::vector<DiagnosticsRecord>& series, StopCause cause);

enum class BlowupVerdict { typeI, typeII, undetermined };
const char* to_string(BlowupVerdict v);

struct BlowupFit {
  double T_est = 0.0;
  SingularMethod method = SingularMethod::rate_fit;
  double typeI_stat = 0.0;  // sup over the window of sup_A^2 (T_est - t)
  BlowupVerdict verdict = BlowupVerdict::undetermined;
  std::vector<double> H_A_ratio_trend;
  long window_first_step = 0;
  long window_last_step = 0;
};

struct BlowupThresholds {
  double typeI_factor = 3.0;
  double typeII_growth = 10.0;
};

BlowupFit classify_blowup(const std::vector<DiagnosticsRecord>& series, const SingularTimeEstimate& T,
                          const BlowupThresholds& thresholds = {});

struct HBlowupReport {
  double final_ratio = 0.0;  // sup_H / sup_A at the last record
  double slope = 0.0;        // of log sup_H against log sup_A
  std::size_t samples = 0;
  std::string verdict;       // H_blows_up | H_bounded | inconclusive
};

struct HBlowupThresholds {
  double blows_up_slope = 0.5;
  double bounded_slope = 0.1;
};

/// Fit over records with sup_A within a decade of the final value.
HBlowupReport h_blowup_comparison(const std::vector<DiagnosticsRecord>& series, const HBlowupThresholds& th = {});

bool detect_mean_convex(const CurvatureField& field);
bool detect_convex(const CurvatureField& field);

struct PinchingResult {
  bool vacuous = true;
  double running_max = 0.0;
  long onset_step = -1;
  double onset_value = 0.0;
  /// running_max <= 1.1 * max(onset_value, 1)
  bool bounded = false;
};

PinchingResult pinching_check(const std::vector<DiagnosticsRecord>& series);

struct Roundness {
  double max_abs_Ao = 0.0;
  double radius_spread = 0.0;  // (max - min) / mean distance to the area centroid
};

Roundness roundness_of_attractor(const Hypersurface& surface);

}  // namespace mcflab
