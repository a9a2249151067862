#pragma once

#include <cstdint>
#include <string>

#include "mcflab/curvature.hpp"
#include "mcflab/geometry.hpp"

namespace mcflab {

enum class FlowMode { unnormalized, normalized };
enum class Method { explicit_euler, semi_implicit };

const char* to_string(FlowMode m);
const char* to_string(Method m);
FlowMode flow_mode_from_string(const std::string& s);
Method method_from_string(const std::string& s);

struct RemeshPolicy {
  bool enabled = true;
  int check_every = 25;         // steps between quality checks
  double density_gain = 1.0;    // axi: density ~ 1 + gain * |A| * h0
  double trigger_ratio = 1.3;   // axi: regrid when spacing/target leaves [1/r, r]
  double max_adjacent_ratio = 1.5;
  double curvature_gain = 0.0;  // mesh: target = h / (1 + gain * h * |A|)
};

struct FlowConfig {
  FlowMode mode = FlowMode::unnormalized;
  Method method = Method::explicit_euler;
  bool method_explicitly_set = false;  // otherwise the backend default applies
  double cfl = 0.1;
  /// Explicit steps are additionally capped at diffusion_number * h_min^2
  /// (parabolic stability); 0 disables the cap.
  double diffusion_number = 0.2;
  double dt_min = 1e-14;
  double dt_max = 1e-2;
  /// Absolute blow-up threshold for max|A|; 0 means 1000 x initial max|A|.
  double max_abs_A_stop = 0.0;
  double area_stop_fraction = 0.01;
  /// Normalized mode: steady once max normal speed < steady_tol * max|H|
  /// for steady_window consecutive steps.
  double steady_tol = 1e-5;
  int steady_window = 50;
  long max_steps = 2000000;
  RemeshPolicy remesh;
  int m_max = 1;
  double epsilon_knob = 0.1;
  double lambda0_knob = 100.0;
  double c0_knob = 100.0;
  int snapshot_every = 0;  // 0: initial and final only
  std::uint64_t seed = 0;
};

/// Checks the FlowConfig invariants; throws Error naming the offending key.
void validate_config(const FlowConfig& config);

Method effective_method(const FlowConfig& config, Backend backend);

struct FlowState {
  Hypersurface surface;
  double t = 0.0;
  double t_tilde = 0.0;
  double psi = 1.0;
  long step = 0;
  double dt_last = 0.0;
  FlowMode mode = FlowMode::unnormalized;
  double initial_area = 0.0;  // normalization target
};

FlowState make_state(Hypersurface surface, FlowMode mode);

/// One step of dF/dt = -H nu. Throws Error(numerical) when the result is
/// invalid; the caller halves dt.
FlowState step_mcf(const FlowState& state, double dt, Method method);
/// Same, reusing a field already computed on state.surface.
FlowState step_mcf(const FlowState& state, const CurvatureField& field, double dt, Method method);

/// Weighted mean of H^2 over the surface.
double compute_h_tilde(const Hypersurface& surface, const CurvatureField& field);
double compute_h_tilde(const Hypersurface& surface);

struct NormalizedStepInfo {
  double h_tilde = 0.0;
  double projection_scale = 1.0;
  double step_scale = 1.0;       // total factor applied to psi this step
  double max_normal_speed = 0.0; // of the unprojected velocity
};

/// One step of dF/dt~ = -H nu + (h~/n) F followed by area projection.
FlowState step_normalized(const FlowState& state, double dt_tilde, Method method, NormalizedStepInfo* info = nullptr);
FlowState step_normalized(const FlowState& state, const CurvatureField& field, double dt_tilde, Method method,
                          NormalizedStepInfo* info = nullptr);

/// Scales positions by (target / area)^(1/n); returns the factor.
double renormalize_area(Hypersurface& surface, double target_area);

double adaptive_dt(const FlowState& state, const CurvatureField& field, const FlowConfig& config);

struct RemeshReport {
  bool changed = false;
  double area_drift = 0.0;     // relative
  double int_Ao2_drift = 0.0;  // absolute change of the integral
  int splits = 0;
  int collapses = 0;
  int flips = 0;
};

/// Axi: resample to density ~ (1 + gain |A| h0) with adjacent ratio capped.
/// Mesh: split / collapse / flip towards the target edge length.
Hypersurface remesh(const Hypersurface& surface, const RemeshPolicy& policy, RemeshReport* report = nullptr);

/// True when the current node distribution is far enough from the policy
/// target that a remesh is worthwhile.
bool needs_remesh(const Hypersurface& surface, const CurvatureField& field, const RemeshPolicy& policy);

}  // namespace mcflab
