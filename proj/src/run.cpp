#include "mcflab/run.hpp"

#include <algorithm>

namespace mcflab {

const char* to_string(StopCause c) {
  switch (c) {
    case StopCause::extinction: return "extinction";
    case StopCause::blow_up: return "blow_up";
    case StopCause::steady: return "steady";
    case StopCause::max_steps: return "max_steps";
  }
  return "?";
}

RunResult run_flow(const Hypersurface& initial, const FlowConfig& config, const ProgressFn& progress) {
  validate_config(config);
  const auto report = validate(initial);
  require(report.ok(), ErrorCode::precondition, "invalid initial surface: " + report.summary());
  const Method method = effective_method(config, initial.backend());
  const bool normalized = config.mode == FlowMode::normalized;
  // mesh curvature stops at first derivatives
  const int m_max = initial.is_mesh() ? std::min(config.m_max, 1) : config.m_max;

  FlowState state = make_state(initial, config.mode);
  if (normalized) recenter(state.surface);

  RunResult out;
  double cap = config.max_abs_A_stop;
  int steady_count = 0;
  RemeshReport pending;
  bool remeshed = false;

  auto snapshot = [&] { out.snapshots.push_back({state.step, state.t, state.surface}); };

  for (;;) {
    const auto f = curvature_field(state.surface, m_max);
    DiagnosticsRecord rec = record(state, f);
    if (remeshed) {
      rec.remeshed = true;
      rec.remesh_area_drift = pending.area_drift;
      rec.remesh_int_Ao2_drift = pending.int_Ao2_drift;
      remeshed = false;
    }
    if (out.series.empty() && cap <= 0.0) cap = 1e3 * rec.sup_A;
    out.series.push_back(rec);
    if (state.step == 0 || (config.snapshot_every > 0 && state.step % config.snapshot_every == 0)) snapshot();

    if (progress && !progress(rec)) {
      out.cause = StopCause::max_steps;
      out.message = "stopped by caller";
      break;
    }
    if (rec.sup_A > cap) {
      out.cause = StopCause::blow_up;
      out.message = "max|A| above stop threshold";
      break;
    }
    if (!normalized && rec.area < config.area_stop_fraction * state.initial_area) {
      out.cause = StopCause::extinction;
      break;
    }
    if (normalized && steady_count >= config.steady_window) {
      out.cause = StopCause::steady;
      break;
    }
    if (state.step >= config.max_steps) {
      out.cause = StopCause::max_steps;
      break;
    }

    double dt = adaptive_dt(state, f, config);
    NormalizedStepInfo info;
    FlowState next;
    bool accepted = false;
    std::string why;
    for (;;) {
      try {
        next = normalized ? step_normalized(state, f, dt, method, &info) : step_mcf(state, f, dt, method);
        accepted = true;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::numerical) throw;
        why = e.what();
        if (dt <= config.dt_min) break;
        dt = std::max(0.5 * dt, config.dt_min);
      }
    }
    if (!accepted) {
      out.cause = StopCause::blow_up;
      out.message = "step rejected at dt_min: " + why;
      break;
    }
    state = std::move(next);
    if (normalized) steady_count = info.max_normal_speed < config.steady_tol * rec.sup_H ? steady_count + 1 : 0;

    if (config.remesh.enabled && state.step % config.remesh.check_every == 0 &&
        needs_remesh(state.surface, curvature_field(state.surface, 0), config.remesh)) {
      try {
        RemeshReport rep;
        Hypersurface s = remesh(state.surface, config.remesh, &rep);
        if (rep.changed) {
          state.surface = std::move(s);
          if (normalized) state.psi *= renormalize_area(state.surface, state.initial_area);
          out.remeshes.push_back({state.step, rep});
          pending = rep;
          remeshed = true;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::precondition) throw;
        out.message = std::string("remesh skipped: ") + e.what();
      }
    }
  }
  if (out.snapshots.empty() || out.snapshots.back().step != state.step) snapshot();
  out.blow_up_threshold = cap;
  out.final_state = std::move(state);
  return out;
}

}  // namespace mcflab
