#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcflab/diagnostics.hpp"
#include "mcflab/flow.hpp"

namespace mcflab {

enum class StopCause { extinction, blow_up, steady, max_steps };
const char* to_string(StopCause c);

struct Snapshot {
  long step = 0;
  double t = 0.0;
  Hypersurface surface;
};

struct RemeshEvent {
  long step = 0;
  RemeshReport report;
};

struct RunResult {
  std::vector<DiagnosticsRecord> series;
  std::vector<Snapshot> snapshots;
  std::vector<RemeshEvent> remeshes;
  StopCause cause = StopCause::max_steps;
  FlowState final_state;
  double blow_up_threshold = 0.0;  // resolved max|A| stop value
  std::string message;
};

/// Called after every record; returning false stops the run (cause max_steps).
using ProgressFn = std::function<bool(const DiagnosticsRecord&)>;

RunResult run_flow(const Hypersurface& initial, const FlowConfig& config, const ProgressFn& progress = {});

}  // namespace mcflab
