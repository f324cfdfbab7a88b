#pragma once

#include "ahmpc/adapt.hpp"

namespace ahmpc {

struct TraceStep {
  int n = 0;
  double t = 0.0;
  Vector x;
  Vector u;
  int N = 0;
  double alpha = 0.0;
  bool skip = false;
  double value = 0.0;
  double stage = 0.0;
  int inner_iterations = 0;
  int ocp_solves = 0;
  double wall_ms = 0.0;
  /// Successor value the a posteriori certificate used, when one was solved.
  std::optional<double> v_next;
};

struct ClosedLoopTrace {
  std::vector<TraceStep> steps;
  AdaptationConfig config;
  bool cap_hit = false;

  int N_star() const;
};

/// Full receding-horizon loop: measure, adapt, apply the first control,
/// advance the plant. With abort_on_cap the run stops at (and records) the
/// first CapHit step.
ClosedLoopTrace run_closed_loop(AdaptiveController& controller,
                                SolveBackend& backend, const Vector& x0,
                                int steps, double t0 = 0.0,
                                bool abort_on_cap = true);

struct ReportRow {
  int n = 0;
  double C_l = 0.0;
  double C_alpha = 0.0;
  bool excluded = false;  ///< auxiliary solve failed to converge
};

struct SuboptimalityReport {
  std::vector<ReportRow> rows;
  double cl_min = 0.0, cl_max = 0.0;
  double ca_min = 0.0, ca_max = 0.0;
  double alpha_C = 0.0;
  int n_star = 0;
};

/// Closed-loop degree report: per step with stage cost above epsilon, the
/// tight constants comparing the varying-horizon controller against the
/// fixed N*-horizon one, and the resulting alpha_C.
SuboptimalityReport report_suboptimality(const ClosedLoopTrace& trace,
                                         SolveBackend& backend);

struct TraceSummary {
  double time_min = 0.0, time_max = 0.0, time_mean = 0.0;  // milliseconds
  double horizon_min = 0.0, horizon_max = 0.0, horizon_mean = 0.0;
};

TraceSummary summarize(const ClosedLoopTrace& trace);

}  // namespace ahmpc
