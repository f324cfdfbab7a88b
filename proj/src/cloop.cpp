#include "ahmpc/cloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ahmpc {

int ClosedLoopTrace::N_star() const {
  int n_star = 0;
  for (const TraceStep& s : steps) n_star = std::max(n_star, s.N);
  return n_star;
}

ClosedLoopTrace run_closed_loop(AdaptiveController& controller,
                                SolveBackend& backend, const Vector& x0,
                                int steps, double t0, bool abort_on_cap) {
  if (steps < 1) {
    throw std::invalid_argument("run_closed_loop: steps must be >= 1");
  }
  ClosedLoopTrace trace;
  trace.config = controller.config();
  trace.steps.reserve(steps);
  Vector x = x0;
  const double T = backend.sampling_period();
  for (int n = 0; n < steps; ++n) {
    const double t = t0 + T * n;
    const auto tick = std::chrono::steady_clock::now();
    const StepOutcome out = controller.step(x, t);
    const auto tock = std::chrono::steady_clock::now();

    TraceStep row;
    row.n = n;
    row.t = t;
    row.x = x;
    row.u = out.u;
    row.N = out.N;
    row.alpha = out.alpha;
    row.skip = out.skip;
    row.value = out.value;
    row.stage = out.stage;
    row.inner_iterations = out.inner_iterations;
    row.ocp_solves = out.ocp_solves;
    row.wall_ms =
        std::chrono::duration<double, std::milli>(tock - tick).count();
    row.v_next = out.v_next;
    trace.steps.push_back(std::move(row));

    if (out.status == AdaptStatus::CapHit) {
      trace.cap_hit = true;
      if (abort_on_cap) break;
    }
    x = backend.advance(x, out.u);
  }
  return trace;
}

SuboptimalityReport report_suboptimality(const ClosedLoopTrace& trace,
                                         SolveBackend& backend) {
  SuboptimalityReport report;
  const int n_star = trace.N_star();
  report.n_star = n_star;
  const double eps = trace.config.epsilon;
  const double alpha_bar = trace.config.alpha_bar;

  double ratio_min = std::numeric_limits<double>::infinity();
  bool first = true;
  for (std::size_t j = 0; j < trace.steps.size(); ++j) {
    const TraceStep& step = trace.steps[j];
    if (step.skip || step.stage <= eps) continue;

    ReportRow row;
    row.n = step.n;
    if (step.N == n_star) {
      // Comparing the controller against itself: both inequalities collapse
      // to identities.
      row.C_l = 1.0;
      row.C_alpha = 1.0;
    } else {
      const OpenLoopSolution star = backend.solve(step.x, step.t, n_star);
      const Vector& u_star = star.controls[0];
      const double stage_star = backend.stage_cost(step.x, u_star, step.t);

      const Vector succ_run = (j + 1 < trace.steps.size())
                                  ? trace.steps[j + 1].x
                                  : backend.advance(step.x, step.u);
      const Vector succ_star = backend.advance(step.x, u_star);
      const OpenLoopSolution v_run =
          backend.solve(succ_run, step.t + backend.sampling_period(), n_star);
      const OpenLoopSolution v_star =
          backend.solve(succ_star, step.t + backend.sampling_period(), n_star);
      if (!star.status.converged || !v_run.status.converged ||
          !v_star.status.converged || stage_star <= 0.0) {
        row.excluded = true;
        report.rows.push_back(row);
        continue;
      }

      const double decrease_run = star.value - v_run.value;
      const double decrease_star = star.value - v_star.value;
      row.C_l = (step.stage * decrease_star) / (stage_star * decrease_run);

      const AlphaEstimate alpha_star =
          alpha_aposteriori(star.value, v_star.value, stage_star, eps);
      if (alpha_star.practical_skip || step.alpha == 0.0) {
        row.excluded = true;
        report.rows.push_back(row);
        continue;
      }
      row.C_alpha = alpha_star.alpha / step.alpha;
    }

    report.rows.push_back(row);
    if (first) {
      report.cl_min = report.cl_max = row.C_l;
      report.ca_min = report.ca_max = row.C_alpha;
      first = false;
    } else {
      report.cl_min = std::min(report.cl_min, row.C_l);
      report.cl_max = std::max(report.cl_max, row.C_l);
      report.ca_min = std::min(report.ca_min, row.C_alpha);
      report.ca_max = std::max(report.ca_max, row.C_alpha);
    }
    ratio_min = std::min(ratio_min, row.C_alpha / row.C_l);
  }
  report.alpha_C =
      std::isfinite(ratio_min) ? alpha_bar * ratio_min : alpha_bar;
  return report;
}

TraceSummary summarize(const ClosedLoopTrace& trace) {
  if (trace.steps.empty()) {
    throw std::invalid_argument("summarize: empty trace");
  }
  TraceSummary s;
  s.time_min = s.time_max = trace.steps.front().wall_ms;
  s.horizon_min = s.horizon_max = trace.steps.front().N;
  double time_sum = 0.0, horizon_sum = 0.0;
  for (const TraceStep& step : trace.steps) {
    s.time_min = std::min(s.time_min, step.wall_ms);
    s.time_max = std::max(s.time_max, step.wall_ms);
    s.horizon_min = std::min(s.horizon_min, static_cast<double>(step.N));
    s.horizon_max = std::max(s.horizon_max, static_cast<double>(step.N));
    time_sum += step.wall_ms;
    horizon_sum += step.N;
  }
  const double count = static_cast<double>(trace.steps.size());
  s.time_mean = time_sum / count;
  s.horizon_mean = horizon_sum / count;
  return s;
}

}  // namespace ahmpc
