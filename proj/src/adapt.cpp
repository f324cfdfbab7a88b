#include "ahmpc/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ahmpc {

namespace {

constexpr double kInfiniteGamma = 1e12;

double gamma_for_iteration(const LocalEstimate& est,
                           const AdaptationConfig& cfg, int N) {
  if (est.gamma) {
    return est.gamma->infinite ? kInfiniteGamma
                               : std::max(est.gamma->gamma, cfg.gamma_min);
  }
  const double a = std::min(est.alpha.alpha, 1.0);
  return std::max(gamma_from_alpha(a, N, cfg.N_hat), cfg.gamma_min);
}

std::vector<Vector> resized_warm(const OpenLoopSolution& sol, int new_length) {
  return shift_warm_start(sol, 0, new_length);
}

}  // namespace

LocalEstimate estimate_local(const OpenLoopSolution& sol, double t,
                             const AdaptationConfig& cfg,
                             SolveBackend& backend) {
  LocalEstimate est;
  const int N = sol.horizon();
  const double stage = sol.stage_costs[0];
  if (cfg.estimate_method == EstimateMethod::APosteriori) {
    if (stage <= cfg.epsilon) {
      est.alpha = alpha_aposteriori(sol.value, 0.0, stage, cfg.epsilon);
    } else {
      // The recursion of the open-loop solution makes states[1] exactly the
      // successor the plant will realize under u(0).
      const std::vector<Vector> warm = shift_warm_start(sol, 1, N);
      const OpenLoopSolution next = backend.solve(
          sol.states[1], t + backend.sampling_period(), N, &warm);
      est.v_next = next.value;
      est.alpha = alpha_aposteriori(sol.value, next.value, stage, cfg.epsilon);
    }
    est.alpha.N = N;
    est.alpha.N_hat = cfg.N_hat;
  } else {
    est.alpha.method = EstimateMethod::APriori;
    est.alpha.epsilon = cfg.epsilon;
    est.alpha.N = N;
    est.alpha.N_hat = cfg.N_hat;
    if (stage <= cfg.epsilon) {
      est.alpha.practical_skip = true;
      return est;
    }
    const GammaData g = minimal_gamma(sol, cfg.N_hat, backend, t, cfg.epsilon,
                                      cfg.gamma_min);
    est.gamma = g;
    est.alpha.gamma = g.gamma;
    est.alpha.alpha = g.infinite
                          ? -std::numeric_limits<double>::infinity()
                          : alpha_from_gamma(g.gamma, N, cfg.N_hat);
  }
  return est;
}

ShortenResult shorten_aposteriori(const OpenLoopSolution& sol, double t,
                                  const AdaptationConfig& cfg,
                                  SolveBackend& backend,
                                  std::optional<double> v_next_full) {
  ShortenResult res;
  const int N = sol.horizon();
  const int k_max = N - cfg.N_min - 1;
  const double T = backend.sampling_period();
  for (int k = 0; k <= k_max; ++k) {
    const double stage = sol.stage_costs[k];
    double quotient;
    bool skip = false;
    if (stage <= cfg.epsilon) {
      skip = true;  // inside the practical region: counted as satisfied
      quotient = cfg.alpha_bar;
    } else {
      double v_next;
      if (k == 0 && v_next_full) {
        v_next = *v_next_full;
      } else {
        const std::vector<Vector> warm = shift_warm_start(sol, k + 1, N - k);
        const OpenLoopSolution aux =
            backend.solve(sol.states[k + 1], t + T * (k + 1), N - k, &warm);
        if (!aux.status.converged) {
          break;  // conservative: stop at the previous k
        }
        v_next = aux.value;
      }
      quotient = (tail_value(sol, k) - v_next) / stage;
      if (quotient < cfg.alpha_bar) break;
    }
    res.k_bar = k;
    if (k >= 1) {
      res.tail.push_back({sol.controls[k], N - k, std::min(1.0, quotient),
                          skip, tail_value(sol, k), stage});
    }
  }
  return res;
}

ShortenResult shorten_apriori(const OpenLoopSolution& sol,
                              const GammaData& gamma_n,
                              const AdaptationConfig& cfg) {
  ShortenResult res;
  if (gamma_n.infinite) return res;
  const int N = sol.horizon();
  const int k_max = std::min(N - cfg.N_hat - 2, N - cfg.N_min - 1);
  for (int k = 0; k <= k_max; ++k) {
    const double gamma_bar = gamma_from_alpha(cfg.alpha_bar, N - k, cfg.N_hat);
    if (!(gamma_n.gamma < gamma_bar)) break;
    res.k_bar = k;
    if (k >= 1) {
      const double stage = sol.stage_costs[k];
      res.tail.push_back({sol.controls[k], N - k,
                          alpha_from_gamma(gamma_n.gamma, N - k, cfg.N_hat),
                          stage <= cfg.epsilon, tail_value(sol, k), stage});
    }
  }
  return res;
}

namespace {

AdaptationOutcome finish(const OpenLoopSolution& sol, const LocalEstimate& est,
                         const AdaptationConfig& cfg, int inner, long solves) {
  AdaptationOutcome out;
  out.N_selected = sol.horizon();
  out.alpha_achieved = est.alpha.alpha;
  out.practical_skip = est.alpha.practical_skip;
  out.inner_iterations = inner;
  out.ocp_solves = static_cast<int>(solves);
  out.solution = sol;
  out.v_next = est.v_next;
  if (est.alpha.practical_skip) {
    out.status = AdaptStatus::PracticalSkip;
  } else if (est.alpha.alpha >= cfg.alpha_bar) {
    out.status = AdaptStatus::Certified;
  } else {
    out.status = AdaptStatus::CapHit;
  }
  return out;
}

}  // namespace

AdaptationOutcome prolong_simple(const Vector& x, double t, int N_start,
                                 const AdaptationConfig& cfg,
                                 SolveBackend& backend,
                                 const std::vector<Vector>* warm,
                                 const IterationPoint* start) {
  const long s0 = backend.solve_count();
  int N = N_start;
  OpenLoopSolution sol =
      start ? start->solution : backend.solve(x, t, N, warm);
  LocalEstimate est =
      start ? start->estimate : estimate_local(sol, t, cfg, backend);
  int inner = 0;
  while (!est.alpha.practical_skip && est.alpha.alpha < cfg.alpha_bar &&
         N < cfg.N_max) {
    ++N;
    ++inner;
    const std::vector<Vector> next_warm = resized_warm(sol, N);
    sol = backend.solve(x, t, N, &next_warm);
    est = estimate_local(sol, t, cfg, backend);
  }
  return finish(sol, est, cfg, inner, backend.solve_count() - s0);
}

AdaptationOutcome prolong_fixed_point(const Vector& x, double t, int N_start,
                                      const AdaptationConfig& cfg,
                                      SolveBackend& backend,
                                      const std::vector<Vector>* warm,
                                      const IterationPoint* start) {
  const long s0 = backend.solve_count();
  int N = std::clamp(N_start, cfg.N_min, cfg.N_max);
  std::map<int, std::pair<OpenLoopSolution, LocalEstimate>> visited;
  std::vector<int> order;
  OpenLoopSolution sol =
      (start && N == N_start) ? start->solution : backend.solve(x, t, N, warm);
  LocalEstimate est = (start && N == N_start)
                          ? start->estimate
                          : estimate_local(sol, t, cfg, backend);
  int inner = 0;
  const int iteration_cap = cfg.N_max - cfg.N_min + 2;
  while (true) {
    ++inner;
    if (est.alpha.practical_skip) {
      return finish(sol, est, cfg, inner, backend.solve_count() - s0);
    }
    visited.emplace(N, std::make_pair(sol, est));
    order.push_back(N);
    const double gamma = gamma_for_iteration(est, cfg, N);
    int next = phi_map(gamma, cfg.alpha_bar, cfg.N_hat);
    next = std::clamp(next, N - cfg.sigma, N + cfg.sigma);
    next = std::clamp(next, cfg.N_min, cfg.N_max);
    if (next == N || inner >= iteration_cap) {
      return finish(sol, est, cfg, inner, backend.solve_count() - s0);
    }
    if (auto hit = visited.find(next); hit != visited.end()) {
      // Cycle: return the smallest certified horizon among its members.
      const auto first = std::find(order.begin(), order.end(), next);
      int best = -1;
      for (auto it = first; it != order.end(); ++it) {
        const auto& [vsol, vest] = visited.at(*it);
        if (vest.alpha.alpha >= cfg.alpha_bar && (best < 0 || *it < best)) {
          best = *it;
        }
      }
      if (best < 0) {
        AdaptationOutcome out =
            finish(sol, est, cfg, inner, backend.solve_count() - s0);
        out.status = AdaptStatus::CapHit;
        return out;
      }
      const auto& [bsol, best_est] = visited.at(best);
      return finish(bsol, best_est, cfg, inner, backend.solve_count() - s0);
    }
    const std::vector<Vector> next_warm = resized_warm(sol, next);
    N = next;
    sol = backend.solve(x, t, N, &next_warm);
    est = estimate_local(sol, t, cfg, backend);
  }
}

AdaptationOutcome prolong_monotone(const Vector& x, double t, int N_start,
                                   const AdaptationConfig& cfg,
                                   SolveBackend& backend,
                                   const std::vector<Vector>* warm,
                                   const IterationPoint* start) {
  const long s0 = backend.solve_count();
  int N = N_start;
  OpenLoopSolution sol =
      start ? start->solution : backend.solve(x, t, N, warm);
  LocalEstimate est =
      start ? start->estimate : estimate_local(sol, t, cfg, backend);
  double vartheta = 1.0;
  double gamma = 0.0;
  int inner = 0;
  while (!est.alpha.practical_skip && est.alpha.alpha < cfg.alpha_bar &&
         N < cfg.N_max) {
    gamma = gamma_for_iteration(est, cfg, N);
    double delta = cfg.alpha_bar - est.alpha.alpha;
    int next = N + 1;
    for (int attempt = 0; attempt < 3; ++attempt) {
      try {
        next = psi_map(N, gamma, delta, vartheta, cfg.N_hat);
        break;
      } catch (const StepTooLargeError&) {
        delta *= 0.5;  // fall back to N + 1 when halving never helps
      }
    }
    next = std::clamp(next, N + 1, std::min(N + cfg.sigma, cfg.N_max));
    const std::vector<Vector> next_warm = resized_warm(sol, next);
    N = next;
    ++inner;
    sol = backend.solve(x, t, N, &next_warm);
    est = estimate_local(sol, t, cfg, backend);
    if (!est.alpha.practical_skip) {
      const double gamma_new = gamma_for_iteration(est, cfg, N);
      vartheta = update_vartheta(vartheta, gamma, gamma_new);
    }
  }
  return finish(sol, est, cfg, inner, backend.solve_count() - s0);
}

AdaptiveController::AdaptiveController(AdaptationConfig cfg,
                                       SolveBackend& backend, int N0)
    : cfg_(cfg), backend_(backend), N_next_(std::clamp(N0, cfg.N_min, cfg.N_max)) {}

StepOutcome AdaptiveController::step(const Vector& x, double t) {
  StepOutcome out;
  if (!replay_.empty()) {
    const ReplayEntry e = replay_.front();
    replay_.pop_front();
    out.u = e.u;
    out.N = e.N;
    out.alpha = e.alpha;
    out.skip = e.skip;
    out.value = e.value;
    out.stage = e.stage;
    out.status = e.skip ? AdaptStatus::PracticalSkip : AdaptStatus::Certified;
    if (replay_.empty()) {
      N_next_ = std::max(e.N - 1, cfg_.N_min);
    }
    return out;
  }

  const long s0 = backend_.solve_count();
  const int N = std::clamp(N_next_, cfg_.N_min, cfg_.N_max);
  const std::vector<Vector>* warm =
      pending_warm_.empty() ? nullptr : &pending_warm_;
  OpenLoopSolution sol = backend_.solve(x, t, N, warm);
  LocalEstimate est = estimate_local(sol, t, cfg_, backend_);

  AdaptationOutcome outcome;
  if (est.alpha.practical_skip || est.alpha.alpha >= cfg_.alpha_bar) {
    outcome = AdaptationOutcome{};
    outcome.N_selected = N;
    outcome.alpha_achieved = est.alpha.alpha;
    outcome.practical_skip = est.alpha.practical_skip;
    outcome.solution = sol;
    outcome.v_next = est.v_next;
    outcome.status = est.alpha.practical_skip ? AdaptStatus::PracticalSkip
                                              : AdaptStatus::Certified;
    if (outcome.status == AdaptStatus::Certified && cfg_.shorten_enabled) {
      ShortenResult sh;
      if (cfg_.estimate_method == EstimateMethod::APosteriori) {
        sh = shorten_aposteriori(sol, t, cfg_, backend_, est.v_next);
      } else {
        sh = shorten_apriori(sol, *est.gamma, cfg_);
      }
      outcome.stored_tail = sh.tail;
    }
    outcome.ocp_solves = static_cast<int>(backend_.solve_count() - s0);
  } else {
    const IterationPoint start{sol, est};
    switch (cfg_.prolong_strategy) {
      case ProlongStrategy::Simple:
        outcome = prolong_simple(x, t, N, cfg_, backend_, warm, &start);
        break;
      case ProlongStrategy::FixedPoint:
        outcome = prolong_fixed_point(x, t, N, cfg_, backend_, warm, &start);
        break;
      case ProlongStrategy::Monotone:
        outcome = prolong_monotone(x, t, N, cfg_, backend_, warm, &start);
        break;
    }
    outcome.ocp_solves = static_cast<int>(backend_.solve_count() - s0);
  }

  out.u = outcome.solution.controls[0];
  out.N = outcome.N_selected;
  out.alpha = outcome.alpha_achieved;
  out.skip = outcome.practical_skip;
  out.value = outcome.solution.value;
  out.stage = outcome.solution.stage_costs[0];
  out.inner_iterations = outcome.inner_iterations;
  out.ocp_solves = outcome.ocp_solves;
  out.status = outcome.status;
  out.v_next = outcome.v_next;

  if (!outcome.stored_tail.empty()) {
    replay_.assign(outcome.stored_tail.begin(), outcome.stored_tail.end());
    const int last_horizon = outcome.stored_tail.back().N;
    pending_warm_ = shift_warm_start(
        outcome.solution, static_cast<int>(outcome.stored_tail.size()) + 1,
        std::max(last_horizon - 1, cfg_.N_min));
    N_next_ = out.N;  // overwritten when the replay window drains
  } else {
    N_next_ = outcome.N_selected;
    pending_warm_ = shift_warm_start(outcome.solution, 1, outcome.N_selected);
  }
  return out;
}

}  // namespace ahmpc
