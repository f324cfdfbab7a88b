#pragma once

#include <deque>
#include <optional>

#include "ahmpc/estimate.hpp"

namespace ahmpc {

enum class ProlongStrategy { Simple, FixedPoint, Monotone };

struct AdaptationConfig {
  double alpha_bar = 0.5;
  EstimateMethod estimate_method = EstimateMethod::APosteriori;
  ProlongStrategy prolong_strategy = ProlongStrategy::Simple;
  bool shorten_enabled = true;
  int N_hat = 2;
  int sigma = 5;  ///< per-iteration horizon-change cap
  int N_min = 2;
  int N_max = 30;
  double epsilon = 1e-5;
  double gamma_min = 1e-9;
};

enum class AdaptStatus { Certified, PracticalSkip, CapHit };

/// One step of a stored open-loop tail scheduled for replay (horizon
/// schedule N_{n+k} = N_n - k).
struct ReplayEntry {
  Vector u;
  int N = 0;
  double alpha = 0.0;
  bool skip = false;  ///< stage cost was below epsilon at certification
  double value = 0.0;
  double stage = 0.0;
};

struct AdaptationOutcome {
  int N_selected = 0;
  double alpha_achieved = 0.0;
  bool practical_skip = false;
  int inner_iterations = 0;
  int ocp_solves = 0;
  std::vector<ReplayEntry> stored_tail;
  AdaptStatus status = AdaptStatus::Certified;
  OpenLoopSolution solution;
  std::optional<double> v_next;  ///< successor value used by the a posteriori check
};

/// Local degree at (x, sol): the a posteriori route solves one fresh problem
/// at the predicted successor, the a priori route runs minimal_gamma.
struct LocalEstimate {
  AlphaEstimate alpha;
  std::optional<GammaData> gamma;
  std::optional<double> v_next;
};

LocalEstimate estimate_local(const OpenLoopSolution& sol, double t,
                             const AdaptationConfig& cfg, SolveBackend& backend);

struct ShortenResult {
  int k_bar = -1;  ///< -1: no step certified, shortening declined
  std::vector<ReplayEntry> tail;
};

/// Largest k_bar with the per-k relaxed Lyapunov checks satisfied along the
/// open-loop tail; each k > 0 check costs one fresh (N-k)-horizon solve.
ShortenResult shorten_aposteriori(const OpenLoopSolution& sol, double t,
                                  const AdaptationConfig& cfg,
                                  SolveBackend& backend,
                                  std::optional<double> v_next_full = {});

/// Shortening via the gamma bound: k_bar is the largest k with
/// gamma_n < gamma_bar(N - k); needs no per-k solves.
ShortenResult shorten_apriori(const OpenLoopSolution& sol,
                              const GammaData& gamma_n,
                              const AdaptationConfig& cfg);

/// Solve+estimate pair reusable across the strategy entry points; when a
/// caller already evaluated the starting horizon it hands the pair in to
/// avoid re-solving.
struct IterationPoint {
  OpenLoopSolution solution;
  LocalEstimate estimate;
};

AdaptationOutcome prolong_simple(const Vector& x, double t, int N_start,
                                 const AdaptationConfig& cfg,
                                 SolveBackend& backend,
                                 const std::vector<Vector>* warm = nullptr,
                                 const IterationPoint* start = nullptr);

AdaptationOutcome prolong_fixed_point(const Vector& x, double t, int N_start,
                                      const AdaptationConfig& cfg,
                                      SolveBackend& backend,
                                      const std::vector<Vector>* warm = nullptr,
                                      const IterationPoint* start = nullptr);

AdaptationOutcome prolong_monotone(const Vector& x, double t, int N_start,
                                   const AdaptationConfig& cfg,
                                   SolveBackend& backend,
                                   const std::vector<Vector>* warm = nullptr,
                                   const IterationPoint* start = nullptr);

/// One full adaptation step: estimate, then shorten or prolong, returning the
/// control to apply. Replays stored tails without further solves.
struct StepOutcome {
  Vector u;
  int N = 0;
  double alpha = 0.0;
  bool skip = false;
  double value = 0.0;
  double stage = 0.0;
  int inner_iterations = 0;
  int ocp_solves = 0;
  AdaptStatus status = AdaptStatus::Certified;
  std::optional<double> v_next;
};

class AdaptiveController {
 public:
  AdaptiveController(AdaptationConfig cfg, SolveBackend& backend, int N0);

  StepOutcome step(const Vector& x, double t);

  const AdaptationConfig& config() const { return cfg_; }
  int next_horizon() const { return N_next_; }

 private:
  AdaptationConfig cfg_;
  SolveBackend& backend_;
  int N_next_;
  std::deque<ReplayEntry> replay_;
  std::vector<Vector> pending_warm_;
};

}  // namespace ahmpc
