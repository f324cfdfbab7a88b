#pragma once

#include <optional>
#include <stdexcept>

#include "ahmpc/backend.hpp"

namespace ahmpc {

enum class EstimateMethod { APosteriori, APriori };

/// Local suboptimality degree at one state/horizon pair.
struct AlphaEstimate {
  double alpha = 0.0;  ///< <= 1; negative values signal a failed certificate
  EstimateMethod method = EstimateMethod::APosteriori;
  double epsilon = 0.0;
  std::optional<double> gamma;
  int N = 0;
  int N_hat = 0;
  bool practical_skip = false;  ///< stage cost <= epsilon, step excluded
};

/// alpha from the realized one-step value decrease. If stage <= epsilon the
/// step is flagged practical_skip instead. The result is capped at 1 but not
/// clamped below zero.
AlphaEstimate alpha_aposteriori(double v_now, double v_next, double stage,
                                double epsilon);

struct GammaData {
  double gamma = 0.0;
  int N = 0;
  int N_hat = 2;
  /// Index of the tight inequality: k >= N_hat+1 for the per-k family, -1 for
  /// the max-over-j family, -2 when no ratio applied (gamma floored).
  int binding_index = -2;
  bool infinite = false;  ///< a required stage cost vanished at positive value
};

/// One (value, stage-cost) ratio entering the gamma bound.
struct RatioTerm {
  double value = 0.0;
  double stage = 0.0;
  int index = 0;
};

/// gamma = max(value/stage) - 1 over the terms, skipping stages <= epsilon,
/// floored at gamma_min. Terms with stage == 0 and positive value mark the
/// result infinite.
GammaData gamma_from_ratios(const std::vector<RatioTerm>& terms, int N,
                            int N_hat, double epsilon, double gamma_min);

/// Smallest gamma for which both inequality families of the a priori
/// estimate hold along the open-loop tail of `sol`. Tail values come from the
/// principle of optimality; the short-horizon feedbacks mu_{j-1} need fresh
/// (j-1)-horizon solves through the backend.
GammaData minimal_gamma(const OpenLoopSolution& sol, int N_hat,
                        SolveBackend& backend, double t0, double epsilon,
                        double gamma_min = 1e-9);

/// alpha = ((g+1)^{N-N_hat} - g^{N-N_hat+2}) / (g+1)^{N-N_hat}. May be
/// negative; callers interpret.
double alpha_from_gamma(double gamma, int N, int N_hat);

/// Unique gamma >= 0 with alpha_from_gamma(gamma, N, N_hat) = alpha, via
/// Newton iteration from gamma = 1, safeguarded by bisection (the map is
/// strictly decreasing). Throws std::domain_error for alpha > 1.
double gamma_from_alpha(double alpha, int N, int N_hat);

/// Ceiling lower bound on the horizon that certifies alpha_bar for the given
/// gamma. Throws std::domain_error for gamma <= 0.
int phi_map(double gamma, double alpha_bar, int N_hat);

struct StepTooLargeError : std::domain_error {
  StepTooLargeError()
      : std::domain_error(
            "psi_map: delta too large for current gamma, shrink delta") {}
};

/// Horizon that improves the a priori degree by at least delta, floored at
/// N + 1. Throws StepTooLargeError when the logarithm argument is
/// nonpositive.
int psi_map(int N, double gamma, double delta, double vartheta, int N_hat);

/// vartheta update max(current, gamma_new / gamma_prev); reset to 1 at each
/// sampling instant by the caller.
double update_vartheta(double current, double gamma_prev, double gamma_new);

}  // namespace ahmpc
