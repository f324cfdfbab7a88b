#include "ahmpc/estimate.hpp"

#include <cmath>

namespace ahmpc {

AlphaEstimate alpha_aposteriori(double v_now, double v_next, double stage,
                                double epsilon) {
  AlphaEstimate est;
  est.method = EstimateMethod::APosteriori;
  est.epsilon = epsilon;
  if (stage <= epsilon) {
    est.practical_skip = true;
    est.alpha = 0.0;
    return est;
  }
  est.alpha = std::min(1.0, (v_now - v_next) / stage);
  return est;
}

GammaData gamma_from_ratios(const std::vector<RatioTerm>& terms, int N,
                            int N_hat, double epsilon, double gamma_min) {
  GammaData data;
  data.N = N;
  data.N_hat = N_hat;
  data.gamma = gamma_min;
  double best_ratio = 0.0;
  bool any = false;
  for (const RatioTerm& t : terms) {
    if (t.stage > epsilon) {
      const double ratio = t.value / t.stage;
      if (!any || ratio > best_ratio) {
        best_ratio = ratio;
        data.binding_index = t.index;
        any = true;
      }
    } else if (t.stage <= 0.0 && t.value > 0.0 && epsilon <= 0.0) {
      data.infinite = true;
      data.binding_index = t.index;
      return data;
    }
    // stage in (0, epsilon]: inside the practical region, excluded.
  }
  if (any) {
    data.gamma = std::max(best_ratio - 1.0, gamma_min);
  }
  return data;
}

GammaData minimal_gamma(const OpenLoopSolution& sol, int N_hat,
                        SolveBackend& backend, double t0, double epsilon,
                        double gamma_min) {
  const int N = sol.horizon();
  if (N_hat < 2 || N < N_hat) {
    throw std::invalid_argument("minimal_gamma: need N >= N_hat >= 2");
  }
  const double T = backend.sampling_period();
  std::vector<RatioTerm> terms;

  // V_k(x_u*(N-k)) <= (gamma+1) l(x_u*(N-k), mu_k(...)) for k = N_hat+1..N.
  // Both sides read off the optimal tail.
  for (int k = N_hat + 1; k <= N; ++k) {
    terms.push_back({tail_value(sol, N - k), sol.stage_costs[N - k], k});
  }

  // V_Nhat(x_u*(N-Nhat)) <= (gamma+1) max_{j=2..Nhat} l(x_u*(N-j), mu_{j-1}(...)).
  // The short feedbacks mu_{j-1} need fresh (j-1)-horizon solves.
  double max_stage = 0.0;
  for (int j = 2; j <= N_hat; ++j) {
    const Vector& x = sol.states[N - j];
    const double t = t0 + T * static_cast<double>(N - j);
    const OpenLoopSolution aux = backend.solve(x, t, j - 1);
    max_stage = std::max(max_stage, backend.stage_cost(x, aux.controls[0], t));
  }
  terms.push_back({tail_value(sol, N - N_hat), max_stage, -1});

  return gamma_from_ratios(terms, N, N_hat, epsilon, gamma_min);
}

namespace {

double gamma_map(double g, int d) {
  // 1 - g^{d+2} / (g+1)^d, strictly decreasing from 1 at g = 0 to -inf.
  return 1.0 - std::pow(g, d + 2) / std::pow(g + 1.0, d);
}

// Ceiling with a snap for values sitting on an integer up to roundoff.
int snapped_ceil(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9) return static_cast<int>(r);
  return static_cast<int>(std::ceil(v));
}

}  // namespace

double alpha_from_gamma(double gamma, int N, int N_hat) {
  if (N < N_hat || N_hat < 2) {
    throw std::invalid_argument("alpha_from_gamma: need N >= N_hat >= 2");
  }
  return gamma_map(gamma, N - N_hat);
}

double gamma_from_alpha(double alpha, int N, int N_hat) {
  if (alpha > 1.0) {
    throw std::domain_error("gamma_from_alpha: alpha must be <= 1");
  }
  if (N < N_hat || N_hat < 2) {
    throw std::invalid_argument("gamma_from_alpha: need N >= N_hat >= 2");
  }
  if (alpha == 1.0) return 0.0;
  const int d = N - N_hat;

  double lo = 0.0;       // gamma_map(lo) = 1 >= alpha
  double hi = 1.0;
  while (gamma_map(hi, d) > alpha) hi *= 2.0;

  double g = 1.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double f = gamma_map(g, d) - alpha;
    if (std::abs(f) <= 1e-12) break;
    if (f > 0.0) {
      lo = g;
    } else {
      hi = g;
    }
    const double slope = std::pow(g / (g + 1.0), d + 1) * (d + 2 + 2.0 * g);
    double next = g + f / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);  // bisection safeguard
    }
    g = next;
  }
  return g;
}

int phi_map(double gamma, double alpha_bar, int N_hat) {
  if (gamma <= 0.0) {
    throw std::domain_error("phi_map: gamma must be positive");
  }
  if (alpha_bar <= 0.0 || alpha_bar >= 1.0) {
    throw std::domain_error("phi_map: alpha_bar must lie in (0, 1)");
  }
  const double numer = 2.0 * std::log(gamma) - std::log(1.0 - alpha_bar);
  const double denom = std::log(gamma + 1.0) - std::log(gamma);
  return snapped_ceil(static_cast<double>(N_hat) + numer / denom);
}

int psi_map(int N, double gamma, double delta, double vartheta, int N_hat) {
  if (gamma <= 0.0 || vartheta <= 0.0) {
    throw std::domain_error("psi_map: gamma and vartheta must be positive");
  }
  if (delta < 0.0) {
    throw std::domain_error("psi_map: delta must be nonnegative");
  }
  const double arg =
      std::pow(gamma / (gamma + 1.0), N - N_hat) - delta / (gamma * gamma);
  if (arg <= 0.0) {
    throw StepTooLargeError();
  }
  const double numer = std::log(arg) - 2.0 * std::log(vartheta);
  const double denom =
      std::log(vartheta * gamma) - std::log(vartheta * gamma + 1.0);
  const int raw = snapped_ceil(static_cast<double>(N_hat) + numer / denom);
  // The raw ceiling can stall at N for vartheta = 1, delta = 0; the floor
  // keeps the monotone iteration strictly increasing.
  return std::max(raw, N + 1);
}

double update_vartheta(double current, double gamma_prev, double gamma_new) {
  if (gamma_prev <= 0.0) {
    throw std::invalid_argument("update_vartheta: gamma_prev must be positive");
  }
  return std::max(current, gamma_new / gamma_prev);
}

}  // namespace ahmpc
