#pragma once

#include <cstdint>
#include <vector>

#include "ahmpc/model.hpp"
#include "ahmpc/types.hpp"

namespace ahmpc {

/// Finite-horizon optimal control problem: minimize the sum of N stage costs
/// along the rollout from x0.
struct HorizonProblem {
  const SampledSystem* system = nullptr;
  const StageCost* cost = nullptr;
  Vector x0;
  int N = 1;
  double t0 = 0.0;
};

struct SolverStatus {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

struct OpenLoopSolution {
  std::vector<Vector> controls;     // u(0..N-1)
  std::vector<Vector> states;       // x(0..N)
  std::vector<double> stage_costs;  // l(0..N-1)
  double value = 0.0;               // V_N = sum of stage costs
  SolverStatus status;

  int horizon() const { return static_cast<int>(controls.size()); }
};

struct SolverConfig {
  double tolerance = 1e-6;   ///< projected-gradient residual target
  int max_iterations = 500;
  double fd_step = 1e-6;     ///< relative central-difference step
  int multistart = 0;        ///< extra perturbed restarts (0 = off)
  unsigned seed = 0;
};

struct RolloutResult {
  std::vector<Vector> states;
  std::vector<double> stage_costs;
  double value = 0.0;
};

/// Rolls out the dynamics under the given control sequence and sums stage
/// costs. Throws DivergenceError if the rollout blows up.
RolloutResult evaluate_cost(const HorizonProblem& p,
                            const std::vector<Vector>& controls);

/// Projected-gradient solver on the single-shooting parameterization.
/// Gradients by central finite differences; controls clipped to the box
/// bounds. Deterministic given identical inputs and configuration. A hit
/// iteration cap is reported via status.converged = false, never thrown.
OpenLoopSolution solve(const HorizonProblem& p, const SolverConfig& cfg = {},
                       const std::vector<Vector>* warm_start = nullptr);

/// Finite set of admissible control values, one list per control dimension.
struct ControlGrid {
  std::vector<std::vector<double>> values;

  static ControlGrid uniform(double lo, double hi, int count, int dims = 1);
};

struct OracleBudgetError : std::runtime_error {
  explicit OracleBudgetError(std::uint64_t required)
      : std::runtime_error("oracle enumeration needs " +
                           std::to_string(required) +
                           " rollouts, over budget"),
        required_rollouts(required) {}
  std::uint64_t required_rollouts;
};

/// Exhaustive enumeration over all grid control sequences. Ties broken by the
/// lexicographically smallest sequence under the grid's listed order.
OpenLoopSolution solve_oracle(const HorizonProblem& p, const ControlGrid& grid,
                              std::uint64_t budget = 10'000'000);

/// V_{N-k} at the k-th open-loop state, i.e. the tail sum of stage costs.
/// Valid for optimal solutions by the principle of optimality.
double tail_value(const OpenLoopSolution& sol, int k);

/// Drops the first `shift` controls and pads with the last remaining control
/// (or `padding` if given) up to new_length.
std::vector<Vector> shift_warm_start(const OpenLoopSolution& sol, int shift,
                                     int new_length,
                                     const Vector* padding = nullptr);

}  // namespace ahmpc
