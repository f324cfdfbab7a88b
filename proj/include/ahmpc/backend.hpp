#pragma once

#include "ahmpc/ocp.hpp"

namespace ahmpc {

/// Solve/simulate capability handed to estimators, adaptation strategies and
/// the closed-loop report. Virtual so tests can substitute prescribed values.
/// Implementations count solves; the counter backs the per-step ocp_solves
/// bookkeeping.
class SolveBackend {
 public:
  virtual ~SolveBackend() = default;

  virtual OpenLoopSolution solve(const Vector& x, double t, int N,
                                 const std::vector<Vector>* warm = nullptr) = 0;
  virtual double stage_cost(const Vector& x, const Vector& u, double t) = 0;
  virtual Vector advance(const Vector& x, const Vector& u) = 0;
  virtual double sampling_period() const = 0;

  long solve_count() const { return solves_; }

 protected:
  long solves_ = 0;
};

/// Backend over a concrete system, stage cost and solver configuration.
class SystemBackend final : public SolveBackend {
 public:
  SystemBackend(SampledSystem system, StageCost cost, SolverConfig solver = {})
      : system_(std::move(system)),
        cost_(std::move(cost)),
        solver_(solver) {}

  OpenLoopSolution solve(const Vector& x, double t, int N,
                         const std::vector<Vector>* warm = nullptr) override {
    ++solves_;
    HorizonProblem p{&system_, &cost_, x, N, t};
    return ahmpc::solve(p, solver_, warm);
  }

  double stage_cost(const Vector& x, const Vector& u, double t) override {
    const Segment seg = integrate_zoh_segment(system_, x, u, t);
    return cost_(seg, u);
  }

  Vector advance(const Vector& x, const Vector& u) override {
    return integrate_zoh(system_, x, u);
  }

  double sampling_period() const override { return system_.sampling_period; }

  const SampledSystem& system() const { return system_; }
  const StageCost& cost() const { return cost_; }
  const SolverConfig& solver_config() const { return solver_; }

 private:
  SampledSystem system_;
  StageCost cost_;
  SolverConfig solver_;
};

}  // namespace ahmpc
