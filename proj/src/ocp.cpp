#include "ahmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ahmpc {

namespace {

void check_problem(const HorizonProblem& p) {
  if (p.system == nullptr || p.cost == nullptr) {
    throw std::invalid_argument("HorizonProblem: system and cost must be set");
  }
  if (p.N < 1) {
    throw std::invalid_argument("HorizonProblem: N must be >= 1");
  }
  if (p.x0.size() != p.system->state_dim) {
    throw std::invalid_argument("HorizonProblem: x0 dimension mismatch");
  }
}

Vector clip_to_bounds(const SampledSystem& sys, Vector u) {
  for (int i = 0; i < u.size(); ++i) {
    u(i) = std::clamp(u(i), sys.u_min(i), sys.u_max(i));
  }
  return u;
}

}  // namespace

RolloutResult evaluate_cost(const HorizonProblem& p,
                            const std::vector<Vector>& controls) {
  check_problem(p);
  if (static_cast<int>(controls.size()) != p.N) {
    throw std::invalid_argument("evaluate_cost: control sequence length != N");
  }
  RolloutResult out;
  out.states.reserve(p.N + 1);
  out.stage_costs.reserve(p.N);
  out.states.push_back(p.x0);
  double t = p.t0;
  const double T = p.system->sampling_period;
  for (int k = 0; k < p.N; ++k) {
    const Segment seg =
        integrate_zoh_segment(*p.system, out.states.back(), controls[k], t);
    out.stage_costs.push_back((*p.cost)(seg, controls[k]));
    out.states.push_back(seg.states.back());
    t += T;
  }
  double sum = 0.0;
  for (double c : out.stage_costs) sum += c;
  out.value = sum;
  return out;
}

namespace {

struct Packed {
  Eigen::VectorXd z;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

Eigen::VectorXd pack(const std::vector<Vector>& controls) {
  const int m = static_cast<int>(controls.front().size());
  Eigen::VectorXd z(static_cast<int>(controls.size()) * m);
  for (std::size_t k = 0; k < controls.size(); ++k) {
    z.segment(static_cast<int>(k) * m, m) = controls[k];
  }
  return z;
}

std::vector<Vector> unpack(const Eigen::VectorXd& z, int N, int m) {
  std::vector<Vector> controls(N);
  for (int k = 0; k < N; ++k) {
    controls[k] = z.segment(k * m, m);
  }
  return controls;
}

double objective(const HorizonProblem& p, const Eigen::VectorXd& z, int m) {
  return evaluate_cost(p, unpack(z, p.N, m)).value;
}

Eigen::VectorXd project(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

struct PgdResult {
  Eigen::VectorXd z;
  double value;
  SolverStatus status;
};

PgdResult projected_gradient(const HorizonProblem& p, const SolverConfig& cfg,
                             Eigen::VectorXd z, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi) {
  const int m = p.system->control_dim;
  const int dim = static_cast<int>(z.size());
  double J = objective(p, z, m);
  double step = 1.0;
  SolverStatus status;
  Eigen::VectorXd g(dim), z_prev(dim), g_prev(dim);
  bool have_prev = false;
  // Recent accepted objective values for the nonmonotone acceptance test.
  // Single-shooting tracking problems are too ill-conditioned for plain
  // steepest descent; the spectral step needs the nonmonotone safeguard to
  // keep its effectiveness.
  std::vector<double> recent{J};
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    status.iterations = iter + 1;
    for (int i = 0; i < dim; ++i) {
      const double h = cfg.fd_step * std::max(1.0, std::abs(z(i)));
      Eigen::VectorXd zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      g(i) = (objective(p, zp, m) - objective(p, zm, m)) / (2.0 * h);
    }
    status.residual = (z - project(z - g, lo, hi)).lpNorm<Eigen::Infinity>();
    if (status.residual <= cfg.tolerance) {
      status.converged = true;
      break;
    }
    // Spectral (Barzilai-Borwein) trial step from the last accepted move,
    // falling back to the doubling step memory when the curvature estimate
    // is unusable; safeguarded by backtracking below.
    if (have_prev) {
      const Eigen::VectorXd s_vec = z - z_prev;
      const Eigen::VectorXd y_vec = g - g_prev;
      const double sy = s_vec.dot(y_vec);
      if (sy > 0.0) {
        step = std::clamp(s_vec.dot(s_vec) / sy, 1e-12, 1e6);
      } else {
        step = std::min(step * 2.0, 1e6);
      }
    } else {
      step = std::min(step * 2.0, 1e6);
    }
    double J_ref = J;
    for (double v : recent) J_ref = std::max(J_ref, v);
    z_prev = z;
    g_prev = g;
    bool accepted = false;
    while (step > 1e-16) {
      const Eigen::VectorXd trial = project(z - step * g, lo, hi);
      const double decrease = g.dot(z - trial);
      const double Jt = objective(p, trial, m);
      if (Jt <= J_ref - 1e-4 * decrease && decrease > 0.0) {
        z = trial;
        J = Jt;
        accepted = true;
        have_prev = true;
        recent.push_back(J);
        if (recent.size() > 10) recent.erase(recent.begin());
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent direction within machine resolution; treat the current
      // iterate as stationary.
      status.converged = status.residual <= std::max(cfg.tolerance, 1e-10);
      break;
    }
  }
  return {std::move(z), J, status};
}

}  // namespace

OpenLoopSolution solve(const HorizonProblem& p, const SolverConfig& cfg,
                       const std::vector<Vector>* warm_start) {
  check_problem(p);
  const int m = p.system->control_dim;
  Eigen::VectorXd lo(p.N * m), hi(p.N * m);
  for (int k = 0; k < p.N; ++k) {
    lo.segment(k * m, m) = p.system->u_min;
    hi.segment(k * m, m) = p.system->u_max;
  }
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(p.N * m);
  if (warm_start != nullptr) {
    if (static_cast<int>(warm_start->size()) != p.N) {
      throw std::invalid_argument("solve: warm start length != N");
    }
    z0 = pack(*warm_start);
  }
  z0 = project(z0, lo, hi);

  PgdResult best = projected_gradient(p, cfg, z0, lo, hi);
  if (cfg.multistart > 0) {
    std::mt19937 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int s = 0; s < cfg.multistart; ++s) {
      Eigen::VectorXd zs = z0;
      for (int i = 0; i < zs.size(); ++i) {
        zs(i) += 0.1 * (hi(i) - lo(i)) * noise(rng);
      }
      PgdResult r = projected_gradient(p, cfg, project(zs, lo, hi), lo, hi);
      if (r.value < best.value) best = std::move(r);
    }
  }

  OpenLoopSolution sol;
  sol.controls = unpack(best.z, p.N, m);
  RolloutResult roll = evaluate_cost(p, sol.controls);
  sol.states = std::move(roll.states);
  sol.stage_costs = std::move(roll.stage_costs);
  sol.value = roll.value;
  sol.status = best.status;
  return sol;
}

ControlGrid ControlGrid::uniform(double lo, double hi, int count, int dims) {
  if (count < 1) throw std::invalid_argument("ControlGrid: count must be >= 1");
  std::vector<double> axis(count);
  for (int i = 0; i < count; ++i) {
    axis[i] = (count == 1) ? lo
                           : lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(count - 1);
  }
  ControlGrid grid;
  grid.values.assign(dims, axis);
  return grid;
}

OpenLoopSolution solve_oracle(const HorizonProblem& p, const ControlGrid& grid,
                              std::uint64_t budget) {
  check_problem(p);
  const int m = p.system->control_dim;
  if (static_cast<int>(grid.values.size()) != m) {
    throw std::invalid_argument("solve_oracle: grid dimension mismatch");
  }
  std::uint64_t per_stage = 1;
  for (const auto& axis : grid.values) {
    if (axis.empty()) throw std::invalid_argument("solve_oracle: empty grid axis");
    per_stage *= axis.size();
  }
  unsigned __int128 required = 1;
  for (int k = 0; k < p.N; ++k) required *= per_stage;
  if (required > budget) {
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
    throw OracleBudgetError(
        required > cap ? cap : static_cast<std::uint64_t>(required));
  }
  const std::uint64_t total = static_cast<std::uint64_t>(required);

  // Mixed-radix counter over (stage, control dimension); earlier stages are
  // the most significant digits so enumeration order is lexicographic.
  std::vector<int> digit(static_cast<std::size_t>(p.N) * m, 0);
  std::vector<Vector> controls(p.N, Vector::Zero(m));
  auto materialize = [&]() {
    for (int k = 0; k < p.N; ++k) {
      for (int d = 0; d < m; ++d) {
        controls[k](d) = grid.values[d][digit[static_cast<std::size_t>(k) * m + d]];
      }
    }
  };

  double best_value = std::numeric_limits<double>::infinity();
  std::vector<Vector> best_controls;
  for (std::uint64_t it = 0; it < total; ++it) {
    materialize();
    const RolloutResult roll = evaluate_cost(p, controls);
    if (roll.value < best_value) {  // strict: first (lexicographic) wins ties
      best_value = roll.value;
      best_controls = controls;
    }
    for (int pos = static_cast<int>(digit.size()) - 1; pos >= 0; --pos) {
      const int radix = static_cast<int>(grid.values[pos % m].size());
      if (++digit[pos] < radix) break;
      digit[pos] = 0;
    }
  }

  OpenLoopSolution sol;
  sol.controls = std::move(best_controls);
  RolloutResult roll = evaluate_cost(p, sol.controls);
  sol.states = std::move(roll.states);
  sol.stage_costs = std::move(roll.stage_costs);
  sol.value = roll.value;
  sol.status = {true, 0, 0.0};
  return sol;
}

double tail_value(const OpenLoopSolution& sol, int k) {
  if (k < 0 || k > sol.horizon()) {
    throw std::out_of_range("tail_value: k outside [0, N]");
  }
  double sum = 0.0;
  for (int j = k; j < sol.horizon(); ++j) sum += sol.stage_costs[j];
  return sum;
}

std::vector<Vector> shift_warm_start(const OpenLoopSolution& sol, int shift,
                                     int new_length, const Vector* padding) {
  if (shift < 0 || shift > sol.horizon()) {
    throw std::out_of_range("shift_warm_start: shift outside [0, N]");
  }
  if (new_length < 1) {
    throw std::invalid_argument("shift_warm_start: new_length must be >= 1");
  }
  std::vector<Vector> out;
  out.reserve(new_length);
  for (int k = shift; k < sol.horizon() && static_cast<int>(out.size()) < new_length; ++k) {
    out.push_back(sol.controls[k]);
  }
  Vector pad;
  if (padding != nullptr) {
    pad = *padding;
  } else if (!out.empty()) {
    pad = out.back();
  } else if (!sol.controls.empty()) {
    pad = sol.controls.back();
  } else {
    throw std::invalid_argument("shift_warm_start: empty solution and no padding");
  }
  while (static_cast<int>(out.size()) < new_length) out.push_back(pad);
  return out;
}

}  // namespace ahmpc
