#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "ahmpc/types.hpp"

namespace ahmpc {

/// Discrete-time system x(n+1) = f(x(n), u(n)) obtained from an ODE vector
/// field under zero-order hold, or defined directly in discrete time via
/// `discrete_map` (which then bypasses the integrator).
struct SampledSystem {
  int state_dim = 0;
  int control_dim = 0;
  std::function<Vector(const Vector& x, const Vector& u)> vector_field;
  std::function<Vector(const Vector& x, const Vector& u)> discrete_map;
  double sampling_period = 0.2;
  Vector u_min;  ///< per-component lower control bounds
  Vector u_max;  ///< per-component upper control bounds
  int substeps = 10;
};

/// Parameters of the arm/rotor/platform model. Values are not fixed by this
/// library; see configs/arp.cfg for the bundled illustrative set.
struct ArpParameters {
  double M = 1.0;
  double m = 0.1;
  double r = 0.1;
  double k1 = 1.0;
  double b1 = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = 1.0;
  double a4 = 1.0;
  double a5 = 1.0;
  double a6 = 1.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double J = 1.0;
};

/// Right-hand side of the eight ARP ODEs. u enters linearly through the last
/// component only.
Vector arp_vector_field(const Vector& x, double u, const ArpParameters& p);

/// Piecewise-constant signal: value at t is the one attached to the last node
/// with node.t <= t.
struct ReferenceSignal {
  struct Node {
    double t;
    double value;
  };
  std::vector<Node> nodes;

  double operator()(double t) const;

  /// Two-column plain text (time value), interpreted as piecewise-constant
  /// from each listed time.
  static ReferenceSignal from_file(const std::string& path);
};

/// Raised when a rollout produces a non-finite state.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(int substep_)
      : std::runtime_error("state diverged at integrator substep " +
                           std::to_string(substep_)),
        substep(substep_) {}
  int substep;
};

/// One sampling period under zero-order hold, classical RK4 with
/// sys.substeps uniform substeps. Dispatches to discrete_map when set.
Vector integrate_zoh(const SampledSystem& sys, const Vector& x, const Vector& u);

/// Same step, but returns the whole substep trajectory (needed for integral
/// stage costs).
Segment integrate_zoh_segment(const SampledSystem& sys, const Vector& x,
                              const Vector& u, double t0);

/// Nonnegative running cost of one sampling interval.
using StageCost = std::function<double(const Segment&, const Vector& u)>;

/// Composite-trapezoid quadrature of |x_output(t) - ref(t)| over the segment.
/// With smoothing > 0 the absolute value is replaced by the pseudo-Huber
/// surrogate smoothing * (sqrt(1 + (e/smoothing)^2) - 1), which is smooth at
/// the reference and agrees with |e| up to smoothing; gradient-based solvers
/// need this once the trajectory settles onto the reference.
double tracking_stage_cost(const Segment& segment, const ReferenceSignal& ref,
                           int output_index = 4, double smoothing = 0.0);

StageCost make_tracking_cost(ReferenceSignal ref, int output_index = 4,
                             double smoothing = 0.0);

/// l(x, u) = x'x + rho u'u, evaluated at the segment start.
StageCost make_quadratic_cost(double rho = 0.0);

/// Scalar x+ = a x + b u, defined directly in discrete time.
SampledSystem make_scalar_linear(double a, double b, double u_lo, double u_hi);

/// Two-state double integrator under zero-order hold.
SampledSystem make_double_integrator(double T, int substeps, double u_lo,
                                     double u_hi);

SampledSystem make_arp(const ArpParameters& p, double T, int substeps,
                       double u_lo, double u_hi);

}  // namespace ahmpc
