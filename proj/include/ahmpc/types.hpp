#pragma once

#include <Eigen/Core>
#include <vector>

namespace ahmpc {

using Vector = Eigen::VectorXd;

/// States sampled along one sampling interval [t0, t1] on the integrator's
/// substep grid. For discrete-time systems the segment holds the endpoint
/// pair {x_k, x_{k+1}} only.
struct Segment {
  std::vector<Vector> states;
  double t0 = 0.0;
  double t1 = 0.0;
};

}  // namespace ahmpc
