#include "ahmpc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ahmpc {

Vector arp_vector_field(const Vector& x, double u, const ArpParameters& p) {
  Vector dx(8);
  dx(0) = x(1) + x(5) * x(2);
  dx(1) = -p.k1 * x(0) / p.M - p.b1 * x(1) / p.M + x(5) * x(3) -
          p.m * p.r * p.b1 * x(5) / (p.M * p.M);
  dx(2) = -x(5) * x(0) + x(3);
  dx(3) = -x(5) * x(1) - p.k1 * x(2) / p.M - p.b1 * x(3) / p.M +
          p.m * p.r * p.k1 / (p.M * p.M);
  dx(4) = x(5);
  dx(5) = -p.a1 * x(4) - p.a2 * x(5) + p.a1 * x(6) + p.a3 * x(7) -
          p.p1 * x(0) - p.p2 * x(1);
  dx(6) = x(7);
  dx(7) = p.a4 * x(4) + p.a5 * x(5) - p.a4 * x(6) - (p.a5 + p.a6) * x(7) +
          u / p.J;
  return dx;
}

double ReferenceSignal::operator()(double t) const {
  double value = 0.0;
  for (const auto& node : nodes) {
    if (node.t <= t) {
      value = node.value;
    } else {
      break;
    }
  }
  return value;
}

ReferenceSignal ReferenceSignal::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open reference file: " + path);
  }
  ReferenceSignal ref;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double t, v;
    if (ls >> t >> v) {
      ref.nodes.push_back({t, v});
    }
  }
  if (ref.nodes.empty()) {
    throw std::runtime_error("reference file has no (time, value) rows: " + path);
  }
  std::stable_sort(ref.nodes.begin(), ref.nodes.end(),
                   [](const Node& a, const Node& b) { return a.t < b.t; });
  return ref;
}

namespace {

Vector rk4_substep(const SampledSystem& sys, const Vector& x, const Vector& u,
                   double h) {
  const Vector k1 = sys.vector_field(x, u);
  const Vector k2 = sys.vector_field(x + 0.5 * h * k1, u);
  const Vector k3 = sys.vector_field(x + 0.5 * h * k2, u);
  const Vector k4 = sys.vector_field(x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Segment integrate_zoh_segment(const SampledSystem& sys, const Vector& x,
                              const Vector& u, double t0) {
  Segment seg;
  seg.t0 = t0;
  seg.t1 = t0 + sys.sampling_period;
  if (sys.discrete_map) {
    seg.states.push_back(x);
    seg.states.push_back(sys.discrete_map(x, u));
    return seg;
  }
  const double h = sys.sampling_period / sys.substeps;
  seg.states.reserve(sys.substeps + 1);
  seg.states.push_back(x);
  Vector cur = x;
  for (int i = 0; i < sys.substeps; ++i) {
    cur = rk4_substep(sys, cur, u, h);
    if (!cur.allFinite()) {
      throw DivergenceError(i);
    }
    seg.states.push_back(cur);
  }
  return seg;
}

Vector integrate_zoh(const SampledSystem& sys, const Vector& x, const Vector& u) {
  if (sys.discrete_map) {
    return sys.discrete_map(x, u);
  }
  const double h = sys.sampling_period / sys.substeps;
  Vector cur = x;
  for (int i = 0; i < sys.substeps; ++i) {
    cur = rk4_substep(sys, cur, u, h);
    if (!cur.allFinite()) {
      throw DivergenceError(i);
    }
  }
  return cur;
}

double tracking_stage_cost(const Segment& segment, const ReferenceSignal& ref,
                           int output_index, double smoothing) {
  if (segment.states.size() < 2) {
    throw std::invalid_argument(
        "tracking_stage_cost: segment needs at least 2 sample points");
  }
  const std::size_t n = segment.states.size() - 1;
  const double h = (segment.t1 - segment.t0) / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = segment.t0 + h * static_cast<double>(i);
    double e = std::abs(segment.states[i](output_index) - ref(t));
    if (smoothing > 0.0) {
      const double r = e / smoothing;
      e = smoothing * (std::sqrt(1.0 + r * r) - 1.0);
    }
    acc += (i == 0 || i == n) ? 0.5 * e : e;
  }
  return acc * h;
}

StageCost make_tracking_cost(ReferenceSignal ref, int output_index,
                             double smoothing) {
  return [ref = std::move(ref), output_index, smoothing](const Segment& seg,
                                                         const Vector& /*u*/) {
    return tracking_stage_cost(seg, ref, output_index, smoothing);
  };
}

StageCost make_quadratic_cost(double rho) {
  return [rho](const Segment& seg, const Vector& u) {
    return seg.states.front().squaredNorm() + rho * u.squaredNorm();
  };
}

SampledSystem make_scalar_linear(double a, double b, double u_lo, double u_hi) {
  SampledSystem sys;
  sys.state_dim = 1;
  sys.control_dim = 1;
  sys.discrete_map = [a, b](const Vector& x, const Vector& u) {
    Vector next(1);
    next(0) = a * x(0) + b * u(0);
    return next;
  };
  sys.sampling_period = 1.0;
  sys.substeps = 1;
  sys.u_min = Vector::Constant(1, u_lo);
  sys.u_max = Vector::Constant(1, u_hi);
  return sys;
}

SampledSystem make_double_integrator(double T, int substeps, double u_lo,
                                     double u_hi) {
  SampledSystem sys;
  sys.state_dim = 2;
  sys.control_dim = 1;
  sys.vector_field = [](const Vector& x, const Vector& u) {
    Vector dx(2);
    dx(0) = x(1);
    dx(1) = u(0);
    return dx;
  };
  sys.sampling_period = T;
  sys.substeps = substeps;
  sys.u_min = Vector::Constant(1, u_lo);
  sys.u_max = Vector::Constant(1, u_hi);
  return sys;
}

SampledSystem make_arp(const ArpParameters& p, double T, int substeps,
                       double u_lo, double u_hi) {
  SampledSystem sys;
  sys.state_dim = 8;
  sys.control_dim = 1;
  sys.vector_field = [p](const Vector& x, const Vector& u) {
    return arp_vector_field(x, u(0), p);
  };
  sys.sampling_period = T;
  sys.substeps = substeps;
  sys.u_min = Vector::Constant(1, u_lo);
  sys.u_max = Vector::Constant(1, u_hi);
  return sys;
}

}  // namespace ahmpc
