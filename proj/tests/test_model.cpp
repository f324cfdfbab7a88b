#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "ahmpc/model.hpp"

using namespace ahmpc;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double d : vals) v(i++) = d;
  return v;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("arp rhs at the origin with zero input") {
  ArpParameters p;
  p.M = 2.0;
  p.m = 0.3;
  p.r = 0.5;
  p.k1 = 1.7;
  const Vector dx = arp_vector_field(Vector::Zero(8), 0.0, p);
  for (int i = 0; i < 8; ++i) {
    if (i == 3) {
      CHECK(dx(i) ==
            doctest::Approx(p.m * p.r * p.k1 / (p.M * p.M)).epsilon(1e-15));
    } else {
      CHECK(dx(i) == 0.0);
    }
  }
}

TEST_CASE("arp rhs integrator components") {
  ArpParameters p;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(8);
    for (int i = 0; i < 8; ++i) x(i) = d(rng);
    const Vector dx = arp_vector_field(x, d(rng), p);
    CHECK(dx(4) == x(5));
    CHECK(dx(6) == x(7));
  }
}

TEST_CASE("arp rhs input sensitivity is 1/J in the last component only") {
  ArpParameters p;
  p.J = 4.0;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  Vector x(8);
  for (int i = 0; i < 8; ++i) x(i) = d(rng);
  const Vector diff = arp_vector_field(x, 1.0, p) - arp_vector_field(x, 0.0, p);
  for (int i = 0; i < 7; ++i) CHECK(diff(i) == 0.0);
  CHECK(diff(7) == doctest::Approx(1.0 / p.J).epsilon(1e-15));
}

TEST_CASE("arp rhs is affine in the input") {
  ArpParameters p;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(8);
    for (int i = 0; i < 8; ++i) x(i) = d(rng);
    const double u1 = d(rng), u2 = d(rng), lambda = 0.25;
    const Vector lhs = arp_vector_field(x, lambda * u1 + (1 - lambda) * u2, p);
    const Vector rhs = lambda * arp_vector_field(x, u1, p) +
                       (1 - lambda) * arp_vector_field(x, u2, p);
    for (int i = 0; i < 8; ++i) CHECK(lhs(i) == doctest::Approx(rhs(i)).epsilon(1e-14));
  }
}

TEST_CASE("zero dynamics leave the state unchanged") {
  SampledSystem sys;
  sys.state_dim = 3;
  sys.control_dim = 1;
  sys.vector_field = [](const Vector& x, const Vector&) {
    return Vector(Vector::Zero(x.size()));
  };
  sys.u_min = scalar(-1);
  sys.u_max = scalar(1);
  const Vector x = vec({1.0, -2.0, 0.5});
  const Vector next = integrate_zoh(sys, x, scalar(0.7));
  CHECK(next == x);
}

TEST_CASE("pure input integrator is exact under RK4") {
  SampledSystem sys;
  sys.state_dim = 1;
  sys.control_dim = 1;
  sys.vector_field = [](const Vector&, const Vector& u) { return u; };
  sys.sampling_period = 0.2;
  sys.u_min = scalar(-10);
  sys.u_max = scalar(10);
  const Vector next = integrate_zoh(sys, scalar(1.0), scalar(3.0));
  CHECK(next(0) == doctest::Approx(1.6).epsilon(1e-15));
}

TEST_CASE("exponential flow reproduced to 1e-9") {
  SampledSystem sys;
  sys.state_dim = 1;
  sys.control_dim = 1;
  sys.vector_field = [](const Vector& x, const Vector&) { return x; };
  sys.sampling_period = 0.2;
  sys.substeps = 10;
  sys.u_min = scalar(-1);
  sys.u_max = scalar(1);
  const Vector next = integrate_zoh(sys, scalar(1.0), scalar(0.0));
  CHECK(next(0) == doctest::Approx(std::exp(0.2)).epsilon(1e-9));
  CHECK(std::abs(next(0) - 1.221402758) < 1e-9);
}

TEST_CASE("substep splitting invariance") {
  // One period at 2k substeps vs two half periods at k substeps each.
  auto field = [](const Vector& x, const Vector& u) {
    Vector dx(2);
    dx(0) = x(1);
    dx(1) = std::sin(x(0)) - 0.3 * x(1) + u(0);
    return dx;
  };
  SampledSystem full;
  full.state_dim = 2;
  full.control_dim = 1;
  full.vector_field = field;
  full.sampling_period = 0.2;
  full.substeps = 20;
  full.u_min = scalar(-2);
  full.u_max = scalar(2);
  SampledSystem half = full;
  half.sampling_period = 0.1;
  half.substeps = 10;

  const Vector x0 = vec({0.4, -0.7});
  const Vector u = scalar(0.5);
  const Vector once = integrate_zoh(full, x0, u);
  const Vector twice = integrate_zoh(half, integrate_zoh(half, x0, u), u);
  CHECK((once - twice).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("divergent rollout raises a divergence error naming the substep") {
  SampledSystem sys;
  sys.state_dim = 1;
  sys.control_dim = 1;
  sys.vector_field = [](const Vector& x, const Vector&) {
    Vector dx(1);
    dx(0) = x(0) * x(0) * x(0);
    return dx;
  };
  sys.sampling_period = 0.2;
  sys.substeps = 10;
  sys.u_min = scalar(-1);
  sys.u_max = scalar(1);
  CHECK_THROWS_AS(integrate_zoh(sys, scalar(50.0), scalar(0.0)),
                  DivergenceError);
  try {
    integrate_zoh(sys, scalar(50.0), scalar(0.0));
  } catch (const DivergenceError& e) {
    CHECK(e.substep >= 0);
    CHECK(std::string(e.what()).find("substep") != std::string::npos);
  }
}

TEST_CASE("reference signal is piecewise constant from each node") {
  ReferenceSignal ref;
  ref.nodes = {{0.0, 10.0}, {5.0, 0.0}, {9.0, 10.0}, {10.0, 0.0}};
  CHECK(ref(0.0) == 10.0);
  CHECK(ref(4.999) == 10.0);
  CHECK(ref(5.0) == 0.0);
  CHECK(ref(8.0) == 0.0);
  CHECK(ref(9.5) == 10.0);
  CHECK(ref(12.0) == 0.0);
}

TEST_CASE("reference signal loads from a two-column file") {
  const std::string path = "ref_test.dat";
  {
    std::ofstream out(path);
    out << "# time value\n0 10\n5 0\n9 10\n10 0\n";
  }
  const ReferenceSignal ref = ReferenceSignal::from_file(path);
  REQUIRE(ref.nodes.size() == 4);
  CHECK(ref(4.0) == 10.0);
  CHECK(ref(6.0) == 0.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(ReferenceSignal::from_file("no_such_file.dat"),
                  std::runtime_error);
}

namespace {

Segment constant_output_segment(double value, double t0, double t1, int points) {
  Segment seg;
  seg.t0 = t0;
  seg.t1 = t1;
  for (int i = 0; i < points; ++i) {
    Vector x = Vector::Zero(5);
    x(4) = value;
    seg.states.push_back(x);
  }
  return seg;
}

}  // namespace

TEST_CASE("tracking cost vanishes on the reference") {
  ReferenceSignal ref;
  ref.nodes = {{0.0, 3.0}};
  const Segment seg = constant_output_segment(3.0, 0.0, 0.2, 11);
  CHECK(tracking_stage_cost(seg, ref) == 0.0);
}

TEST_CASE("tracking cost of constant offsets") {
  ReferenceSignal ref;
  ref.nodes = {{0.0, 0.0}};
  CHECK(tracking_stage_cost(constant_output_segment(1.0, 0.0, 0.2, 11), ref) ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(tracking_stage_cost(constant_output_segment(-2.0, 0.0, 0.2, 11), ref) ==
        doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("tracking cost rejects degenerate segments") {
  ReferenceSignal ref;
  ref.nodes = {{0.0, 0.0}};
  Segment seg;
  seg.t0 = 0.0;
  seg.t1 = 0.2;
  CHECK_THROWS_AS(tracking_stage_cost(seg, ref), std::invalid_argument);
  seg.states.push_back(Vector::Zero(5));
  CHECK_THROWS_AS(tracking_stage_cost(seg, ref), std::invalid_argument);
}

TEST_CASE("tracking cost is nonnegative on random trajectories") {
  ReferenceSignal ref;
  ref.nodes = {{0.0, 1.0}, {0.1, -2.0}};
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    Segment seg;
    seg.t0 = 0.0;
    seg.t1 = 0.2;
    const int points = 2 + static_cast<int>(rng() % 15);
    for (int i = 0; i < points; ++i) {
      Vector x(5);
      for (int j = 0; j < 5; ++j) x(j) = d(rng);
      seg.states.push_back(x);
    }
    CHECK(tracking_stage_cost(seg, ref) >= 0.0);
  }
}

TEST_CASE("quadratic cost evaluates at the segment start") {
  const StageCost cost = make_quadratic_cost(0.5);
  Segment seg;
  seg.t0 = 0.0;
  seg.t1 = 1.0;
  seg.states.push_back(vec({3.0, 4.0}));
  seg.states.push_back(vec({0.0, 0.0}));
  CHECK(cost(seg, scalar(2.0)) == 25.0 + 0.5 * 4.0);
}

TEST_CASE("scalar linear factory defines the discrete map directly") {
  const SampledSystem sys = make_scalar_linear(0.5, 2.0, -1.0, 1.0);
  CHECK(sys.discrete_map);
  const Vector next = integrate_zoh(sys, scalar(4.0), scalar(0.25));
  CHECK(next(0) == 0.5 * 4.0 + 2.0 * 0.25);
}
