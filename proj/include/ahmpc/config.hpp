#pragma once

#include <string>

#include "ahmpc/backend.hpp"
#include "ahmpc/cloop.hpp"

namespace ahmpc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fully validated experiment description parsed from the line-oriented
/// `key = value` config format (# comments, unknown keys rejected).
struct ExperimentConfig {
  std::string model;  // arp | scalar_linear | double_integrator
  double T = 0.2;
  int substeps = 10;
  Vector x0;
  int steps = 0;
  double t0 = 0.0;
  Vector u_min, u_max;  // sized on build when left empty

  // reference signal: inline nodes or a file path (two columns: time value)
  ReferenceSignal reference;
  std::string reference_file;
  bool reference_set = false;

  ArpParameters arp;
  double arp_rho = 0.0;        // control penalty weight on the tracking cost
  double arp_smoothing = 0.0;  // pseudo-Huber width for the tracking error
  double scalar_a = 1.0;
  double scalar_b = 1.0;
  double scalar_rho = 0.0;

  AdaptationConfig adapt;
  int N0 = 2;

  SolverConfig solver;
  bool has_oracle_grid = false;
  double oracle_lo = 0.0, oracle_hi = 0.0;
  int oracle_count = 0;

  std::string output_dir = "out";
  bool abort_on_cap = true;

  /// `key = value` lines for every default that was applied, echoed into the
  /// run log.
  std::vector<std::string> defaults_applied;
};

/// Parses and validates config text. Errors carry the offending line number.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig parse_config_file(const std::string& path);

/// Instantiates the configured model and stage cost as a solver backend.
SystemBackend make_backend(const ExperimentConfig& cfg);

}  // namespace ahmpc
