#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ahmpc/config.hpp"
#include "ahmpc/trace_io.hpp"

namespace fs = std::filesystem;
using namespace ahmpc;

namespace {

struct RunOptions {
  std::string config_path;
  std::string strategy;
  std::string estimate;
  std::string out_dir;
  int compare_fixed = 0;
};

void apply_overrides(ExperimentConfig& cfg, const RunOptions& opt) {
  if (!opt.strategy.empty()) {
    if (opt.strategy == "simple") {
      cfg.adapt.prolong_strategy = ProlongStrategy::Simple;
    } else if (opt.strategy == "fixedpoint") {
      cfg.adapt.prolong_strategy = ProlongStrategy::FixedPoint;
    } else if (opt.strategy == "monotone") {
      cfg.adapt.prolong_strategy = ProlongStrategy::Monotone;
    } else {
      throw ConfigError("--strategy must be simple, fixedpoint or monotone");
    }
  }
  if (!opt.estimate.empty()) {
    if (opt.estimate == "aposteriori") {
      cfg.adapt.estimate_method = EstimateMethod::APosteriori;
    } else if (opt.estimate == "apriori") {
      cfg.adapt.estimate_method = EstimateMethod::APriori;
    } else {
      throw ConfigError("--estimate must be aposteriori or apriori");
    }
  }
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
}

void write_summary_row(std::ostream& out, const std::string& label,
                       const TraceSummary& s) {
  out << label << ": time_ms max=" << s.time_max << " min=" << s.time_min
      << " mean=" << s.time_mean << " | horizon max=" << s.horizon_max
      << " min=" << s.horizon_min << " mean=" << s.horizon_mean << "\n";
}

int run_experiment(ExperimentConfig cfg, int compare_fixed) {
  for (const std::string& line : cfg.defaults_applied) {
    std::cout << "default: " << line << "\n";
  }
  fs::create_directories(cfg.output_dir);
  const std::string dir = cfg.output_dir + "/";

  SystemBackend backend = make_backend(cfg);
  AdaptiveController controller(cfg.adapt, backend, cfg.N0);
  const ClosedLoopTrace trace = run_closed_loop(
      controller, backend, cfg.x0, cfg.steps, cfg.t0, cfg.abort_on_cap);

  emit_trace_csv(trace, dir + "trace.csv");
  emit_horizons_dat(trace, dir + "horizons.dat");
  emit_alphas_dat(trace, dir + "alphas.dat");

  const SuboptimalityReport report = report_suboptimality(trace, backend);
  {
    std::ofstream rc(dir + "report.csv");
    rc << "n,C_l,C_alpha,excluded\n";
    char buf[128];
    for (const ReportRow& row : report.rows) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", row.n, row.C_l,
                    row.C_alpha, row.excluded ? 1 : 0);
      rc << buf;
    }
  }

  const TraceSummary summary = summarize(trace);
  std::ofstream sm(dir + "summary.txt");
  write_summary_row(sm, "adaptive", summary);

  if (compare_fixed > 0) {
    ExperimentConfig fixed = cfg;
    fixed.adapt.N_min = fixed.adapt.N_max = fixed.N0 = compare_fixed;
    fixed.adapt.shorten_enabled = false;
    fixed.adapt.prolong_strategy = ProlongStrategy::Simple;
    SystemBackend fixed_backend = make_backend(fixed);
    AdaptiveController fixed_controller(fixed.adapt, fixed_backend, fixed.N0);
    const ClosedLoopTrace fixed_trace =
        run_closed_loop(fixed_controller, fixed_backend, fixed.x0, fixed.steps,
                        fixed.t0, /*abort_on_cap=*/false);
    write_summary_row(sm, "fixed N=" + std::to_string(compare_fixed),
                      summarize(fixed_trace));
  }

  sm << "C_l min=" << report.cl_min << " max=" << report.cl_max
     << " | C_alpha min=" << report.ca_min << " max=" << report.ca_max
     << " | alpha_C=" << report.alpha_C << " (N*=" << report.n_star << ")\n";
  sm.close();

  std::cout << "wrote " << dir
            << "{trace.csv, summary.txt, report.csv, horizons.dat, alphas.dat}"
            << std::endl;
  if (trace.cap_hit) {
    std::cerr << "horizon cap N_max=" << cfg.adapt.N_max
              << " hit without certification" << std::endl;
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-horizon NMPC with certified suboptimality"};
  app.require_subcommand(1);

  RunOptions opt;
  CLI::App* run = app.add_subcommand("run", "Run one closed-loop experiment");
  run->add_option("--config", opt.config_path, "Experiment config file")
      ->required();
  run->add_option("--strategy", opt.strategy,
                  "Override prolong_strategy (simple|fixedpoint|monotone)");
  run->add_option("--estimate", opt.estimate,
                  "Override estimate_method (aposteriori|apriori)");
  run->add_option("--out", opt.out_dir, "Override output_dir");
  run->add_option("--compare-fixed", opt.compare_fixed,
                  "Also run a fixed-horizon baseline with this N");

  std::vector<std::string> batch_configs;
  CLI::App* batch =
      app.add_subcommand("batch", "Run several experiments in sequence");
  batch->add_option("configs", batch_configs, "Config files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = parse_config_file(opt.config_path);
      apply_overrides(cfg, opt);
      return run_experiment(std::move(cfg), opt.compare_fixed);
    }
    int worst = 0;
    for (const std::string& path : batch_configs) {
      ExperimentConfig cfg = parse_config_file(path);
      std::cout << "== " << path << " ==\n";
      worst = std::max(worst, run_experiment(std::move(cfg), 0));
    }
    return worst;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
