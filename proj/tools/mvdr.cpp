// mvdr: experiment runner for the exact and low-rank MVDR engines.
//
//   mvdr <beampattern|timing|sinr-gain|failure-mode> [--config FILE] [--out DIR]
//        [--seed N] [--engine exact|lowrank|both]

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lrmvdr/config.hpp"
#include "lrmvdr/error.hpp"
#include "lrmvdr/harness.hpp"
#include "lrmvdr/output.hpp"

namespace {

using namespace lrmvdr;

void print_summary(const BeampatternResult& r) {
  std::size_t failed = 0;
  for (const auto& row : r.rows) failed += row.metrics ? 0 : 1;
  fmt::print("beampattern: {} metric rows ({} without a main-lobe peak)\n", r.rows.size(), failed);
}

void print_summary(const TimingResult& r) {
  for (const auto& t : r.records) {
    fmt::print("timing: M={:4d} {:8s} {:.3e} s/step ({} steps)\n", t.m, to_string(t.engine),
               t.per_step_seconds, t.steps_measured);
  }
  if (r.exact_slope) fmt::print("log-log slope exact:   {:.3f}\n", *r.exact_slope);
  if (r.lowrank_slope) fmt::print("log-log slope lowrank: {:.3f}\n", *r.lowrank_slope);
}

void print_summary(const SinrGainResult& r) {
  fmt::print("sinr-gain: M={} L={} input SINR {:.2f} dB\n", r.m, r.l, r.input_sinr_db);
  fmt::print("  slope before reinit {:.3e} dB/step, mean before {:.3f} dB, after {:.3f} dB\n",
             r.summary.slope_before_db_per_step, r.summary.mean_before_db, r.summary.mean_after_db);
  if (r.summary.control_slope_db_per_step) {
    fmt::print("  zero-drift control slope {:.3e} dB/step\n", *r.summary.control_slope_db_per_step);
  }
}

void print_summary(const FailureModeResult& r) {
  fmt::print("failure-mode: M={} L={}; high-SNR gap > 0 in {:.0f}% of rows, median gap {:.2f} dB "
             "(low-SNR median {:.2f} dB)\n",
             r.m, r.l, 100.0 * r.high_fraction_positive, r.high_median_gap_db, r.low_median_gap_db);
}

template <typename Result>
int finish(const ExperimentConfig& cfg, const Result& result,
           std::chrono::system_clock::time_point started) {
  ManifestInfo info;
  info.started = started;
  info.outputs = write_outputs(cfg, result);
  info.finished = std::chrono::system_clock::now();
  info.stats = result.stats;
  const auto manifest = write_manifest(cfg, info);
  print_summary(result);
  fmt::print("max |w^H a - 1| = {:.2e} over {} weight vectors\n",
             result.stats.max_distortionless_error, result.stats.weight_vectors);
  fmt::print("wrote {} files and {}\n", info.outputs.size(), manifest.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and low-rank recursive MVDR beamforming experiments"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string engine;

  app.add_option("experiment", experiment, "beampattern | timing | sinr-gain | failure-mode")
      ->required();
  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--engine", engine, "exact | lowrank | both")
      ->check(CLI::IsMember({"exact", "lowrank", "both"}));
  CLI11_PARSE(app, argc, argv);

  try {
    const auto kind = parse_experiment(experiment);
    ExperimentConfig cfg =
        config_path.empty() ? default_config(kind) : load_config(config_path, kind);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (!engine.empty()) cfg.engines = parse_engine_selection(engine);
    cfg.validate();

    const auto started = std::chrono::system_clock::now();
    switch (kind) {
      case ExperimentKind::Beampattern:
        return finish(cfg, run_beampattern_experiment(cfg), started);
      case ExperimentKind::Timing:
        return finish(cfg, run_timing_experiment(cfg), started);
      case ExperimentKind::SinrGain:
        return finish(cfg, run_sinr_gain_experiment(cfg), started);
      case ExperimentKind::FailureMode:
        return finish(cfg, run_failure_mode_experiment(cfg), started);
    }
  } catch (const lrmvdr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lrmvdr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
