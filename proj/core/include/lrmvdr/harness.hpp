#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lrmvdr/beamformer.hpp"
#include "lrmvdr/config.hpp"
#include "lrmvdr/metrics.hpp"
#include "lrmvdr/signal.hpp"

namespace lrmvdr {

/// Bookkeeping shared by every experiment: the worst distortionless error
/// over all weight vectors produced, and how many times a degenerate update
/// forced a reinitialization.
struct RunStats {
  double max_distortionless_error = 0.0;
  std::int64_t weight_vectors = 0;
  std::int64_t forced_reinits = 0;

  void record(const BeamWeights& w, const ComplexVector& a);
  void merge(const RunStats& other);
};

/// Scenario for one (M, L, trial) cell: per-trial DoAs (unless fixed in the
/// template) and a derived stream seed.
ScenarioConfig make_scenario(const ExperimentConfig& cfg, int m, int l, std::uint64_t trial_seed);
std::uint64_t trial_seed(const ExperimentConfig& cfg, int m, int l, int trial);

/// Output of running one scenario through both engines over n_steps samples.
struct CellRun {
  std::optional<BeamWeights> exact;
  std::optional<BeamWeights> lowrank;
  double final_target_doa_deg = 0.0;
  std::vector<double> final_interferer_doas_deg;
  RunStats stats;
};

/// Called once per processed sample with whichever weights were computed.
using StepObserver = std::function<void(std::int64_t t, const BeamWeights* exact,
                                        const BeamWeights* lowrank)>;

/// Initializes the selected engines on the first window_m snapshots, then
/// processes samples window_m..n_steps-1 recomputing weights every step. The
/// exact engine is the sliding-window sample covariance with direct
/// inversion; the low-rank engine follows the K-subspace recursion and is
/// rebuilt from the trailing window at cfg.reinit_step (or whenever an
/// update degenerates). Both consume the same snapshot stream.
CellRun run_cell(const ExperimentConfig& cfg, const ScenarioConfig& scenario,
                 const StepObserver& observer = {});

struct MetricRow {
  int m = 0;
  int l = 0;
  int trial = 0;
  Engine engine = Engine::Exact;
  std::uint64_t seed = 0;
  double target_doa_deg = 0.0;
  std::vector<double> interferer_doas_deg;
  std::optional<BeamMetrics> metrics;
  std::string status = "ok";
};

struct PatternRecord {
  int m = 0;
  int l = 0;
  int trial = 0;
  Engine engine = Engine::Exact;
  std::uint64_t seed = 0;
  std::string regime;  // failure-mode only
  Beampattern pattern;
};

struct BeampatternResult {
  std::vector<MetricRow> rows;
  std::vector<PatternRecord> patterns;
  RunStats stats;
};

BeampatternResult run_beampattern_experiment(const ExperimentConfig& cfg);

struct TimingRecord {
  int m = 0;
  Engine engine = Engine::Exact;
  double per_step_seconds = 0.0;  // fastest batch
  std::int64_t steps_measured = 0;
};

struct TimingResult {
  std::vector<TimingRecord> records;
  std::optional<double> exact_slope;
  std::optional<double> lowrank_slope;
  int fit_min_m = 0;
  int fit_max_m = 0;
  RunStats stats;
};

TimingResult run_timing_experiment(const ExperimentConfig& cfg);

/// Least-squares slope of log(seconds) against log(M) over records of one
/// engine with M >= (min M + max M) / 2.
std::optional<double> loglog_slope(const std::vector<TimingRecord>& records, Engine engine,
                                   int* fit_min_m = nullptr, int* fit_max_m = nullptr);

struct SinrTrace {
  std::vector<std::int64_t> steps;
  std::vector<double> gain_db;
};

struct SinrGainSummary {
  double slope_before_db_per_step = 0.0;
  double mean_before_db = 0.0;  // 500 steps preceding reinit
  double mean_after_db = 0.0;   // 500 steps following reinit
  std::optional<double> control_slope_db_per_step;
};

struct SinrGainResult {
  int m = 0;
  int l = 0;
  double input_sinr_db = 0.0;
  SinrTrace trace;                    // mean over trials
  std::optional<SinrTrace> control;   // zero-drift, same seeds
  SinrGainSummary summary;
  RunStats stats;
};

SinrGainResult run_sinr_gain_experiment(const ExperimentConfig& cfg);

/// Least-squares slope of y against x.
double linear_slope(const std::vector<double>& x, const std::vector<double>& y);

struct FailureModeRow {
  int trial = 0;
  std::string regime;  // "high-snr" or "low-snr"
  double input_sinr_db = 0.0;
  std::size_t interferer = 0;
  double exact_null_db = 0.0;
  double lowrank_null_db = 0.0;
  // Positive when the exact engine's null is deeper: lowrank_null - exact_null.
  double gap_db = 0.0;
};

struct FailureModeResult {
  int m = 0;
  int l = 0;
  std::vector<FailureModeRow> rows;
  std::vector<PatternRecord> patterns;
  double high_fraction_positive = 0.0;
  double high_median_gap_db = 0.0;
  double low_median_gap_db = 0.0;
  RunStats stats;
};

FailureModeResult run_failure_mode_experiment(const ExperimentConfig& cfg);

}  // namespace lrmvdr
