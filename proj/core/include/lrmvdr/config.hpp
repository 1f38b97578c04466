#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrmvdr/metrics.hpp"
#include "lrmvdr/signal.hpp"

namespace lrmvdr {

enum class ExperimentKind { Beampattern, Timing, SinrGain, FailureMode };
enum class EngineSelection { Exact, LowRank, Both };

std::string_view to_string(ExperimentKind k) noexcept;
std::string_view to_string(EngineSelection e) noexcept;
ExperimentKind parse_experiment(std::string_view s);
EngineSelection parse_engine_selection(std::string_view s);

bool runs_engine(EngineSelection sel, Engine e) noexcept;

/// Scenario settings shared by every trial; DoAs are drawn per trial unless
/// fixed here.
struct ScenarioTemplate {
  double noise_variance = 1.0;
  double sinr_db = -10.0;
  double snr_db = -9.5;
  double sample_rate_hz = 1e6;
  ChirpParams chirp;
  int window_m = 1000;
  double doa_drift_deg = 0.01;  // per 1000 samples
  double doa_min_deg = -30.0;
  double doa_max_deg = 30.0;
  double min_separation_deg = 2.0;
  std::optional<double> target_doa_deg;
  std::vector<double> interferer_doas_deg;
};

struct TimingSettings {
  int warmup_steps = 100;
  int steps = 10000;
  double max_seconds_per_point = 2.0;
  double min_batch_seconds = 1e-3;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Beampattern;
  ScenarioTemplate scenario;
  std::vector<int> m_list;
  std::vector<int> l_list;
  int rank_k = 10;
  double alpha = 0.99;
  // Total samples per run, the initialization window included.
  int n_steps = 2000;
  // Absolute sample index at which the low-rank state is rebuilt.
  std::optional<int> reinit_step;
  int trials = 1;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  EngineSelection engines = EngineSelection::Both;

  double grid_step_deg = kDefaultGridStepDeg;
  MainLobeRule mlw_rule = MainLobeRule::HalfPower;
  SinrDenominator sinr_denominator = SinrDenominator::TotalCovariance;
  bool emit_all_patterns = false;
  double diagonal_loading = 0.0;

  bool zero_drift_control = true;  // sinr-gain
  double high_snr_db = 10.0;       // failure-mode
  TimingSettings timing;

  void validate() const;
};

/// Defaults for each experiment, matching the published setup: alpha 0.99,
/// K 10, m 1000, SINR -10 dB, drift 0.01 deg per 1000 samples.
ExperimentConfig default_config(ExperimentKind kind);

/// Reads a JSON config. Keys that are absent keep the experiment defaults;
/// unknown keys are rejected. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> kind = std::nullopt);
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig parse_config(std::string_view json_text, std::optional<ExperimentKind> kind);

/// Canonical JSON of the resolved config (output_dir excluded).
std::string canonical_json(const ExperimentConfig& cfg);
/// 16 hex digits of FNV-1a over canonical_json.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace lrmvdr
