#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "lrmvdr/array.hpp"
#include "lrmvdr/linalg.hpp"

namespace lrmvdr {

/// Seedable generator with a bit-exact, platform-independent stream.
/// Uses mt19937_64 for raw bits and Box-Muller for Gaussians (the standard
/// distributions are implementation-defined, so they are avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in (0, 1].
  double uniform();
  double uniform(double lo, double hi);
  /// Circular complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance);

 private:
  std::mt19937_64 engine_;
};

/// Deterministically mixes a base seed with a list of keys (splitmix64), so
/// each trial/cell gets an independent but reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

enum class Waveform { LinearChirp, ComplexGaussian };

/// DoAs are piecewise constant over blocks of this many samples.
inline constexpr std::int64_t kDriftBlockSamples = 1000;

struct SourceSpec {
  double initial_doa_deg = 0.0;
  double doa_drift_deg = 0.0;  // per kDriftBlockSamples samples
  Waveform waveform = Waveform::ComplexGaussian;
  // Explicit linear power. When unset, the scenario's power budget decides.
  std::optional<double> power;
};

double doa_at(const SourceSpec& spec, std::int64_t t);

struct ChirpParams {
  double bandwidth_hz = 1e5;
  double duration_s = 0.1;
};

/// Unit-modulus baseband LFM sample exp(j pi (B/T) tau^2), tau = t / fs.
/// Requires bandwidth <= sample_rate and 0 <= tau < duration.
Complex chirp_sample(std::int64_t t, double bandwidth_hz, double duration_s, double sample_rate_hz);

/// Everything needed to synthesize a received snapshot stream.
///
/// Power budget: with noise variance s2, the target gets s2 * 10^(snr_db/10)
/// and the L interferers share equally whatever interference is needed for
/// P_target / (P_interference_total + s2) = 10^(sinr_db/10). With no
/// interferers SNR and SINR coincide and `sinr_db` sets the target power.
/// Explicit `SourceSpec::power` values override the budget.
struct ScenarioConfig {
  ArrayGeometry geometry{50};
  SourceSpec target{0.0, 0.0, Waveform::LinearChirp, std::nullopt};
  std::vector<SourceSpec> interferers;
  double noise_variance = 1.0;
  double sinr_db = -10.0;
  double snr_db = -9.5;
  double sample_rate_hz = 1e6;
  ChirpParams chirp;
  int window_m = 1000;
  std::uint64_t seed = 1;

  void validate() const;

  double target_power() const;
  double interferer_power(std::size_t l) const;
  double total_interference_power() const;
  /// Per-element target / (interference + noise), from the resolved powers.
  double input_sinr_db() const;
};

struct Snapshot {
  ComplexVector data;
  std::int64_t index = 0;
};

/// One draw of x_t = a(th0(t)) s0(t) + sum_l a(thl(t)) sl(t) + n(t). Random
/// draws are consumed from `rng` in a fixed order: target waveform (if
/// Gaussian), interferers in order, then the M noise entries.
Snapshot synthesize_snapshot(const ScenarioConfig& cfg, std::int64_t t, Rng& rng);

/// Ground-truth covariance at time t: structured as sum_i P_i a_i a_i^H + s2 I
/// so quadratic forms cost O(M (L+1)) instead of O(M^2).
class AnalyticCovariance {
 public:
  struct Term {
    double power;
    ComplexVector steering;
  };

  AnalyticCovariance(std::vector<Term> terms, double noise_variance);

  /// w^H R w.
  double quadratic(const ComplexVector& w) const;
  HermitianMatrix dense() const;
  /// Same covariance with the first term (the target) removed.
  AnalyticCovariance without_first_term() const;

  const std::vector<Term>& terms() const noexcept { return terms_; }
  double noise_variance() const noexcept { return noise_variance_; }

 private:
  std::vector<Term> terms_;
  double noise_variance_;
};

/// Target first, then interferers, at their DoAs for sample t.
AnalyticCovariance analytic_covariance(const ScenarioConfig& cfg, std::int64_t t);

/// Stateful snapshot stream over a scenario. Single owner; steering vectors
/// are cached per drift block.
class SignalGenerator {
 public:
  explicit SignalGenerator(ScenarioConfig cfg);

  Snapshot next();
  std::vector<Snapshot> take(std::size_t n);

  std::int64_t position() const noexcept { return t_; }
  const ScenarioConfig& config() const noexcept { return cfg_; }

 private:
  const ComplexVector& steering_for(std::size_t source, std::int64_t t);

  ScenarioConfig cfg_;
  Rng rng_;
  std::int64_t t_ = 0;
  std::vector<double> amplitudes_;
  std::vector<std::int64_t> cached_block_;
  std::vector<ComplexVector> cached_steering_;
};

/// Draws `count` angles uniformly in [lo, hi] with pairwise separation of at
/// least `min_separation_deg`, by rejection sampling.
std::vector<double> draw_separated_doas(Rng& rng, std::size_t count, double lo, double hi,
                                        double min_separation_deg);

}  // namespace lrmvdr
