#include "lrmvdr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "lrmvdr/error.hpp"

namespace lrmvdr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::int64_t pulse_samples(const ScenarioConfig& cfg) {
  return std::max<std::int64_t>(1, std::llround(cfg.chirp.duration_s * cfg.sample_rate_hz));
}

Complex waveform_sample(const ScenarioConfig& cfg, const SourceSpec& src, std::int64_t t,
                        Rng& rng) {
  if (src.waveform == Waveform::LinearChirp) {
    return chirp_sample(t % pulse_samples(cfg), cfg.chirp.bandwidth_hz, cfg.chirp.duration_s,
                        cfg.sample_rate_hz);
  }
  return rng.complex_normal(1.0);
}

template <typename SteeringFn>
Snapshot synthesize(const ScenarioConfig& cfg, std::int64_t t, Rng& rng,
                    const std::vector<double>& amplitudes, SteeringFn&& steering) {
  const int m = cfg.geometry.num_elements();
  Snapshot snap{ComplexVector::Zero(m), t};
  snap.data.noalias() += (amplitudes[0] * waveform_sample(cfg, cfg.target, t, rng)) * steering(0);
  for (std::size_t l = 0; l < cfg.interferers.size(); ++l) {
    const Complex s = amplitudes[l + 1] * waveform_sample(cfg, cfg.interferers[l], t, rng);
    snap.data.noalias() += s * steering(l + 1);
  }
  for (int k = 0; k < m; ++k) {
    snap.data(k) += rng.complex_normal(cfg.noise_variance);
  }
  return snap;
}

std::vector<double> source_amplitudes(const ScenarioConfig& cfg) {
  std::vector<double> amps;
  amps.reserve(cfg.interferers.size() + 1);
  amps.push_back(std::sqrt(cfg.target_power()));
  for (std::size_t l = 0; l < cfg.interferers.size(); ++l) {
    amps.push_back(std::sqrt(cfg.interferer_power(l)));
  }
  return amps;
}

const SourceSpec& source_at(const ScenarioConfig& cfg, std::size_t i) {
  return i == 0 ? cfg.target : cfg.interferers[i - 1];
}

}  // namespace

double Rng::uniform() {
  // 53 random mantissa bits, shifted into (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * (uniform() - 0x1.0p-53); }

Complex Rng::complex_normal(double variance) {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-variance * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

double doa_at(const SourceSpec& spec, std::int64_t t) {
  const auto blocks = static_cast<double>(t / kDriftBlockSamples);
  return spec.initial_doa_deg + spec.doa_drift_deg * blocks;
}

Complex chirp_sample(std::int64_t t, double bandwidth_hz, double duration_s,
                     double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0) || !(duration_s > 0.0) || bandwidth_hz < 0.0) {
    throw InvalidArgument("chirp needs positive sample rate, positive duration, bandwidth >= 0");
  }
  if (bandwidth_hz > sample_rate_hz) {
    throw InvalidArgument(fmt::format(
        "chirp bandwidth {} Hz exceeds sample rate {} Hz; the baseband sweep would alias",
        bandwidth_hz, sample_rate_hz));
  }
  const double tau = static_cast<double>(t) / sample_rate_hz;
  if (t < 0 || !(tau < duration_s)) {
    throw InvalidArgument(
        fmt::format("chirp time {} s outside pulse [0, {}) s", tau, duration_s));
  }
  const double rate = bandwidth_hz / duration_s;
  return std::polar(1.0, std::numbers::pi * rate * tau * tau);
}

void ScenarioConfig::validate() const {
  if (window_m < 1) throw InvalidArgument("window_m must be >= 1");
  if (!(noise_variance > 0.0)) throw InvalidArgument("noise_variance must be > 0");
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample_rate_hz must be > 0");
  if (chirp.bandwidth_hz > sample_rate_hz) {
    throw InvalidArgument(fmt::format("chirp bandwidth {} Hz exceeds sample rate {} Hz",
                                      chirp.bandwidth_hz, sample_rate_hz));
  }
  std::vector<double> doas;
  doas.push_back(target.initial_doa_deg);
  for (const auto& s : interferers) doas.push_back(s.initial_doa_deg);
  for (double d : doas) {
    if (!(d > -90.0 && d < 90.0)) {
      throw InvalidArgument(fmt::format("DoA {} deg outside (-90, 90)", d));
    }
  }
  for (std::size_t i = 0; i < doas.size(); ++i) {
    for (std::size_t j = i + 1; j < doas.size(); ++j) {
      if (std::abs(doas[i] - doas[j]) < 0.5) {
        throw InvalidArgument(fmt::format("DoAs {} and {} deg closer than 0.5 deg", doas[i],
                                          doas[j]));
      }
    }
  }
  if (target.power && *target.power < 0.0) throw InvalidArgument("target power must be >= 0");
  for (std::size_t l = 0; l < interferers.size(); ++l) {
    const double p = interferer_power(l);
    if (!(p > 0.0) && !interferers[l].power) {
      throw InvalidArgument(fmt::format(
          "power budget infeasible: snr_db={} and sinr_db={} leave no interference power",
          snr_db, sinr_db));
    }
    if (p < 0.0) throw InvalidArgument("interferer power must be >= 0");
  }
}

double ScenarioConfig::target_power() const {
  if (target.power) return *target.power;
  const double db = interferers.empty() ? sinr_db : snr_db;
  return noise_variance * db_to_linear(db);
}

double ScenarioConfig::interferer_power(std::size_t l) const {
  const auto& spec = interferers.at(l);
  if (spec.power) return *spec.power;
  // Budgeted interferers split what is left after explicit ones.
  double explicit_total = 0.0;
  std::size_t budgeted = 0;
  for (const auto& s : interferers) {
    if (s.power) {
      explicit_total += *s.power;
    } else {
      ++budgeted;
    }
  }
  const double needed = target_power() / db_to_linear(sinr_db) - noise_variance - explicit_total;
  return needed / static_cast<double>(budgeted);
}

double ScenarioConfig::total_interference_power() const {
  double total = 0.0;
  for (std::size_t l = 0; l < interferers.size(); ++l) total += interferer_power(l);
  return total;
}

double ScenarioConfig::input_sinr_db() const {
  return 10.0 * std::log10(target_power() / (total_interference_power() + noise_variance));
}

Snapshot synthesize_snapshot(const ScenarioConfig& cfg, std::int64_t t, Rng& rng) {
  const auto amps = source_amplitudes(cfg);
  return synthesize(cfg, t, rng, amps, [&](std::size_t i) {
    return steering_vector(cfg.geometry, doa_at(source_at(cfg, i), t));
  });
}

AnalyticCovariance::AnalyticCovariance(std::vector<Term> terms, double noise_variance)
    : terms_(std::move(terms)), noise_variance_(noise_variance) {}

double AnalyticCovariance::quadratic(const ComplexVector& w) const {
  double q = noise_variance_ * w.squaredNorm();
  for (const auto& term : terms_) q += term.power * std::norm(w.dot(term.steering));
  return q;
}

HermitianMatrix AnalyticCovariance::dense() const {
  if (terms_.empty()) throw InvalidArgument("analytic covariance has no terms");
  const Index m = terms_.front().steering.size();
  ComplexMatrix r = noise_variance_ * ComplexMatrix::Identity(m, m);
  for (const auto& term : terms_) r.noalias() += term.power * term.steering * term.steering.adjoint();
  return HermitianMatrix::symmetrize(r);
}

AnalyticCovariance AnalyticCovariance::without_first_term() const {
  std::vector<Term> rest(terms_.begin() + (terms_.empty() ? 0 : 1), terms_.end());
  return AnalyticCovariance(std::move(rest), noise_variance_);
}

AnalyticCovariance analytic_covariance(const ScenarioConfig& cfg, std::int64_t t) {
  std::vector<AnalyticCovariance::Term> terms;
  terms.push_back({cfg.target_power(), steering_vector(cfg.geometry, doa_at(cfg.target, t))});
  for (std::size_t l = 0; l < cfg.interferers.size(); ++l) {
    terms.push_back({cfg.interferer_power(l),
                     steering_vector(cfg.geometry, doa_at(cfg.interferers[l], t))});
  }
  return AnalyticCovariance(std::move(terms), cfg.noise_variance);
}

SignalGenerator::SignalGenerator(ScenarioConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
  amplitudes_ = source_amplitudes(cfg_);
  const std::size_t n = cfg_.interferers.size() + 1;
  cached_block_.assign(n, -1);
  cached_steering_.resize(n);
}

const ComplexVector& SignalGenerator::steering_for(std::size_t source, std::int64_t t) {
  const std::int64_t block = t / kDriftBlockSamples;
  if (cached_block_[source] != block) {
    cached_steering_[source] = steering_vector(cfg_.geometry, doa_at(source_at(cfg_, source), t));
    cached_block_[source] = block;
  }
  return cached_steering_[source];
}

Snapshot SignalGenerator::next() {
  const std::int64_t t = t_++;
  return synthesize(cfg_, t, rng_, amplitudes_,
                    [&](std::size_t i) -> const ComplexVector& { return steering_for(i, t); });
}

std::vector<Snapshot> SignalGenerator::take(std::size_t n) {
  std::vector<Snapshot> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

std::vector<double> draw_separated_doas(Rng& rng, std::size_t count, double lo, double hi,
                                        double min_separation_deg) {
  if (!(hi > lo)) throw InvalidArgument("DoA range must be non-empty");
  const double span = hi - lo;
  if (count > 1 && min_separation_deg * static_cast<double>(count - 1) > span) {
    throw InvalidArgument(fmt::format("cannot place {} DoAs {} deg apart within [{}, {}]", count,
                                      min_separation_deg, lo, hi));
  }
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<double> doas;
    doas.reserve(count);
    bool ok = true;
    for (std::size_t i = 0; i < count && ok; ++i) {
      const double d = rng.uniform(lo, hi);
      for (double prev : doas) {
        if (std::abs(prev - d) < min_separation_deg) {
          ok = false;
          break;
        }
      }
      doas.push_back(d);
    }
    if (ok) return doas;
  }
  throw InvalidArgument("DoA rejection sampling did not converge");
}

}  // namespace lrmvdr
