#include "lrmvdr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>

#include <fmt/format.h>

#include "lrmvdr/covariance.hpp"
#include "lrmvdr/error.hpp"
#include "lrmvdr/lowrank.hpp"

namespace lrmvdr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Draws `count` DoAs in the template's range that keep min separation from
// each other and from every pinned angle.
std::vector<double> draw_doas_around(Rng& rng, const ScenarioTemplate& s, std::size_t count,
                                     const std::vector<double>& pinned) {
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<double> all = pinned;
    std::vector<double> drawn;
    bool ok = true;
    for (std::size_t i = 0; i < count && ok; ++i) {
      const double d = rng.uniform(s.doa_min_deg, s.doa_max_deg);
      for (double prev : all) {
        if (std::abs(prev - d) < s.min_separation_deg) {
          ok = false;
          break;
        }
      }
      all.push_back(d);
      drawn.push_back(d);
    }
    if (ok) return drawn;
  }
  throw ConfigError("could not place DoAs with the requested separation");
}

class SteeringCache {
 public:
  SteeringCache(const ArrayGeometry& geom, const SourceSpec& src) : geom_(geom), src_(src) {}

  const ComplexVector& at(std::int64_t t) {
    const std::int64_t block = t / kDriftBlockSamples;
    if (block != block_) {
      doa_ = doa_at(src_, t);
      a_ = steering_vector(geom_, doa_);
      block_ = block;
    }
    return a_;
  }
  double doa(std::int64_t t) {
    at(t);
    return doa_;
  }

 private:
  ArrayGeometry geom_;
  SourceSpec src_;
  std::int64_t block_ = -1;
  double doa_ = 0.0;
  ComplexVector a_;
};

MetricOptions metric_options(const ExperimentConfig& cfg) {
  MetricOptions o;
  o.mlw_rule = cfg.mlw_rule;
  return o;
}

SinrTrace mean_trace(const std::vector<double>& sums, int trials, std::int64_t first_step) {
  SinrTrace t;
  t.steps.resize(sums.size());
  t.gain_db.resize(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) {
    t.steps[i] = first_step + static_cast<std::int64_t>(i);
    t.gain_db[i] = sums[i] / trials;
  }
  return t;
}

double trace_slope(const SinrTrace& tr, std::int64_t lo, std::int64_t hi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    if (tr.steps[i] >= lo && tr.steps[i] < hi) {
      x.push_back(static_cast<double>(tr.steps[i]));
      y.push_back(tr.gain_db[i]);
    }
  }
  if (x.size() < 2) return 0.0;
  return linear_slope(x, y);
}

double trace_mean(const SinrTrace& tr, std::int64_t lo, std::int64_t hi) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    if (tr.steps[i] >= lo && tr.steps[i] < hi) {
      sum += tr.gain_db[i];
      ++n;
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

template <typename StepFn>
TimingRecord time_engine(Engine engine, int m, const TimingSettings& ts,
                         const std::vector<Snapshot>& pool, StepFn&& step) {
  std::size_t cursor = 0;
  auto run = [&](std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) {
      step(pool[cursor]);
      cursor = (cursor + 1) % pool.size();
    }
  };

  const auto warm_start = Clock::now();
  for (int i = 0; i < ts.warmup_steps; ++i) {
    run(1);
    if (seconds_since(warm_start) > 0.25 * ts.max_seconds_per_point) break;
  }

  // Grow the batch until one batch spans at least min_batch_seconds.
  std::int64_t batch = 1;
  for (;;) {
    const auto t0 = Clock::now();
    run(batch);
    if (seconds_since(t0) >= ts.min_batch_seconds || batch >= (std::int64_t{1} << 20)) break;
    batch *= 2;
  }

  std::vector<double> per_step;
  std::int64_t measured = 0;
  const auto start = Clock::now();
  while (per_step.size() < 3 ||
         (measured < ts.steps && seconds_since(start) < ts.max_seconds_per_point)) {
    const auto t0 = Clock::now();
    run(batch);
    per_step.push_back(seconds_since(t0) / static_cast<double>(batch));
    measured += batch;
  }
  return TimingRecord{m, engine, *std::min_element(per_step.begin(), per_step.end()), measured};
}

}  // namespace

void RunStats::record(const BeamWeights& w, const ComplexVector& a) {
  max_distortionless_error = std::max(max_distortionless_error, distortionless_error(w, a));
  ++weight_vectors;
}

void RunStats::merge(const RunStats& other) {
  max_distortionless_error = std::max(max_distortionless_error, other.max_distortionless_error);
  weight_vectors += other.weight_vectors;
  forced_reinits += other.forced_reinits;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, int m, int l, int trial) {
  return derive_seed(cfg.seed, {static_cast<std::uint64_t>(cfg.experiment),
                                static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(l),
                                static_cast<std::uint64_t>(trial)});
}

ScenarioConfig make_scenario(const ExperimentConfig& cfg, int m, int l, std::uint64_t seed) {
  const auto& t = cfg.scenario;
  Rng doa_rng(derive_seed(seed, {1}));

  double target_doa = 0.0;
  std::vector<double> interferer_doas;
  if (t.target_doa_deg) {
    target_doa = *t.target_doa_deg;
    interferer_doas = t.interferer_doas_deg.empty()
                          ? draw_doas_around(doa_rng, t, static_cast<std::size_t>(l), {target_doa})
                          : t.interferer_doas_deg;
  } else if (!t.interferer_doas_deg.empty()) {
    interferer_doas = t.interferer_doas_deg;
    target_doa = draw_doas_around(doa_rng, t, 1, interferer_doas).front();
  } else {
    auto all = draw_doas_around(doa_rng, t, static_cast<std::size_t>(l) + 1, {});
    target_doa = all.front();
    interferer_doas.assign(all.begin() + 1, all.end());
  }

  ScenarioConfig sc;
  sc.geometry = ArrayGeometry(m);
  sc.target = SourceSpec{target_doa, t.doa_drift_deg, Waveform::LinearChirp, std::nullopt};
  for (double d : interferer_doas) {
    sc.interferers.push_back(SourceSpec{d, t.doa_drift_deg, Waveform::ComplexGaussian, std::nullopt});
  }
  sc.noise_variance = t.noise_variance;
  sc.sinr_db = t.sinr_db;
  sc.snr_db = t.snr_db;
  sc.sample_rate_hz = t.sample_rate_hz;
  sc.chirp = t.chirp;
  sc.window_m = t.window_m;
  sc.seed = derive_seed(seed, {2});
  sc.validate();
  return sc;
}

CellRun run_cell(const ExperimentConfig& cfg, const ScenarioConfig& scenario,
                 const StepObserver& observer) {
  const bool want_exact = runs_engine(cfg.engines, Engine::Exact);
  const bool want_lowrank = runs_engine(cfg.engines, Engine::LowRank);
  const auto m = static_cast<std::size_t>(scenario.window_m);

  SignalGenerator gen(scenario);
  std::vector<Snapshot> init = gen.take(m);
  SteeringCache target(scenario.geometry, scenario.target);

  CellRun out;
  std::optional<SlidingWindowCovariance> window;
  std::optional<LowRankState> lowrank;
  std::deque<Snapshot> recent;
  if (want_exact) window.emplace(init);
  if (want_lowrank) {
    lowrank = LowRankState::initialize(
        load_diagonal(sample_covariance(init), cfg.diagonal_loading), cfg.rank_k, cfg.alpha);
    recent.assign(init.begin(), init.end());
  }
  auto rebuild_lowrank = [&] {
    const std::vector<Snapshot> trailing(recent.begin(), recent.end());
    *lowrank = LowRankState::initialize(
        load_diagonal(sample_covariance(trailing), cfg.diagonal_loading), cfg.rank_k, cfg.alpha);
  };

  auto exact_weights = [&](std::int64_t t) {
    const auto rinv = invert_hermitian(load_diagonal(window->covariance(), cfg.diagonal_loading));
    out.exact = mvdr_weights(rinv, target.at(t), target.doa(t));
    out.stats.record(*out.exact, target.at(t));
  };
  auto lowrank_weights_at = [&](std::int64_t t) {
    out.lowrank = lowrank_weights(*lowrank, target.at(t), target.doa(t));
    out.stats.record(*out.lowrank, target.at(t));
  };

  const auto n = static_cast<std::int64_t>(cfg.n_steps);
  const auto first = static_cast<std::int64_t>(m);
  if (n == first) {
    // No adaptive steps: weights straight from the initialization window.
    if (want_exact) exact_weights(first - 1);
    if (want_lowrank) lowrank_weights_at(first - 1);
    if (observer) observer(first - 1, out.exact ? &*out.exact : nullptr,
                           out.lowrank ? &*out.lowrank : nullptr);
  }
  for (std::int64_t t = first; t < n; ++t) {
    Snapshot x = gen.next();
    if (want_lowrank) {
      if (cfg.reinit_step && t == *cfg.reinit_step) rebuild_lowrank();
      try {
        lowrank->update(x);
      } catch (const DegenerateUpdateError&) {
        rebuild_lowrank();
        ++out.stats.forced_reinits;
        lowrank->update(x);
      }
      lowrank_weights_at(t);
      recent.pop_front();
      recent.push_back(x);
    }
    if (want_exact) {
      window->push(x);
      exact_weights(t);
    }
    if (observer) observer(t, out.exact ? &*out.exact : nullptr,
                           out.lowrank ? &*out.lowrank : nullptr);
  }

  const std::int64_t last = n - 1;
  out.final_target_doa_deg = doa_at(scenario.target, last);
  for (const auto& s : scenario.interferers) {
    out.final_interferer_doas_deg.push_back(doa_at(s, last));
  }
  return out;
}

BeampatternResult run_beampattern_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  BeampatternResult res;
  const auto opts = metric_options(cfg);
  for (int m : cfg.m_list) {
    for (int l : cfg.l_list) {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const auto seed = trial_seed(cfg, m, l, trial);
        const ScenarioConfig sc = make_scenario(cfg, m, l, seed);
        MetricRow base;
        base.m = m;
        base.l = l;
        base.trial = trial;
        base.seed = seed;

        CellRun run;
        try {
          run = run_cell(cfg, sc);
        } catch (const Error& e) {
          for (Engine eng : {Engine::Exact, Engine::LowRank}) {
            if (!runs_engine(cfg.engines, eng)) continue;
            MetricRow row = base;
            row.engine = eng;
            row.target_doa_deg = sc.target.initial_doa_deg;
            row.status = fmt::format("run-failed: {}", e.what());
            res.rows.push_back(std::move(row));
          }
          continue;
        }
        res.stats.merge(run.stats);
        base.target_doa_deg = run.final_target_doa_deg;
        base.interferer_doas_deg = run.final_interferer_doas_deg;

        for (const auto* w : {run.exact ? &*run.exact : nullptr,
                              run.lowrank ? &*run.lowrank : nullptr}) {
          if (!w) continue;
          MetricRow row = base;
          row.engine = w->engine;
          Beampattern pattern = beampattern(*w, sc.geometry, cfg.grid_step_deg);
          try {
            row.metrics = extract_metrics(pattern, run.final_target_doa_deg,
                                          run.final_interferer_doas_deg, opts);
          } catch (const MetricExtractionError& e) {
            row.status = fmt::format("no-peak: {}", e.what());
          }
          res.rows.push_back(std::move(row));
          if (trial == 0 || cfg.emit_all_patterns) {
            res.patterns.push_back(PatternRecord{m, l, trial, w->engine, seed, "", std::move(pattern)});
          }
        }
      }
    }
  }
  return res;
}

std::optional<double> loglog_slope(const std::vector<TimingRecord>& records, Engine engine,
                                   int* fit_min_m, int* fit_max_m) {
  std::vector<const TimingRecord*> mine;
  for (const auto& r : records) {
    if (r.engine == engine && r.per_step_seconds > 0.0) mine.push_back(&r);
  }
  if (mine.size() < 2) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(
      mine.begin(), mine.end(), [](auto* a, auto* b) { return a->m < b->m; });
  const double cut = 0.5 * ((*lo)->m + (*hi)->m);
  std::vector<double> x, y;
  int min_m = 0, max_m = 0;
  for (auto* r : mine) {
    if (r->m < cut) continue;
    x.push_back(std::log(static_cast<double>(r->m)));
    y.push_back(std::log(r->per_step_seconds));
    min_m = min_m == 0 ? r->m : std::min(min_m, r->m);
    max_m = std::max(max_m, r->m);
  }
  if (x.size() < 2) return std::nullopt;
  if (fit_min_m) *fit_min_m = min_m;
  if (fit_max_m) *fit_max_m = max_m;
  return linear_slope(x, y);
}

TimingResult run_timing_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  TimingResult res;
  const int l = cfg.l_list.front();
  constexpr std::size_t kPoolSize = 512;
  for (int m : cfg.m_list) {
    const ScenarioConfig sc = make_scenario(cfg, m, l, trial_seed(cfg, m, l, 0));
    SignalGenerator gen(sc);
    const auto init = gen.take(static_cast<std::size_t>(sc.window_m));
    const auto pool = gen.take(kPoolSize);
    const ComplexVector a = steering_vector(sc.geometry, sc.target.initial_doa_deg);
    const double doa = sc.target.initial_doa_deg;

    if (runs_engine(cfg.engines, Engine::Exact)) {
      SlidingWindowCovariance window(init);
      res.records.push_back(time_engine(Engine::Exact, m, cfg.timing, pool, [&](const Snapshot& x) {
        window.push(x);
        const auto w = mvdr_weights(invert_hermitian(window.covariance()), a, doa);
        res.stats.record(w, a);
      }));
    }
    if (runs_engine(cfg.engines, Engine::LowRank)) {
      LowRankState state = LowRankState::initialize(sample_covariance(init), cfg.rank_k, cfg.alpha);
      res.records.push_back(
          time_engine(Engine::LowRank, m, cfg.timing, pool, [&](const Snapshot& x) {
            state.update(x);
            const auto w = lowrank_weights(state, a, doa);
            res.stats.record(w, a);
          }));
    }
  }
  res.exact_slope = loglog_slope(res.records, Engine::Exact, &res.fit_min_m, &res.fit_max_m);
  res.lowrank_slope = loglog_slope(res.records, Engine::LowRank, &res.fit_min_m, &res.fit_max_m);
  return res;
}

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("slope needs distinct x values");
  return sxy / sxx;
}

SinrGainResult run_sinr_gain_experiment(const ExperimentConfig& input) {
  input.validate();
  ExperimentConfig cfg = input;
  cfg.engines = EngineSelection::LowRank;

  SinrGainResult res;
  res.m = cfg.m_list.front();
  res.l = cfg.l_list.front();
  const std::int64_t first = cfg.scenario.window_m;
  const auto len = static_cast<std::size_t>(cfg.n_steps - cfg.scenario.window_m);

  auto run_traces = [&](bool zero_drift) {
    std::vector<double> sums(std::max<std::size_t>(len, 1), 0.0);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      ScenarioConfig sc = make_scenario(cfg, res.m, res.l, trial_seed(cfg, res.m, res.l, trial));
      if (zero_drift) {
        sc.target.doa_drift_deg = 0.0;
        for (auto& s : sc.interferers) s.doa_drift_deg = 0.0;
      }
      res.input_sinr_db = sc.input_sinr_db();
      const double ps = sc.target_power();
      std::int64_t cov_block = -1;
      std::optional<AnalyticCovariance> cov;
      std::optional<ComplexVector> a0;
      auto observer = [&](std::int64_t t, const BeamWeights*, const BeamWeights* w) {
        const std::int64_t block = t / kDriftBlockSamples;
        if (block != cov_block) {
          cov = analytic_covariance(sc, t);
          a0 = cov->terms().front().steering;
          cov_block = block;
        }
        const double out = output_sinr_db(*w, *a0, ps, *cov, cfg.sinr_denominator);
        const auto idx = static_cast<std::size_t>(std::max<std::int64_t>(t - first, 0));
        sums[idx] += sinr_gain_db(out, res.input_sinr_db);
      };
      const CellRun run = run_cell(cfg, sc, observer);
      res.stats.merge(run.stats);
    }
    return mean_trace(sums, cfg.trials, len == 0 ? first - 1 : first);
  };

  res.trace = run_traces(false);
  const std::int64_t end = cfg.n_steps;
  const std::int64_t reinit = cfg.reinit_step.value_or(cfg.n_steps);
  res.summary.slope_before_db_per_step = trace_slope(res.trace, first, reinit);
  res.summary.mean_before_db = trace_mean(res.trace, std::max(first, reinit - 500), reinit);
  res.summary.mean_after_db = trace_mean(res.trace, reinit, std::min(end, reinit + 500));
  if (cfg.zero_drift_control) {
    res.control = run_traces(true);
    res.summary.control_slope_db_per_step = trace_slope(*res.control, first, reinit);
  }
  return res;
}

FailureModeResult run_failure_mode_experiment(const ExperimentConfig& input) {
  input.validate();
  ExperimentConfig cfg = input;
  cfg.engines = EngineSelection::Both;

  FailureModeResult res;
  res.m = cfg.m_list.front();
  res.l = cfg.l_list.front();
  const auto opts = metric_options(cfg);

  auto null_depths = [&](const Beampattern& p, const CellRun& run) {
    try {
      return extract_metrics(p, run.final_target_doa_deg, run.final_interferer_doas_deg, opts)
          .null_depths_db;
    } catch (const MetricExtractionError&) {
      // No main-lobe peak near the target: measure against the global peak instead.
      MetricOptions wide = opts;
      wide.peak_search_deg = 180.0;
      auto m = extract_metrics(p, run.final_target_doa_deg, run.final_interferer_doas_deg, wide);
      return m.null_depths_db;
    }
  };

  std::vector<double> high_gaps, low_gaps;
  int high_positive = 0;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto seed = trial_seed(cfg, res.m, res.l, trial);
    const ScenarioConfig low = make_scenario(cfg, res.m, res.l, seed);
    ScenarioConfig high = low;
    high.target.power = low.noise_variance * std::pow(10.0, cfg.high_snr_db / 10.0);
    for (std::size_t i = 0; i < high.interferers.size(); ++i) {
      high.interferers[i].power = low.interferer_power(i);
    }
    for (const auto& [regime, sc] : {std::pair<std::string, const ScenarioConfig*>{"high-snr", &high},
                                     std::pair<std::string, const ScenarioConfig*>{"low-snr", &low}}) {
      const CellRun run = run_cell(cfg, *sc);
      res.stats.merge(run.stats);
      Beampattern pe = beampattern(*run.exact, sc->geometry, cfg.grid_step_deg);
      Beampattern pl = beampattern(*run.lowrank, sc->geometry, cfg.grid_step_deg);
      const auto ne = null_depths(pe, run);
      const auto nl = null_depths(pl, run);
      for (std::size_t i = 0; i < ne.size(); ++i) {
        FailureModeRow row{trial, regime, sc->input_sinr_db(), i, ne[i], nl[i], nl[i] - ne[i]};
        if (regime == "high-snr") {
          high_gaps.push_back(row.gap_db);
          if (row.gap_db > 0.0) ++high_positive;
        } else {
          low_gaps.push_back(row.gap_db);
        }
        res.rows.push_back(row);
      }
      if (trial == 0 || cfg.emit_all_patterns) {
        res.patterns.push_back(PatternRecord{res.m, res.l, trial, Engine::Exact, seed, regime, std::move(pe)});
        res.patterns.push_back(PatternRecord{res.m, res.l, trial, Engine::LowRank, seed, regime, std::move(pl)});
      }
    }
  }
  res.high_fraction_positive =
      high_gaps.empty() ? 0.0 : static_cast<double>(high_positive) / static_cast<double>(high_gaps.size());
  res.high_median_gap_db = median(high_gaps);
  res.low_median_gap_db = median(low_gaps);
  return res;
}

}  // namespace lrmvdr
