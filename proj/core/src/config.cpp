#include "lrmvdr/config.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "lrmvdr/error.hpp"

namespace lrmvdr {

using nlohmann::json;

namespace {

// Pulls typed values out of a JSON object and remembers which keys were
// consumed so leftovers can be reported as typos.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", path_));
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}.{}: {}", path_, key, e.what()));
    }
  }

  template <typename T>
  void get_optional(const char* key, std::optional<T>& out) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    if (obj_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  std::optional<ObjectReader> child(const char* key) {
    if (!obj_.contains(key)) return std::nullopt;
    seen_.insert(key);
    return ObjectReader(obj_.at(key), path_ + "." + key);
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(fmt::format("unknown config key {}.{}", path_, item.key()));
      }
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<int> range_inclusive(int lo, int hi, int step) {
  std::vector<int> v;
  for (int i = lo; i <= hi; i += step) v.push_back(i);
  return v;
}

std::string_view mlw_rule_name(MainLobeRule r) {
  return r == MainLobeRule::HalfPower ? "-3dB" : "null-to-null";
}

std::string_view denominator_name(SinrDenominator d) {
  return d == SinrDenominator::TotalCovariance ? "total" : "interference-plus-noise";
}

json to_json(const ExperimentConfig& c) {
  const auto& s = c.scenario;
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["seed"] = c.seed;
  j["engine"] = std::string(to_string(c.engines));
  j["M"] = c.m_list;
  j["L"] = c.l_list;
  j["K"] = c.rank_k;
  j["alpha"] = c.alpha;
  j["n_steps"] = c.n_steps;
  j["reinit_step"] = c.reinit_step ? json(*c.reinit_step) : json(nullptr);
  j["trials"] = c.trials;
  j["diagonal_loading"] = c.diagonal_loading;
  j["scenario"] = {
      {"noise_variance", s.noise_variance},
      {"sinr_db", s.sinr_db},
      {"snr_db", s.snr_db},
      {"sample_rate_hz", s.sample_rate_hz},
      {"chirp_bandwidth_hz", s.chirp.bandwidth_hz},
      {"chirp_duration_s", s.chirp.duration_s},
      {"window_m", s.window_m},
      {"doa_drift_deg_per_1000", s.doa_drift_deg},
      {"doa_range_deg", {s.doa_min_deg, s.doa_max_deg}},
      {"min_separation_deg", s.min_separation_deg},
      {"target_doa_deg", s.target_doa_deg ? json(*s.target_doa_deg) : json(nullptr)},
      {"interferer_doas_deg", s.interferer_doas_deg},
  };
  j["metrics"] = {
      {"grid_step_deg", c.grid_step_deg},
      {"mlw_rule", std::string(mlw_rule_name(c.mlw_rule))},
      {"sinr_denominator", std::string(denominator_name(c.sinr_denominator))},
      {"emit_all_patterns", c.emit_all_patterns},
  };
  j["sinr_gain"] = {{"zero_drift_control", c.zero_drift_control}};
  j["failure_mode"] = {{"high_snr_db", c.high_snr_db}};
  j["timing"] = {
      {"warmup_steps", c.timing.warmup_steps},
      {"steps", c.timing.steps},
      {"max_seconds_per_point", c.timing.max_seconds_per_point},
      {"min_batch_seconds", c.timing.min_batch_seconds},
  };
  return j;
}

}  // namespace

std::string_view to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::Beampattern: return "beampattern";
    case ExperimentKind::Timing: return "timing";
    case ExperimentKind::SinrGain: return "sinr-gain";
    case ExperimentKind::FailureMode: return "failure-mode";
  }
  return "unknown";
}

std::string_view to_string(EngineSelection e) noexcept {
  switch (e) {
    case EngineSelection::Exact: return "exact";
    case EngineSelection::LowRank: return "lowrank";
    case EngineSelection::Both: return "both";
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view s) {
  for (auto k : {ExperimentKind::Beampattern, ExperimentKind::Timing, ExperimentKind::SinrGain,
                 ExperimentKind::FailureMode}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError(fmt::format(
      "unknown experiment '{}' (expected beampattern, timing, sinr-gain, failure-mode)", s));
}

EngineSelection parse_engine_selection(std::string_view s) {
  for (auto e : {EngineSelection::Exact, EngineSelection::LowRank, EngineSelection::Both}) {
    if (s == to_string(e)) return e;
  }
  throw ConfigError(fmt::format("unknown engine '{}' (expected exact, lowrank, both)", s));
}

bool runs_engine(EngineSelection sel, Engine e) noexcept {
  if (sel == EngineSelection::Both) return true;
  return (sel == EngineSelection::Exact) == (e == Engine::Exact);
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::Beampattern:
      c.m_list = {50, 75, 100};
      c.l_list = {1, 2, 3};
      c.trials = 20;
      c.n_steps = 2000;
      break;
    case ExperimentKind::Timing:
      c.m_list = range_inclusive(10, 500, 10);
      c.l_list = {1};
      c.trials = 1;
      c.n_steps = 1000;
      break;
    case ExperimentKind::SinrGain:
      c.m_list = {100};
      c.l_list = {1};
      c.trials = 10;
      c.n_steps = 100000;
      c.reinit_step = 50000;
      c.engines = EngineSelection::LowRank;
      break;
    case ExperimentKind::FailureMode:
      c.m_list = {50};
      c.l_list = {1};
      c.trials = 20;
      c.n_steps = 2000;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (m_list.empty()) throw ConfigError("M list is empty");
  if (l_list.empty()) throw ConfigError("L list is empty");
  for (int m : m_list) {
    if (m < 2) throw ConfigError(fmt::format("M={} must be >= 2", m));
    if (rank_k > m) throw ConfigError(fmt::format("K={} exceeds M={}", rank_k, m));
  }
  for (int l : l_list) {
    if (l < 0) throw ConfigError(fmt::format("L={} must be >= 0", l));
  }
  if (rank_k < 1) throw ConfigError("K must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (scenario.window_m < 1) throw ConfigError("window_m must be >= 1");
  if (scenario.window_m < rank_k) {
    throw ConfigError(fmt::format("window_m={} is smaller than K={}", scenario.window_m, rank_k));
  }
  if (n_steps < scenario.window_m) {
    throw ConfigError(fmt::format("n_steps={} must be >= window_m={}", n_steps, scenario.window_m));
  }
  if (reinit_step && (*reinit_step < scenario.window_m || *reinit_step >= n_steps)) {
    throw ConfigError(fmt::format("reinit_step={} must lie in [window_m, n_steps)", *reinit_step));
  }
  if (!(grid_step_deg > 0.0)) throw ConfigError("grid_step_deg must be > 0");
  if (diagonal_loading < 0.0) throw ConfigError("diagonal_loading must be >= 0");
  if (!(scenario.doa_max_deg > scenario.doa_min_deg)) throw ConfigError("empty DoA range");
  if (!scenario.interferer_doas_deg.empty()) {
    for (int l : l_list) {
      if (static_cast<std::size_t>(l) != scenario.interferer_doas_deg.size()) {
        throw ConfigError("fixed interferer_doas_deg must have one entry per interferer for every L");
      }
    }
  }
  if (timing.steps < 1 || timing.warmup_steps < 0 || !(timing.max_seconds_per_point > 0.0) ||
      !(timing.min_batch_seconds > 0.0)) {
    throw ConfigError("invalid timing settings");
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  return parse_config(json_text, std::nullopt);
}

ExperimentConfig parse_config(std::string_view json_text, std::optional<ExperimentKind> kind) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  ObjectReader r(root, "config");

  std::string experiment;
  r.get("experiment", experiment);
  if (experiment.empty() && !kind) throw ConfigError("config must name an experiment");
  const ExperimentKind k = experiment.empty() ? *kind : parse_experiment(experiment);
  if (kind && *kind != k) {
    throw ConfigError(fmt::format("config is for '{}' but '{}' was requested", to_string(k),
                                  to_string(*kind)));
  }

  ExperimentConfig c = default_config(k);
  r.get("seed", c.seed);
  std::string engine;
  r.get("engine", engine);
  if (!engine.empty()) c.engines = parse_engine_selection(engine);
  r.get("M", c.m_list);
  r.get("L", c.l_list);
  r.get("K", c.rank_k);
  r.get("alpha", c.alpha);
  r.get("n_steps", c.n_steps);
  r.get_optional("reinit_step", c.reinit_step);
  r.get("trials", c.trials);
  r.get("diagonal_loading", c.diagonal_loading);
  std::string out;
  r.get("output_dir", out);
  if (!out.empty()) c.output_dir = out;

  if (auto s = r.child("scenario")) {
    auto& sc = c.scenario;
    s->get("noise_variance", sc.noise_variance);
    s->get("sinr_db", sc.sinr_db);
    s->get("snr_db", sc.snr_db);
    s->get("sample_rate_hz", sc.sample_rate_hz);
    s->get("chirp_bandwidth_hz", sc.chirp.bandwidth_hz);
    s->get("chirp_duration_s", sc.chirp.duration_s);
    s->get("window_m", sc.window_m);
    s->get("doa_drift_deg_per_1000", sc.doa_drift_deg);
    std::vector<double> range;
    s->get("doa_range_deg", range);
    if (!range.empty()) {
      if (range.size() != 2) throw ConfigError("scenario.doa_range_deg must be [lo, hi]");
      sc.doa_min_deg = range[0];
      sc.doa_max_deg = range[1];
    }
    s->get("min_separation_deg", sc.min_separation_deg);
    s->get_optional("target_doa_deg", sc.target_doa_deg);
    s->get("interferer_doas_deg", sc.interferer_doas_deg);
    s->finish();
  }
  if (auto m = r.child("metrics")) {
    m->get("grid_step_deg", c.grid_step_deg);
    std::string rule;
    m->get("mlw_rule", rule);
    if (rule == "-3dB") {
      c.mlw_rule = MainLobeRule::HalfPower;
    } else if (rule == "null-to-null") {
      c.mlw_rule = MainLobeRule::NullToNull;
    } else if (!rule.empty()) {
      throw ConfigError(fmt::format("metrics.mlw_rule '{}' (expected -3dB or null-to-null)", rule));
    }
    std::string denom;
    m->get("sinr_denominator", denom);
    if (denom == "total") {
      c.sinr_denominator = SinrDenominator::TotalCovariance;
    } else if (denom == "interference-plus-noise") {
      c.sinr_denominator = SinrDenominator::InterferencePlusNoise;
    } else if (!denom.empty()) {
      throw ConfigError(fmt::format(
          "metrics.sinr_denominator '{}' (expected total or interference-plus-noise)", denom));
    }
    m->get("emit_all_patterns", c.emit_all_patterns);
    m->finish();
  }
  if (auto g = r.child("sinr_gain")) {
    g->get("zero_drift_control", c.zero_drift_control);
    g->finish();
  }
  if (auto f = r.child("failure_mode")) {
    f->get("high_snr_db", c.high_snr_db);
    f->finish();
  }
  if (auto t = r.child("timing")) {
    t->get("warmup_steps", c.timing.warmup_steps);
    t->get("steps", c.timing.steps);
    t->get("max_seconds_per_point", c.timing.max_seconds_per_point);
    t->get("min_batch_seconds", c.timing.min_batch_seconds);
    t->finish();
  }
  r.finish();
  c.validate();

  for (int l : c.l_list) {
    if (c.rank_k < l + 1) {
      std::cerr << fmt::format("warning: K={} < L+1={}; the retained subspace cannot hold the "
                               "target and every interferer\n",
                               c.rank_k, l + 1);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

std::string canonical_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace lrmvdr
