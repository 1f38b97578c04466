#include "lrmvdr/output.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "lrmvdr/error.hpp"

#ifndef LRMVDR_GIT_REVISION
#define LRMVDR_GIT_REVISION "unknown"
#endif

namespace lrmvdr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CsvFile {
 public:
  explicit CsvFile(const fs::path& path) : path_(path), out_(path) {
    if (!out_) throw Error(fmt::format("cannot write {}", path.string()));
  }
  void line(const std::string& s) { out_ << s << '\n'; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string num(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{}", v);
}

fs::path prepare(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

std::string cell_name(ExperimentKind kind, std::string_view suffix, int m, int l, Engine e) {
  return fmt::format("{}{}_{}_{}_{}.csv", to_string(kind), suffix, m, l, to_string(e));
}

void write_plot(const fs::path& dir, ExperimentKind kind, const json& description,
                std::vector<fs::path>& written) {
  const fs::path p = dir / fmt::format("{}.plot.json", to_string(kind));
  std::ofstream out(p);
  out << description.dump(2) << '\n';
  written.push_back(p);
}

// Groups pattern records by output file, preserving first-seen order.
void write_patterns(const ExperimentConfig& cfg, const std::vector<PatternRecord>& patterns,
                    const fs::path& dir, std::vector<fs::path>& written) {
  const std::string hash = config_hash(cfg);
  std::vector<std::string> order;
  std::map<std::string, std::vector<const PatternRecord*>> files;
  for (const auto& p : patterns) {
    const std::string name = cell_name(cfg.experiment, "", p.m, p.l, p.engine);
    if (!files.count(name)) order.push_back(name);
    files[name].push_back(&p);
  }
  for (const auto& name : order) {
    CsvFile csv(dir / name);
    csv.line("config_hash,seed,trial,regime,angle_deg,power_db");
    for (const auto* p : files[name]) {
      for (std::size_t i = 0; i < p->pattern.angles_deg.size(); ++i) {
        csv.line(fmt::format("{},{},{},{},{},{}", hash, p->seed, p->trial, p->regime,
                             num(p->pattern.angles_deg[i]), num(p->pattern.power_db[i])));
      }
    }
    written.push_back(csv.path());
  }
}

}  // namespace

std::string git_revision() { return LRMVDR_GIT_REVISION; }

std::vector<fs::path> write_outputs(const ExperimentConfig& cfg, const BeampatternResult& r) {
  const fs::path dir = prepare(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<fs::path> written;

  std::size_t null_cols = 3;
  for (int l : cfg.l_list) null_cols = std::max(null_cols, static_cast<std::size_t>(l));

  CsvFile csv(dir / "beampattern_metrics.csv");
  std::string header = "config_hash,seed,M,L,trial,engine,status,target_doa_deg,interferer_doas_deg,"
                       "peak_doa_deg,mlw_deg,sll_db";
  for (std::size_t i = 1; i <= null_cols; ++i) header += fmt::format(",null{}_db", i);
  csv.line(header);
  for (const auto& row : r.rows) {
    std::string doas;
    for (std::size_t i = 0; i < row.interferer_doas_deg.size(); ++i) {
      doas += (i ? ";" : "") + num(row.interferer_doas_deg[i]);
    }
    std::string line = fmt::format("{},{},{},{},{},{},\"{}\",{},{}", hash, row.seed, row.m, row.l,
                                   row.trial, to_string(row.engine), row.status,
                                   num(row.target_doa_deg), doas);
    if (row.metrics) {
      line += fmt::format(",{},{},{}", num(row.metrics->peak_doa_deg), num(row.metrics->mlw_deg),
                          num(row.metrics->sll_db));
    } else {
      line += ",,,";
    }
    for (std::size_t i = 0; i < null_cols; ++i) {
      line += ",";
      if (row.metrics && i < row.metrics->null_depths_db.size()) {
        line += num(row.metrics->null_depths_db[i]);
      }
    }
    csv.line(line);
  }
  written.push_back(csv.path());
  write_patterns(cfg, r.patterns, dir, written);

  write_plot(dir, cfg.experiment,
             {{"figure", "beampatterns per (M, L), exact vs low-rank"},
              {"files", "beampattern_<M>_<L>_<engine>.csv"},
              {"x", "angle_deg"},
              {"y", "power_db"},
              {"series", "engine"},
              {"table", "beampattern_metrics.csv"}},
             written);
  return written;
}

std::vector<fs::path> write_outputs(const ExperimentConfig& cfg, const TimingResult& r) {
  const fs::path dir = prepare(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<fs::path> written;

  CsvFile rec(dir / "timing_records.csv");
  rec.line("config_hash,seed,M,K,engine,per_step_seconds,steps_measured");
  for (const auto& t : r.records) {
    rec.line(fmt::format("{},{},{},{},{},{},{}", hash, cfg.seed, t.m, cfg.rank_k,
                         to_string(t.engine), num(t.per_step_seconds), t.steps_measured));
  }
  written.push_back(rec.path());

  const int l = cfg.l_list.front();
  for (const auto& t : r.records) {
    CsvFile cell(dir / cell_name(cfg.experiment, "", t.m, l, t.engine));
    cell.line("config_hash,seed,M,L,K,engine,per_step_seconds,steps_measured");
    cell.line(fmt::format("{},{},{},{},{},{},{},{}", hash, cfg.seed, t.m, l, cfg.rank_k,
                          to_string(t.engine), num(t.per_step_seconds), t.steps_measured));
    written.push_back(cell.path());
  }

  CsvFile slopes(dir / "timing_slopes.csv");
  slopes.line("config_hash,seed,engine,loglog_slope,fit_min_M,fit_max_M");
  for (auto [engine, slope] : {std::pair{Engine::Exact, r.exact_slope},
                               std::pair{Engine::LowRank, r.lowrank_slope}}) {
    if (!slope) continue;
    slopes.line(fmt::format("{},{},{},{},{},{}", hash, cfg.seed, to_string(engine), num(*slope),
                            r.fit_min_m, r.fit_max_m));
  }
  written.push_back(slopes.path());

  write_plot(dir, cfg.experiment,
             {{"figure", "per-step execution time vs number of antennas"},
              {"files", "timing_records.csv"},
              {"x", "M"},
              {"y", "per_step_seconds"},
              {"series", "engine"},
              {"scale", "log-log"}},
             written);
  return written;
}

std::vector<fs::path> write_outputs(const ExperimentConfig& cfg, const SinrGainResult& r) {
  const fs::path dir = prepare(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<fs::path> written;

  CsvFile trace(dir / cell_name(cfg.experiment, "", r.m, r.l, Engine::LowRank));
  trace.line(r.control ? "config_hash,seed,step,gain_db,control_gain_db"
                       : "config_hash,seed,step,gain_db");
  for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
    std::string line = fmt::format("{},{},{},{}", hash, cfg.seed, r.trace.steps[i],
                                   num(r.trace.gain_db[i]));
    if (r.control) line += "," + num(r.control->gain_db[i]);
    trace.line(line);
  }
  written.push_back(trace.path());

  CsvFile summary(dir / "sinr-gain_summary.csv");
  summary.line("config_hash,seed,M,L,K,trials,input_sinr_db,reinit_step,slope_before_db_per_step,"
               "mean_before_db,mean_after_db,control_slope_db_per_step");
  summary.line(fmt::format(
      "{},{},{},{},{},{},{},{},{},{},{},{}", hash, cfg.seed, r.m, r.l, cfg.rank_k, cfg.trials,
      num(r.input_sinr_db), cfg.reinit_step ? std::to_string(*cfg.reinit_step) : "",
      num(r.summary.slope_before_db_per_step), num(r.summary.mean_before_db),
      num(r.summary.mean_after_db),
      r.summary.control_slope_db_per_step ? num(*r.summary.control_slope_db_per_step) : ""));
  written.push_back(summary.path());

  write_plot(dir, cfg.experiment,
             {{"figure", "mean SINR gain of the low-rank engine over time"},
              {"files", cell_name(cfg.experiment, "", r.m, r.l, Engine::LowRank)},
              {"x", "step"},
              {"y", r.control ? json{"gain_db", "control_gain_db"} : json{"gain_db"}},
              {"marker", cfg.reinit_step ? json(*cfg.reinit_step) : json(nullptr)}},
             written);
  return written;
}

std::vector<fs::path> write_outputs(const ExperimentConfig& cfg, const FailureModeResult& r) {
  const fs::path dir = prepare(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<fs::path> written;

  CsvFile csv(dir / "failure-mode_summary.csv");
  csv.line("config_hash,seed,M,L,trial,regime,input_sinr_db,interferer,exact_null_db,"
           "lowrank_null_db,gap_db");
  for (const auto& row : r.rows) {
    csv.line(fmt::format("{},{},{},{},{},{},{},{},{},{},{}", hash,
                         trial_seed(cfg, r.m, r.l, row.trial), r.m, r.l, row.trial, row.regime,
                         num(row.input_sinr_db), row.interferer + 1, num(row.exact_null_db),
                         num(row.lowrank_null_db), num(row.gap_db)));
  }
  written.push_back(csv.path());
  write_patterns(cfg, r.patterns, dir, written);

  write_plot(dir, cfg.experiment,
             {{"figure", "beampatterns with the target above the noise floor"},
              {"files", "failure-mode_<M>_<L>_<engine>.csv"},
              {"x", "angle_deg"},
              {"y", "power_db"},
              {"series", {"engine", "regime"}},
              {"table", "failure-mode_summary.csv"}},
             written);
  return written;
}

fs::path write_manifest(const ExperimentConfig& cfg, const ManifestInfo& info) {
  const fs::path dir = prepare(cfg);
  json j;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["git_revision"] = git_revision();
  j["started_utc"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(info.started)));
  j["finished_utc"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(info.finished)));
  j["config"] = json::parse(canonical_json(cfg));
  j["power_budget"] = {
      {"rule", "target = noise * 10^(snr_db/10); interferers share equally the power that makes "
               "target / (interference + noise) = 10^(sinr_db/10); with L = 0, sinr_db sets the target"},
      {"noise_variance", cfg.scenario.noise_variance},
      {"snr_db", cfg.scenario.snr_db},
      {"sinr_db", cfg.scenario.sinr_db}};
  j["distortionless_max_error"] = info.stats.max_distortionless_error;
  j["weight_vectors"] = info.stats.weight_vectors;
  j["forced_reinitializations"] = info.stats.forced_reinits;
  json files = json::array();
  for (const auto& p : info.outputs) files.push_back(p.filename().string());
  j["outputs"] = files;

  const fs::path p = dir / "manifest.json";
  std::ofstream out(p);
  out << j.dump(2) << '\n';
  return p;
}

}  // namespace lrmvdr
