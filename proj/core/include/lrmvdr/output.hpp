#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "lrmvdr/config.hpp"
#include "lrmvdr/harness.hpp"

namespace lrmvdr {

/// CSV and plot-description emission. Every CSV row carries the config hash
/// and seed. Per-cell files are named <experiment>_<M>_<L>_<engine>.csv;
/// cross-cell tables use <experiment>_<table>.csv. Apart from timing values
/// the bytes depend only on config and seed.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg,
                                                 const BeampatternResult& r);
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg,
                                                 const TimingResult& r);
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg,
                                                 const SinrGainResult& r);
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg,
                                                 const FailureModeResult& r);

struct ManifestInfo {
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::filesystem::path> outputs;
  RunStats stats;
};

/// manifest.json: config hash, seed, git revision, timestamps, the resolved
/// config and the list of files written.
std::filesystem::path write_manifest(const ExperimentConfig& cfg, const ManifestInfo& info);

std::string git_revision();

}  // namespace lrmvdr
