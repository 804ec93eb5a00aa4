// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steiner/compare.hpp"
#include "steiner/config.hpp"

namespace steiner {

/// Process exit codes of the orchestrator.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // the run completed but a verified property failed
  kExitConfig = 2,       // invalid configuration or arguments
  kExitStage = 3,        // a numerical stage failed
  kExitIo = 4,           // artifacts could not be read or written
};

struct RunOptions {
  std::string subcommand;  // solve | star-check | compare | sweep
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string sweep_param;  // eps | tau | h
  /// Sweep values; N counts for h (entries below 1 are read as h and mapped to N = 1/h - 1).
  std::vector<double> sweep_values;
};

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  int threads = 1;
  std::map<std::string, double> stage_seconds;
  std::vector<std::string> artifacts;
  bool pass = false;
  int exit_code = kExitOk;
  std::string stage;  // failing stage, if any
  std::string message;

  std::string to_json() const;
};

GridPtr build_grid(const ExperimentConfig& cfg);
Nonlinearity build_nonlinearity(const ExperimentConfig& cfg);
/// Pipeline spec for the configured problem; gridded f is read and mollified here.
PipelineSpec build_pipeline_spec(const ExperimentConfig& cfg);

/// Gaussian smoothing of every slice with kernel exp(-|x - x'|^2 / delta^2),
/// truncated at 3 delta and renormalized per cell.
SliceStack mollify(const SliceStack& f, double delta);

/// Runs a subcommand, writes its artifacts and manifest.json into the output
/// directory, and never throws: failures are reported through exit_code.
RunManifest run(const ExperimentConfig& cfg, const RunOptions& options);

}  // namespace steiner
