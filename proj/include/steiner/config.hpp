// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "steiner/error.hpp"

namespace steiner {

struct ConfigIssue {
  int line = 0;  // 1-based; 0 for issues not tied to a line
  std::string message;
};

/// Thrown by parse_config with every problem found, not only the first.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

enum class NlKind { PLaplacian, ShiftedP, Tabulated };

struct NlConfig {
  NlKind kind = NlKind::PLaplacian;
  double p = 2.0;
  double tau = 0.0;
  std::filesystem::path path;
};

enum class OmegaKind { Interval, Square, Disk };

struct ExperimentConfig {
  // [problem]
  NlConfig nl;
  OmegaKind omega_kind = OmegaKind::Interval;
  int dim = 1;
  /// Interval length, square side or disk radius.
  double omega_size = 1.0;
  /// Cells per axis (per diameter for the disk).
  int resolution = 32;
  int N = 7;
  int M = 64;
  bool sqrt_grading = false;
  std::string f_expr = "1";
  std::filesystem::path f_csv;
  /// Gaussian smoothing half-width for gridded f; 0 disables it.
  double f_mollify = 0.0;

  // [solver]
  double tol = 1e-9;
  int max_iter = 200;
  double eps = 1e-6;
  double tau = 1e-6;
  bool force_regularization = false;
  bool richardson = false;
  double star_tol = 1e-12;
  bool solve_star = true;
  double radial_tol_dx = 0.0;

  // [verify]
  double slack_C = 10.0;
  std::uint64_t seed = 20240517;
  int accretivity_trials = 1000;
  std::vector<double> accretivity_lambdas{0.01, 1.0, 100.0};
  std::vector<double> lq{1.0, 2.0};
  std::vector<double> sweep_eps{1e-1, 1e-2, 1e-3};
  std::vector<double> sweep_tau{1e-6};
  std::vector<int> sweep_N{3, 7, 15};

  // [output]
  std::filesystem::path out_dir = "out";
  bool write_csv = true;
  bool write_json = true;

  /// Canonical `key = value` rendering used for hashing and manifests.
  std::string canonical() const;
};

/// Parses the INI-like format: sections [problem] [solver] [verify] [output],
/// `key = value` lines and `#` comments.  Relative file paths resolve against
/// `base_dir`.  Throws ConfigError listing every issue with its line number.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace steiner
