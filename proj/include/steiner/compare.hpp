// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steiner/grid.hpp"
#include "steiner/nonlinearity.hpp"
#include "steiner/solver.hpp"

namespace steiner {

/// Everything the comparison pipeline needs to run once.
struct PipelineSpec {
  GridPtr grid;
  Nonlinearity base = make_p_laplacian(2.0);
  int N = 7;
  SourceFunction f;
  /// Optional pre-sampled data; takes precedence over `f` when set.
  std::optional<SliceStack> f_stack;
  int M = 64;
  Grading grading = Grading::Uniform;
  /// Moreau-Yosida parameters, used when the base lacks a two-sided slope
  /// bound or when `force_regularization` is set.
  double eps = 1e-6;
  double tau = 1e-6;
  bool force_regularization = false;
  SolverOptions solver{1e-9, 200, 1e-8, 0.0};
  double slack_C = 10.0;
  /// Also solve the rearranged ODE system and report its distance to V.
  bool solve_star = true;
  double star_tol = 1e-12;
};

struct ComparisonReport {
  std::string nl_name;
  int n = 1;
  int N = 0;
  double h = 0.0;
  double dx = 0.0;
  double ds = 0.0;
  std::optional<double> eps;
  std::optional<double> tau;
  std::vector<double> s;
  /// Rows j = 1..N, columns s-nodes.
  std::vector<std::vector<double>> U;
  std::vector<std::vector<double>> V;
  std::vector<std::vector<double>> gap;
  double worst_gap = 0.0;
  double slack_budget = 0.0;
  bool pass = false;
  /// sup |V - V_star| against the directly solved ODE system, when requested.
  std::optional<double> star_gap;
  int star_sweeps = 0;
  /// Minimum subsolution slack of the U_j.  Step profiles alias when ds is
  /// close to dx, so the value is only informative for ds several times dx.
  double worst_subsolution_slack = 0.0;
  double radial_violation = 0.0;
  double energy_u = 0.0;
  double energy_v = 0.0;
  double residual_u = 0.0;
  double residual_v = 0.0;
  int iterations_u = 0;
  int iterations_v = 0;
  double min_u = 0.0;
  /// Solved stacks u (on Omega_1) and v (on the symmetrized grid).
  std::optional<SliceStack> u;
  std::optional<SliceStack> v;
  std::map<std::string, double> stage_seconds;
};

/// Effective nonlinearity of a spec: the base itself or its regularization.
Nonlinearity effective_nonlinearity(const PipelineSpec& spec, std::optional<double>* eps_used = nullptr,
                                    std::optional<double>* tau_used = nullptr);

/// Solves (P_h) and its symmetrized counterpart and compares the mass
/// functions U_j <= V_j at every slice and s-node.  Stage failures are
/// rethrown as StageError tagged with the stage name.
ComparisonReport verify_mass_comparison(const PipelineSpec& spec);

struct LqResult {
  double q = 1.0;
  double lhs = 0.0;  // sum_j h int |u_j|^q
  double rhs = 0.0;  // sum_j h int |v_j|^q
  double slack = 0.0;
  bool holds = false;
};

/// Compares the L^q norms of u and v.  The slack converts a negative worst
/// mass gap into an L^q allowance: 2 q M^{q-1} max(0, -worst_gap) + 1e-12 rhs,
/// where M bounds both solutions.
LqResult verify_lq_consequence(const ComparisonReport& report, double q);

struct SweepPoint {
  double eps = 0.0;
  double tau = 0.0;
  int N = 0;
  bool ok = false;
  std::string error;
  std::optional<ComparisonReport> report;
};

struct SweepReport {
  std::string param;
  std::vector<SweepPoint> points;
  std::vector<double> worst_gaps;
  /// L^1(Omega) distance between successive solutions u.
  std::vector<double> successive_l1;
  /// Discrete H^1 norm of each u^h (h sweeps only).
  std::vector<double> h1_norms;
  bool energy_monotone = true;
  bool l1_decreasing = true;
  bool all_pass = true;
};

/// Solves every (eps, tau) combination, tau outer and eps inner, in the given order.
/// Energies must be non-increasing in eps at fixed tau and successive L^1
/// differences must decrease along each fixed-tau run.
SweepReport epsilon_tau_sweep(const PipelineSpec& spec, const std::vector<double>& eps_list,
                              const std::vector<double>& tau_list, int threads = 1);

/// Runs the pipeline for every N, comparing interpolants u^h pairwise in L^1(Omega).
SweepReport h_refinement_study(const PipelineSpec& spec, const std::vector<int>& N_list, int threads = 1);

}  // namespace steiner
