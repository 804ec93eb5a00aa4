// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "steiner/grid.hpp"
#include "steiner/nonlinearity.hpp"

namespace steiner {

/// The y-discretized problem on a cross-section grid: N slices of data f_j >= 0.
struct DiscreteProblem {
  GridPtr grid;
  Nonlinearity nl;
  SliceStack f;

  DiscreteProblem(GridPtr g, Nonlinearity n, SliceStack data);
  int N() const { return f.N(); }
  double h() const { return f.h(); }
};

struct SolverOptions {
  double tol = 1e-9;
  int max_iter = 200;
  /// Radial monotonicity tolerance of the symmetrized solve, checked along the
  /// axes: tol_abs * max(1, max|v|) + tol_dx * dx * max|v|.
  double radial_tol_abs = 1e-8;
  double radial_tol_dx = 0.0;
};

struct DiscreteSolution {
  SliceStack u;
  double energy = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  /// Energy after each accepted Newton step, starting with the initial guess.
  std::vector<double> energy_history;
  /// Largest outward increase along an axis found by the symmetrized solve (0 otherwise).
  double radial_violation = 0.0;
};

/// J_h(u) = sum_j int B(|grad u_j|) + 1/2 sum_{j=0}^{N} int ((u_{j+1} - u_j)/h)^2 - sum_j int f_j u_j.
double energy_Jh(const DiscreteProblem& prob, const SliceStack& stack);

/// Discrete weak-form residual of a stack: sqrt(h sum_k r_k^2 / |c_k|).
double residual_norm(const DiscreteProblem& prob, const SliceStack& stack);

/// Minimizes J_h by damped Newton.  Throws NumericalError when the residual
/// stays above tol after max_iter steps.
DiscreteSolution solve_ph(const DiscreteProblem& prob, const SolverOptions& options = {});

/// Same solve on a centred ball grid with Schwarz-rearranged data.  Throws
/// NumericalError when a slice of the solution increases outward along an axis.
DiscreteSolution solve_ph_symmetrized(const DiscreteProblem& prob, const SliceStack& f_star,
                                      const SolverOptions& options = {});

/// x-only problem -div(a(|grad u|) grad u) = f on the cross-section.
std::vector<double> solve_x_only(const GridPtr& grid, const Nonlinearity& nl,
                                 std::span<const double> f, const SolverOptions& options = {});

/// Piecewise linear interpolant in y of a solved stack.
class YInterpolant {
 public:
  explicit YInterpolant(SliceStack stack);
  const SliceStack& stack() const { return stack_; }
  /// u^h(x_c, y) for every cell; exact at y = jh.
  std::vector<double> sample(double y) const;
  double value(double y, std::size_t cell) const;

 private:
  SliceStack stack_;
};

YInterpolant interpolate_y(const DiscreteSolution& sol);

/// ||u^{h1} - u^{h2}||_{L^1(Omega)} for two interpolants on the same grid,
/// integrated exactly over the merged y-breakpoints.
double l1_distance_y(const YInterpolant& a, const YInterpolant& b);

/// Discrete H^1 norm of u^h: (sum_j h int |grad u_j|^2 + sum_{j=0}^{N} h int ((u_{j+1}-u_j)/h)^2)^{1/2}.
double h1_norm(const SliceStack& stack);

/// Field sampler f(x1, x2, y).
using SourceFunction = std::function<double(double, double, double)>;

/// f_j(x_c) = f(x_c, jh).
SliceStack sample_source(const GridPtr& grid, int N, const SourceFunction& f);

}  // namespace steiner
