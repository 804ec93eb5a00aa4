// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "steiner/grid.hpp"
#include "steiner/nonlinearity.hpp"
#include "steiner/rearrange.hpp"

namespace steiner {

// ---------------------------------------------------------------------------
// Tridiagonal comparison engine for D_2 = tridiag(-1, 2, -1).

/// Dense N x N second-difference matrix, row-major.
std::vector<double> d2_matrix(int N);

/// (N+1) x N difference matrix C, (Cx)_k = x_{k+1} - x_k with x_0 = x_{N+1} = 0.
/// C^T C = D_2 in exact integer arithmetic.
std::vector<double> d2_difference_factor(int N);

/// Square unit upper bidiagonal matrix (1 on the diagonal, -1 above).  Its
/// Gram matrix is D_2 - e_1 e_1^T, not D_2.
std::vector<double> unit_bidiagonal(int N);

/// Lower bidiagonal Cholesky factor of D_2: L_kk = sqrt((k+1)/k),
/// L_{k+1,k} = -sqrt(k/(k+1)) (1-based k).
std::vector<double> d2_cholesky(int N);

/// A^T B for row-major matrices with `rows` rows.
std::vector<double> gram(std::span<const double> A, std::span<const double> B, int rows, int cols);

/// (D_2 x)_k = 2 x_k - x_{k-1} - x_{k+1} with x_0 = x_{N+1} = 0.
std::vector<double> d2_apply(std::span<const double> x);

/// Outcome of the discrete comparison x >= 0, D_2 x <= 0 => x = 0.
struct ComparisonCandidate {
  bool hypothesis = false;  // x >= 0 and D_2 x <= 0
  double norm = 0.0;        // ||x||_inf
};
ComparisonCandidate d2_comparison(std::span<const double> x);

/// Thomas algorithm for sub/diag/super diagonals a, b, c (a[0], c[n-1] unused).
std::vector<double> solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                                      std::span<const double> c, std::span<const double> d);

// ---------------------------------------------------------------------------
// The s-variable operator A U = kappa_n(s) beta(-kappa_n(s) U'').

class StarOperator {
 public:
  StarOperator(RadialGridPtr s_grid, Nonlinearity nl);

  const RadialGridPtr& s_grid() const { return s_grid_; }
  const Nonlinearity& nl() const { return nl_; }
  int M() const { return s_grid_->M(); }

  /// Three-point second difference on the (possibly graded) grid at nodes
  /// 1..M; the node M uses the even ghost U_{M+1} = U_{M-1}.  Entry 0 is 0.
  std::vector<double> second_difference(std::span<const double> U) const;

  /// A U at every node (0 at s = 0).  Throws HypothesisViolation when
  /// U'' > 1e-10 (plus rounding) at some node, i.e. U is not concave.
  std::vector<double> apply(std::span<const double> U) const;
  /// Same without the concavity check; beta is extended oddly to negative arguments.
  std::vector<double> apply_unchecked(std::span<const double> U) const;

  /// Stencil weights of the second difference at node i: (left, centre, right).
  std::array<double, 3> stencil(int i) const;

 private:
  RadialGridPtr s_grid_;
  Nonlinearity nl_;
};

std::vector<double> apply_A(const StarOperator& op, const MassFunction& U);

/// Solves U + lambda A U = G with U(0) = 0, U'(L) = 0 by damped Newton with a
/// tridiagonal (M-matrix) linear solve.  `guess` may warm-start the iteration.
MassFunction resolvent(const StarOperator& op, double lambda, std::span<const double> G,
                       double tol = 1e-12, std::span<const double> guess = {});

struct AccretivityReport {
  int trials = 0;
  std::vector<double> lambdas;
  long long evaluations = 0;
  long long violations = 0;  // margin below -1e-9
  double worst_margin = 0.0;  // min over trials of rhs - lhs
};

/// Random mass functions of non-increasing profiles (cumulative sums of
/// nonnegative decrements ending at 0), trapezoid-integrated on the s-grid.
MassFunction random_mass_function(const RadialGridPtr& s_grid, std::uint64_t seed);

/// ||(U-V)_+||_inf <= ||(U - V + lambda (AU - AV))_+||_inf on random pairs.
AccretivityReport t_accretivity_check(const StarOperator& op, int trials,
                                      std::span<const double> lambdas, std::uint64_t seed = 1);

/// Mass functions U_0..U_{N+1} of a stack (with U_0 = U_{N+1} = 0).
std::vector<MassFunction> mass_functions(const SliceStack& stack, const RadialGridPtr& s_grid);

struct StarData {
  std::vector<MassFunction> U;  // j = 0..N+1
  std::vector<MassFunction> F;  // j = 0..N+1 (boundary entries zero)
};

StarData build_star_data(const SliceStack& u, const SliceStack& f, const RadialGridPtr& s_grid);

struct StarSolution {
  std::vector<MassFunction> V;  // j = 0..N+1
  int sweeps = 0;
  double last_change = 0.0;
};

/// Solves A V_j - (V_{j+1} - 2 V_j + V_{j-1})/h^2 = F_j, j = 1..N, by
/// Gauss-Seidel over j: V_j = R_{h^2/2}((h^2/2) F_j + (V_{j+1} + V_{j-1})/2).
/// F has entries j = 0..N+1.  Throws NumericalError when the sweeps stall.
StarSolution solve_star_system(const StarOperator& op, const std::vector<MassFunction>& F, double h,
                               double tol = 1e-10, int max_sweeps = 100000);

/// Slack F_j - A U_j + (U_{j+1} - 2U_j + U_{j-1})/h^2 per slice j = 1..N and
/// node i = 1..M (entry 0 of each row is 0).
std::vector<std::vector<double>> subsolution_residual(const std::vector<MassFunction>& U,
                                                      const std::vector<MassFunction>& F,
                                                      const StarOperator& op, double h);

}  // namespace steiner
