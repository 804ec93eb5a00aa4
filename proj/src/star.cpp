// SPDX-License-Identifier: Apache-2.0
#include "steiner/star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "steiner/error.hpp"

namespace steiner {

std::vector<double> d2_matrix(int N) {
  if (N < 1) throw InvalidArgument("D_2 needs N >= 1");
  const auto n = static_cast<std::size_t>(N);
  std::vector<double> D(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    D[i * n + i] = 2.0;
    if (i + 1 < n) {
      D[i * n + i + 1] = -1.0;
      D[(i + 1) * n + i] = -1.0;
    }
  }
  return D;
}

std::vector<double> d2_difference_factor(int N) {
  if (N < 1) throw InvalidArgument("D_2 needs N >= 1");
  const auto n = static_cast<std::size_t>(N);
  std::vector<double> C((n + 1) * n, 0.0);
  for (std::size_t k = 0; k <= n; ++k) {
    if (k < n) C[k * n + k] = 1.0;
    if (k > 0) C[k * n + k - 1] = -1.0;
  }
  return C;
}

std::vector<double> unit_bidiagonal(int N) {
  if (N < 1) throw InvalidArgument("D_2 needs N >= 1");
  const auto n = static_cast<std::size_t>(N);
  std::vector<double> C(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    C[k * n + k] = 1.0;
    if (k + 1 < n) C[k * n + k + 1] = -1.0;
  }
  return C;
}

std::vector<double> d2_cholesky(int N) {
  if (N < 1) throw InvalidArgument("D_2 needs N >= 1");
  const auto n = static_cast<std::size_t>(N);
  std::vector<double> L(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i + 1);
    L[i * n + i] = std::sqrt((k + 1.0) / k);
    if (i + 1 < n) L[(i + 1) * n + i] = -std::sqrt(k / (k + 1.0));
  }
  return L;
}

std::vector<double> gram(std::span<const double> A, std::span<const double> B, int rows, int cols) {
  const auto r = static_cast<std::size_t>(rows);
  const auto c = static_cast<std::size_t>(cols);
  if (A.size() != r * c || B.size() != r * c) throw InvalidArgument("gram: shape mismatch");
  std::vector<double> G(c * c, 0.0);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < c; ++i) {
      const double a = A[k * c + i];
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < c; ++j) G[i * c + j] += a * B[k * c + j];
    }
  }
  return G;
}

std::vector<double> d2_apply(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = k > 0 ? x[k - 1] : 0.0;
    const double hi = k + 1 < n ? x[k + 1] : 0.0;
    y[k] = 2.0 * x[k] - lo - hi;
  }
  return y;
}

ComparisonCandidate d2_comparison(std::span<const double> x) {
  ComparisonCandidate out;
  const auto y = d2_apply(x);
  out.hypothesis = std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0; }) &&
                   std::all_of(y.begin(), y.end(), [](double v) { return v <= 0.0; });
  for (double v : x) out.norm = std::max(out.norm, std::abs(v));
  return out;
}

std::vector<double> solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                                      std::span<const double> c, std::span<const double> d) {
  const std::size_t n = b.size();
  if (a.size() != n || c.size() != n || d.size() != n) throw InvalidArgument("tridiagonal: size mismatch");
  std::vector<double> cp(n), dp(n), x(n);
  double denom = b[0];
  if (denom == 0.0) throw NumericalError("tridiagonal: zero pivot");
  cp[0] = c[0] / denom;
  dp[0] = d[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = b[i] - a[i] * cp[i - 1];
    if (denom == 0.0) throw NumericalError("tridiagonal: zero pivot");
    cp[i] = i + 1 < n ? c[i] / denom : 0.0;
    dp[i] = (d[i] - a[i] * dp[i - 1]) / denom;
  }
  x[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

StarOperator::StarOperator(RadialGridPtr s_grid, Nonlinearity nl) : s_grid_(std::move(s_grid)), nl_(std::move(nl)) {
  if (!s_grid_) throw InvalidArgument("star operator needs an s-grid");
}

std::array<double, 3> StarOperator::stencil(int i) const {
  const auto s = s_grid_->s();
  const int M = this->M();
  if (i < 1 || i > M) throw InvalidArgument("stencil node out of range");
  const auto k = static_cast<std::size_t>(i);
  const double hl = s[k] - s[k - 1];
  if (i == M) return {2.0 / (hl * hl), -2.0 / (hl * hl), 0.0};
  const double hr = s[k + 1] - s[k];
  return {2.0 / (hl * (hl + hr)), -2.0 / (hl * hr), 2.0 / (hr * (hl + hr))};
}

std::vector<double> StarOperator::second_difference(std::span<const double> U) const {
  const int M = this->M();
  if (U.size() != static_cast<std::size_t>(M) + 1) throw InvalidArgument("mass function size does not match the s-grid");
  std::vector<double> D(U.size(), 0.0);
  for (int i = 1; i <= M; ++i) {
    const auto w = stencil(i);
    const auto k = static_cast<std::size_t>(i);
    const double right = i < M ? U[k + 1] : 0.0;
    D[k] = w[0] * U[k - 1] + w[1] * U[k] + w[2] * right;
  }
  return D;
}

namespace {

double odd_beta(const Nonlinearity& nl, double z) { return z >= 0.0 ? nl.beta(z) : -nl.beta(-z); }

}  // namespace

std::vector<double> StarOperator::apply_unchecked(std::span<const double> U) const {
  const auto D = second_difference(U);
  std::vector<double> out(D.size(), 0.0);
  for (std::size_t i = 1; i < D.size(); ++i) {
    const double k = s_grid_->kappa(i);
    out[i] = k * odd_beta(nl_, -k * D[i]);
  }
  return out;
}

std::vector<double> StarOperator::apply(std::span<const double> U) const {
  const auto D = second_difference(U);
  const int M = this->M();
  constexpr double kRound = 8.0 * std::numeric_limits<double>::epsilon();
  for (int i = 1; i <= M; ++i) {
    const auto w = stencil(i);
    const auto k = static_cast<std::size_t>(i);
    const double right = i < M ? U[k + 1] : 0.0;
    const double rounding =
        kRound * (std::abs(w[0] * U[k - 1]) + std::abs(w[1] * U[k]) + std::abs(w[2] * right));
    if (D[k] > 1e-10 + rounding) {
      std::ostringstream msg;
      msg << "mass function is not concave at s = " << s_grid_->s(k) << " (U'' = " << D[k] << ")";
      throw HypothesisViolation(msg.str());
    }
  }
  return apply_unchecked(U);
}

std::vector<double> apply_A(const StarOperator& op, const MassFunction& U) { return op.apply(U.values); }

MassFunction resolvent(const StarOperator& op, double lambda, std::span<const double> G, double tol,
                       std::span<const double> guess) {
  if (!(lambda > 0.0)) throw InvalidArgument("resolvent needs lambda > 0");
  const int M = op.M();
  const auto n = static_cast<std::size_t>(M) + 1;
  if (G.size() != n) throw InvalidArgument("resolvent data size does not match the s-grid");
  std::vector<double> U(n, 0.0);
  if (guess.size() == n) {
    std::copy(guess.begin(), guess.end(), U.begin());
  } else {
    std::copy(G.begin(), G.end(), U.begin());
  }
  U[0] = 0.0;
  const double scale = std::max(1.0, *std::max_element(G.begin(), G.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));
  const double target = tol * scale;

  auto residual = [&](const std::vector<double>& V) {
    const auto AV = op.apply_unchecked(V);
    std::vector<double> F(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) F[i] = V[i] + lambda * AV[i] - G[i];
    return F;
  };
  auto norm2 = [](const std::vector<double>& F) {
    double s = 0.0;
    for (double v : F) s += v * v;
    return std::sqrt(s);
  };
  auto norm_inf = [](const std::vector<double>& F) {
    double s = 0.0;
    for (double v : F) s = std::max(s, std::abs(v));
    return s;
  };

  std::vector<double> F = residual(U);
  double r2 = norm2(F);
  const auto m = static_cast<std::size_t>(M);
  std::vector<double> a(m), b(m), c(m), rhs(m);
  // Rounding in the second difference is amplified by lambda kappa^2 beta'; the
  // residual cannot be driven below that floor.
  double floor = 0.0;
  for (int it = 0; it < 200; ++it) {
    if (norm_inf(F) <= std::max(target, floor)) return MassFunction{op.s_grid(), U};
    const auto D = op.second_difference(U);
    floor = 0.0;
    for (int i = 1; i <= M; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double kap = op.s_grid()->kappa(k);
      const double z = -kap * D[k];
      const double slope = op.nl().beta_prime(std::abs(z));
      const double g = -lambda * kap * kap * slope;
      const auto w = op.stencil(i);
      const std::size_t r = k - 1;
      a[r] = i > 1 ? g * w[0] : 0.0;
      b[r] = 1.0 + g * w[1];
      c[r] = i < M ? g * w[2] : 0.0;
      rhs[r] = -F[k];
      const double up = i < M ? U[k + 1] : U[k - 1];
      const double mag = std::abs(w[0] * U[k - 1]) + std::abs(w[1] * U[k]) + std::abs(w[2] * up);
      floor = std::max(floor, 16.0 * std::numeric_limits<double>::epsilon() * (std::abs(g) * mag + std::abs(G[k])));
    }
    if (norm_inf(F) <= std::max(target, floor)) return MassFunction{op.s_grid(), U};
    const auto d = solve_tridiagonal(a, b, c, rhs);
    // Backtracking on ||F||_2 with continued halving while it helps.
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(n, 0.0);
    for (int ls = 0; ls < 50 && !accepted; ++ls) {
      for (std::size_t k = 1; k < n; ++k) trial[k] = U[k] + alpha * d[k - 1];
      auto Ft = residual(trial);
      double rt = norm2(Ft);
      if (rt < (1.0 - 1e-4 * alpha) * r2 || (rt <= r2 && norm_inf(Ft) <= std::max(target, floor))) {
        accepted = true;
        for (int extra = 0; extra < 6 && rt > 0.5 * r2; ++extra) {
          std::vector<double> half(n, 0.0);
          for (std::size_t k = 1; k < n; ++k) half[k] = U[k] + 0.5 * alpha * d[k - 1];
          auto Fh = residual(half);
          const double rh = norm2(Fh);
          if (!(rh < rt)) break;
          alpha *= 0.5;
          trial = std::move(half);
          Ft = std::move(Fh);
          rt = rh;
        }
        U = trial;
        F = std::move(Ft);
        r2 = rt;
      } else {
        alpha *= 0.5;
      }
    }
    if (!accepted) break;
  }
  if (norm_inf(F) <= std::max(target, floor)) return MassFunction{op.s_grid(), U};
  std::ostringstream msg;
  msg << "resolvent Newton failed: residual " << norm_inf(F) << " (lambda " << lambda
      << "); the slope of beta degenerates, regularize";
  throw NumericalError(msg.str());
}

MassFunction random_mass_function(const RadialGridPtr& s_grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int M = s_grid->M();
  const auto n = static_cast<std::size_t>(M) + 1;
  // Sparse-ish decrements give flat zones as well as steep drops.
  const double amplitude = std::exp(4.0 * unit(rng) - 2.0);
  const double sparsity = unit(rng);
  std::vector<double> profile(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double dec = unit(rng) < sparsity ? 0.0 : unit(rng);
    profile[i] = profile[i + 1] + dec * amplitude / M;
  }
  std::vector<double> U(n, 0.0);
  const auto s = s_grid->s();
  for (std::size_t i = 1; i < n; ++i) U[i] = U[i - 1] + 0.5 * (profile[i - 1] + profile[i]) * (s[i] - s[i - 1]);
  return MassFunction{s_grid, U};
}

AccretivityReport t_accretivity_check(const StarOperator& op, int trials, std::span<const double> lambdas,
                                      std::uint64_t seed) {
  AccretivityReport report;
  report.trials = trials;
  report.lambdas.assign(lambdas.begin(), lambdas.end());
  report.worst_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const MassFunction U = random_mass_function(op.s_grid(), rng());
    MassFunction V = random_mass_function(op.s_grid(), rng());
    if (t % 10 == 0) V = U;
    const auto AU = op.apply(U.values);
    const auto AV = op.apply(V.values);
    for (double lambda : lambdas) {
      double lhs = 0.0;
      double rhs = 0.0;
      for (std::size_t i = 1; i < U.values.size(); ++i) {
        const double d = U.values[i] - V.values[i];
        lhs = std::max(lhs, d);
        rhs = std::max(rhs, d + lambda * (AU[i] - AV[i]));
      }
      const double margin = rhs - lhs;
      ++report.evaluations;
      if (margin < -1e-9) ++report.violations;
      report.worst_margin = std::min(report.worst_margin, margin);
    }
  }
  if (report.evaluations == 0) report.worst_margin = 0.0;
  return report;
}

std::vector<MassFunction> mass_functions(const SliceStack& stack, const RadialGridPtr& s_grid) {
  const double L = stack.grid()->total_measure();
  if (std::abs(s_grid->measure() - L) > 1e-12 * L) {
    throw InvalidArgument("s-grid measure does not match |Omega_1|");
  }
  std::vector<MassFunction> out;
  out.reserve(static_cast<std::size_t>(stack.N()) + 2);
  out.push_back(zero_mass(s_grid));
  for (int j = 1; j <= stack.N(); ++j) {
    const auto sl = stack.slice(j);
    const ScalarField f(stack.grid(), std::vector<double>(sl.begin(), sl.end()));
    out.push_back(mass_function(decreasing_rearrangement(f, s_grid)));
  }
  out.push_back(zero_mass(s_grid));
  return out;
}

StarData build_star_data(const SliceStack& u, const SliceStack& f, const RadialGridPtr& s_grid) {
  if (u.N() != f.N()) throw InvalidArgument("solution and data stacks differ in N");
  return StarData{mass_functions(u, s_grid), mass_functions(f, s_grid)};
}

StarSolution solve_star_system(const StarOperator& op, const std::vector<MassFunction>& F, double h, double tol,
                               int max_sweeps) {
  if (F.size() < 3) throw InvalidArgument("star system needs N >= 1 data slices plus boundaries");
  const std::size_t N = F.size() - 2;
  if (std::abs(h * static_cast<double>(N + 1) - 1.0) > 1e-12) throw InvalidArgument("star system: h != 1/(N+1)");
  const auto n = static_cast<std::size_t>(op.M()) + 1;
  StarSolution sol;
  sol.V.assign(N + 2, zero_mass(op.s_grid()));
  const double lambda = 0.5 * h * h;
  std::vector<double> G(n);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        G[i] = lambda * F[j].values[i] + 0.5 * (sol.V[j + 1].values[i] + sol.V[j - 1].values[i]);
      }
      MassFunction next = resolvent(op, lambda, G, 1e-14, sol.V[j].values);
      for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next.values[i] - sol.V[j].values[i]));
      sol.V[j] = std::move(next);
    }
    sol.sweeps = sweep;
    sol.last_change = change;
    if (change <= tol) return sol;
  }
  std::ostringstream msg;
  msg << "star system Gauss-Seidel did not converge: last change " << sol.last_change << " after "
      << sol.sweeps << " sweeps";
  throw NumericalError(msg.str());
}

std::vector<std::vector<double>> subsolution_residual(const std::vector<MassFunction>& U,
                                                      const std::vector<MassFunction>& F,
                                                      const StarOperator& op, double h) {
  if (U.size() != F.size() || U.size() < 3) throw InvalidArgument("subsolution residual: size mismatch");
  const std::size_t N = U.size() - 2;
  const double inv_h2 = 1.0 / (h * h);
  std::vector<std::vector<double>> out(N);
  for (std::size_t j = 1; j <= N; ++j) {
    const auto AU = op.apply(U[j].values);
    auto& row = out[j - 1];
    row.assign(AU.size(), 0.0);
    for (std::size_t i = 1; i < AU.size(); ++i) {
      const double dyy = (U[j + 1].values[i] - 2.0 * U[j].values[i] + U[j - 1].values[i]) * inv_h2;
      row[i] = F[j].values[i] - AU[i] + dyy;
    }
  }
  return out;
}

}  // namespace steiner
