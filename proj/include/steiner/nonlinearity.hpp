// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steiner {

/// Below this argument, a(t) = beta(t)/t is evaluated at the floor value.
inline constexpr double kGradientFloor = 1e-14;

struct BetaEval {
  double beta = 0.0;
  double dbeta = 0.0;
};

/// Diffusion nonlinearity of -div(a(|grad u|) grad u).
///
/// Holds beta(t) = a(t) t together with the derived energy densities
/// A(t) = t beta(t) and B(t) = int_0^t beta.  Values are immutable once
/// built; copies share the same evaluation tables and may be used from
/// several threads at once.
class Nonlinearity {
 public:
  using ScalarMap = std::function<double(double)>;

  struct Growth {
    double p = 2.0;
    double C1 = 1.0;
    double C2 = 1.0;
  };

  /// Generic nonlinearity from beta.  B is tabulated by adaptive quadrature at
  /// construction time.  When dbeta is empty, beta' is taken by central
  /// differences.
  static Nonlinearity from_beta(std::string name, ScalarMap beta, Growth growth,
                                std::optional<double> smooth_eps = std::nullopt,
                                ScalarMap dbeta = {});

  /// Generic nonlinearity from a combined evaluator returning beta and beta'.
  static Nonlinearity from_eval(std::string name, std::function<BetaEval(double)> eval,
                                Growth growth, std::optional<double> smooth_eps = std::nullopt);

  /// Generic nonlinearity from the density A(t) = t beta(t).
  static Nonlinearity from_energy_density(std::string name, ScalarMap A, Growth growth);

  double beta(double t) const;
  double beta_prime(double t) const;
  BetaEval eval(double t) const;
  /// a(t) = beta(t)/t, guarded below kGradientFloor.
  double a(double t) const;
  double A(double t) const { return t * beta(t); }
  double B(double t) const;

  double p() const;
  double C1() const;
  double C2() const;
  /// Ellipticity constant eps with eps <= beta' <= 1/eps, when known.
  std::optional<double> smooth_eps() const;
  const std::string& name() const;

  struct Impl;
  explicit Nonlinearity(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

/// a(t) = t^{p-2}: beta = t^{p-1}, A = t^p, B = t^p / p.
Nonlinearity make_p_laplacian(double p);

/// beta(t) = t^{p-1} + tau t.
Nonlinearity make_shifted_p(double p, double tau);

/// Piecewise linear beta through (t_k, beta_k), linearly extrapolated past the
/// last node.  Requires t_0 = 0, beta_0 = 0 and strictly increasing t.
Nonlinearity make_tabulated(std::span<const double> t, std::span<const double> beta);

/// Reads a two-column `t beta` text file (whitespace or comma separated,
/// `#` comments).  First row must be `0 0`.
Nonlinearity load_tabulated(const std::filesystem::path& path);

/// Outcome of one sampled hypothesis check.
struct HypothesisCheck {
  std::string name;
  bool passed = true;
  std::optional<double> first_violation;
  std::string detail;
};

struct ValidationReport {
  double t_min = 0.0;
  double t_max = 0.0;
  int sample_count = 0;
  std::vector<HypothesisCheck> checks;

  bool all_passed() const;
  const HypothesisCheck& check(const std::string& name) const;
};

/// Log-spaced sample set in (0, t_max] used by validate_hypotheses:
/// t_k = t_min (t_max/t_min)^{k/(n-1)}, k = 0..n-1.
std::vector<double> hypothesis_samples(int sample_count, double t_min = 1e-6,
                                       double t_max = 1e3);

/// Sampled checks of monotonicity (H1), the growth bounds and convexity of A
/// (H2), and the two-sided slope bound (H_eps) when the nonlinearity claims one.
/// Checks are named "H1", "H2.lower", "H2.upper", "H2.convex", "Heps".
ValidationReport validate_hypotheses(const Nonlinearity& nl, int sample_count = 256,
                                     double t_min = 1e-6, double t_max = 1e3);

/// Value and minimizer of s -> |t-s|^2/(2 eps) + A(s) over s >= 0.
struct ProxResult {
  double value = 0.0;
  double point = 0.0;
};

/// Moreau-Yosida regularization of A with an added ellipticity shift:
/// beta_{eps,tau}(t) = A_eps(t)/t + tau t.
class RegularizedNonlinearity {
 public:
  RegularizedNonlinearity(Nonlinearity base, double eps, double tau);

  const Nonlinearity& base() const { return base_; }
  double eps() const { return eps_; }
  double tau() const { return tau_; }

  /// A_eps(t) and the proximal point P_eps(t).  Throws HypothesisViolation when
  /// the minimization detects a non-convex A on the bracket [0, t].
  ProxResult envelope(double t) const;
  double A_eps(double t) const { return envelope(t).value; }
  double P_eps(double t) const { return envelope(t).point; }
  double beta_eps_tau(double t) const;
  double a_eps_tau(double t) const;
  BetaEval eval(double t) const;

  /// The regularized map packaged as a Nonlinearity (B tabulated by
  /// quadrature, smooth_eps = min(tau, 1/(1/eps + tau)) when tau > 0).
  const Nonlinearity& as_nonlinearity() const { return regularized_; }

 private:
  Nonlinearity base_;
  double eps_;
  double tau_;
  Nonlinearity regularized_;
};

RegularizedNonlinearity moreau_yosida(const Nonlinearity& nl, double eps, double tau);

}  // namespace steiner
