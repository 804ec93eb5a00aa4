// SPDX-License-Identifier: Apache-2.0
#include "steiner/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "steiner/error.hpp"

namespace steiner {

namespace {

// Tabulated B(t) = int_0^t beta on a log-spaced grid, evaluated by cubic
// Hermite interpolation using beta as the exact derivative.
class EnergyTable {
 public:
  static constexpr double kLo = 1e-9;
  static constexpr double kHi = 1e3;
  static constexpr int kNodes = 2400;

  explicit EnergyTable(const Nonlinearity::ScalarMap& beta) : beta_(beta) {
    t_.reserve(kNodes + 1);
    t_.push_back(0.0);
    const double ratio = std::log(kHi / kLo);
    for (int k = 0; k < kNodes; ++k) {
      t_.push_back(kLo * std::exp(ratio * k / (kNodes - 1)));
    }
    B_.assign(t_.size(), 0.0);
    b_.assign(t_.size(), 0.0);
    for (std::size_t k = 1; k < t_.size(); ++k) {
      b_[k] = beta(t_[k]);
      B_[k] = B_[k - 1] + integrate(t_[k - 1], t_[k]);
    }
  }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= t_.back()) return B_.back() + integrate(t_.back(), t);
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[k + 1] - t_[k];
    const double x = (t - t_[k]) / h;
    const double x2 = x * x;
    const double x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * B_[k] + (x3 - 2 * x2 + x) * h * b_[k] +
           (-2 * x3 + 3 * x2) * B_[k + 1] + (x3 - x2) * h * b_[k + 1];
  }

 private:
  double integrate(double a, double b) const {
    if (b <= a) return 0.0;
    // Nodes are about 1% apart in relative terms, so one 15-point rule is
    // already exact to rounding for smooth beta; subdivision only kicks in
    // near kinks of beta'.
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(beta_, a, b, 4, 1e-12);
  }

  Nonlinearity::ScalarMap beta_;
  std::vector<double> t_;
  std::vector<double> B_;
  std::vector<double> b_;
};

double central_difference(const Nonlinearity::ScalarMap& f, double t) {
  const double step = 1e-6 * std::max(t, 1e-6);
  const double lo = std::max(0.0, t - step);
  const double hi = t + step;
  return (f(hi) - f(lo)) / (hi - lo);
}

}  // namespace

struct Nonlinearity::Impl {
  std::string name;
  ScalarMap beta;
  ScalarMap dbeta;
  std::function<BetaEval(double)> eval;
  ScalarMap closed_B;
  std::shared_ptr<const EnergyTable> table;
  Growth growth;
  std::optional<double> smooth_eps;
};

namespace {

std::shared_ptr<Nonlinearity::Impl> make_impl(std::string name, Nonlinearity::ScalarMap beta,
                                              Nonlinearity::Growth growth,
                                              std::optional<double> smooth_eps) {
  if (!(growth.p > 1.0)) throw InvalidArgument("growth exponent p must exceed 1");
  if (!(growth.C1 > 0.0) || !(growth.C2 > 0.0)) {
    throw InvalidArgument("growth constants C1, C2 must be positive");
  }
  auto impl = std::make_shared<Nonlinearity::Impl>();
  impl->name = std::move(name);
  impl->beta = std::move(beta);
  impl->growth = growth;
  impl->smooth_eps = smooth_eps;
  return impl;
}

}  // namespace

Nonlinearity Nonlinearity::from_beta(std::string name, ScalarMap beta, Growth growth,
                                     std::optional<double> smooth_eps, ScalarMap dbeta) {
  auto impl = make_impl(std::move(name), beta, growth, smooth_eps);
  if (!dbeta) {
    dbeta = [beta](double t) { return central_difference(beta, t); };
  }
  impl->dbeta = std::move(dbeta);
  impl->table = std::make_shared<EnergyTable>(impl->beta);
  return Nonlinearity(std::move(impl));
}

Nonlinearity Nonlinearity::from_eval(std::string name, std::function<BetaEval(double)> eval,
                                     Growth growth, std::optional<double> smooth_eps) {
  auto beta = [eval](double t) { return t > 0.0 ? eval(t).beta : 0.0; };
  auto impl = make_impl(std::move(name), beta, growth, smooth_eps);
  impl->dbeta = [eval](double t) { return eval(t).dbeta; };
  impl->eval = [eval](double t) {
    if (t >= kGradientFloor) return eval(t);
    // Below the floor, continue beta linearly with the slope beta(floor)/floor.
    const BetaEval e = eval(kGradientFloor);
    return BetaEval{t > 0.0 ? e.beta * (t / kGradientFloor) : 0.0, e.dbeta};
  };
  impl->table = std::make_shared<EnergyTable>(impl->beta);
  return Nonlinearity(std::move(impl));
}

Nonlinearity Nonlinearity::from_energy_density(std::string name, ScalarMap A, Growth growth) {
  auto beta = [A](double t) { return t > 0.0 ? A(t) / t : 0.0; };
  return from_beta(std::move(name), beta, growth);
}

double Nonlinearity::beta(double t) const {
  if (t <= 0.0) return 0.0;
  return impl_->beta(t);
}

double Nonlinearity::beta_prime(double t) const {
  return impl_->dbeta(std::max(t, kGradientFloor));
}

BetaEval Nonlinearity::eval(double t) const {
  if (impl_->eval) return impl_->eval(t);
  return {beta(t), beta_prime(t)};
}

double Nonlinearity::a(double t) const {
  const double s = std::max(t, kGradientFloor);
  return impl_->beta(s) / s;
}

double Nonlinearity::B(double t) const {
  if (t <= 0.0) return 0.0;
  if (impl_->closed_B) return impl_->closed_B(t);
  return (*impl_->table)(t);
}

double Nonlinearity::p() const { return impl_->growth.p; }
double Nonlinearity::C1() const { return impl_->growth.C1; }
double Nonlinearity::C2() const { return impl_->growth.C2; }
std::optional<double> Nonlinearity::smooth_eps() const { return impl_->smooth_eps; }
const std::string& Nonlinearity::name() const { return impl_->name; }

Nonlinearity make_p_laplacian(double p) {
  if (!(p > 1.0)) throw InvalidArgument("p_laplacian requires p > 1");
  std::ostringstream name;
  name << "p_laplacian(" << p << ")";
  auto impl = make_impl(name.str(), [p](double t) { return t > 0.0 ? std::pow(t, p - 1) : 0.0; },
                        {p, 1.0, 1.0}, p == 2.0 ? std::optional<double>(1.0) : std::nullopt);
  impl->dbeta = [p](double t) { return (p - 1) * std::pow(t, p - 2); };
  impl->eval = [p](double t) {
    if (t <= 0.0) t = 0.0;
    // Only the slope is guarded; beta itself is exact down to 0.
    const double s = std::max(t, kGradientFloor);
    return BetaEval{t > 0.0 ? std::pow(t, p - 1) : 0.0, (p - 1) * std::pow(s, p - 2)};
  };
  impl->closed_B = [p](double t) { return std::pow(t, p) / p; };
  return Nonlinearity(std::move(impl));
}

Nonlinearity make_shifted_p(double p, double tau) {
  if (!(p > 1.0)) throw InvalidArgument("shifted_p requires p > 1");
  if (!(tau >= 0.0)) throw InvalidArgument("shifted_p requires tau >= 0");
  std::ostringstream name;
  name << "shifted_p(" << p << ", " << tau << ")";
  // For p < 2 the linear shift dominates at infinity, so the growth class is 2.
  Nonlinearity::Growth growth{std::max(p, 2.0), p >= 2.0 ? 1.0 : std::max(tau, 1e-300),
                              1.0 + tau};
  std::optional<double> eps;
  if (p == 2.0) eps = 1.0 / (1.0 + tau);
  auto impl = make_impl(
      name.str(), [p, tau](double t) { return t > 0.0 ? std::pow(t, p - 1) + tau * t : 0.0; },
      growth, eps);
  impl->dbeta = [p, tau](double t) { return (p - 1) * std::pow(t, p - 2) + tau; };
  impl->closed_B = [p, tau](double t) { return std::pow(t, p) / p + 0.5 * tau * t * t; };
  return Nonlinearity(std::move(impl));
}

Nonlinearity make_tabulated(std::span<const double> t, std::span<const double> beta) {
  if (t.size() != beta.size() || t.size() < 2) {
    throw InvalidArgument("tabulated nonlinearity needs at least two (t, beta) rows");
  }
  if (t[0] != 0.0 || beta[0] != 0.0) {
    throw InvalidArgument("tabulated nonlinearity: first row must be `0 0`");
  }
  std::vector<double> ts(t.begin(), t.end());
  std::vector<double> bs(beta.begin(), beta.end());
  std::vector<double> slope(ts.size() - 1);
  std::vector<double> Bnode(ts.size(), 0.0);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (!(ts[k + 1] > ts[k])) {
      throw InvalidArgument("tabulated nonlinearity: t must be strictly increasing");
    }
    slope[k] = (bs[k + 1] - bs[k]) / (ts[k + 1] - ts[k]);
    Bnode[k + 1] = Bnode[k] + 0.5 * (bs[k] + bs[k + 1]) * (ts[k + 1] - ts[k]);
  }

  auto segment = [ts](double x) {
    const auto it = std::upper_bound(ts.begin(), ts.end(), x);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - ts.begin() - 1, 0));
    return std::min(k, ts.size() - 2);
  };

  auto beta_fn = [ts, bs, slope, segment](double x) {
    if (x <= 0.0) return 0.0;
    const std::size_t k = segment(x);
    return bs[k] + slope[k] * (x - ts[k]);
  };
  auto dbeta_fn = [slope, segment](double x) { return slope[segment(std::max(x, 0.0))]; };
  auto B_fn = [ts, bs, slope, Bnode, segment](double x) {
    const std::size_t k = segment(x);
    const double d = x - ts[k];
    return Bnode[k] + bs[k] * d + 0.5 * slope[k] * d * d;
  };

  // Growth class 2 from the linear extrapolation; constants read off the nodes.
  const double last_slope = slope.back();
  double C2 = last_slope;
  double C1 = last_slope;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    C2 = std::max(C2, bs[k] / (ts[k] + 1.0));
    if (ts[k] > 1.0) C1 = std::min(C1, ts[k] * bs[k] / (ts[k] * ts[k] - 1.0));
  }
  C1 = std::max(C1, 1e-300);
  C2 = std::max(C2, 1e-300);

  std::optional<double> eps;
  const auto [lo, hi] = std::minmax_element(slope.begin(), slope.end());
  if (*lo > 0.0) eps = std::min(*lo, 1.0 / *hi);

  auto impl = make_impl("tabulated", beta_fn, {2.0, C1, C2}, eps);
  impl->dbeta = dbeta_fn;
  impl->closed_B = B_fn;
  return Nonlinearity(std::move(impl));
}

Nonlinearity load_tabulated(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open tabulated nonlinearity file " + path.string());
  std::vector<double> t;
  std::vector<double> b;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0;
    double y = 0.0;
    if (!(row >> x)) continue;
    std::string rest;
    if (!(row >> y) || (row >> rest)) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) +
                            ": expected two numeric columns");
    }
    t.push_back(x);
    b.push_back(y);
  }
  return make_tabulated(t, b);
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const HypothesisCheck& ValidationReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("no hypothesis check named " + name);
}

std::vector<double> hypothesis_samples(int sample_count, double t_min, double t_max) {
  if (sample_count < 3) throw InvalidArgument("sample_count must be at least 3");
  if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("need 0 < t_min < t_max");
  std::vector<double> t(static_cast<std::size_t>(sample_count));
  const double ratio = std::log(t_max / t_min);
  for (int k = 0; k < sample_count; ++k) {
    t[static_cast<std::size_t>(k)] = t_min * std::exp(ratio * k / (sample_count - 1));
  }
  t.back() = t_max;
  return t;
}

ValidationReport validate_hypotheses(const Nonlinearity& nl, int sample_count, double t_min,
                                     double t_max) {
  const auto t = hypothesis_samples(sample_count, t_min, t_max);
  ValidationReport report;
  report.t_min = t_min;
  report.t_max = t_max;
  report.sample_count = sample_count;

  auto fail = [](HypothesisCheck& c, double at, std::string detail) {
    if (!c.passed) return;
    c.passed = false;
    c.first_violation = at;
    c.detail = std::move(detail);
  };
  auto slack = [](double v) { return 1e-12 * std::max(1.0, std::abs(v)); };

  HypothesisCheck h1{"H1"};
  if (nl.beta(0.0) != 0.0) fail(h1, 0.0, "beta(0) != 0");
  double prev_t = 0.0;
  double prev_b = 0.0;
  for (double x : t) {
    const double b = nl.beta(x);
    if (b < prev_b - slack(prev_b)) fail(h1, x, "beta decreases after t = " + std::to_string(prev_t));
    prev_t = x;
    prev_b = b;
  }

  const double p = nl.p();
  HypothesisCheck lower{"H2.lower"};
  HypothesisCheck upper{"H2.upper"};
  for (double x : t) {
    const double A = nl.A(x);
    if (nl.C1() * (std::pow(x, p) - 1.0) > A + slack(A)) fail(lower, x, "C1 (t^p - 1) > A(t)");
    const double bound = nl.C2() * (std::pow(x, p - 1) + 1.0);
    if (nl.beta(x) > bound + slack(bound)) fail(upper, x, "beta(t) > C2 (t^{p-1} + 1)");
  }

  HypothesisCheck convex{"H2.convex"};
  prev_t = 0.0;
  for (double x : t) {
    const double mid = 0.5 * (prev_t + x);
    const double chord = 0.5 * (nl.A(prev_t) + nl.A(x));
    if (nl.A(mid) > chord + slack(chord)) fail(convex, mid, "A fails midpoint convexity");
    prev_t = x;
  }

  report.checks = {h1, lower, upper, convex};

  if (const auto eps = nl.smooth_eps()) {
    HypothesisCheck heps{"Heps"};
    prev_t = 0.0;
    prev_b = 0.0;
    for (double x : t) {
      const double b = nl.beta(x);
      const double s = (b - prev_b) / (x - prev_t);
      if (s < *eps * (1 - 1e-9) || s > (1 + 1e-9) / *eps) {
        fail(heps, x, "difference quotient of beta outside [eps, 1/eps]");
      }
      prev_t = x;
      prev_b = b;
    }
    report.checks.push_back(heps);
  }
  return report;
}

namespace {

// A_eps(t) = min_{0 <= s <= t} |t-s|^2/(2 eps) + A(s).  A is non-decreasing on
// [0, inf), so the minimizer never exceeds t.  The search variable is the
// relative shift rho = (t - s)/t, which keeps full precision when the proximal
// point sits very close to t (small eps).
ProxResult prox(const Nonlinearity& nl, double eps, double t) {
  if (t <= 0.0) return {0.0, 0.0};
  auto point = [t](double rho) { return rho >= 1.0 ? 0.0 : t - t * rho; };
  auto phi = [&](double rho) {
    const double d = t * rho;
    return 0.5 * d * d / eps + nl.A(point(rho));
  };
  // d phi / d rho up to the positive factor t; decreasing in s means increasing in rho.
  auto dphi = [&](double rho) {
    const double s = point(rho);
    const BetaEval e = nl.eval(s);
    return t * rho / eps - e.beta - s * e.dbeta;
  };

  double rho = 0.0;
  const double d_at_t = dphi(0.0);
  const double d_at_0 = dphi(1.0);
  if (d_at_t >= 0.0) {
    rho = 0.0;
  } else if (d_at_0 > 0.0) {
    // phi is convex, so its first-order condition has a bracketed root.
    boost::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(
        dphi, 0.0, 1.0, d_at_t, d_at_0, boost::math::tools::eps_tolerance<double>(50), iters);
    rho = 0.5 * (a + b);
    if (iters >= 100) {
      // No convergence on the first-order condition; fall back to Brent on phi.
      rho = boost::math::tools::brent_find_minima(phi, 0.0, 1.0,
                                                  std::numeric_limits<double>::digits / 2)
                .first;
    }
  } else {
    rho = 1.0;
  }
  const double value = phi(rho);

  // A unimodal objective cannot dip below its minimum anywhere on the bracket.
  const double tol = 1e-10 * std::abs(value) + 1e-300;
  for (int k = 0; k <= 4; ++k) {
    if (phi(k / 4.0) < value - tol) {
      throw HypothesisViolation("Moreau-Yosida bracket failure at t = " + std::to_string(t) +
                                ": A is not convex");
    }
  }
  return {value, point(rho)};
}

}  // namespace

RegularizedNonlinearity::RegularizedNonlinearity(Nonlinearity base, double eps, double tau)
    : base_(std::move(base)),
      eps_(eps),
      tau_(tau),
      regularized_(base_) {
  if (!(eps > 0.0)) throw InvalidArgument("Moreau-Yosida parameter eps must be positive");
  if (!(tau >= 0.0)) throw InvalidArgument("ellipticity shift tau must be nonnegative");

  const Nonlinearity b = base_;
  // A_eps' = (t - P_eps(t))/eps, so beta_{eps,tau}' needs first-order data only.
  auto eval = [b, eps, tau](double t) {
    const ProxResult r = prox(b, eps, t);
    // A_eps'(t) = (t - P)/eps = A'(P) at an interior proximal point; the
    // second form avoids cancellation when P is close to t.
    double dA = t / eps;
    if (r.point > 0.0) {
      const BetaEval e = b.eval(r.point);
      dA = e.beta + r.point * e.dbeta;
    }
    return BetaEval{r.value / t + tau * t, dA / t - r.value / (t * t) + tau};
  };
  std::ostringstream name;
  name << "moreau_yosida(" << base_.name() << ", eps=" << eps << ", tau=" << tau << ")";
  std::optional<double> smooth;
  if (tau > 0.0) smooth = std::min(tau, 1.0 / (1.0 / eps + tau));
  regularized_ = Nonlinearity::from_eval(
      name.str(), eval, {2.0, std::max(tau, 1e-300), 1.0 / eps + tau}, smooth);
}

ProxResult RegularizedNonlinearity::envelope(double t) const { return prox(base_, eps_, t); }

double RegularizedNonlinearity::beta_eps_tau(double t) const {
  if (t <= 0.0) return 0.0;
  return envelope(t).value / t + tau_ * t;
}

double RegularizedNonlinearity::a_eps_tau(double t) const {
  const double s = std::max(t, kGradientFloor);
  return envelope(s).value / (s * s) + tau_;
}

BetaEval RegularizedNonlinearity::eval(double t) const { return regularized_.eval(t); }

RegularizedNonlinearity moreau_yosida(const Nonlinearity& nl, double eps, double tau) {
  return RegularizedNonlinearity(nl, eps, tau);
}

}  // namespace steiner
