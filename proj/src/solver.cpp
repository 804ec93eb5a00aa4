// SPDX-License-Identifier: Apache-2.0
#include "steiner/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "steiner/error.hpp"
#include "steiner/rearrange.hpp"
#include "steiner/stencil.hpp"

namespace steiner {

DiscreteProblem::DiscreteProblem(GridPtr g, Nonlinearity n, SliceStack data)
    : grid(std::move(g)), nl(std::move(n)), f(std::move(data)) {
  if (!grid) throw InvalidArgument("problem needs a grid");
  if (f.grid().get() != grid.get() && f.cells() != grid->size()) {
    throw InvalidArgument("data stack does not live on the problem grid");
  }
  for (double v : f.interior_values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("data f must be finite and nonnegative");
  }
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

// Quadrant gradient in local form: g = G [u_c, u_nbx, u_nby]^T.
struct LocalQuadrant {
  std::array<int, 3> cell{kNoNeighbor, kNoNeighbor, kNoNeighbor};
  double G[2][3] = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  double weight = 0.0;
};

// The stacked energy J over the interior slices; the y-coupling is optional so
// the same machinery drives the x-only problem.
class StackedEnergy {
 public:
  StackedEnergy(const CellGrid& grid, const Nonlinearity& nl, int N, std::span<const double> f,
                bool coupling)
      : nl_(nl), N_(N), K_(grid.size()), h_(1.0 / (N + 1)), coupling_(coupling), f_(f.begin(), f.end()) {
    const GradientStencil stencil(grid);
    dim_ = grid.dim();
    for (const auto& q : stencil.quadrants()) {
      LocalQuadrant lq;
      lq.weight = q.weight;
      lq.cell[0] = q.cell;
      for (int d = 0; d < dim_; ++d) {
        const auto& ad = q.axis[static_cast<std::size_t>(d)];
        lq.G[d][0] = ad.coef[0];
        lq.cell[static_cast<std::size_t>(d + 1)] = ad.cell[1];
        lq.G[d][d + 1] = ad.cell[1] == kNoNeighbor ? 0.0 : ad.coef[1];
      }
      quads_.push_back(lq);
    }
    measure_.resize(K_);
    for (std::size_t c = 0; c < K_; ++c) measure_[c] = grid.cell(c).measure;
  }

  std::size_t size() const { return static_cast<std::size_t>(N_) * K_; }
  double h() const { return h_; }
  double measure(std::size_t k) const { return measure_[k % K_]; }

  std::array<double, 2> gradient_of(const LocalQuadrant& q, const double* u) const {
    std::array<double, 2> g{0.0, 0.0};
    for (int d = 0; d < dim_; ++d) {
      double v = 0.0;
      for (int l = 0; l < 3; ++l) {
        if (q.cell[static_cast<std::size_t>(l)] != kNoNeighbor && q.G[d][l] != 0.0) {
          v += q.G[d][l] * u[q.cell[static_cast<std::size_t>(l)]];
        }
      }
      g[static_cast<std::size_t>(d)] = v;
    }
    return g;
  }

  double energy(const Vector& x) const {
    double e_x = 0.0;
    double e_y = 0.0;
    double e_f = 0.0;
    for (int j = 0; j < N_; ++j) {
      const double* u = x.data() + static_cast<std::size_t>(j) * K_;
      for (const auto& q : quads_) {
        const auto g = gradient_of(q, u);
        e_x += q.weight * nl_.B(std::hypot(g[0], g[1]));
      }
      for (std::size_t c = 0; c < K_; ++c) e_f += measure_[c] * f_[static_cast<std::size_t>(j) * K_ + c] * u[c];
    }
    if (coupling_) {
      const double inv_h2 = 1.0 / (h_ * h_);
      for (int j = 0; j <= N_; ++j) {
        for (std::size_t c = 0; c < K_; ++c) {
          const double hi = j < N_ ? x[static_cast<Eigen::Index>(static_cast<std::size_t>(j) * K_ + c)] : 0.0;
          const double lo = j > 0 ? x[static_cast<Eigen::Index>(static_cast<std::size_t>(j - 1) * K_ + c)] : 0.0;
          e_y += 0.5 * measure_[c] * (hi - lo) * (hi - lo) * inv_h2;
        }
      }
    }
    return e_x + e_y - e_f;
  }

  // Gradient of J; `scale` receives the sum of absolute contributions per
  // unknown, used to estimate the rounding floor of the residual.
  void gradient(const Vector& x, Vector& r, Vector* scale) const {
    r.setZero(static_cast<Eigen::Index>(size()));
    if (scale) scale->setZero(static_cast<Eigen::Index>(size()));
    for (int j = 0; j < N_; ++j) {
      const std::size_t off = static_cast<std::size_t>(j) * K_;
      const double* u = x.data() + off;
      for (const auto& q : quads_) {
        const auto g = gradient_of(q, u);
        const double t = std::hypot(g[0], g[1]);
        const double a = t > kGradientFloor ? nl_.beta(t) / t : nl_.a(t);
        for (int l = 0; l < 3; ++l) {
          const int c = q.cell[static_cast<std::size_t>(l)];
          if (c == kNoNeighbor) continue;
          const double v = q.weight * a * (q.G[0][l] * g[0] + q.G[1][l] * g[1]);
          r[static_cast<Eigen::Index>(off + static_cast<std::size_t>(c))] += v;
          if (scale) (*scale)[static_cast<Eigen::Index>(off + static_cast<std::size_t>(c))] += std::abs(v);
        }
      }
      for (std::size_t c = 0; c < K_; ++c) {
        const auto k = static_cast<Eigen::Index>(off + c);
        const double fm = measure_[c] * f_[off + c];
        r[k] -= fm;
        if (scale) (*scale)[k] += std::abs(fm);
        if (coupling_) {
          const double inv_h2 = 1.0 / (h_ * h_);
          const double up = j + 1 < N_ ? x[k + static_cast<Eigen::Index>(K_)] : 0.0;
          const double down = j > 0 ? x[k - static_cast<Eigen::Index>(K_)] : 0.0;
          const double v = measure_[c] * inv_h2 * (2.0 * x[k] - up - down);
          r[k] += v;
          if (scale) (*scale)[k] += measure_[c] * inv_h2 * (2.0 * std::abs(x[k]) + std::abs(up) + std::abs(down));
        }
      }
    }
  }

  // Hessian triplets; the sparsity pattern is independent of x.
  void hessian(const Vector& x, const Nonlinearity& nl, double shift, SparseMatrix& H) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(quads_.size() * static_cast<std::size_t>(N_) * 9 + size() * 3);
    for (int j = 0; j < N_; ++j) {
      const std::size_t off = static_cast<std::size_t>(j) * K_;
      const double* u = x.data() + off;
      for (const auto& q : quads_) {
        const auto g = gradient_of(q, u);
        const double t = std::hypot(g[0], g[1]);
        double Hq[2][2];
        if (t > kGradientFloor) {
          const BetaEval e = nl.eval(t);
          const double a = e.beta / t;
          const double gx = g[0] / t;
          const double gy = g[1] / t;
          Hq[0][0] = a + (e.dbeta - a) * gx * gx;
          Hq[0][1] = (e.dbeta - a) * gx * gy;
          Hq[1][0] = Hq[0][1];
          Hq[1][1] = a + (e.dbeta - a) * gy * gy;
        } else {
          const double b = nl.beta_prime(kGradientFloor);
          Hq[0][0] = b;
          Hq[1][1] = b;
          Hq[0][1] = Hq[1][0] = 0.0;
        }
        if (dim_ == 1) Hq[1][1] = Hq[0][1] = Hq[1][0] = 0.0;
        for (int l = 0; l < 3; ++l) {
          const int cl = q.cell[static_cast<std::size_t>(l)];
          if (cl == kNoNeighbor) continue;
          for (int m = 0; m < 3; ++m) {
            const int cm = q.cell[static_cast<std::size_t>(m)];
            if (cm == kNoNeighbor) continue;
            double v = 0.0;
            for (int d = 0; d < 2; ++d) {
              for (int e = 0; e < 2; ++e) v += q.G[d][l] * Hq[d][e] * q.G[e][m];
            }
            trip.emplace_back(static_cast<int>(off) + cl, static_cast<int>(off) + cm, q.weight * v);
          }
        }
      }
      for (std::size_t c = 0; c < K_; ++c) {
        const int k = static_cast<int>(off + c);
        double diag = shift * measure_[c];
        if (coupling_) {
          const double w = measure_[c] / (h_ * h_);
          diag += 2.0 * w;
          if (j + 1 < N_) trip.emplace_back(k, k + static_cast<int>(K_), -w);
          if (j > 0) trip.emplace_back(k, k - static_cast<int>(K_), -w);
        }
        trip.emplace_back(k, k, diag);
      }
    }
    H.resize(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    H.setFromTriplets(trip.begin(), trip.end());
  }

  // sqrt(h sum r_k^2 / |c_k|): the residual in the mass-weighted dual norm.
  double dual_norm(const Vector& r) const {
    double s = 0.0;
    for (Eigen::Index k = 0; k < r.size(); ++k) s += r[k] * r[k] / measure(static_cast<std::size_t>(k));
    return std::sqrt((coupling_ ? h_ : 1.0) * s);
  }

  const Nonlinearity& nl() const { return nl_; }

 private:
  Nonlinearity nl_;
  int N_;
  std::size_t K_;
  double h_;
  bool coupling_;
  int dim_ = 1;
  std::vector<double> f_;
  std::vector<LocalQuadrant> quads_;
  std::vector<double> measure_;
};

struct NewtonResult {
  Vector x;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

NewtonResult newton_minimize(const StackedEnergy& J, const SolverOptions& opt) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (opt.max_iter < 1) throw InvalidArgument("solver max_iter must be at least 1");
  const auto n = static_cast<Eigen::Index>(J.size());
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  SparseMatrix H;
  Vector x = Vector::Zero(n);
  Vector r(n);
  Vector scale(n);
  bool analyzed = false;

  auto factorize = [&](const Vector& at, const Nonlinearity& nl) {
    for (double shift : {0.0, 1e-8, 1e-4, 1.0}) {
      J.hessian(at, nl, shift, H);
      if (!analyzed) {
        llt.analyzePattern(H);
        analyzed = true;
      }
      llt.factorize(H);
      if (llt.info() == Eigen::Success) return true;
    }
    return false;
  };

  // Start from the linear problem (beta(t) = t), one Newton step from zero.
  J.gradient(x, r, nullptr);
  if (r.norm() == 0.0) return {x, J.energy(x), 0.0, 0, {0.0}};
  if (factorize(x, make_p_laplacian(2.0))) {
    Vector lin = llt.solve(-r);
    if (lin.allFinite() && J.energy(lin) < J.energy(x)) x = lin;
  }

  NewtonResult out;
  double e = J.energy(x);
  out.history.push_back(e);
  J.gradient(x, r, &scale);
  double res = J.dual_norm(r);
  const double floor_factor = 64.0 * std::numeric_limits<double>::epsilon();
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const double floor = floor_factor * J.dual_norm(scale);
    if (res <= std::max(opt.tol, floor)) break;

    Vector d;
    bool newton = factorize(x, J.nl());
    if (newton) {
      d = llt.solve(-r);
      newton = d.allFinite() && d.dot(r) < 0.0;
    }
    if (!newton) {
      // Preconditioned steepest descent with the mass matrix.
      d.resize(n);
      for (Eigen::Index k = 0; k < n; ++k) d[k] = -r[k] / J.measure(static_cast<std::size_t>(k));
    }

    const double slope = d.dot(r);
    double alpha = 1.0;
    bool accepted = false;
    Vector trial(n);
    Vector r_trial(n);
    for (int ls = 0; ls < 60; ++ls) {
      trial = x + alpha * d;
      double e_trial = J.energy(trial);
      if (e_trial <= e + 1e-4 * alpha * slope) {
        accepted = true;
        // Keep halving while the energy still drops markedly: full steps
        // overshoot where the flux behaves like |g|^{p-1} with p < 2.
        if (e_trial > e + 0.5 * alpha * slope) {
          for (int extra = 0; extra < 8; ++extra) {
            const Vector half = x + 0.5 * alpha * d;
            const double e_half = J.energy(half);
            if (!(e_half < e_trial)) break;
            alpha *= 0.5;
            trial = half;
            e_trial = e_half;
          }
        }
      } else if (std::abs(e_trial - e) <= 1e-13 * std::max(1.0, std::abs(e))) {
        // Energy differences are at rounding level; judge by the residual.
        J.gradient(trial, r_trial, nullptr);
        accepted = J.dual_norm(r_trial) < res;
      }
      if (accepted) {
        x = trial;
        e = e_trial;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    out.history.push_back(J.energy(x));
    J.gradient(x, r, &scale);
    res = J.dual_norm(r);
  }
  const double floor = floor_factor * J.dual_norm(scale);
  if (res > std::max(opt.tol, floor)) {
    std::ostringstream msg;
    msg << "Newton did not converge: residual " << res << " after " << it
        << " iterations (tol " << opt.tol << "); increase the regularization tau";
    throw NumericalError(msg.str());
  }
  out.x = std::move(x);
  out.energy = J.energy(out.x);
  out.residual = res;
  out.iterations = it;
  return out;
}

void check_stack(const DiscreteProblem& prob, const SliceStack& stack) {
  if (stack.N() != prob.N() || stack.cells() != prob.grid->size()) {
    throw InvalidArgument("stack dimensions do not match the problem");
  }
}

StackedEnergy stacked(const DiscreteProblem& prob) {
  return StackedEnergy(*prob.grid, prob.nl, prob.N(), prob.f.interior_values(), true);
}

}  // namespace

double energy_Jh(const DiscreteProblem& prob, const SliceStack& stack) {
  check_stack(prob, stack);
  const auto v = stack.interior_values();
  const Vector x = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  return stacked(prob).energy(x);
}

double residual_norm(const DiscreteProblem& prob, const SliceStack& stack) {
  check_stack(prob, stack);
  const auto v = stack.interior_values();
  const Vector x = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  const StackedEnergy J = stacked(prob);
  Vector r;
  J.gradient(x, r, nullptr);
  return J.dual_norm(r);
}

DiscreteSolution solve_ph(const DiscreteProblem& prob, const SolverOptions& options) {
  const StackedEnergy J = stacked(prob);
  NewtonResult res = newton_minimize(J, options);
  DiscreteSolution sol{SliceStack(prob.grid, prob.N()), res.energy, res.residual, res.iterations,
                       std::move(res.history), 0.0};
  auto dst = sol.u.interior_values();
  std::copy(res.x.data(), res.x.data() + res.x.size(), dst.begin());
  return sol;
}

DiscreteSolution solve_ph_symmetrized(const DiscreteProblem& prob, const SliceStack& f_star,
                                      const SolverOptions& options) {
  if (!prob.grid->is_centered_ball()) throw InvalidArgument("symmetrized solve needs a centred ball grid");
  DiscreteProblem sym(prob.grid, prob.nl, f_star);
  DiscreteSolution sol = solve_ph(sym, options);
  double worst = 0.0;
  for (int j = 1; j <= sol.u.N(); ++j) {
    const auto sl = sol.u.slice(j);
    const ScalarField v(prob.grid, std::vector<double>(sl.begin(), sl.end()));
    const double vmax = *std::max_element(sl.begin(), sl.end());
    const double violation = axis_monotonicity_violation(v);
    worst = std::max(worst, violation);
    const double allowed = options.radial_tol_abs * std::max(1.0, std::abs(vmax)) +
                           options.radial_tol_dx * prob.grid->dx() * std::abs(vmax);
    if (violation > allowed) {
      std::ostringstream msg;
      msg << "slice " << j << " of the symmetrized solution is not radially non-increasing (violation "
          << violation << " > " << allowed << "); refine the grid";
      throw NumericalError(msg.str());
    }
  }
  sol.radial_violation = worst;
  return sol;
}

std::vector<double> solve_x_only(const GridPtr& grid, const Nonlinearity& nl, std::span<const double> f,
                                 const SolverOptions& options) {
  if (f.size() != grid->size()) throw InvalidArgument("data size does not match the grid");
  const StackedEnergy J(*grid, nl, 1, f, false);
  const NewtonResult res = newton_minimize(J, options);
  return std::vector<double>(res.x.data(), res.x.data() + res.x.size());
}

YInterpolant::YInterpolant(SliceStack stack) : stack_(std::move(stack)) {}

double YInterpolant::value(double y, std::size_t cell) const {
  if (!(y >= 0.0 && y <= 1.0)) throw InvalidArgument("interpolant evaluated outside [0, 1]");
  const int N = stack_.N();
  const double pos = y * (N + 1);
  const int j = std::min(static_cast<int>(std::floor(pos)), N);
  const double t = pos - j;
  const double lo = stack_(j, cell);
  if (t == 0.0) return lo;
  return lo + (stack_(j + 1, cell) - lo) * t;
}

std::vector<double> YInterpolant::sample(double y) const {
  std::vector<double> out(stack_.cells());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = value(y, c);
  return out;
}

YInterpolant interpolate_y(const DiscreteSolution& sol) { return YInterpolant(sol.u); }

double l1_distance_y(const YInterpolant& a, const YInterpolant& b) {
  const auto& ga = *a.stack().grid();
  if (a.stack().cells() != b.stack().cells()) throw InvalidArgument("interpolants live on different grids");
  std::vector<double> ys;
  for (int j = 0; j <= a.stack().N() + 1; ++j) ys.push_back(static_cast<double>(j) / (a.stack().N() + 1));
  for (int j = 0; j <= b.stack().N() + 1; ++j) ys.push_back(static_cast<double>(j) / (b.stack().N() + 1));
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end(), [](double p, double q) { return std::abs(p - q) < 1e-15; }),
           ys.end());
  double total = 0.0;
  for (std::size_t c = 0; c < ga.size(); ++c) {
    double cell_total = 0.0;
    for (std::size_t i = 1; i < ys.size(); ++i) {
      const double y0 = ys[i - 1];
      const double y1 = ys[i];
      // The difference is linear on [y0, y1]; integrate |.| exactly.
      const double d0 = a.value(y0, c) - b.value(y0, c);
      const double d1 = a.value(y1, c) - b.value(y1, c);
      const double w = y1 - y0;
      if (d0 * d1 >= 0.0) {
        cell_total += 0.5 * w * (std::abs(d0) + std::abs(d1));
      } else {
        cell_total += 0.5 * w * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
      }
    }
    total += cell_total * ga.cell(c).measure;
  }
  return total;
}

double h1_norm(const SliceStack& stack) {
  const GradientStencil stencil(*stack.grid());
  const double h = stack.h();
  double s = 0.0;
  for (int j = 1; j <= stack.N(); ++j) s += h * stencil.seminorm_squared(stack.slice(j));
  for (int j = 0; j <= stack.N(); ++j) {
    for (std::size_t c = 0; c < stack.cells(); ++c) {
      const double d = (stack(j + 1, c) - stack(j, c)) / h;
      s += h * stack.grid()->cell(c).measure * d * d;
    }
  }
  return std::sqrt(s);
}

SliceStack sample_source(const GridPtr& grid, int N, const SourceFunction& f) {
  SliceStack out(grid, N);
  for (int j = 1; j <= N; ++j) {
    const double y = out.h() * j;
    auto sl = out.interior(j);
    for (std::size_t c = 0; c < grid->size(); ++c) {
      const auto& x = grid->cell(c).center;
      sl[c] = f(x[0], x[1], y);
    }
  }
  return out;
}

}  // namespace steiner
