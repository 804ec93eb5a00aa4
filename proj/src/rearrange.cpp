// SPDX-License-Identifier: Apache-2.0
#include "steiner/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>

#include "steiner/error.hpp"
#include "steiner/stencil.hpp"

namespace steiner {

namespace {

void require_nonnegative(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidArgument(std::string(what) + " requires a finite nonnegative field");
    }
  }
}

std::vector<std::size_t> descending_order(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return order;
}

// Cells ordered by distance from the origin, ties by index.
std::vector<std::size_t> radial_order(const CellGrid& grid) {
  std::vector<double> r(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto& x = grid.cell(c).center;
    r[c] = x[0] * x[0] + x[1] * x[1];
  }
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  return order;
}

}  // namespace

ScalarField::ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw InvalidArgument("field needs a grid");
  if (values.size() != grid->size()) throw InvalidArgument("field size does not match its grid");
}

double ScalarField::lq_integral(double q) const {
  double s = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) s += std::pow(std::abs(values[c]), q) * grid->cell(c).measure;
  return s;
}

double ScalarField::integral() const {
  double s = 0.0;
  for (std::size_t c = 0; c < values.size(); ++c) s += values[c] * grid->cell(c).measure;
  return s;
}

DecreasingRearrangement::DecreasingRearrangement(const ScalarField& field) {
  require_nonnegative(field.values, "decreasing rearrangement");
  const auto order = descending_order(field.values);
  levels_.reserve(order.size());
  breaks_.reserve(order.size());
  cumulative_.reserve(order.size());
  double s = 0.0;
  double mass = 0.0;
  for (std::size_t k : order) {
    const double m = field.grid->cell(k).measure;
    levels_.push_back(field.values[k]);
    s += m;
    mass += m * field.values[k];
    breaks_.push_back(s);
    cumulative_.push_back(mass);
  }
  measure_ = s;
}

double DecreasingRearrangement::operator()(double s) const {
  if (s < 0.0) throw InvalidArgument("rearrangement evaluated at s < 0");
  // Right-continuous: the step [b_{k-1}, b_k) carries levels_[k].
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  if (it == breaks_.end()) return 0.0;
  return levels_[static_cast<std::size_t>(it - breaks_.begin())];
}

double DecreasingRearrangement::integral(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= measure_) return cumulative_.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), s) - breaks_.begin());
  const double left = k == 0 ? 0.0 : breaks_[k - 1];
  const double base = k == 0 ? 0.0 : cumulative_[k - 1];
  return base + (s - left) * levels_[k];
}

double DecreasingRearrangement::lq_integral(double q) const {
  double total = 0.0;
  double left = 0.0;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    total += std::pow(levels_[k], q) * (breaks_[k] - left);
    left = breaks_[k];
  }
  return total;
}

double DecreasingRearrangement::average(double s0, double s1) const {
  if (!(s1 > s0)) return (*this)(s0);
  return (integral(s1) - integral(s0)) / (s1 - s0);
}

double distribution_function(const ScalarField& field, double t) {
  double mu = 0.0;
  for (std::size_t c = 0; c < field.values.size(); ++c) {
    if (field.values[c] > t) mu += field.grid->cell(c).measure;
  }
  return mu;
}

Profile decreasing_rearrangement(const ScalarField& field, const RadialGridPtr& s_grid,
                                 ProfileConvention convention) {
  if (!s_grid) throw InvalidArgument("profile needs an s-grid");
  Profile p;
  p.s_grid = s_grid;
  p.convention = convention;
  p.exact = std::make_shared<const DecreasingRearrangement>(field);
  const auto s = s_grid->s();
  p.values.resize(s.size());
  if (convention == ProfileConvention::Step) {
    const double end = p.exact->measure() * (1.0 - 1e-12);
    for (std::size_t i = 0; i < s.size(); ++i) p.values[i] = s[i] >= end ? 0.0 : (*p.exact)(s[i]);
  } else {
    const std::size_t M = s.size() - 1;
    for (std::size_t i = 0; i <= M; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = i == M ? M : i + 1;
      p.values[i] = p.exact->average(s[a], s[b]);
    }
  }
  return p;
}

MassFunction mass_function(const Profile& profile) {
  if (!profile.exact) throw InvalidArgument("profile carries no rearrangement");
  MassFunction m;
  m.s_grid = profile.s_grid;
  const auto s = profile.s_grid->s();
  m.values.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) m.values[i] = profile.exact->integral(s[i]);
  return m;
}

MassFunction zero_mass(const RadialGridPtr& s_grid) {
  return MassFunction{s_grid, std::vector<double>(s_grid->s().size(), 0.0)};
}

ScalarField schwarz_rearrangement(const ScalarField& field, const GridPtr& target) {
  if (!target) throw InvalidArgument("Schwarz rearrangement needs a target grid");
  if (!target->is_centered_ball()) throw InvalidArgument("Schwarz target must be a centred ball grid");
  if (target->dim() != field.grid->dim()) throw InvalidArgument("Schwarz target dimension mismatch");
  const DecreasingRearrangement star(field);
  const double source = star.measure();
  const double dest = target->total_measure();
  if (std::abs(source - dest) > 0.02 * source) {
    throw InvalidArgument("Schwarz target measure differs from the source by more than 2%");
  }
  const double stretch = source / dest;
  std::vector<double> out(target->size(), 0.0);
  double s = 0.0;
  for (std::size_t c : radial_order(*target)) {
    const double m = target->cell(c).measure;
    out[c] = star.average(s * stretch, (s + m) * stretch);
    s += m;
  }
  return ScalarField(target, std::move(out));
}

SliceStack steiner_rearrangement(const SliceStack& stack, GridPtr target) {
  if (!target) target = make_symmetrized_grid(*stack.grid());
  SliceStack out(target, stack.N());
  for (int j = 1; j <= stack.N(); ++j) {
    const auto sl = stack.slice(j);
    const ScalarField f(stack.grid(), std::vector<double>(sl.begin(), sl.end()));
    const ScalarField r = schwarz_rearrangement(f, target);
    std::copy(r.values.begin(), r.values.end(), out.interior(j).begin());
  }
  return out;
}

double hardy_littlewood_subset_gap(const ScalarField& field, std::span<const std::size_t> subset) {
  const DecreasingRearrangement star(field);
  double measure = 0.0;
  double mass = 0.0;
  for (std::size_t c : subset) {
    measure += field.grid->cell(c).measure;
    mass += field.grid->cell(c).measure * field.values[c];
  }
  return star.integral(measure) - mass;
}

double hardy_littlewood_gap(const ScalarField& field, double s, int random_trials, std::uint64_t seed) {
  require_nonnegative(field.values, "Hardy-Littlewood gap");
  const double L = field.grid->total_measure();
  if (s < 0.0 || s > L * (1.0 + 1e-12)) throw InvalidArgument("subset measure outside [0, |Omega_1|]");
  const std::size_t n = field.values.size();
  const double cell = L / static_cast<double>(n);
  const auto k = std::min(n, static_cast<std::size_t>(std::llround(s / cell)));
  const auto order = descending_order(field.values);
  std::vector<std::size_t> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> bottom(order.end() - static_cast<std::ptrdiff_t>(k), order.end());
  double gap = std::min(hardy_littlewood_subset_gap(field, top), hardy_littlewood_subset_gap(field, bottom));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int t = 0; t < random_trials; ++t) {
    std::shuffle(all.begin(), all.end(), rng);
    gap = std::min(gap, hardy_littlewood_subset_gap(
                            field, std::span<const std::size_t>(all.data(), k)));
  }
  return gap;
}

double l1_distance(const DecreasingRearrangement& f, const DecreasingRearrangement& g) {
  // Merge the two break sequences; both functions are constant in between.
  std::vector<double> cuts(f.breaks().begin(), f.breaks().end());
  cuts.insert(cuts.end(), g.breaks().begin(), g.breaks().end());
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double left = 0.0;
  for (double right : cuts) {
    if (right > left) {
      const double mid = 0.5 * (left + right);
      total += std::abs(f(mid) - g(mid)) * (right - left);
      left = right;
    }
  }
  return total;
}

double polya_szego_gap(const Nonlinearity& nl, const ScalarField& field, const GridPtr& target) {
  const ScalarField sym = schwarz_rearrangement(field, target);
  const GradientStencil source(*field.grid);
  const GradientStencil dest(*target);
  return source.energy_A(nl, field.values) - dest.energy_A(nl, sym.values);
}

double radial_monotonicity_violation(const ScalarField& field) {
  const auto& grid = *field.grid;
  const auto order = radial_order(grid);
  auto radius = [&](std::size_t c) { return std::hypot(grid.cell(c).center[0], grid.cell(c).center[1]); };
  const double tie = 1e-9 * grid.dx();
  double inner_min = std::numeric_limits<double>::infinity();
  double violation = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    const double r = radius(order[i]);
    double group_min = std::numeric_limits<double>::infinity();
    while (j < order.size() && radius(order[j]) <= r + tie) {
      const double v = field.values[order[j]];
      violation = std::max(violation, v - inner_min);
      group_min = std::min(group_min, v);
      ++j;
    }
    inner_min = std::min(inner_min, group_min);
    i = j;
  }
  return violation;
}

double axis_monotonicity_violation(const ScalarField& field) {
  const auto& grid = *field.grid;
  const double tie = 1e-9 * grid.dx();
  double violation = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const double x = std::abs(grid.cell(c).center[static_cast<std::size_t>(axis)]);
      for (int dir : {-1, 1}) {
        const int nb = grid.neighbor(c, axis, dir);
        if (nb == kNoNeighbor) continue;
        const auto k = static_cast<std::size_t>(nb);
        if (std::abs(grid.cell(k).center[static_cast<std::size_t>(axis)]) <= x + tie) continue;
        violation = std::max(violation, field.values[k] - field.values[c]);
      }
    }
  }
  return violation;
}

}  // namespace steiner
