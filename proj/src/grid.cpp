// SPDX-License-Identifier: Apache-2.0
#include "steiner/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "steiner/error.hpp"

namespace steiner {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Interval: return "interval";
    case DomainKind::Square: return "square";
    case DomainKind::Disk: return "disk";
    case DomainKind::Ball: return "ball";
  }
  return "unknown";
}

CellGrid::CellGrid(int dim, double dx, DomainKind kind, std::vector<Cell> cells)
    : dim_(dim), dx_(dx), kind_(kind), cells_(std::move(cells)) {
  if (dim != 1 && dim != 2) throw InvalidArgument("cell grids support n = 1 or 2");
  if (cells_.empty()) throw InvalidArgument("cell grid has no cells");
  // Pairwise summation keeps the measure exact to a few ulps.
  std::vector<double> m(cells_.size());
  std::transform(cells_.begin(), cells_.end(), m.begin(), [](const Cell& c) { return c.measure; });
  while (m.size() > 1) {
    std::vector<double> next((m.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = m[2 * i] + (2 * i + 1 < m.size() ? m[2 * i + 1] : 0.0);
    }
    m.swap(next);
  }
  total_measure_ = m[0];
  for (auto& c : cells_) {
    c.boundary = false;
    for (int k = 0; k < 2 * dim_; ++k) {
      if (c.neighbors[static_cast<std::size_t>(k)] == kNoNeighbor) c.boundary = true;
    }
  }
}

bool CellGrid::is_centered_ball() const {
  if (kind_ == DomainKind::Disk || kind_ == DomainKind::Ball) return true;
  if (kind_ != DomainKind::Interval) return false;
  const double lo = cells_.front().center[0];
  const double hi = cells_.back().center[0];
  return std::abs(lo + hi) <= 1e-12 * std::max(1.0, hi - lo);
}

namespace {

// Builds a grid from the set of active lattice indices (i, k) with centres
// origin + (i + 1/2) dx.  Neighbour links are resolved through the index map.
GridPtr from_lattice(int dim, double dx, DomainKind kind,
                     const std::vector<std::array<int, 2>>& active, std::array<double, 2> origin) {
  std::map<std::array<int, 2>, int> lookup;
  for (std::size_t i = 0; i < active.size(); ++i) lookup[active[i]] = static_cast<int>(i);
  const double measure = dim == 1 ? dx : dx * dx;
  std::vector<Cell> cells(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto [a, b] = active[i];
    Cell& c = cells[i];
    c.center = {origin[0] + (a + 0.5) * dx, dim == 2 ? origin[1] + (b + 0.5) * dx : 0.0};
    c.measure = measure;
    auto find = [&](int da, int db) {
      auto it = lookup.find({a + da, b + db});
      return it == lookup.end() ? kNoNeighbor : it->second;
    };
    c.neighbors[0] = find(-1, 0);
    c.neighbors[1] = find(1, 0);
    if (dim == 2) {
      c.neighbors[2] = find(0, -1);
      c.neighbors[3] = find(0, 1);
    }
  }
  return std::make_shared<const CellGrid>(dim, dx, kind, std::move(cells));
}

}  // namespace

GridPtr make_interval_grid(double length, int m, double origin) {
  if (!(length > 0.0)) throw InvalidArgument("interval length must be positive");
  if (m < 4) throw InvalidArgument("interval grid needs m >= 4 cells");
  std::vector<std::array<int, 2>> active;
  for (int i = 0; i < m; ++i) active.push_back({i, 0});
  return from_lattice(1, length / m, DomainKind::Interval, active, {origin, 0.0});
}

GridPtr make_square_grid(double side, int m) {
  if (!(side > 0.0)) throw InvalidArgument("square side must be positive");
  if (m < 4) throw InvalidArgument("square grid needs m >= 4 cells per axis");
  std::vector<std::array<int, 2>> active;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) active.push_back({i, k});
  }
  return from_lattice(2, side / m, DomainKind::Square, active, {0.0, 0.0});
}

GridPtr make_disk_grid(double radius, int m_per_axis) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("degenerate disk radius");
  if (m_per_axis < 8) throw InvalidArgument("disk grid needs m_per_axis >= 8");
  const double dx = 2.0 * radius / m_per_axis;
  std::vector<std::array<int, 2>> active;
  for (int k = 0; k < m_per_axis; ++k) {
    for (int i = 0; i < m_per_axis; ++i) {
      const double x = -radius + (i + 0.5) * dx;
      const double y = -radius + (k + 0.5) * dx;
      if (x * x + y * y <= radius * radius) active.push_back({i, k});
    }
  }
  if (active.empty()) throw InvalidArgument("degenerate disk radius");
  return from_lattice(2, dx, DomainKind::Disk, active, {-radius, -radius});
}

GridPtr make_ball_grid(int dim, std::size_t cell_count, double dx) {
  if (cell_count < 1) throw InvalidArgument("ball grid needs at least one cell");
  if (!(dx > 0.0)) throw InvalidArgument("ball grid spacing must be positive");
  if (dim == 1) {
    if (cell_count < 4) throw InvalidArgument("interval grid needs m >= 4 cells");
    const double length = dx * static_cast<double>(cell_count);
    auto g = make_interval_grid(length, static_cast<int>(cell_count), -0.5 * length);
    return g;
  }
  if (dim != 2) throw InvalidArgument("ball grids support n = 1 or 2");
  // Lattice with the origin at a cell corner; centres at (i + 1/2) dx.
  const int half = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cell_count) / std::numbers::pi))) + 2;
  struct Candidate {
    double r2;
    int order;
    std::array<int, 2> idx;
  };
  std::vector<Candidate> candidates;
  int order = 0;
  for (int k = -half; k < half; ++k) {
    for (int i = -half; i < half; ++i) {
      const double x = i + 0.5;
      const double y = k + 0.5;
      candidates.push_back({x * x + y * y, order++, {i + half, k + half}});
    }
  }
  if (candidates.size() < cell_count) throw InvalidArgument("ball grid lattice too small");
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.r2 < b.r2; });
  candidates.resize(cell_count);
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.order < b.order; });
  std::vector<std::array<int, 2>> active;
  for (const auto& c : candidates) active.push_back(c.idx);
  return from_lattice(2, dx, DomainKind::Ball, active, {-half * dx, -half * dx});
}

GridPtr make_symmetrized_grid(const CellGrid& grid) {
  return make_ball_grid(grid.dim(), grid.size(), grid.dx());
}

double omega_n(int n) {
  if (n == 1) return 2.0;
  if (n == 2) return std::numbers::pi;
  throw InvalidArgument("omega_n is provided for n = 1 or 2");
}

double kappa_n(int n, double s) {
  if (n != 1 && n != 2) throw InvalidArgument("kappa_n requires n in {1, 2}");
  if (s < 0.0) throw InvalidArgument("kappa_n requires s >= 0");
  if (n == 1) return 2.0;
  return 2.0 * std::sqrt(std::numbers::pi * s);
}

RadialGrid::RadialGrid(int n, double measure, int M, Grading grading)
    : n_(n), measure_(measure), grading_(grading) {
  if (n != 1 && n != 2) throw InvalidArgument("radial grid requires n in {1, 2}");
  if (!(measure > 0.0)) throw InvalidArgument("radial grid measure must be positive");
  if (M < 2) throw InvalidArgument("radial grid needs M >= 2");
  s_.resize(static_cast<std::size_t>(M) + 1);
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    s_[static_cast<std::size_t>(i)] = measure * (grading == Grading::Sqrt ? x * x : x);
  }
  s_.back() = measure;
  kappa_.resize(s_.size());
  std::transform(s_.begin(), s_.end(), kappa_.begin(), [n](double s) { return kappa_n(n, s); });
}

double RadialGrid::max_spacing() const {
  double d = 0.0;
  for (std::size_t i = 1; i < s_.size(); ++i) d = std::max(d, s_[i] - s_[i - 1]);
  return d;
}

RadialGridPtr make_radial_grid(int n, double measure, int M, Grading grading) {
  return std::make_shared<const RadialGrid>(n, measure, M, grading);
}

SliceStack::SliceStack(GridPtr grid, int N) : grid_(std::move(grid)), N_(N) {
  if (!grid_) throw InvalidArgument("slice stack needs a grid");
  if (N < 1) throw InvalidArgument("slice stack needs N >= 1");
  data_.assign(static_cast<std::size_t>(N + 2) * grid_->size(), 0.0);
}

std::span<const double> SliceStack::slice(int j) const {
  if (j < 0 || j > N_ + 1) throw InvalidArgument("slice index out of range");
  return {data_.data() + index(j, 0), grid_->size()};
}

std::span<double> SliceStack::interior(int j) {
  if (j < 1 || j > N_) throw InvalidArgument("only interior slices 1..N are writable");
  return {data_.data() + index(j, 0), grid_->size()};
}

void SliceStack::set(int j, std::size_t c, double value) { interior(j)[c] = value; }

std::span<const double> SliceStack::interior_values() const {
  return {data_.data() + grid_->size(), static_cast<std::size_t>(N_) * grid_->size()};
}

std::span<double> SliceStack::interior_values() {
  return {data_.data() + grid_->size(), static_cast<std::size_t>(N_) * grid_->size()};
}

std::vector<double> y_second_difference(const SliceStack& stack, int j) {
  if (j < 1 || j > stack.N()) throw InvalidArgument("second difference needs 1 <= j <= N");
  const double inv_h2 = 1.0 / (stack.h() * stack.h());
  const auto lo = stack.slice(j - 1);
  const auto mid = stack.slice(j);
  const auto hi = stack.slice(j + 1);
  std::vector<double> out(mid.size());
  for (std::size_t c = 0; c < mid.size(); ++c) out[c] = (hi[c] - 2.0 * mid[c] + lo[c]) * inv_h2;
  return out;
}

}  // namespace steiner
