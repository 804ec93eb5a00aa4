// SPDX-License-Identifier: Apache-2.0
#include "steiner/stencil.hpp"

#include <cmath>

namespace steiner {

GradientStencil::GradientStencil(const CellGrid& grid) : dim_(grid.dim()), cells_(grid.size()) {
  const double dx = grid.dx();
  const int per_cell = 1 << dim_;
  quads_.reserve(cells_ * static_cast<std::size_t>(per_cell));
  for (std::size_t c = 0; c < cells_; ++c) {
    const double w = grid.cell(c).measure / per_cell;
    for (int mask = 0; mask < per_cell; ++mask) {
      Quadrant q;
      q.cell = static_cast<int>(c);
      q.weight = w;
      for (int axis = 0; axis < dim_; ++axis) {
        const int dir = (mask >> axis) & 1 ? 1 : -1;
        const int nb = grid.neighbor(c, axis, dir);
        AxisDifference& d = q.axis[static_cast<std::size_t>(axis)];
        d.cell = {static_cast<int>(c), nb};
        if (nb != kNoNeighbor) {
          d.coef = {-dir / dx, dir / dx};
        } else {
          d.coef = {-dir * 2.0 / dx, 0.0};
        }
      }
      quads_.push_back(q);
    }
  }
}

std::array<double, 2> GradientStencil::gradient(const Quadrant& q, std::span<const double> u) const {
  std::array<double, 2> g{0.0, 0.0};
  for (int axis = 0; axis < dim_; ++axis) {
    const AxisDifference& d = q.axis[static_cast<std::size_t>(axis)];
    double v = d.coef[0] * u[static_cast<std::size_t>(d.cell[0])];
    if (d.cell[1] != kNoNeighbor) v += d.coef[1] * u[static_cast<std::size_t>(d.cell[1])];
    g[static_cast<std::size_t>(axis)] = v;
  }
  return g;
}

double GradientStencil::energy_B(const Nonlinearity& nl, std::span<const double> u) const {
  double e = 0.0;
  for (const auto& q : quads_) {
    const auto g = gradient(q, u);
    e += q.weight * nl.B(std::hypot(g[0], g[1]));
  }
  return e;
}

double GradientStencil::energy_A(const Nonlinearity& nl, std::span<const double> u) const {
  double e = 0.0;
  for (const auto& q : quads_) {
    const auto g = gradient(q, u);
    e += q.weight * nl.A(std::hypot(g[0], g[1]));
  }
  return e;
}

double GradientStencil::seminorm_squared(std::span<const double> u) const {
  double e = 0.0;
  for (const auto& q : quads_) {
    const auto g = gradient(q, u);
    e += q.weight * (g[0] * g[0] + g[1] * g[1]);
  }
  return e;
}

}  // namespace steiner
