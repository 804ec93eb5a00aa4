// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "steiner/grid.hpp"
#include "steiner/nonlinearity.hpp"

namespace steiner {

/// One difference quotient along an axis: coef[0] u[cell[0]] + coef[1] u[cell[1]],
/// where cell[1] may be kNoNeighbor (Dirichlet face, value 0).
struct AxisDifference {
  std::array<int, 2> cell{kNoNeighbor, kNoNeighbor};
  std::array<double, 2> coef{0.0, 0.0};
};

/// A one-sided discrete gradient of a cell: forward or backward per axis.
struct Quadrant {
  int cell = 0;
  double weight = 0.0;
  std::array<AxisDifference, 2> axis{};
};

/// Cell-centred one-sided gradients.  Each cell carries 2^n quadrant gradients
/// (every combination of forward/backward differences), each weighted by
/// measure / 2^n.  A missing neighbour is a Dirichlet face at distance dx/2.
/// For B(t) = t^2/2 the resulting energy is the standard 3- or 5-point form.
class GradientStencil {
 public:
  explicit GradientStencil(const CellGrid& grid);

  int dim() const { return dim_; }
  std::size_t cells() const { return cells_; }
  std::span<const Quadrant> quadrants() const { return quads_; }

  std::array<double, 2> gradient(const Quadrant& q, std::span<const double> u) const;
  /// sum_q w F(|g_q|) for F = B (Dirichlet energy) or F = A.
  double energy_B(const Nonlinearity& nl, std::span<const double> u) const;
  double energy_A(const Nonlinearity& nl, std::span<const double> u) const;
  /// sum_q w |g_q|^2, the squared discrete H^1_0 seminorm.
  double seminorm_squared(std::span<const double> u) const;

 private:
  int dim_;
  std::size_t cells_;
  std::vector<Quadrant> quads_;
};

}  // namespace steiner
