// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace steiner {

enum class DomainKind { Interval, Square, Disk, Ball };

std::string to_string(DomainKind kind);

inline constexpr int kNoNeighbor = -1;

struct Cell {
  std::array<double, 2> center{0.0, 0.0};
  double measure = 0.0;
  bool boundary = false;
  /// Axis neighbours, ordered (-x, +x, -y, +y); kNoNeighbor outside the domain.
  std::array<int, 4> neighbors{kNoNeighbor, kNoNeighbor, kNoNeighbor, kNoNeighbor};
};

/// Uniform Cartesian cells covering a cross-section Omega_1 in R^n, n in {1, 2}.
/// Cells outside the domain carry the homogeneous Dirichlet value.
class CellGrid {
 public:
  CellGrid(int dim, double dx, DomainKind kind, std::vector<Cell> cells);

  int dim() const { return dim_; }
  double dx() const { return dx_; }
  DomainKind kind() const { return kind_; }
  std::size_t size() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_[i]; }
  std::span<const Cell> cells() const { return cells_; }
  double total_measure() const { return total_measure_; }
  /// Interval centred at 0, disk, or ball: a valid target for Schwarz symmetrization.
  bool is_centered_ball() const;
  int neighbor(std::size_t c, int axis, int dir) const {
    return cells_[c].neighbors[static_cast<std::size_t>(2 * axis + (dir > 0 ? 1 : 0))];
  }

 private:
  int dim_;
  double dx_;
  DomainKind kind_;
  std::vector<Cell> cells_;
  double total_measure_ = 0.0;
};

using GridPtr = std::shared_ptr<const CellGrid>;

/// m uniform cells on (origin, origin + length).
GridPtr make_interval_grid(double length, int m, double origin = 0.0);
/// m x m uniform cells on (0, side)^2.
GridPtr make_square_grid(double side, int m);
/// Cells of the m x m lattice on [-R, R]^2 whose centres lie in the closed disk.
GridPtr make_disk_grid(double radius, int m_per_axis);
/// The `cell_count` lattice cells of width dx closest to the origin (ties by
/// lattice index).  In 1-D this is the centred interval of cell_count cells.
GridPtr make_ball_grid(int dim, std::size_t cell_count, double dx);
/// Symmetrized image Omega_1^star of a grid: a centred ball with the same cells
/// count and width, hence exactly the same measure.
GridPtr make_symmetrized_grid(const CellGrid& grid);

/// Lebesgue measure of the unit ball: omega_1 = 2, omega_2 = pi.
double omega_n(int n);

/// Perimeter factor n omega_n^{1/n} s^{1/n'}; for n = 1 the exponent 1/n' is 0.
double kappa_n(int n, double s);

enum class Grading { Uniform, Sqrt };

/// Partition 0 = s_0 < ... < s_M = |Omega_1| of Omega_1^* = (0, |Omega_1|).
class RadialGrid {
 public:
  RadialGrid(int n, double measure, int M, Grading grading);

  int n() const { return n_; }
  double measure() const { return measure_; }
  int M() const { return static_cast<int>(s_.size()) - 1; }
  Grading grading() const { return grading_; }
  std::span<const double> s() const { return s_; }
  double s(std::size_t i) const { return s_[i]; }
  std::span<const double> kappa() const { return kappa_; }
  double kappa(std::size_t i) const { return kappa_[i]; }
  double omega() const { return omega_n(n_); }
  /// Largest node spacing.
  double max_spacing() const;

 private:
  int n_;
  double measure_;
  Grading grading_;
  std::vector<double> s_;
  std::vector<double> kappa_;
};

using RadialGridPtr = std::shared_ptr<const RadialGrid>;

RadialGridPtr make_radial_grid(int n, double measure, int M, Grading grading);

/// y-discretized field: slices u_0..u_{N+1} on a common cell grid with
/// u_0 = u_{N+1} = 0 and h = 1/(N+1).
class SliceStack {
 public:
  SliceStack(GridPtr grid, int N);

  const GridPtr& grid() const { return grid_; }
  int N() const { return N_; }
  double h() const { return 1.0 / (N_ + 1); }
  std::size_t cells() const { return grid_->size(); }

  double operator()(int j, std::size_t c) const { return data_[index(j, c)]; }
  std::span<const double> slice(int j) const;
  /// Mutable access to an interior slice, 1 <= j <= N.
  std::span<double> interior(int j);
  void set(int j, std::size_t c, double value);

  /// Interior slices flattened slice-major (j = 1..N).
  std::span<const double> interior_values() const;
  std::span<double> interior_values();

 private:
  std::size_t index(int j, std::size_t c) const {
    return static_cast<std::size_t>(j) * grid_->size() + c;
  }

  GridPtr grid_;
  int N_;
  std::vector<double> data_;
};

/// Discrete second difference in j: (u_{j+1} - 2 u_j + u_{j-1}) / h^2 on slice j.
std::vector<double> y_second_difference(const SliceStack& stack, int j);

}  // namespace steiner
