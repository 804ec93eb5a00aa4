// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steiner/grid.hpp"
#include "steiner/nonlinearity.hpp"

namespace steiner {

/// One value per cell of a grid.
struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(GridPtr g, std::vector<double> v);
  /// Sum of |u|^q times cell measure.
  double lq_integral(double q) const;
  double integral() const;
};

/// Exact decreasing rearrangement of a cell field: a right-continuous,
/// non-increasing step function on (0, |Omega_1|) with u*(s) = 0 for s >= |Omega_1|.
class DecreasingRearrangement {
 public:
  explicit DecreasingRearrangement(const ScalarField& field);

  double measure() const { return measure_; }
  /// Values in non-increasing order, one per cell.
  std::span<const double> levels() const { return levels_; }
  /// Right end of the k-th step (cumulative cell measure).
  std::span<const double> breaks() const { return breaks_; }

  double operator()(double s) const;
  /// Exact int_0^s u*(sigma) d sigma.
  double integral(double s) const;
  /// Exact int_0^{|Omega_1|} |u*|^q.
  double lq_integral(double q) const;
  /// Mean of u* over [s0, s1].
  double average(double s0, double s1) const;

 private:
  std::vector<double> levels_;
  std::vector<double> breaks_;
  std::vector<double> cumulative_;  // integral up to breaks_[k]
  double measure_ = 0.0;
};

/// mu(t) = |{u > t}|.
double distribution_function(const ScalarField& field, double t);

enum class ProfileConvention { Step, Linear };

/// u* sampled on an s-grid.  The exact step function is kept alongside, so
/// integrals never suffer sampling error.
struct Profile {
  RadialGridPtr s_grid;
  std::vector<double> values;
  ProfileConvention convention = ProfileConvention::Step;
  std::shared_ptr<const DecreasingRearrangement> exact;
};

/// Step convention samples u*(s_i) (right-continuous, u*(|Omega_1|) = 0).
/// Linear convention stores node values (U(s_{i+1}) - U(s_{i-1}))/(s_{i+1} - s_{i-1}),
/// suitable for differentiation.
Profile decreasing_rearrangement(const ScalarField& field, const RadialGridPtr& s_grid,
                                 ProfileConvention convention = ProfileConvention::Step);

/// U(s_i) = int_0^{s_i} u*.
struct MassFunction {
  RadialGridPtr s_grid;
  std::vector<double> values;
};

MassFunction mass_function(const Profile& profile);
MassFunction zero_mass(const RadialGridPtr& s_grid);

/// Schwarz rearrangement onto a centred ball grid.  Target cells are filled in
/// order of distance from the centre (ties by index) with the mean of u* over
/// their cumulative-measure interval.  Measures may differ by at most 2%; the
/// source profile is then stretched to the target measure.
ScalarField schwarz_rearrangement(const ScalarField& field, const GridPtr& target);

/// Slice-wise Schwarz rearrangement onto the symmetrized grid (or `target`).
SliceStack steiner_rearrangement(const SliceStack& stack, GridPtr target = nullptr);

/// int_0^{|A|} u* - int_A u for the subset A given by cell indices.
double hardy_littlewood_subset_gap(const ScalarField& field, std::span<const std::size_t> subset);

/// Minimum gap over the top-k and bottom-k cell sets and `random_trials` random
/// k-subsets, where k cells have measure closest to s.
double hardy_littlewood_gap(const ScalarField& field, double s, int random_trials = 64,
                            std::uint64_t seed = 1);

/// Exact ||f* - g*||_{L^1(0, L)} of two rearrangements on equal measure.
double l1_distance(const DecreasingRearrangement& f, const DecreasingRearrangement& g);

/// sum A(|grad u|) - sum A(|grad u_star|) with the quadrant gradient stencil;
/// u_star is the Schwarz rearrangement onto `target`.
double polya_szego_gap(const Nonlinearity& nl, const ScalarField& field, const GridPtr& target);

/// Largest increase of a field when moving outward from the centre:
/// max over cells a, b with |x_a| < |x_b| of u_b - u_a (0 for radially non-increasing fields).
double radial_monotonicity_violation(const ScalarField& field);

/// Largest increase of a field from a cell to an axis neighbour farther from
/// the centre.  On a centred lattice ball this is the discrete form of radial
/// monotonicity: it holds exactly for solutions with rearranged data, while
/// the Euclidean-radius comparison above picks up O(dx) staircase effects.
double axis_monotonicity_violation(const ScalarField& field);

}  // namespace steiner
