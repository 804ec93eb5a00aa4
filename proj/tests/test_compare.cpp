#include <cmath>

#include "doctest.h"
#include "steiner/compare.hpp"
#include "steiner/error.hpp"

using namespace steiner;

namespace {

PipelineSpec interval_spec(double p, int m, int N) {
  PipelineSpec s;
  s.grid = make_interval_grid(1.0, m);
  s.base = make_p_laplacian(p);
  s.N = N;
  s.M = 32;
  s.f = [](double x, double, double y) { return std::exp(-30 * (x - 0.25) * (x - 0.25)) * (1.0 + y); };
  return s;
}

}  // namespace

TEST_CASE("effective nonlinearity") {
  PipelineSpec s = interval_spec(2.0, 16, 3);
  std::optional<double> eps, tau;
  CHECK(effective_nonlinearity(s, &eps, &tau).name() == s.base.name());
  CHECK_FALSE(eps.has_value());
  s.base = make_p_laplacian(3.0);
  effective_nonlinearity(s, &eps, &tau);
  CHECK(*eps == 1e-6);
  CHECK(*tau == 1e-6);
  s.base = make_p_laplacian(2.0);
  s.force_regularization = true;
  s.eps = 0.1;
  CHECK(effective_nonlinearity(s).A(1.0) == doctest::Approx(1.0 / 1.2 + 1e-6));
}

TEST_CASE("symmetric data compares with zero gap") {
  PipelineSpec s;
  s.grid = make_interval_grid(1.0, 30, -0.5);
  s.base = make_p_laplacian(3.0);
  s.N = 5;
  s.f = [](double x, double, double y) { return (1.0 - 4 * x * x) * (1.0 + y * (1 - y)); };
  const auto r = verify_mass_comparison(s);
  CHECK(r.pass);
  CHECK(std::abs(r.worst_gap) <= 1e-9);
  for (const auto& row : r.gap) {
    for (double g : row) CHECK(std::abs(g) <= 1e-9);
  }
  CHECK(r.min_u >= 0.0);
  CHECK(r.star_gap.has_value());
}

TEST_CASE("zero data") {
  PipelineSpec s = interval_spec(2.0, 20, 3);
  s.f = [](double, double, double) { return 0.0; };
  const auto r = verify_mass_comparison(s);
  CHECK(r.pass);
  CHECK(r.worst_gap == 0.0);
  CHECK(r.energy_u == 0.0);
  CHECK(*r.star_gap == 0.0);
}

TEST_CASE("off-centre bump: comparison, budget and L^q") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto r = verify_mass_comparison(interval_spec(p, 40, 7));
    CHECK(r.pass);
    CHECK(r.worst_gap <= 0.0);  // s = 0 contributes a zero gap
    CHECK(r.worst_gap >= -1e-3);
    CHECK(r.slack_budget == doctest::Approx(10.0 * (r.dx + r.ds + r.h)));
    CHECK(r.U.size() == 7);
    CHECK(r.gap[0].size() == 33);
    CHECK(r.radial_violation <= 1e-8);
    CHECK(r.min_u >= -1e-12);
    CHECK(r.energy_v <= r.energy_u + 1e-9 * std::abs(r.energy_u));
    CHECK(*r.star_gap < 0.05 * r.V.back().back() + 1e-3);
    for (double q : {1.0, 2.0, 5.0}) {
      const auto lq = verify_lq_consequence(r, q);
      CHECK(lq.holds);
      CHECK(lq.lhs > 0.0);
    }
    for (const char* st : {"regularize", "data", "solve_ph", "rearrange", "solve_ph_symmetrized", "star_data"}) {
      CHECK(r.stage_seconds.count(st) == 1);
    }
  }
  CHECK_THROWS_AS(verify_lq_consequence(verify_mass_comparison(interval_spec(2.0, 16, 3)), 0.5), InvalidArgument);
}

TEST_CASE("failures are tagged with their stage") {
  PipelineSpec s = interval_spec(2.0, 16, 3);
  s.f = [](double x, double, double) { return x - 0.5; };
  try {
    verify_mass_comparison(s);
    FAIL("negative data was accepted");
  } catch (const StageError& e) {
    CHECK(e.stage() == "solve_ph");
  }
  s.f = nullptr;
  CHECK_THROWS_AS(verify_mass_comparison(s), StageError);
  s = interval_spec(2.0, 16, 3);
  s.f_stack = SliceStack(s.grid, 5);
  try {
    verify_mass_comparison(s);
    FAIL("mismatched data was accepted");
  } catch (const StageError& e) {
    CHECK(e.stage() == "data");
  }
}

TEST_CASE("epsilon sweep") {
  PipelineSpec s = interval_spec(3.0, 24, 3);
  const auto r = epsilon_tau_sweep(s, {1e-1, 1e-2, 1e-3}, {1e-6});
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[0].eps == 1e-1);
  CHECK(r.points[2].eps == 1e-3);
  CHECK(r.energy_monotone);
  CHECK(r.l1_decreasing);
  CHECK(r.all_pass);
  CHECK(r.successive_l1.size() == 2);
  for (std::size_t k = 1; k < r.points.size(); ++k) {
    CHECK(r.points[k].report->energy_u >= r.points[k - 1].report->energy_u);
  }
  const auto par = epsilon_tau_sweep(s, {1e-1, 1e-2}, {1e-6, 1e-4}, 2);
  CHECK(par.points.size() == 4);
  CHECK(par.points[1].tau == 1e-6);
  CHECK(par.points[2].tau == 1e-4);
  CHECK(par.successive_l1.size() == 2);
}

TEST_CASE("h refinement study") {
  PipelineSpec s = interval_spec(2.0, 24, 3);
  const auto r = h_refinement_study(s, {3, 7, 15});
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[1].N == 7);
  CHECK(r.successive_l1.size() == 2);
  CHECK(r.successive_l1[1] < r.successive_l1[0]);
  CHECK(r.l1_decreasing);
  REQUIRE(r.h1_norms.size() == 3);
  for (double v : r.h1_norms) CHECK(v == doctest::Approx(r.h1_norms[2]).epsilon(0.1));
  CHECK(r.all_pass);
  CHECK_THROWS_AS(h_refinement_study(s, {7, 3}), InvalidArgument);
}
