#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "steiner/error.hpp"
#include "steiner/solver.hpp"
#include "steiner/star.hpp"

using namespace steiner;
using std::numbers::pi;

namespace {

double positive_part_sup(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, a[i] - b[i]);
  return m;
}

}  // namespace

TEST_CASE("factorizations of the second-difference matrix") {
  for (int N : {1, 2, 5, 17}) {
    const auto D = d2_matrix(N);
    const auto C = d2_difference_factor(N);
    CHECK(gram(C, C, N + 1, N) == D);  // integer arithmetic, exact

    const auto B = unit_bidiagonal(N);
    auto DmE = D;
    DmE[0] -= 1.0;
    CHECK(gram(B, B, N, N) == DmE);

    const auto L = d2_cholesky(N);
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < N; ++k) {
        double llt = 0.0;
        for (int r = 0; r < N; ++r) llt += L[i * N + r] * L[k * N + r];
        CHECK(llt == doctest::Approx(D[i * N + k]).epsilon(1e-14).scale(1.0));
      }
    }
  }
  const std::vector<double> x = {1, 2, 3};
  CHECK(d2_apply(x) == std::vector<double>{0, 0, 4});
}

TEST_CASE("discrete comparison principle for D2") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int N : {1, 2, 8, 64}) {
    for (int k = 0; k < 200; ++k) {
      std::vector<double> x(N);
      for (auto& v : x) v = U(rng);
      if (k % 2 == 0) {
        for (auto& v : x) v = std::abs(v);
      }
      const auto r = d2_comparison(x);
      if (r.hypothesis) CHECK(r.norm == 0.0);
    }
    CHECK(d2_comparison(std::vector<double>(N, 0.0)).hypothesis);
  }
  // A concave-down bump is a supersolution: D2 x >= 0, so the hypothesis fails.
  CHECK_FALSE(d2_comparison(std::vector<double>{1, 2, 1}).hypothesis);

  const std::vector<double> a = {0, -1, -1, -1};
  const std::vector<double> b = {2, 2, 2, 2};
  const std::vector<double> c = {-1, -1, -1, 0};
  const std::vector<double> d = {1, 0, 0, 1};
  for (double v : solve_tridiagonal(a, b, c, d)) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("star operator values") {
  const auto g = make_radial_grid(2, 1.0, 64, Grading::Uniform);
  const StarOperator op(g, make_p_laplacian(3.0));
  std::vector<double> lin(65);
  for (int i = 0; i <= 64; ++i) lin[i] = 0.4 * g->s(i);
  // A linear U has U'' = 0 except at the reflecting end.
  const auto Al = op.apply(std::vector<double>(65, 0.0));
  for (double v : Al) CHECK(v == 0.0);

  // U = s - s^2/(2L): U'' = -1/L, A U = kappa^3 / L^2 = 8 pi^{3/2} s^{3/2} / L^2.
  const double L = 1.0;
  std::vector<double> q(65);
  for (int i = 0; i <= 64; ++i) q[i] = g->s(i) - g->s(i) * g->s(i) / (2 * L);
  const auto Aq = op.apply(q);
  CHECK(Aq[0] == 0.0);
  for (int i = 1; i <= 64; ++i) {
    const double exact = 8.0 * std::pow(pi, 1.5) * std::pow(g->s(i), 1.5) / (L * L);
    CHECK(Aq[i] == doctest::Approx(exact).epsilon(1e-9));
  }

  std::vector<double> convex(65);
  for (int i = 0; i <= 64; ++i) convex[i] = g->s(i) * g->s(i);
  CHECK_THROWS_AS(op.apply(convex), HypothesisViolation);
  CHECK_NOTHROW(op.apply_unchecked(convex));
}

TEST_CASE("resolvent") {
  const auto g = make_radial_grid(1, 2.0, 80, Grading::Uniform);
  for (double p : {1.5, 2.0, 3.0}) {
    const StarOperator op(g, moreau_yosida(make_p_laplacian(p), 1e-6, 1e-6).as_nonlinearity());
    const auto Z = resolvent(op, 1.0, std::vector<double>(81, 0.0));
    for (double v : Z.values) CHECK(std::abs(v) <= 1e-14);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto G1 = random_mass_function(g, seed);
      auto G2 = random_mass_function(g, seed + 100);
      for (double lambda : {0.01, 1.0, 100.0}) {
        const auto U1 = resolvent(op, lambda, G1.values);
        const auto U2 = resolvent(op, lambda, G2.values);
        // Residual of U + lambda A U = G.
        const auto A1 = op.apply_unchecked(U1.values);
        for (int i = 1; i <= 80; ++i) {
          CHECK(U1.values[i] + lambda * A1[i] == doctest::Approx(G1.values[i]).epsilon(1e-8).scale(1.0));
        }
        CHECK(positive_part_sup(U1.values, U2.values) <= positive_part_sup(G1.values, G2.values) + 1e-10);
        std::vector<double> Gmax(81);
        for (int i = 0; i <= 80; ++i) Gmax[i] = std::max(G1.values[i], G2.values[i]);
        const auto Um = resolvent(op, lambda, Gmax);
        CHECK(positive_part_sup(U1.values, Um.values) <= 1e-10);
      }
    }
  }
}

TEST_CASE("T-accretivity on random mass functions") {
  const std::vector<double> lambdas = {0.01, 1.0, 100.0};
  for (int n : {1, 2}) {
    const auto g = make_radial_grid(n, 1.0, 48, Grading::Uniform);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const StarOperator op(g, make_p_laplacian(p));
      const auto r = t_accretivity_check(op, 200, lambdas, 99);
      CHECK(r.trials == 200);
      CHECK(r.evaluations == 600);
      CHECK(r.violations == 0);
      CHECK(r.worst_margin >= -1e-9);
    }
  }
  const auto g = make_radial_grid(2, 1.0, 16, Grading::Sqrt);
  const auto a = random_mass_function(g, 7);
  const auto b = random_mass_function(g, 7);
  CHECK(a.values == b.values);
  CHECK(a.values[0] == 0.0);
  for (int i = 1; i <= 16; ++i) CHECK(a.values[i] >= a.values[i - 1]);
}

TEST_CASE("mass functions of stacks") {
  const auto grid = make_interval_grid(1.0, 10);
  const auto sg = make_radial_grid(1, 1.0, 20, Grading::Uniform);
  SliceStack st(grid, 3);
  for (const auto& U : mass_functions(st, sg)) {
    for (double v : U.values) CHECK(v == 0.0);
  }
  for (int j = 1; j <= 3; ++j) {
    for (std::size_t c = 0; c < 10; ++c) st.set(j, c, 0.5 * j);
  }
  const auto Us = mass_functions(st, sg);
  REQUIRE(Us.size() == 5);
  for (double v : Us[4].values) CHECK(v == 0.0);
  for (int j = 1; j <= 3; ++j) {
    for (int i = 0; i <= 20; ++i) CHECK(Us[j].values[i] == doctest::Approx(0.5 * j * sg->s(i)));
  }
}

TEST_CASE("star system") {
  const auto g = make_radial_grid(1, 1.0, 200, Grading::Uniform);
  const StarOperator op(g, make_p_laplacian(2.0));

  std::vector<MassFunction> zero(5, zero_mass(g));
  const auto Z = solve_star_system(op, zero, 0.25);
  for (const auto& V : Z.V) {
    for (double v : V.values) CHECK(v == 0.0);
  }

  // n = 1, beta(t) = t: A V = -4 V''.  With N = 1 (h = 1/2) and F_1 = s the
  // system is -4 V'' + 8 V = s, V(0) = 0, V'(1) = 0.
  std::vector<MassFunction> F(3, zero_mass(g));
  for (int i = 0; i <= 200; ++i) F[1].values[i] = g->s(i);
  const auto sol = solve_star_system(op, F, 0.5);
  const double r2 = std::sqrt(2.0);
  const double c = -1.0 / (8.0 * r2 * std::cosh(r2));
  double err = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double s = g->s(i);
    err = std::max(err, std::abs(sol.V[1].values[i] - (s / 8.0 + c * std::sinh(r2 * s))));
  }
  CHECK(err < 1e-5);
  CHECK(sol.V[0].values == zero_mass(g).values);
  CHECK(sol.V[2].values == zero_mass(g).values);
}

TEST_CASE("mass functions of solutions are subsolutions") {
  const std::vector<MassFunction> zero(5, zero_mass(make_radial_grid(1, 1.0, 10, Grading::Uniform)));
  const StarOperator op0(zero[0].s_grid, make_p_laplacian(2.0));
  for (const auto& row : subsolution_residual(zero, zero, op0, 0.25)) {
    for (double v : row) CHECK(v == 0.0);
  }

  // A step profile sampled with ds comparable to dx aliases its second
  // differences; with ds = 8 dx the slack is consistent and shrinks.
  const auto nl = moreau_yosida(make_p_laplacian(3.0), 1e-6, 1e-6).as_nonlinearity();
  double prev = -1e300;
  for (int m : {80, 160, 320}) {
    const auto grid = make_interval_grid(1.0, m, -0.5);
    const auto f = sample_source(grid, 5, [](double x, double, double y) {
      return std::exp(-8 * x * x) * (1 + y);
    });
    const auto sol = solve_ph(DiscreteProblem(grid, nl, f));
    const auto sg = make_radial_grid(1, 1.0, m / 8, Grading::Uniform);
    const auto data = build_star_data(sol.u, f, sg);
    const StarOperator op(sg, nl);
    double worst = 0.0;
    for (const auto& row : subsolution_residual(data.U, data.F, op, sol.u.h())) {
      for (double v : row) worst = std::min(worst, v);
    }
    CHECK(worst >= -(grid->dx() + sg->max_spacing()));
    CHECK(worst > prev);
    prev = worst;
  }
}
