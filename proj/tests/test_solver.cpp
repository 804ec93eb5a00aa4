#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "steiner/error.hpp"
#include "steiner/rearrange.hpp"
#include "steiner/solver.hpp"

using namespace steiner;
using std::numbers::pi;

namespace {

SliceStack constant_stack(const GridPtr& g, int N, double c) {
  SliceStack s(g, N);
  for (auto& v : s.interior_values()) v = c;
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("discrete energy") {
  const auto g = make_interval_grid(1.0, 4);
  const auto p2 = make_p_laplacian(2.0);
  const DiscreteProblem prob(g, p2, constant_stack(g, 1, 1.0));
  SliceStack zero(g, 1);
  CHECK(energy_Jh(prob, zero) == 0.0);

  // Hand sum for u_1 = (1, 2, 3, 4), dx = 1/4, h = 1/2, f = 1.
  // One-sided gradients (left, right): (8, 4), (4, 4), (4, 4), (4, -32), each
  // of weight dx/2 with B = g^2/2 gives 74; the y-term dx sum u^2/h^2 gives 30;
  // the data term is dx * 10 = 2.5.
  SliceStack u(g, 1);
  for (std::size_t c = 0; c < 4; ++c) u.set(1, c, double(c + 1));
  CHECK(energy_Jh(prob, u) == doctest::Approx(101.5).epsilon(1e-14));

  const DiscreteProblem no_data(g, p2, SliceStack(g, 1));
  CHECK(energy_Jh(no_data, u) > 0.0);
  CHECK_THROWS_AS(DiscreteProblem(g, p2, constant_stack(g, 1, -1.0)), InvalidArgument);
}

TEST_CASE("summation by parts in y") {
  const auto g = make_interval_grid(1.0, 6);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SliceStack u(g, 9);
  SliceStack phi(g, 9);
  for (auto& v : u.interior_values()) v = U(rng);
  for (auto& v : phi.interior_values()) v = U(rng);
  const double h2 = u.h() * u.h();
  for (std::size_t c = 0; c < 6; ++c) {
    double lhs = 0.0;
    for (int j = 1; j <= 9; ++j) lhs += -y_second_difference(u, j)[c] * phi(j, c);
    double rhs = 0.0;
    for (int j = 0; j <= 9; ++j) rhs += (u(j + 1, c) - u(j, c)) * (phi(j + 1, c) - phi(j, c)) / h2;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  }
}

TEST_CASE("trivial solves") {
  const auto g = make_interval_grid(1.0, 8);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto sol = solve_ph(DiscreteProblem(g, make_p_laplacian(p), SliceStack(g, 3)));
    CHECK(max_abs(sol.u.interior_values()) == 0.0);
    CHECK(sol.energy == 0.0);
  }
}

TEST_CASE("linear separable problem converges to the Fourier solution") {
  // -u_xx - u_yy = 2 pi^2 sin(pi x) sin(pi y) has u = sin(pi x) sin(pi y).
  auto error_at = [](int m, int N) {
    const auto g = make_interval_grid(1.0, m);
    const auto f = sample_source(g, N, [](double x, double, double y) {
      return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
    });
    const auto sol = solve_ph(DiscreteProblem(g, make_p_laplacian(2.0), f));
    double err = 0.0;
    for (int j = 1; j <= N; ++j) {
      for (std::size_t c = 0; c < g->size(); ++c) {
        const double exact = std::sin(pi * g->cell(c).center[0]) * std::sin(pi * j * sol.u.h());
        err = std::max(err, std::abs(sol.u(j, c) - exact));
      }
    }
    return err;
  };
  const double e1 = error_at(16, 15);
  const double e2 = error_at(32, 31);
  CHECK(e1 < 0.01);
  CHECK(e2 < e1 / 3.0);
}

TEST_CASE("nonlinear solves: descent, positivity, residual") {
  const auto g = make_square_grid(1.0, 10);
  const auto f = sample_source(g, 5, [](double x, double z, double y) {
    return std::exp(-20 * ((x - 0.3) * (x - 0.3) + (z - 0.6) * (z - 0.6) + (y - 0.4) * (y - 0.4)));
  });
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto nl = p == 2.0 ? make_p_laplacian(2.0) : moreau_yosida(make_p_laplacian(p), 1e-6, 1e-6).as_nonlinearity();
    const DiscreteProblem prob(g, nl, f);
    const auto sol = solve_ph(prob);
    CHECK(sol.residual_norm <= 1e-9);
    CHECK(residual_norm(prob, sol.u) == doctest::Approx(sol.residual_norm).epsilon(1e-6));
    CHECK(energy_Jh(prob, sol.u) == doctest::Approx(sol.energy));
    for (std::size_t k = 1; k < sol.energy_history.size(); ++k) {
      const double e = sol.energy_history[k - 1];
      CHECK(sol.energy_history[k] <= e + 1e-14 * std::max(1.0, std::abs(e)));
    }
    for (double v : sol.u.interior_values()) CHECK(v >= -1e-12);
    CHECK(sol.energy < 0.0);
  }
}

TEST_CASE("comparison in the data") {
  const auto g = make_interval_grid(1.0, 12);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto nl = moreau_yosida(make_p_laplacian(3.0), 1e-6, 1e-6).as_nonlinearity();
  for (int trial = 0; trial < 5; ++trial) {
    SliceStack f(g, 4);
    SliceStack h(g, 4);
    for (std::size_t k = 0; k < f.interior_values().size(); ++k) {
      f.interior_values()[k] = U(rng);
      h.interior_values()[k] = f.interior_values()[k] + U(rng);
    }
    const auto uf = solve_ph(DiscreteProblem(g, nl, f));
    const auto uh = solve_ph(DiscreteProblem(g, nl, h));
    for (std::size_t k = 0; k < f.interior_values().size(); ++k) {
      CHECK(uf.u.interior_values()[k] <= uh.u.interior_values()[k] + 1e-12);
    }
  }
}

TEST_CASE("x-only solver is homogeneous of degree 1/(p-1)") {
  const auto g = make_interval_grid(1.0, 40);
  const auto nl = moreau_yosida(make_p_laplacian(3.0), 1e-8, 0.0).as_nonlinearity();
  std::vector<double> f(40);
  for (std::size_t c = 0; c < 40; ++c) f[c] = 1.0 + g->cell(c).center[0];
  std::vector<double> f4 = f;
  for (auto& v : f4) v *= 4.0;  // 2^{p-1}
  const auto u1 = solve_x_only(g, make_p_laplacian(3.0), f);
  const auto u2 = solve_x_only(g, make_p_laplacian(3.0), f4);
  for (std::size_t c = 0; c < 40; ++c) CHECK(u2[c] == doctest::Approx(2.0 * u1[c]).epsilon(1e-7));
  const auto r1 = solve_x_only(g, nl, f);
  for (std::size_t c = 0; c < 40; ++c) CHECK(r1[c] == doctest::Approx(u1[c]).epsilon(1e-5));
}

TEST_CASE("symmetrized solve is symmetric and radially decreasing") {
  const auto g = make_interval_grid(1.0, 20, 0.0);
  const auto f = sample_source(g, 5, [](double x, double, double y) { return x * (1 - x) + y; });
  const auto sym = make_symmetrized_grid(*g);
  const auto f_star = steiner_rearrangement(f, sym);
  const auto sol = solve_ph_symmetrized(DiscreteProblem(sym, make_p_laplacian(2.0), f_star), f_star);
  for (int j = 1; j <= 5; ++j) {
    for (std::size_t c = 0; c < 10; ++c) CHECK(sol.u(j, c) == doctest::Approx(sol.u(j, 19 - c)).epsilon(1e-9));
  }
  CHECK(sol.radial_violation <= 1e-12);
}

TEST_CASE("N = 1 disk block against the radial Bessel solution") {
  // -Laplace v + (2/h^2) v = 1 on the unit disk with h = 1/2: v = (1 - I0(sqrt 8 r)/I0(sqrt 8))/8.
  const auto disk = make_disk_grid(1.0, 64);
  const auto f = sample_source(disk, 1, [](double, double, double) { return 1.0; });
  const auto sol = solve_ph(DiscreteProblem(disk, make_p_laplacian(2.0), f));
  const double k = std::sqrt(8.0);
  double err = 0.0;
  double vmax = 0.0;
  for (std::size_t c = 0; c < disk->size(); ++c) {
    const double r = std::hypot(disk->cell(c).center[0], disk->cell(c).center[1]);
    const double exact = (1.0 - std::cyl_bessel_i(0.0, k * r) / std::cyl_bessel_i(0.0, k)) / 8.0;
    err = std::max(err, std::abs(sol.u(1, c) - exact));
    vmax = std::max(vmax, exact);
  }
  CHECK(err < 0.05 * vmax);
}

TEST_CASE("y interpolation, L1 distance and H1 norm") {
  const auto g = make_interval_grid(2.0, 4);
  SliceStack s(g, 3);
  for (int j = 1; j <= 3; ++j) {
    for (std::size_t c = 0; c < 4; ++c) s.set(j, c, double(j) + double(c));
  }
  const YInterpolant I(s);
  CHECK(I.value(0.5, 2) == doctest::Approx(s(2, 2)));
  CHECK(I.value(0.375, 1) == doctest::Approx(0.5 * (s(1, 1) + s(2, 1))));
  // Linear in j between nodes 1..3 means linear in y there.
  CHECK(I.value(0.3, 0) == doctest::Approx(1.0 + (0.3 - 0.25) / 0.25));
  CHECK(I.sample(0.0) == std::vector<double>(4, 0.0));

  const SliceStack c1 = constant_stack(g, 3, 2.0);
  // Piecewise linear with zero ends: int_0^1 = c (1 - h); times |Omega_1| = 2.
  CHECK(l1_distance_y(YInterpolant(c1), YInterpolant(SliceStack(g, 3))) == doctest::Approx(2.0 * 2.0 * 0.75));
  CHECK(l1_distance_y(YInterpolant(c1), YInterpolant(c1)) == 0.0);
  // Different N: a constant stack at N = 1 against N = 3.
  const SliceStack c2 = constant_stack(g, 1, 2.0);
  CHECK(l1_distance_y(YInterpolant(c1), YInterpolant(c2)) == doctest::Approx(2.0 * (2.0 * 0.75 - 2.0 * 0.5)));

  CHECK(h1_norm(SliceStack(g, 3)) == 0.0);
  CHECK(h1_norm(c1) > 0.0);
}
