#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "steiner/error.hpp"
#include "steiner/nonlinearity.hpp"

using namespace steiner;

TEST_CASE("p-Laplacian values") {
  const auto p2 = make_p_laplacian(2.0);
  CHECK(p2.beta(3.0) == doctest::Approx(3.0));
  CHECK(p2.A(3.0) == doctest::Approx(9.0));
  CHECK(p2.B(3.0) == doctest::Approx(4.5));
  CHECK(p2.smooth_eps().has_value());

  const auto p3 = make_p_laplacian(3.0);
  CHECK(p3.beta(2.0) == doctest::Approx(4.0));
  CHECK(p3.A(2.0) == doctest::Approx(8.0));
  CHECK(p3.B(2.0) == doctest::Approx(8.0 / 3.0));
  CHECK_FALSE(p3.smooth_eps().has_value());
  CHECK(p3.C1() == 1.0);
  CHECK(p3.C2() == 1.0);

  const auto p15 = make_p_laplacian(1.5);
  CHECK(p15.beta(0.0) == 0.0);
  CHECK(p15.A(0.0) == 0.0);
  // a(t) = t^{-1/2} blows up at 0; the guard keeps it finite.
  CHECK(std::isfinite(p15.a(0.0)));
  CHECK(p15.a(1e-20) == doctest::Approx(1e7));

  CHECK_THROWS_AS(make_p_laplacian(1.0), InvalidArgument);
  CHECK_THROWS_AS(make_p_laplacian(0.5), InvalidArgument);
}

TEST_CASE("quadrature B matches antiderivatives") {
  // beta = t/(1+t) + t has B = t - log(1+t) + t^2/2 and no closed form stored.
  const auto nl = Nonlinearity::from_beta(
      "sat", [](double t) { return t / (1 + t) + t; }, {2.0, 0.5, 2.0});
  for (double t : {1e-8, 1e-4, 0.01, 0.5, 1.0, 3.0, 10.0, 250.0, 1e3, 2e3}) {
    const double exact = t - std::log1p(t) + 0.5 * t * t;
    CHECK(nl.B(t) == doctest::Approx(exact).epsilon(1e-10));
  }
  // B' = beta by central differences, relative error below 1e-6.
  for (const auto& f : {make_p_laplacian(1.5), make_p_laplacian(3.0), make_shifted_p(2.5, 0.1), nl}) {
    for (double t : {0.01, 0.3, 1.0, 7.0, 40.0}) {
      const double d = 1e-5 * t;
      const double fd = (f.B(t + d) - f.B(t - d)) / (2 * d);
      CHECK(fd == doctest::Approx(f.beta(t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("shifted p and tabulated nonlinearities") {
  const auto s = make_shifted_p(3.0, 0.5);
  CHECK(s.beta(2.0) == doctest::Approx(5.0));
  CHECK(s.B(2.0) == doctest::Approx(8.0 / 3.0 + 1.0));
  CHECK(validate_hypotheses(s).all_passed());

  const double t[] = {0.0, 1.0, 2.0};
  const double b[] = {0.0, 2.0, 3.0};
  const auto tab = make_tabulated(t, b);
  CHECK(tab.beta(0.5) == doctest::Approx(1.0));
  CHECK(tab.beta(1.5) == doctest::Approx(2.5));
  CHECK(tab.beta(4.0) == doctest::Approx(5.0));  // linear extrapolation, slope 1
  CHECK(tab.B(2.0) == doctest::Approx(1.0 + 2.5));
  CHECK(tab.smooth_eps().value() == doctest::Approx(0.5));
  CHECK(validate_hypotheses(tab).all_passed());

  const double bad_t[] = {0.0, 1.0, 1.0};
  CHECK_THROWS_AS(make_tabulated(bad_t, b), InvalidArgument);
  const double off[] = {0.1, 1.0, 2.0};
  CHECK_THROWS_AS(make_tabulated(off, b), InvalidArgument);

  const auto path = std::filesystem::temp_directory_path() / "steiner_tab_test.txt";
  {
    std::ofstream out(path);
    out << "# t beta\n0 0\n1, 2\n2 3\n";
  }
  CHECK(load_tabulated(path).beta(1.5) == doctest::Approx(2.5));
  std::filesystem::remove(path);
}

TEST_CASE("hypothesis validation") {
  CHECK(validate_hypotheses(make_p_laplacian(3.0)).all_passed());
  CHECK(validate_hypotheses(make_p_laplacian(1.5)).all_passed());

  const auto decreasing = Nonlinearity::from_beta("neg", [](double t) { return -t; }, {2.0, 1.0, 1.0});
  const auto r1 = validate_hypotheses(decreasing);
  CHECK_FALSE(r1.check("H1").passed);

  // A(t) = sqrt(t) claimed with p = 2: C1 (t^2 - 1) > sqrt(t) first beyond the root
  // 1.49021612... of t^2 - 1 = sqrt(t); the first such default sample is index 175.
  const auto sqrt_nl =
      Nonlinearity::from_energy_density("sqrt", [](double t) { return std::sqrt(t); }, {2.0, 1.0, 1.0});
  const auto r2 = validate_hypotheses(sqrt_nl);
  const auto& lower = r2.check("H2.lower");
  CHECK_FALSE(lower.passed);
  REQUIRE(lower.first_violation.has_value());
  const auto samples = hypothesis_samples(256);
  CHECK(*lower.first_violation == samples[175]);
  CHECK(*lower.first_violation == doctest::Approx(1.5013107289081724).epsilon(1e-12));
  CHECK(r2.t_max == 1e3);
  CHECK_THROWS_AS(hypothesis_samples(2), InvalidArgument);
}

TEST_CASE("Moreau-Yosida closed forms") {
  const auto sq = make_p_laplacian(2.0);  // A(t) = t^2
  const auto my1 = moreau_yosida(sq, 1.0, 0.0);
  for (double t : {0.0, 1e-9, 0.1, 1.0, 3.0, 100.0}) {
    const auto r = my1.envelope(t);
    CHECK(r.value == doctest::Approx(t * t / 3.0).epsilon(1e-10));
    CHECK(r.point == doctest::Approx(t / 3.0).epsilon(1e-10));
  }
  for (double eps : {1.0, 0.1, 0.01, 1e-6}) {
    const auto my = moreau_yosida(sq, eps, 0.0);
    for (double t : {0.01, 0.7, 5.0}) {
      CHECK(my.A_eps(t) == doctest::Approx(t * t / (1 + 2 * eps)).epsilon(1e-8));
    }
  }
  CHECK(moreau_yosida(make_p_laplacian(3.0), 0.5, 0.0).A_eps(0.0) == 0.0);
  CHECK_THROWS_AS(moreau_yosida(sq, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(moreau_yosida(sq, 1.0, -1.0), InvalidArgument);
}

TEST_CASE("Moreau-Yosida envelope increases to A") {
  const auto cube = make_p_laplacian(3.0);  // A(t) = t^3
  const std::vector<double> eps = {1.0, 0.1, 0.01};
  for (int k = 0; k <= 40; ++k) {
    const double t = 2.0 * k / 40;
    double prev = -1.0;
    double prev_gap = 1e300;
    for (double e : eps) {
      const auto r = moreau_yosida(cube, e, 0.0).envelope(t);
      CHECK(r.value >= prev - 1e-15);
      CHECK(cube.A(r.point) <= r.value + 1e-14);
      CHECK(r.value <= cube.A(t) + 1e-14);
      const double gap = cube.A(t) - r.value;
      CHECK(gap <= prev_gap + 1e-15);
      prev = r.value;
      prev_gap = gap;
    }
  }
  // Convexity gives A - A_eps <= eps A'(t)^2 / 2, so the gap closes linearly in eps.
  for (double e : eps) {
    CHECK(cube.A(2.0) - moreau_yosida(cube, e, 0.0).A_eps(2.0) <= 0.5 * e * 144.0 + 1e-12);
  }
}

TEST_CASE("regularized nonlinearity has two-sided slope bounds") {
  for (double p : {1.5, 3.0, 4.0}) {
    const auto reg = moreau_yosida(make_p_laplacian(p), 0.1, 0.01);
    const auto& nl = reg.as_nonlinearity();
    REQUIRE(nl.smooth_eps().has_value());
    const auto v = validate_hypotheses(nl, 128, 1e-6, 1e2);
    CHECK(v.check("H1").passed);
    CHECK(v.check("Heps").passed);
    CHECK(v.check("H2.convex").passed);
    CHECK(reg.beta_eps_tau(2.0) == doctest::Approx(reg.A_eps(2.0) / 2.0 + 0.02));
    CHECK(reg.a_eps_tau(2.0) == doctest::Approx(reg.A_eps(2.0) / 4.0 + 0.01));
    CHECK(reg.beta_eps_tau(0.0) == 0.0);
  }
}

TEST_CASE("vector field a(|xi|) xi is monotone") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10.0 / std::sqrt(2.0), 10.0 / std::sqrt(2.0));
  std::vector<Nonlinearity> nls = {make_p_laplacian(1.5), make_p_laplacian(2.0), make_p_laplacian(3.0),
                                   make_p_laplacian(4.0)};
  for (double p : {1.5, 3.0}) nls.push_back(moreau_yosida(make_p_laplacian(p), 0.05, 1e-3).as_nonlinearity());
  for (const auto& nl : nls) {
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double x[2] = {U(rng), U(rng)};
      const double y[2] = {U(rng), U(rng)};
      const double ax = nl.a(std::hypot(x[0], x[1]));
      const double ay = nl.a(std::hypot(y[0], y[1]));
      const double dot = (ax * x[0] - ay * y[0]) * (x[0] - y[0]) + (ax * x[1] - ay * y[1]) * (x[1] - y[1]);
      worst = std::min(worst, dot);
    }
    CHECK(worst >= -1e-12);
  }
}
