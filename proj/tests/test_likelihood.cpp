#include "gradmatch/likelihood.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace gradmatch;

namespace {

Dataset small_oscillator_data() {
  Dataset d;
  d.times = linspace(0.0, 50.0, 41);
  d.values.resize(41, 1);
  for (int i = 0; i < 41; ++i) d.values(i, 0) = std::sin(0.1 * i);
  return d;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("gaussian log-likelihood small cases") {
  CHECK(gaussian_loglik_sum(std::vector<double>{0.0}, 1.0) == doctest::Approx(-0.9189385332046727));
  CHECK(gaussian_loglik_sum(std::vector<double>{0.0, 0.0}, 1.0) == doctest::Approx(-1.8378770664093453));
  const std::vector<double> r(41, 0.05);
  CHECK(gaussian_loglik_sum(r, 0.0025) ==
        doctest::Approx(41.0 * (-0.5 * std::log(2.0 * std::numbers::pi * 0.0025) - 0.5)).epsilon(1e-14));
}

TEST_CASE("gaussian log-likelihood closed forms") {
  const double var = 0.0025;
  const std::vector<double> zeros(10, 0.0);
  CHECK(gaussian_loglik_sum(zeros, var) ==
        doctest::Approx(-5.0 * std::log(2.0 * std::numbers::pi * var)).epsilon(1e-14));
  const std::vector<double> r{0.1, -0.2, 0.05};
  const double expected = -1.5 * std::log(2.0 * std::numbers::pi * var) -
                          (0.01 + 0.04 + 0.0025) / (2.0 * var);
  CHECK(gaussian_loglik_sum(r, var) == doctest::Approx(expected).epsilon(1e-14));
  const Vector rv = Eigen::Map<const Vector>(r.data(), 3);
  CHECK(gaussian_loglik_sum(rv, var) == gaussian_loglik_sum(r, var));
  CHECK_THROWS_AS(gaussian_loglik_sum(r, 0.0), std::invalid_argument);
}

TEST_CASE("chi-square thresholds") {
  CHECK(chi2_threshold(2, 0.95) == doctest::Approx(-2.995732273553991).epsilon(1e-12));
  CHECK(chi2_threshold(1, 0.95) == doctest::Approx(-3.841458820694124 / 2.0).epsilon(1e-9));
  CHECK(chi2_threshold(3, 0.95) == doctest::Approx(-7.814727903251178 / 2.0).epsilon(1e-9));
  CHECK(chi2_threshold(1, 0.5) == doctest::Approx(-0.454936423119572 / 2.0).epsilon(1e-9));
  CHECK(chi2_threshold(1, 0.95) == doctest::Approx(-1.959963984540054 * 1.959963984540054 / 2.0).epsilon(1e-9));
  for (double q : {1e-3, 1e-6, 1e-9}) {
    CHECK(chi2_threshold(2, q) < 0.0);
    CHECK(chi2_threshold(2, q) > -2.0 * q);
  }
  CHECK_THROWS_AS(chi2_threshold(4, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(chi2_threshold(2, 1.0), std::invalid_argument);
}

TEST_CASE("slices and grids of a quadratic") {
  const std::vector<double> centre{1.0, 2.0, 3.0};
  // -(x-c)' A (x-c) with A = [[2, 0.5, 0], [0.5, 1, 0], [0, 0, 3]]
  const LoglikFunction q = [&](std::span<const double> x) {
    const double a = x[0] - centre[0], b = x[1] - centre[1], c = x[2] - centre[2];
    return 7.0 - (2.0 * a * a + a * b + b * b + 3.0 * c * c);
  };
  const auto grid = linspace(0.0, 2.0, 21);
  const auto s = loglik_slice(q, 0, grid, centre);
  CHECK(s.loglik_at_mle == 7.0);
  REQUIRE(s.values.size() == 21);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = grid[i] - 1.0;
    CHECK(s.values[i] == doctest::Approx(-2.0 * a * a).scale(1.0).epsilon(1e-10));
  }
  CHECK(count_local_maxima(s) == 1);
  CHECK(*std::max_element(s.values.begin(), s.values.end()) == 0.0);
  CHECK(s.values[10] == 0.0);

  const auto g1 = linspace(0.5, 1.5, 5);
  const auto g2 = linspace(1.0, 3.0, 7);
  const auto g = loglik_grid_2d(q, 0, 1, g1, g2, centre);
  REQUIRE(g.values.size() == 35);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    for (std::size_t j = 0; j < g2.size(); ++j) {
      const double a = g1[i] - 1.0, b = g2[j] - 2.0;
      CHECK(g.at(i, j) == doctest::Approx(-(2.0 * a * a + a * b + b * b)).scale(1.0).epsilon(1e-10));
      CHECK(g.values[i * g2.size() + j] == g.at(i, j));
    }
  }
  CHECK(count_local_maxima(g) == 1);

  CHECK_THROWS_AS(loglik_slice(q, 3, grid, centre), std::invalid_argument);
  CHECK_THROWS_AS(loglik_grid_2d(q, 1, 1, g1, g2, centre), std::invalid_argument);
  const std::vector<Bounds> box(3, Bounds{0.01, 10.0});
  CHECK_THROWS_AS(loglik_slice(q, 0, grid, centre, box), std::invalid_argument);
  CHECK_NOTHROW(loglik_slice(q, 0, linspace(0.5, 1.5, 3), centre, box));
}

TEST_CASE("local maxima counting") {
  LoglikSurface s;
  s.axes = {{0, 1, 2, 3, 4, 5}};
  s.values = {0, 1, 0, 2, 1, 3};
  CHECK(count_local_maxima(s) == 3);
  s.values = {0, 1, 1, 0, -1, -2};  // plateau is not strict
  CHECK(count_local_maxima(s) == 0);

  LoglikSurface g;
  g.axes = {{0, 1, 2}, {0, 1, 2}};
  g.values = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  CHECK(count_local_maxima(g) == 1);
  g.values = {2, 0, 0, 0, 1, 0, 0, 0, 3};  // diagonal neighbours count
  CHECK(count_local_maxima(g) == 2);
}

TEST_CASE("grid through a centre") {
  const auto g = grid_through(0.0, 1.0, 11, 0.43);
  CHECK(g.size() == 11);
  CHECK(g[4] == 0.43);
  CHECK(g[3] == doctest::Approx(0.3));
  CHECK(grid_through(0.0, 1.0, 11, 2.0) == linspace(0.0, 1.0, 11));
  CHECK_THROWS_AS(grid_through(1.0, 0.0, 11, 0.5), std::invalid_argument);
}

TEST_CASE("generalised log-likelihood of a constant spline") {
  const auto d = small_oscillator_data();
  const auto sys = make_spline_system(d.times);
  const auto model = make_oscillator_model();
  const double c = 0.3;
  Vector beta = Vector::Zero(sys.n_basis());
  beta[sys.n_basis() - 1] = c;
  const auto spline = spline_from_coefficients(sys, model, beta);
  CHECK(spline.values.isConstant(c, 1e-14));
  CHECK(spline.op_derivs.isZero(1e-10));

  const double var = 0.0025;
  double data_oracle = 0.0;
  for (int i = 0; i < 41; ++i) {
    const double r = c - d.values(i, 0);
    data_oracle += -0.5 * std::log(2.0 * std::numbers::pi * var) - r * r / (2.0 * var);
  }
  const std::vector<double> theta{1.5, 0.2, 2.0};
  // residual is 0 - (F - k c) / m on the fine grid, scaled by the grid spacing
  double pen_oracle = 0.0;
  for (double t : sys.fine_grid) {
    const double r = -((t < 25.0 ? 1.0 : 0.0) - 1.5 * c) / 2.0;
    pen_oracle += r * r;
  }
  pen_oracle *= 50.0 / 205.0;
  CHECK(derivative_penalty(sys, model, spline, theta) == doctest::Approx(pen_oracle).epsilon(1e-9));

  const LoglikConfig none{var, 0.0};
  CHECK(generalised_loglik(d, sys, spline, theta, none, model) ==
        doctest::Approx(data_oracle).epsilon(1e-12));
  const LoglikConfig w{var, 4.0};
  CHECK(generalised_loglik(d, sys, spline, theta, w, model) ==
        doctest::Approx(data_oracle - 4.0 * pen_oracle).epsilon(1e-9));
  const auto fn = make_loglik_function(d, sys, spline, w, model);
  CHECK(fn(theta) == generalised_loglik(d, sys, spline, theta, w, model));

  const std::vector<double> outside{1.5, 0.2, 12.0};
  CHECK_THROWS_AS(generalised_loglik(d, sys, spline, outside, w, model), ParameterBoundsError);
  CHECK_THROWS_AS(generalised_loglik(d, sys, spline, theta, LoglikConfig{0.0, 1.0}, model),
                  std::invalid_argument);
  CHECK_THROWS_AS(generalised_loglik(d, sys, spline, theta, LoglikConfig{var, -1.0}, model),
                  std::invalid_argument);
}

TEST_CASE("equilibrium spline has no penalty") {
  // data span inside the forced segment, spline at x = F/k
  Dataset d;
  d.times = linspace(0.0, 24.0, 25);
  d.values = Matrix::Ones(25, 1);
  const auto sys = make_spline_system(d.times);
  const auto model = make_oscillator_model();
  Vector beta = Vector::Zero(sys.n_basis());
  beta[sys.n_basis() - 1] = 1.0;
  const auto spline = spline_from_coefficients(sys, model, beta);
  CHECK(derivative_penalty(sys, model, spline, std::vector<double>{1.0, 0.7, 3.0}) < 1e-20);
  CHECK(derivative_penalty(sys, model, spline, std::vector<double>{2.0, 0.7, 3.0}) > 0.1);
}

TEST_CASE("fitted oscillator prefers the true stiffness") {
  const std::vector<double> truth{1.0, 0.2, 1.0};
  const auto d = generate_dataset("oscillator", truth, {{0.0}, {0.0}}, 41, 0.0, 50.0, 0.05, 1);
  const auto model = make_oscillator_model();
  const auto sys = make_spline_system(d.times);
  // spline from the exact solution on the fine grid, smoothed through the basis
  Vector y(sys.n_fine());
  for (int j = 0; j < sys.n_fine(); ++j) {
    y[j] = oscillator_analytic(sys.fine_grid[static_cast<std::size_t>(j)], {.m = 1.0, .c = 0.2, .k = 1.0}, {{0.0}, {0.0}});
  }
  const auto spline = spline_from_coefficients(sys, model, solve_least_squares(sys.basis_fine, y));
  const auto fn = make_loglik_function(d, sys, spline, LoglikConfig{0.0025, 0.15}, model);
  CHECK(fn(truth) > fn(std::vector<double>{1.5, 0.2, 1.0}));
}

TEST_CASE("plain-sum penalty omits the grid spacing") {
  const auto d = small_oscillator_data();
  SplineOptions plain;
  plain.penalty = PenaltyScaling::kPlainSum;
  const auto sq = make_spline_system(d.times);
  const auto sp = make_spline_system(d.times, plain);
  const auto model = make_oscillator_model();
  const Vector beta = Vector::LinSpaced(sq.n_basis(), -1.0, 1.0);
  const std::vector<double> theta{1.0, 0.2, 1.0};
  const double pq = derivative_penalty(sq, model, spline_from_coefficients(sq, model, beta), theta);
  const double pp = derivative_penalty(sp, model, spline_from_coefficients(sp, model, beta), theta);
  CHECK(pq == doctest::Approx(pp * 50.0 / 205.0).epsilon(1e-12));
}

TEST_CASE("residual of a two-component spline") {
  Dataset d;
  d.times = linspace(0.0, 15.0, 31);
  const auto sys = make_spline_system(d.times);
  const auto model = make_lotka_volterra_model();
  const int m = sys.n_basis();
  Vector beta = Vector::Zero(2 * m);
  beta[m - 1] = 1.0;      // prey = 1
  beta[2 * m - 1] = 2.0;  // predator = 2
  const auto spline = spline_from_coefficients(sys, model, beta);
  const std::vector<double> theta{1.5, 0.5};
  const Vector r = model_residual(sys, model, spline, theta);
  REQUIRE(r.size() == 2 * sys.n_fine());
  // prey: 0 - (1.5 - 2); predator: 0 - (0.5 * 2 - 2)
  CHECK(r.head(sys.n_fine()).isConstant(0.5, 1e-10));
  CHECK(r.tail(sys.n_fine()).isConstant(1.0, 1e-10));
  CHECK_THROWS_AS(spline_from_coefficients(sys, model, Vector::Zero(m)), std::invalid_argument);
  CHECK(spline.at_observations(sys).col(1).isConstant(2.0, 1e-14));
}

}  // TEST_SUITE
