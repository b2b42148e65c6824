#include "gradmatch/datagen.hpp"

#include <doctest.h>

#include <cmath>

using namespace gradmatch;

namespace {

const OscillatorParams kTrue{.m = 1.0, .c = 0.2, .k = 1.0};
const InitialConditions kRest{{0.0}, {0.0}};

// RK4 reference that integrates each forcing segment with its own constant
// force, so no stage straddles the switch.
Matrix piecewise_rk4(const OscillatorParams& p, const Vector& y0, const std::vector<double>& grid) {
  const auto segment = [&p](double force) -> FirstOrderRhs {
    return [p, force](double, const Vector& y) {
      return Vector((Vector(2) << y[1], (force - p.c * y[1] - p.k * y[0]) / p.m).finished());
    };
  };
  Matrix out(static_cast<Eigen::Index>(grid.size()), 2);
  Vector y = y0;
  out.row(0) = y.transpose();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double force = grid[i - 1] < kForceSwitchTime ? 1.0 : 0.0;
    const double span = grid[i] - grid[i - 1];
    y = rk4_integrate(segment(force), y, grid[i - 1], grid[i], span / std::ceil(span / 1e-4))
            .states.bottomRows(1)
            .transpose();
    out.row(static_cast<Eigen::Index>(i)) = y.transpose();
  }
  return out;
}

// Conserved quantity of the Lotka-Volterra system.
double lv_invariant(double a, double b, const LotkaVolterraParams& p) {
  return p.delta * a - std::log(a) + b - p.alpha * std::log(b);
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("rk4 on exponential decay") {
  const FirstOrderRhs rhs = [](double, const Vector& y) { return Vector(-y); };
  const Vector y0 = Vector::Ones(1);
  const auto traj = rk4_integrate(rhs, y0, 0.0, 1.0, 0.01);
  REQUIRE(traj.times.size() == 101);
  CHECK(traj.times.back() == 1.0);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    CHECK(traj.states(static_cast<Eigen::Index>(i), 0) ==
          doctest::Approx(std::exp(-traj.times[i])).epsilon(1e-8));
  }
}

TEST_CASE("rk4 trivial and exponential growth") {
  const FirstOrderRhs still = [](double, const Vector& y) { return Vector(Vector::Zero(y.size())); };
  const auto flat = rk4_integrate(still, Vector::Constant(1, 3.0), 0.0, 2.0, 0.1);
  CHECK(flat.states.isConstant(3.0));
  const FirstOrderRhs grow = [](double, const Vector& y) { return y; };
  const auto e = rk4_integrate(grow, Vector::Ones(1), 0.0, 1.0, 0.01);
  CHECK(std::abs(e.states(100, 0) / std::exp(1.0) - 1.0) <= 1e-8);
}

TEST_CASE("lotka-volterra self-convergence under step halving") {
  const auto rhs = lotka_volterra_first_order({1.0, 1.0});
  const Vector y0 = (Vector(2) << 1.0, 0.5).finished();
  const auto run = [&](double dt) { return rk4_integrate(rhs, y0, 0.0, 15.0, dt).states.bottomRows(1).eval(); };
  const Matrix a = run(0.1), b = run(0.05), c = run(0.025);
  const double ratio = (a - b).cwiseAbs().maxCoeff() / (b - c).cwiseAbs().maxCoeff();
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("rk4 is fourth order") {
  const FirstOrderRhs rhs = [](double t, const Vector& y) { return Vector(y * std::cos(t)); };
  const Vector y0 = Vector::Ones(1);
  const double exact = std::exp(std::sin(2.0));
  const double e1 = std::abs(rk4_integrate(rhs, y0, 0.0, 2.0, 0.1).states(20, 0) - exact);
  const double e2 = std::abs(rk4_integrate(rhs, y0, 0.0, 2.0, 0.05).states(40, 0) - exact);
  CHECK(e1 / e2 > 14.0);
  CHECK(e1 / e2 < 18.0);
}

TEST_CASE("rk4 argument checks") {
  const FirstOrderRhs rhs = [](double, const Vector& y) { return y; };
  const Vector y0 = Vector::Ones(1);
  CHECK_THROWS_AS(rk4_integrate(rhs, y0, 0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rk4_integrate(rhs, y0, 0.0, 1.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(rk4_integrate(rhs, y0, 1.0, 0.0, 0.1), std::invalid_argument);
  const std::vector<double> bad{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(rk4_sample(rhs, y0, bad, 0.1), std::invalid_argument);
}

TEST_CASE("oscillator closed form against rk4") {
  const auto grid = linspace(0.0, 50.0, 501);
  const Matrix rk = piecewise_rk4(kTrue, Vector::Zero(2), grid);
  double err_x = 0.0, err_v = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    err_x = std::max(err_x, std::abs(oscillator_analytic(grid[i], kTrue, kRest) - rk(r, 0)));
    err_v = std::max(err_v, std::abs(oscillator_analytic_velocity(grid[i], kTrue, kRest) - rk(r, 1)));
  }
  CHECK(err_x < 1e-6);
  CHECK(err_v < 1e-6);
}

TEST_CASE("oscillator closed form start and forced equilibrium") {
  CHECK(oscillator_analytic(0.0, kTrue, kRest) == 0.0);
  // |x - F/k| is bounded by the decaying envelope A e^{-0.1 t}, A = 1/sqrt(0.99)
  for (double t : linspace(0.0, 24.9, 250)) {
    CHECK(std::abs(oscillator_analytic(t, kTrue, kRest) - 1.0) <= std::exp(-0.1 * t) / std::sqrt(0.99) + 1e-12);
  }
  CHECK(std::abs(oscillator_analytic(24.9, kTrue, kRest) - 1.0) < 0.1);
}

TEST_CASE("oscillator closed form from nonzero initial state") {
  const OscillatorParams p{.m = 2.0, .c = 0.3, .k = 1.5};
  const InitialConditions ic{{0.4}, {-0.7}};
  CHECK(oscillator_analytic(0.0, p, ic) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(oscillator_analytic_velocity(0.0, p, ic) == doctest::Approx(-0.7).epsilon(1e-14));
  const auto grid = linspace(0.0, 40.0, 81);
  const Vector y0 = (Vector(2) << 0.4, -0.7).finished();
  const Matrix rk = piecewise_rk4(p, y0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(oscillator_analytic(grid[i], p, ic) ==
          doctest::Approx(rk(static_cast<Eigen::Index>(i), 0)).epsilon(1e-6));
  }
}

TEST_CASE("oscillator solution is continuous at the force switch") {
  const double t = kForceSwitchTime;
  const double left = std::nextafter(t, 0.0);
  CHECK(std::abs(oscillator_analytic(left, kTrue, kRest) - oscillator_analytic(t, kTrue, kRest)) <= 1e-12);
  CHECK(std::abs(oscillator_analytic_velocity(left, kTrue, kRest) -
                 oscillator_analytic_velocity(t, kTrue, kRest)) <= 1e-12);
  // one-sided second-order differences from each side agree to O(h^2)
  const auto x = [](double s) { return oscillator_analytic(s, kTrue, kRest); };
  for (double h : {1e-2, 1e-3}) {
    const double left_d = (3 * x(t) - 4 * x(t - h) + x(t - 2 * h)) / (2 * h);
    const double right_d = (-3 * x(t) + 4 * x(t + h) - x(t + 2 * h)) / (2 * h);
    CHECK(std::abs(left_d - right_d) < h * h);
  }
  const double eps = 1e-9;
  // acceleration jumps by -F/m
  const auto accel = [&](double s) {
    return 1.0 * heaviside_force(s) - kTrue.c * oscillator_analytic_velocity(s, kTrue, kRest) -
           kTrue.k * oscillator_analytic(s, kTrue, kRest);
  };
  CHECK(accel(t) - accel(t - eps) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("oscillator closed form rejects overdamping") {
  CHECK_THROWS_AS(oscillator_analytic(1.0, OscillatorParams{.m = 1.0, .c = 3.0, .k = 1.0}, kRest),
                  std::domain_error);
}

TEST_CASE("lotka-volterra trajectory conserves its invariant") {
  const LotkaVolterraParams p{1.0, 1.0};
  const auto grid = linspace(0.0, 15.0, 151);
  const Vector y0 = (Vector(2) << 1.0, 0.5).finished();
  const Matrix states = rk4_sample(lotka_volterra_first_order(p), y0, grid, 1e-3);
  const double v0 = lv_invariant(1.0, 0.5, p);
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    CHECK(lv_invariant(states(i, 0), states(i, 1), p) == doctest::Approx(v0).epsilon(1e-10));
  }
}

TEST_CASE("noiseless datasets equal the clean solution") {
  const std::vector<double> theta{1.0, 0.2, 1.0};
  const auto d = generate_dataset("oscillator", theta, kRest, 41, 0.0, 50.0, 0.0, 7);
  CHECK(d.n_times() == 41);
  CHECK(d.components() == 1);
  CHECK(d.times[1] == doctest::Approx(1.25));
  for (int i = 0; i < 41; ++i) {
    CHECK(d.values(i, 0) == oscillator_analytic(d.times[static_cast<std::size_t>(i)], kTrue, kRest));
  }

  const std::vector<double> lv{1.0, 1.0};
  const auto e = generate_dataset("lotka-volterra", lv, {{1.0, 0.5}, {}}, 31, 0.0, 15.0, 0.0, 7);
  CHECK(e.components() == 2);
  CHECK(e.values(0, 0) == 1.0);
  CHECK(e.values(0, 1) == 0.5);
  const double v0 = lv_invariant(1.0, 0.5, {1.0, 1.0});
  for (Eigen::Index i = 0; i < e.values.rows(); ++i) {
    CHECK(lv_invariant(e.values(i, 0), e.values(i, 1), {1.0, 1.0}) == doctest::Approx(v0).epsilon(1e-10));
  }
}

TEST_CASE("noise statistics") {
  const std::vector<double> theta{1.0, 0.2, 1.0};
  const int n = 10000;
  const auto clean = generate_dataset("oscillator", theta, kRest, n, 0.0, 50.0, 0.0, 3);
  const auto noisy = generate_dataset("oscillator", theta, kRest, n, 0.0, 50.0, 0.05, 3);
  const Vector r = noisy.values.col(0) - clean.values.col(0);
  const double mean = r.mean();
  const double sd = std::sqrt((r.array() - mean).square().sum() / (n - 1));
  CHECK(std::abs(mean) < 4.0 * 0.05 / std::sqrt(n));
  CHECK(std::abs(sd - 0.05) < 4.0 * 0.05 / std::sqrt(2.0 * (n - 1)));
  // lag-1 autocorrelation
  const double ac = ((r.head(n - 1).array() - mean) * (r.tail(n - 1).array() - mean)).sum() /
                    ((r.array() - mean).square().sum());
  CHECK(std::abs(ac) < 4.0 / std::sqrt(n));
}

TEST_CASE("seeded noise is reproducible") {
  const std::vector<double> theta{1.0, 1.0};
  const InitialConditions ic{{1.0, 0.5}, {}};
  const auto a = generate_dataset("lotka-volterra", theta, ic, 41, 0.0, 15.0, 0.05, 11);
  const auto b = generate_dataset("lotka-volterra", theta, ic, 41, 0.0, 15.0, 0.05, 11);
  const auto c = generate_dataset("lotka-volterra", theta, ic, 41, 0.0, 15.0, 0.05, 12);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);

  NormalStream s1(5), s2(5);
  for (int i = 0; i < 9; ++i) CHECK(s1.next() == s2.next());
}

TEST_CASE("generation argument checks") {
  const std::vector<double> theta{1.0, 0.2, 1.0};
  CHECK_THROWS_AS(generate_dataset("oscillator", theta, kRest, 1, 0.0, 50.0, 0.05, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_dataset("oscillator", theta, kRest, 41, 0.0, 50.0, -1.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_dataset("oscillator", theta, kRest, 41, 5.0, 5.0, 0.05, 1),
                  std::invalid_argument);
  const std::vector<double> out_of_box{1.0, 0.2, 20.0};
  CHECK_THROWS_AS(generate_dataset("oscillator", out_of_box, kRest, 41, 0.0, 50.0, 0.05, 1),
                  ParameterBoundsError);
  const std::vector<double> lv{1.0, 1.0};
  CHECK_THROWS_AS(generate_dataset("lotka-volterra", lv, {{1.0}, {}}, 41, 0.0, 15.0, 0.05, 1),
                  std::invalid_argument);
}

TEST_CASE("dataset validation") {
  Dataset d;
  d.times = {0.0, 1.0, 1.0};
  d.values = Matrix::Zero(3, 1);
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d.times = {0.0, 1.0, 2.0};
  CHECK_NOTHROW(d.validate());
  d.values(1, 0) = std::nan("");
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d.values = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

}  // TEST_SUITE
