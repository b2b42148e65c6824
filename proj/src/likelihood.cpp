#include "gradmatch/likelihood.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gradmatch {

namespace {

void check_grid(std::span<const double> grid, int index, std::span<const Bounds> bounds) {
  if (grid.empty()) throw std::invalid_argument("likelihood grid is empty");
  if (bounds.empty()) return;
  const auto& b = bounds[static_cast<std::size_t>(index)];
  for (double v : grid) {
    if (!b.contains(v)) throw std::invalid_argument("likelihood grid leaves the parameter bounds");
  }
}

}  // namespace

void LoglikConfig::validate() const {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
  if (!(weight >= 0.0)) throw std::invalid_argument("weight must be non-negative");
}

double gaussian_loglik_sum(std::span<const double> residuals, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * variance);
  double total = 0.0;
  for (double r : residuals) total += log_norm - r * r / (2.0 * variance);
  return total;
}

double gaussian_loglik_sum(const Vector& residuals, double variance) {
  return gaussian_loglik_sum(std::span<const double>(residuals.data(), residuals.size()),
                             variance);
}

double derivative_penalty(const SplineSystem& sys, const OdeModel& model,
                          const SplineState& spline, std::span<const double> theta) {
  return sys.penalty_weight * model_residual(sys, model, spline, theta).squaredNorm();
}

double generalised_loglik(const Dataset& data, const SplineSystem& sys,
                          const SplineState& spline, std::span<const double> theta,
                          const LoglikConfig& config, const OdeModel& model) {
  config.validate();
  model.check_params(theta);
  const Matrix fitted = spline.at_observations(sys);
  if (fitted.rows() != data.values.rows() || fitted.cols() != data.values.cols()) {
    throw std::invalid_argument("spline and dataset shapes disagree");
  }
  const Matrix resid = fitted - data.values;
  const double data_term =
      gaussian_loglik_sum(std::span<const double>(resid.data(), resid.size()), config.noise_variance);
  if (config.weight == 0.0) return data_term;
  return data_term - config.weight * derivative_penalty(sys, model, spline, theta);
}

LoglikFunction make_loglik_function(const Dataset& data, const SplineSystem& sys,
                                    const SplineState& spline, const LoglikConfig& config,
                                    const OdeModel& model) {
  return [&data, &sys, &spline, config, &model](std::span<const double> theta) {
    return generalised_loglik(data, sys, spline, theta, config, model);
  };
}

LoglikSurface loglik_slice(const LoglikFunction& loglik, int param_index,
                           std::span<const double> grid, std::span<const double> mle,
                           std::span<const Bounds> bounds) {
  if (param_index < 0 || param_index >= static_cast<int>(mle.size())) {
    throw std::invalid_argument("slice parameter index out of range");
  }
  check_grid(grid, param_index, bounds);
  LoglikSurface s;
  s.param_indices = {param_index};
  s.axes = {std::vector<double>(grid.begin(), grid.end())};
  s.mle.assign(mle.begin(), mle.end());
  s.loglik_at_mle = loglik(mle);
  std::vector<double> theta = s.mle;
  s.values.reserve(grid.size());
  for (double v : grid) {
    theta[static_cast<std::size_t>(param_index)] = v;
    s.values.push_back(loglik(theta) - s.loglik_at_mle);
  }
  return s;
}

LoglikSurface loglik_grid_2d(const LoglikFunction& loglik, int first_index, int second_index,
                             std::span<const double> first_grid,
                             std::span<const double> second_grid, std::span<const double> mle,
                             std::span<const Bounds> bounds) {
  const int n = static_cast<int>(mle.size());
  if (first_index < 0 || first_index >= n || second_index < 0 || second_index >= n ||
      first_index == second_index) {
    throw std::invalid_argument("2-D grid needs two distinct parameter indices");
  }
  check_grid(first_grid, first_index, bounds);
  check_grid(second_grid, second_index, bounds);
  LoglikSurface s;
  s.param_indices = {first_index, second_index};
  s.axes = {std::vector<double>(first_grid.begin(), first_grid.end()),
            std::vector<double>(second_grid.begin(), second_grid.end())};
  s.mle.assign(mle.begin(), mle.end());
  s.loglik_at_mle = loglik(mle);
  std::vector<double> theta = s.mle;
  s.values.reserve(first_grid.size() * second_grid.size());
  for (double p1 : first_grid) {
    theta[static_cast<std::size_t>(first_index)] = p1;
    for (double p2 : second_grid) {
      theta[static_cast<std::size_t>(second_index)] = p2;
      s.values.push_back(loglik(theta) - s.loglik_at_mle);
    }
  }
  return s;
}

int count_local_maxima(const LoglikSurface& surface) {
  if (surface.axes.size() == 1) {
    const auto& v = surface.values;
    const std::size_t n = v.size();
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool left = i == 0 || v[i] > v[i - 1];
      const bool right = i + 1 == n || v[i] > v[i + 1];
      if (left && right) ++count;
    }
    return count;
  }
  const auto rows = static_cast<long>(surface.axes[0].size());
  const auto cols = static_cast<long>(surface.axes[1].size());
  int count = 0;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      const double centre = surface.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      bool is_max = true;
      for (long di = -1; di <= 1 && is_max; ++di) {
        for (long dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const long ni = i + di, nj = j + dj;
          if (ni < 0 || nj < 0 || ni >= rows || nj >= cols) continue;
          if (!(centre > surface.at(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) ++count;
    }
  }
  return count;
}

double chi2_threshold(int dof, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile must lie in (0, 1)");
  if (dof == 2) return std::log1p(-q);  // -(-2 ln(1 - q)) / 2
  if (dof != 1 && dof != 3) throw std::invalid_argument("chi-square dof must be 1, 2 or 3");

  const double shape = 0.5 * dof;
  auto cdf = [shape](double x) { return boost::math::gamma_p(shape, 0.5 * x); };
  double lo = 0.0, hi = 1.0;
  while (cdf(hi) < q) hi *= 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < q ? lo : hi) = mid;
  }
  return -0.25 * (lo + hi);
}

std::vector<double> grid_through(double lo, double hi, int n, double centre) {
  if (n < 1 || !(hi >= lo)) throw std::invalid_argument("invalid grid specification");
  auto grid = linspace(lo, hi, n);
  if (centre < lo || centre > hi) return grid;
  auto nearest = std::min_element(grid.begin(), grid.end(), [centre](double a, double b) {
    return std::abs(a - centre) < std::abs(b - centre);
  });
  *nearest = centre;
  return grid;
}

}  // namespace gradmatch
