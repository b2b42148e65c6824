#pragma once

#include "gradmatch/datagen.hpp"
#include "gradmatch/spline.hpp"

#include <functional>
#include <span>
#include <vector>

namespace gradmatch {

inline constexpr double kDefaultNoiseSigma = 0.05;

struct LoglikConfig {
  double noise_variance = kDefaultNoiseSigma * kDefaultNoiseSigma;
  double weight = 0.0;

  void validate() const;
};

/// Sum of Gaussian log-densities of `residuals` with variance `variance`.
double gaussian_loglik_sum(std::span<const double> residuals, double variance);
double gaussian_loglik_sum(const Vector& residuals, double variance);

/// Sum over the fine grid of (D y - f(t, y, theta))^2, times the system's
/// penalty weight (the grid spacing under quadrature scaling).
double derivative_penalty(const SplineSystem& sys, const OdeModel& model,
                          const SplineState& spline, std::span<const double> theta);

/// Data log-likelihood of the spline minus weight * derivative_penalty.
/// Throws ParameterBoundsError when theta leaves the model's box.
double generalised_loglik(const Dataset& data, const SplineSystem& sys,
                          const SplineState& spline, std::span<const double> theta,
                          const LoglikConfig& config, const OdeModel& model);

/// theta -> log-likelihood at a fixed spline.
using LoglikFunction = std::function<double(std::span<const double>)>;

LoglikFunction make_loglik_function(const Dataset& data, const SplineSystem& sys,
                                    const SplineState& spline, const LoglikConfig& config,
                                    const OdeModel& model);

/// Normalised log-likelihood over a 1-D or 2-D tensor grid. `values` is
/// row-major with the first axis outermost.
struct LoglikSurface {
  std::vector<int> param_indices;
  std::vector<std::vector<double>> axes;
  std::vector<double> values;
  std::vector<double> mle;
  double loglik_at_mle = 0.0;

  double at(std::size_t i, std::size_t j = 0) const {
    return axes.size() == 1 ? values[i] : values[i * axes[1].size() + j];
  }
};

/// Varies parameter `param_index` over `grid` with the others pinned at `mle`.
/// `bounds` (optional) rejects grids leaving the parameter box.
LoglikSurface loglik_slice(const LoglikFunction& loglik, int param_index,
                           std::span<const double> grid, std::span<const double> mle,
                           std::span<const Bounds> bounds = {});

LoglikSurface loglik_grid_2d(const LoglikFunction& loglik, int first_index, int second_index,
                             std::span<const double> first_grid,
                             std::span<const double> second_grid, std::span<const double> mle,
                             std::span<const Bounds> bounds = {});

/// Strict local maxima of a surface (neighbours along each axis, plus
/// diagonals in 2-D).
int count_local_maxima(const LoglikSurface& surface);

/// -Delta/2 where Delta is the q-quantile of a chi-square with `dof` degrees of
/// freedom (dof in {1, 2, 3}).
double chi2_threshold(int dof, double q);

/// Equispaced grid of `n` points on [lo, hi] that also contains `centre`
/// (the nearest node is moved onto it).
std::vector<double> grid_through(double lo, double hi, int n, double centre);

}  // namespace gradmatch
