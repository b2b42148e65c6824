#pragma once

#include "gradmatch/models.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gradmatch {

struct OptimizerOptions {
  int max_evals = 20000;
  double x_tol = 1e-10;  // simplex diameter (inf-norm)
  double f_tol = 1e-14;  // spread between best and worst vertex values
  /// Per-parameter initial simplex step; empty selects max(0.1 |x0_i|, 0.1).
  std::vector<double> initial_step;
  /// Box constraints; empty means unbounded.
  std::vector<Bounds> bounds;
  /// Fresh simplices built around the incumbent after the first run converges.
  int restarts = 2;
};

enum class OptimizeStatus { kXTol, kFTol, kMaxEvals };

std::string to_string(OptimizeStatus status);

struct OptimizeResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  OptimizeStatus status = OptimizeStatus::kMaxEvals;
  /// Best simplex value after each iteration.
  std::vector<double> best_history;
};

using Objective = std::function<double(std::span<const double>)>;

/// Bounded Nelder-Mead (reflect 1, expand 2, contract 0.5, shrink 0.5). Trial
/// points are projected onto the box; non-finite trial values count as +inf.
/// Throws std::invalid_argument if x0 is infeasible or the objective is not
/// finite there, and std::runtime_error if every trial point was rejected.
OptimizeResult minimize(const Objective& objective, std::span<const double> x0,
                        const OptimizerOptions& opts = {});

}  // namespace gradmatch
