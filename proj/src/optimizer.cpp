#include "gradmatch/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gradmatch {

namespace {

using Point = std::vector<double>;

class BoundedProblem {
 public:
  BoundedProblem(const Objective& f, const OptimizerOptions& opts) : f_(f), opts_(opts) {}

  void project(Point& x) const {
    if (opts_.bounds.empty()) return;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::clamp(x[i], opts_.bounds[i].lo, opts_.bounds[i].hi);
    }
  }

  double eval(const Point& x) {
    ++evals_;
    const double v = f_(x);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    ++finite_evals_;
    return v;
  }

  int evals() const { return evals_; }
  int finite_evals() const { return finite_evals_; }
  bool exhausted() const { return evals_ >= opts_.max_evals; }

 private:
  const Objective& f_;
  const OptimizerOptions& opts_;
  int evals_ = 0;
  int finite_evals_ = 0;
};

Point affine(const Point& base, const Point& toward, double scale) {
  Point p(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) p[i] = base[i] + scale * (toward[i] - base[i]);
  return p;
}

struct RunOutcome {
  Point x;
  double f;
  OptimizeStatus status;
};

RunOutcome run_simplex(BoundedProblem& prob, const Point& start, double f_start,
                       const OptimizerOptions& opts, std::vector<double>& history) {
  const std::size_t n = start.size();
  std::vector<Point> simplex(n + 1, start);
  std::vector<double> values(n + 1, f_start);
  for (std::size_t i = 0; i < n; ++i) {
    double step = opts.initial_step.empty() ? std::max(0.1 * std::abs(start[i]), 0.1)
                                            : opts.initial_step[i];
    if (!opts.bounds.empty() && start[i] + step > opts.bounds[i].hi) step = -step;
    simplex[i + 1][i] += step;
    prob.project(simplex[i + 1]);
    values[i + 1] = prob.eval(simplex[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    {
      std::vector<Point> s2;
      std::vector<double> v2;
      for (auto idx : order) {
        s2.push_back(simplex[idx]);
        v2.push_back(values[idx]);
      }
      simplex.swap(s2);
      values.swap(v2);
    }
    history.push_back(values[0]);

    double diameter = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        diameter = std::max(diameter, std::abs(simplex[j][i] - simplex[0][i]));
      }
    }
    if (diameter < opts.x_tol) return {simplex[0], values[0], OptimizeStatus::kXTol};
    if (std::isfinite(values[n]) && values[n] - values[0] <= opts.f_tol) {
      return {simplex[0], values[0], OptimizeStatus::kFTol};
    }
    if (prob.exhausted()) return {simplex[0], values[0], OptimizeStatus::kMaxEvals};

    Point centroid(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i] / static_cast<double>(n);
    }
    const Point& worst = simplex[n];

    Point reflected = affine(centroid, worst, -1.0);
    prob.project(reflected);
    const double f_reflected = prob.eval(reflected);

    if (f_reflected < values[0]) {
      Point expanded = affine(centroid, worst, -2.0);
      prob.project(expanded);
      const double f_expanded = prob.eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[n] = std::move(expanded);
        values[n] = f_expanded;
      } else {
        simplex[n] = std::move(reflected);
        values[n] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[n - 1]) {
      simplex[n] = std::move(reflected);
      values[n] = f_reflected;
      continue;
    }

    bool shrink = false;
    if (f_reflected < values[n]) {
      Point contracted = affine(centroid, reflected, 0.5);
      prob.project(contracted);
      const double f_contracted = prob.eval(contracted);
      if (f_contracted <= f_reflected) {
        simplex[n] = std::move(contracted);
        values[n] = f_contracted;
      } else {
        shrink = true;
      }
    } else {
      Point contracted = affine(centroid, worst, 0.5);
      prob.project(contracted);
      const double f_contracted = prob.eval(contracted);
      if (f_contracted < values[n]) {
        simplex[n] = std::move(contracted);
        values[n] = f_contracted;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t j = 1; j <= n; ++j) {
        simplex[j] = affine(simplex[0], simplex[j], 0.5);
        prob.project(simplex[j]);
        values[j] = prob.eval(simplex[j]);
      }
    }
  }
}

}  // namespace

std::string to_string(OptimizeStatus status) {
  switch (status) {
    case OptimizeStatus::kXTol:
      return "x_tol";
    case OptimizeStatus::kFTol:
      return "f_tol";
    case OptimizeStatus::kMaxEvals:
      return "max_evals";
  }
  return "unknown";
}

OptimizeResult minimize(const Objective& objective, std::span<const double> x0,
                        const OptimizerOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("optimizer needs at least one parameter");
  if (opts.max_evals < static_cast<int>(n) + 1) {
    throw std::invalid_argument("max_evals must be at least dim + 1");
  }
  if (!(opts.x_tol > 0.0) || !(opts.f_tol > 0.0)) {
    throw std::invalid_argument("optimizer tolerances must be positive");
  }
  if (!opts.bounds.empty() && opts.bounds.size() != n) {
    throw std::invalid_argument("bounds size does not match parameter count");
  }
  if (!opts.initial_step.empty() && opts.initial_step.size() != n) {
    throw std::invalid_argument("initial_step size does not match parameter count");
  }
  for (std::size_t i = 0; i < opts.bounds.size(); ++i) {
    if (!opts.bounds[i].contains(x0[i])) throw std::invalid_argument("x0 outside bounds");
  }

  BoundedProblem prob(objective, opts);
  Point best(x0.begin(), x0.end());
  double f_best = prob.eval(best);
  if (!std::isfinite(f_best)) throw std::invalid_argument("objective is not finite at x0");

  OptimizeResult result;
  auto outcome = run_simplex(prob, best, f_best, opts, result.best_history);
  for (int r = 0; r < opts.restarts && !prob.exhausted(); ++r) {
    const double before = outcome.f;
    outcome = run_simplex(prob, outcome.x, outcome.f, opts, result.best_history);
    if (!(outcome.f < before - opts.f_tol)) break;
  }
  if (prob.finite_evals() <= 1 && prob.evals() > 1) {
    throw std::runtime_error("optimizer rejected every trial point");
  }

  result.x = std::move(outcome.x);
  result.f = outcome.f;
  result.evals = prob.evals();
  result.status = outcome.status;
  return result;
}

}  // namespace gradmatch
