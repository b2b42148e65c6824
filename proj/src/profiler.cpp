#include "gradmatch/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gradmatch {

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

double inf_norm_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void check_dataset(const Dataset& data, const SplineSystem& sys, const OdeModel& model) {
  data.validate();
  if (data.components() != model.components) {
    throw std::invalid_argument("dataset has " + std::to_string(data.components()) +
                                " components but model " + model.name + " expects " +
                                std::to_string(model.components));
  }
  if (data.n_times() != sys.n_obs()) {
    throw std::invalid_argument("dataset and spline system disagree on observation count");
  }
}

OptimizerOptions with_model_bounds(OptimizerOptions opts, const OdeModel& model) {
  if (opts.bounds.empty()) opts.bounds = model.param_bounds;
  return opts;
}

}  // namespace

std::string to_string(WeightRule rule) {
  return rule == WeightRule::kVarRatio ? "var-ratio" : "std-ratio";
}

WeightRule weight_rule_from_string(const std::string& name) {
  if (name == "std-ratio") return WeightRule::kStdRatio;
  if (name == "var-ratio") return WeightRule::kVarRatio;
  throw std::invalid_argument("unknown weight rule '" + name + "'");
}

std::string to_string(LinearTermMode mode) {
  return mode == LinearTermMode::kLagged ? "lagged" : "implicit";
}

LinearTermMode linear_term_mode_from_string(const std::string& name) {
  if (name == "implicit") return LinearTermMode::kImplicit;
  if (name == "lagged") return LinearTermMode::kLagged;
  throw std::invalid_argument("unknown linear-term mode '" + name + "'");
}

std::string to_string(WeightFlag flag) {
  switch (flag) {
    case WeightFlag::kNone:
      return "none";
    case WeightFlag::kFloored:
      return "sigma_m_floor";
    case WeightFlag::kCapped:
      return "w_max";
  }
  return "unknown";
}

ProfilerState initial_fit(const Dataset& data, const SplineSystem& sys, const OdeModel& model,
                          std::span<const double> theta0) {
  check_dataset(data, sys, model);
  model.check_params(theta0);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys.basis_obs);
  if (cod.rank() < sys.n_basis()) {
    throw std::runtime_error("observation basis matrix is rank deficient (rank " +
                             std::to_string(cod.rank()) + " < " +
                             std::to_string(sys.n_basis()) + ")");
  }
  const Eigen::Index m = sys.n_basis();
  Vector beta(m * model.components);
  for (Eigen::Index k = 0; k < model.components; ++k) {
    beta.segment(k * m, m) = cod.solve(data.values.col(k));
  }

  ProfilerState s;
  s.n = 0;
  s.w = 0.0;
  s.spline = spline_from_coefficients(sys, model, beta);
  s.theta_hat.assign(theta0.begin(), theta0.end());
  s.sigma_d = compute_sigma_d(s.spline, data, sys);
  s.sigma_m = compute_sigma_m(s.spline, s.theta_hat, sys, model);
  return s;
}

StackedSystem build_stacked_system(const ProfilerState& previous, double weight,
                                   const Dataset& data, const SplineSystem& sys,
                                   const OdeModel& model, LinearTermMode mode) {
  check_dataset(data, sys, model);
  if (!(weight >= 0.0)) throw std::invalid_argument("weight must be non-negative");
  const Eigen::Index i_obs = sys.n_obs();
  const Eigen::Index j_fine = sys.n_fine();
  const Eigen::Index m = sys.n_basis();
  const Eigen::Index k_count = model.components;
  if (previous.spline.values.rows() != j_fine || previous.spline.components() != k_count) {
    throw std::invalid_argument("previous spline state does not match the spline system");
  }

  Vector f = model_f_stack(model, sys.fine_grid, previous.spline.values,
                           previous.spline.first_derivs, previous.theta_hat);
  std::vector<LinearCoefficients> linear;
  if (mode == LinearTermMode::kImplicit && model.linear_terms) {
    linear = model.linear_terms(previous.theta_hat);
    if (static_cast<Eigen::Index>(linear.size()) != k_count) {
      throw std::logic_error("model linear terms returned the wrong component count");
    }
  }

  const double row_weight = weight * std::sqrt(sys.penalty_weight);
  const Eigen::Index rows = i_obs + j_fine;
  StackedSystem out{Matrix::Zero(rows * k_count, m * k_count), Vector(rows * k_count)};
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const Eigen::Index r0 = k * rows;
    const Eigen::Index c0 = k * m;
    const int order = model.diff_orders[static_cast<std::size_t>(k)];
    auto f_k = f.segment(k * j_fine, j_fine);
    out.a.block(r0, c0, i_obs, m) = sys.basis_obs;
    out.b.segment(r0, i_obs) = data.values.col(k);
    if (linear.empty()) {
      out.a.block(r0 + i_obs, c0, j_fine, m) = row_weight * sys.diff_basis(order);
      out.b.segment(r0 + i_obs, j_fine) = row_weight * f_k;
    } else {
      // g_k = f_k + value y_k + deriv y_k' is free of the linear terms.
      const auto& lin = linear[static_cast<std::size_t>(k)];
      out.a.block(r0 + i_obs, c0, j_fine, m) =
          row_weight * (sys.diff_basis(order) + lin.deriv * sys.d1_basis + lin.value * sys.basis_fine);
      out.b.segment(r0 + i_obs, j_fine) =
          row_weight * (f_k + lin.value * previous.spline.values.col(k) +
                        lin.deriv * previous.spline.first_derivs.col(k));
    }
  }
  return out;
}

OptimizeResult mle_step(const ProfilerState& state, const SplineSystem& sys,
                        const OdeModel& model, const OptimizerOptions& opts) {
  const auto objective = [&](std::span<const double> theta) {
    return derivative_penalty(sys, model, state.spline, theta);
  };
  return minimize(objective, state.theta_hat, with_model_bounds(opts, model));
}

double compute_sigma_d(const SplineState& spline, const Dataset& data, const SplineSystem& sys) {
  const Matrix resid = spline.at_observations(sys) - data.values;
  const Eigen::Index count = resid.size();
  if (count < 2) throw std::invalid_argument("sigma_D needs at least two observations");
  return std::sqrt(resid.squaredNorm() / static_cast<double>(count - 1));
}

double compute_sigma_m(const SplineState& spline, std::span<const double> theta,
                       const SplineSystem& sys, const OdeModel& model) {
  const Vector resid = model_residual(sys, model, spline, theta);
  if (resid.size() < 2) throw std::invalid_argument("sigma_M needs at least two grid values");
  return std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size() - 1));
}

WeightUpdate update_weight(double sigma_d, double sigma_m, WeightRule rule, double sigma_m_floor,
                           double w_max) {
  if (!(sigma_m > sigma_m_floor)) return {w_max, WeightFlag::kFloored};
  double w = sigma_d / sigma_m;
  if (rule == WeightRule::kVarRatio) w *= w;
  if (w > w_max) return {w_max, WeightFlag::kCapped};
  return {w, WeightFlag::kNone};
}

InitialConditions extract_initial_conditions(const SplineState& spline, const OdeModel& model) {
  InitialConditions ic;
  for (int k = 0; k < model.components; ++k) {
    ic.values.push_back(spline.values(0, k));
    if (model.diff_orders[static_cast<std::size_t>(k)] == 2) {
      ic.derivatives.push_back(spline.first_derivs(0, k));
    }
  }
  return ic;
}

FitResult fit(const Dataset& data, const OdeModel& model, std::span<const double> theta0,
              const ProfilerOptions& opts) {
  const auto sys = make_spline_system(data.times, opts.spline, model.breakpoints);
  return fit(data, sys, model, theta0, opts);
}

FitResult fit(const Dataset& data, const SplineSystem& sys, const OdeModel& model,
              std::span<const double> theta0, const ProfilerOptions& opts) {
  if (opts.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  if (!(opts.w_initial > 0.0)) throw std::invalid_argument("initial weight must be positive");

  const double data_range = data.values.size() > 0
                                ? data.values.maxCoeff() - data.values.minCoeff()
                                : 0.0;
  const double y_scale = data_range > 0.0 ? data_range : 1.0;

  FitResult result;
  ProfilerState state = initial_fit(data, sys, model, theta0);
  result.trace.push_back({0, 0.0, state.theta_hat, state.sigma_d, state.sigma_m, 0.0, 0.0,
                          WeightFlag::kNone});

  double next_w = opts.w_initial;
  for (int n = 1; n <= opts.n_max; ++n) {
    const auto stacked = build_stacked_system(state, next_w, data, sys, model, opts.linear_terms);
    const Vector beta = solve_least_squares(stacked.a, stacked.b);

    ProfilerState next;
    next.n = n;
    next.w = next_w;
    next.spline = spline_from_coefficients(sys, model, beta);
    next.theta_hat = state.theta_hat;
    next.theta_hat = mle_step(next, sys, model, opts.optimizer).x;
    next.sigma_d = compute_sigma_d(next.spline, data, sys);
    next.sigma_m = compute_sigma_m(next.spline, next.theta_hat, sys, model);

    const double delta_y = max_abs_diff(next.spline.values, state.spline.values) / y_scale;
    const double delta_theta = inf_norm_diff(next.theta_hat, state.theta_hat);
    const auto update =
        update_weight(next.sigma_d, next.sigma_m, opts.weight_rule, opts.sigma_m_floor, opts.w_max);
    result.trace.push_back({n, next.w, next.theta_hat, next.sigma_d, next.sigma_m, delta_y,
                            delta_theta, update.flag});

    state = std::move(next);
    next_w = update.w;
    result.iterations = n;
    if (delta_y <= opts.tol_y && delta_theta <= opts.tol_theta) {
      result.converged = true;
      result.reason = "spline and parameter changes below tolerance";
      break;
    }
  }
  if (!result.converged) {
    result.reason = "reached n_max = " + std::to_string(opts.n_max) + " without convergence";
  }

  result.theta_hat = state.theta_hat;
  result.initial_conditions = extract_initial_conditions(state.spline, model);
  result.final_state = std::move(state);
  return result;
}

}  // namespace gradmatch
