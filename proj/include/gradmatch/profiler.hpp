#pragma once

#include "gradmatch/basis.hpp"
#include "gradmatch/datagen.hpp"
#include "gradmatch/likelihood.hpp"
#include "gradmatch/models.hpp"
#include "gradmatch/optimizer.hpp"
#include "gradmatch/spline.hpp"

#include <span>
#include <string>
#include <vector>

namespace gradmatch {

/// How the next regularisation weight is derived from the data and model
/// mismatch: sigma_D / sigma_M (default) or sigma_D^2 / sigma_M^2.
enum class WeightRule { kStdRatio, kVarRatio };

std::string to_string(WeightRule rule);
WeightRule weight_rule_from_string(const std::string& name);

enum class WeightFlag { kNone, kFloored, kCapped };

std::string to_string(WeightFlag flag);

/// Where model terms linear in the component's own state are solved:
/// kImplicit keeps them in the stacked matrix (with the previous parameter
/// estimate), kLagged evaluates them on the previous spline like the rest of f.
enum class LinearTermMode { kImplicit, kLagged };

std::string to_string(LinearTermMode mode);
LinearTermMode linear_term_mode_from_string(const std::string& name);

struct ProfilerOptions {
  SplineOptions spline;
  LinearTermMode linear_terms = LinearTermMode::kImplicit;
  double w_initial = 1e-2;
  double tol_y = 1e-3;      // relative to the data range
  double tol_theta = 1e-3;  // absolute, inf-norm
  int n_max = 20;
  double sigma_m_floor = 1e-12;
  double w_max = 1e3;
  WeightRule weight_rule = WeightRule::kStdRatio;
  double noise_variance = kDefaultNoiseSigma * kDefaultNoiseSigma;
  OptimizerOptions optimizer;
};

/// Snapshot after iteration n. `w` is the weight used to fit `spline`.
struct ProfilerState {
  int n = 0;
  double w = 0.0;
  SplineState spline;
  std::vector<double> theta_hat;
  double sigma_d = 0.0;
  double sigma_m = 0.0;
};

struct TraceEntry {
  int n = 0;
  double w = 0.0;
  std::vector<double> theta_hat;
  double sigma_d = 0.0;
  double sigma_m = 0.0;
  double delta_y = 0.0;      // max |y(n) - y(n-1)| / data range; 0 at n = 0
  double delta_theta = 0.0;  // inf-norm change of theta_hat; 0 at n = 0
  WeightFlag weight_flag = WeightFlag::kNone;  // flag on the weight derived from this entry
};

struct FitResult {
  std::vector<double> theta_hat;
  ProfilerState final_state;
  /// One entry per state n = 0..iterations.
  std::vector<TraceEntry> trace;
  InitialConditions initial_conditions;
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

/// Data-only interpolating fit (w = 0); theta_hat is the initial guess.
ProfilerState initial_fit(const Dataset& data, const SplineSystem& sys, const OdeModel& model,
                          std::span<const double> theta0);

struct StackedSystem {
  Matrix a;  // (I + J) K x M K, block diagonal
  Vector b;
};

/// Per component k: rows [B_obs; w s D B] against [y_k; w s f_k], with f from
/// the previous spline and parameter estimate and s the square root of the
/// penalty weight. In kImplicit mode the model's linear terms move into the
/// matrix rows as w s (D + deriv D1 + value) B.
StackedSystem build_stacked_system(const ProfilerState& previous, double weight,
                                   const Dataset& data, const SplineSystem& sys,
                                   const OdeModel& model,
                                   LinearTermMode mode = LinearTermMode::kImplicit);

/// Parameters minimising the derivative penalty at the current spline (this
/// maximises the generalised log-likelihood since the data term is
/// parameter-free). The search starts from `state.theta_hat`.
OptimizeResult mle_step(const ProfilerState& state, const SplineSystem& sys,
                        const OdeModel& model, const OptimizerOptions& opts);

double compute_sigma_d(const SplineState& spline, const Dataset& data, const SplineSystem& sys);
double compute_sigma_m(const SplineState& spline, std::span<const double> theta,
                       const SplineSystem& sys, const OdeModel& model);

struct WeightUpdate {
  double w = 0.0;
  WeightFlag flag = WeightFlag::kNone;
};

WeightUpdate update_weight(double sigma_d, double sigma_m, WeightRule rule = WeightRule::kStdRatio,
                           double sigma_m_floor = 1e-12, double w_max = 1e3);

/// Spline value at the start of the grid per component, plus the first
/// derivative (boundary row of the first-order difference matrix) for
/// second-order components.
InitialConditions extract_initial_conditions(const SplineState& spline, const OdeModel& model);

FitResult fit(const Dataset& data, const OdeModel& model, std::span<const double> theta0,
              const ProfilerOptions& opts = {});

/// Same as `fit` on a prebuilt spline system.
FitResult fit(const Dataset& data, const SplineSystem& sys, const OdeModel& model,
              std::span<const double> theta0, const ProfilerOptions& opts);

}  // namespace gradmatch
