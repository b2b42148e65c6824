#pragma once

#include "gradmatch/datagen.hpp"
#include "gradmatch/profiler.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gradmatch {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNotConverged = 2 };

/// Flat run configuration shared by all commands. Empty vectors fall back to
/// the model defaults.
struct RunConfig {
  std::string model = "oscillator";
  std::vector<double> theta_true;
  std::vector<double> theta0;
  std::vector<double> ic;  // oscillator: x(0), dx(0)/dt; lotka-volterra: a(0), b(0)
  int n_points = 41;
  std::vector<double> t_span;
  double sigma = 0.05;
  std::uint64_t seed = 1;

  int n_basis = 0;
  int n_fine = 0;
  std::string penalty = "quadrature";
  bool knots_at_breaks = false;
  std::string linear_terms = "implicit";
  std::string weight_rule = "std-ratio";
  double w_initial = 1e-2;
  double tol_y = 1e-3;
  double tol_theta = 1e-3;
  int n_max = 20;
  double noise_variance = kDefaultNoiseSigma * kDefaultNoiseSigma;

  std::string out = ".";
  std::string data;  // default <out>/data.csv
  std::string fit;   // default <out>/fit.json

  std::vector<std::string> slice;
  std::vector<std::string> grid;
  double q = 0.95;
  int grid_points = 51;
  std::vector<double> grid_lo;  // one per swept parameter; default 0.5 * mle
  std::vector<double> grid_hi;  // default 1.5 * mle
};

struct ModelDefaults {
  std::vector<double> theta_true;
  std::vector<double> theta0;
  std::vector<double> ic;
  std::vector<double> t_span;
};

ModelDefaults model_defaults(const std::string& model);

/// Dataset described by the generation keys of `config`.
Dataset generate_from_config(const RunConfig& config);
ProfilerOptions profiler_options(const RunConfig& config);
std::vector<double> initial_guess(const RunConfig& config, const OdeModel& model);

std::filesystem::path data_path(const RunConfig& config);
std::filesystem::path fit_path(const RunConfig& config);

/// Writes data.csv and data.meta.json under `out`.
int cmd_generate(const RunConfig& config);
/// Writes fit.json, spline.csv and trace.csv; kExitNotConverged when the fit
/// stops at n_max.
int cmd_fit(const RunConfig& config);
/// Writes slice_<p>.csv or grid_<p1>_<p2>.csv plus threshold.json.
int cmd_loglik(const RunConfig& config);

}  // namespace gradmatch
