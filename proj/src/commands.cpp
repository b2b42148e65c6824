#include "gradmatch/commands.hpp"

#include "gradmatch/io.hpp"

#include <algorithm>
#include <stdexcept>

namespace gradmatch {

namespace {

namespace fs = std::filesystem;

std::vector<double> or_default(const std::vector<double>& v, const std::vector<double>& fallback) {
  return v.empty() ? fallback : v;
}

InitialConditions initial_conditions(const RunConfig& config, const OdeModel& model) {
  const auto ic = or_default(config.ic, model_defaults(config.model).ic);
  if (model.name == "oscillator") {
    if (ic.size() != 2) throw std::invalid_argument("oscillator ic needs x(0) and dx(0)/dt");
    return {{ic[0]}, {ic[1]}};
  }
  if (static_cast<int>(ic.size()) != model.components) {
    throw std::invalid_argument(model.name + " ic needs " + std::to_string(model.components) +
                                " values");
  }
  return {ic, {}};
}

std::vector<double> sized_params(const std::vector<double>& v, const OdeModel& model,
                                 const char* key) {
  if (static_cast<int>(v.size()) != model.n_params()) {
    throw std::invalid_argument(std::string(key) + " needs " + std::to_string(model.n_params()) +
                                " values for " + model.name);
  }
  return v;
}

struct LoadedFit {
  OdeModel model;
  std::vector<double> theta_hat;
  double weight = 0.0;
  SplineOptions spline;
  Matrix beta;  // M x K
};

LoadedFit load_fit(const fs::path& path) {
  LoadedFit f;
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    f.model = model_by_name(j.at("model").get<std::string>());
    f.theta_hat = j.at("theta_hat").get<std::vector<double>>();
    f.weight = j.at("final_weight").get<double>();
    const auto& s = j.at("settings");
    f.spline.n_basis = s.at("n_basis").get<int>();
    f.spline.n_fine = s.at("n_fine").get<int>();
    f.spline.penalty = penalty_scaling_from_string(s.at("penalty").get<std::string>());
    f.spline.knots_at_breaks = s.at("knots_at_breaks").get<bool>();
    const auto beta = j.at("beta").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(beta.size()) != f.model.components) {
      throw SchemaError("beta has the wrong number of components");
    }
    f.beta.resize(f.spline.n_basis, f.model.components);
    for (int k = 0; k < f.model.components; ++k) {
      const auto& col = beta[static_cast<std::size_t>(k)];
      if (static_cast<int>(col.size()) != f.spline.n_basis) throw SchemaError("beta has the wrong length");
      for (int i = 0; i < f.spline.n_basis; ++i) f.beta(i, k) = col[static_cast<std::size_t>(i)];
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  sized_params(f.theta_hat, f.model, "theta_hat");
  return f;
}

std::vector<double> sweep_grid(const RunConfig& config, const OdeModel& model, int index,
                               std::size_t slot, double centre) {
  const auto& b = model.param_bounds[static_cast<std::size_t>(index)];
  double lo = std::max(b.lo, 0.5 * centre);
  double hi = std::min(b.hi, 1.5 * centre);
  if (!config.grid_lo.empty()) lo = config.grid_lo.at(slot);
  if (!config.grid_hi.empty()) hi = config.grid_hi.at(slot);
  if (config.grid_points < 3) throw std::invalid_argument("grid_points must be at least 3");
  return grid_through(lo, hi, config.grid_points, centre);
}

}  // namespace

ModelDefaults model_defaults(const std::string& model) {
  if (model == "oscillator") return {{1.0, 0.2, 1.0}, {2.0, 0.5, 2.0}, {0.0, 0.0}, {0.0, 50.0}};
  if (model == "lotka-volterra") return {{1.0, 1.0}, {2.0, 2.0}, {1.0, 0.5}, {0.0, 15.0}};
  throw std::invalid_argument("unknown model '" + model + "'");
}

Dataset generate_from_config(const RunConfig& config) {
  const auto model = model_by_name(config.model);
  const auto defaults = model_defaults(config.model);
  const auto theta = sized_params(or_default(config.theta_true, defaults.theta_true), model,
                                  "theta_true");
  const auto span = or_default(config.t_span, defaults.t_span);
  if (span.size() != 2) throw std::invalid_argument("t_span needs two values");
  return generate_dataset(config.model, theta, initial_conditions(config, model),
                          config.n_points, span[0], span[1], config.sigma, config.seed);
}

ProfilerOptions profiler_options(const RunConfig& config) {
  ProfilerOptions o;
  o.spline.n_basis = config.n_basis;
  o.spline.n_fine = config.n_fine;
  o.spline.penalty = penalty_scaling_from_string(config.penalty);
  o.spline.knots_at_breaks = config.knots_at_breaks;
  o.linear_terms = linear_term_mode_from_string(config.linear_terms);
  o.weight_rule = weight_rule_from_string(config.weight_rule);
  o.w_initial = config.w_initial;
  o.tol_y = config.tol_y;
  o.tol_theta = config.tol_theta;
  o.n_max = config.n_max;
  o.noise_variance = config.noise_variance;
  if (!(o.w_initial > 0.0)) throw std::invalid_argument("w_initial must be positive");
  if (!(o.tol_y > 0.0) || !(o.tol_theta > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (o.n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  if (!(o.noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be positive");
  return o;
}

std::vector<double> initial_guess(const RunConfig& config, const OdeModel& model) {
  return sized_params(or_default(config.theta0, model_defaults(model.name).theta0), model, "theta0");
}

std::filesystem::path data_path(const RunConfig& config) {
  return config.data.empty() ? fs::path(config.out) / "data.csv" : fs::path(config.data);
}

std::filesystem::path fit_path(const RunConfig& config) {
  return config.fit.empty() ? fs::path(config.out) / "fit.json" : fs::path(config.fit);
}

int cmd_generate(const RunConfig& config) {
  save_dataset(generate_from_config(config), fs::path(config.out) / "data.csv");
  return kExitOk;
}

int cmd_fit(const RunConfig& config) {
  const auto model = model_by_name(config.model);
  const auto data = load_dataset(data_path(config));
  if (!data.model.empty() && data.model != model.name) {
    throw SchemaError("data was generated by " + data.model + ", config model is " + model.name);
  }
  if (data.components() != model.components) {
    throw SchemaError(model.name + " expects " + std::to_string(model.components) +
                      " data columns, got " + std::to_string(data.components()));
  }
  const auto opts = profiler_options(config);
  const auto theta0 = initial_guess(config, model);
  const auto sys = make_spline_system(data.times, opts.spline, model.breakpoints);
  const auto result = fit(data, sys, model, theta0, opts);

  const fs::path out(config.out);
  write_text_file(out / "fit.json", dump_json(fit_json(result, model, theta0, opts)));
  write_text_file(out / "spline.csv", spline_csv(sys, result.final_state.spline));
  write_text_file(out / "trace.csv", trace_csv(result, model));
  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_loglik(const RunConfig& config) {
  if (config.slice.empty() == config.grid.empty()) {
    throw std::invalid_argument("loglik needs exactly one of --slice or --grid");
  }
  if (!config.grid.empty() && config.grid.size() != 2) {
    throw std::invalid_argument("--grid needs two parameter names");
  }
  const auto f = load_fit(fit_path(config));
  const auto data = load_dataset(data_path(config));
  if (data.components() != f.model.components) throw SchemaError("data does not match the fit's model");

  const auto sys = make_spline_system(data.times, f.spline, f.model.breakpoints);
  if (sys.n_basis() != f.spline.n_basis) throw SchemaError("fit basis size does not match the data");
  const auto spline = spline_from_coefficients(
      sys, f.model, Eigen::Map<const Vector>(f.beta.data(), f.beta.size()));
  const LoglikConfig lc{config.noise_variance, f.weight};
  const auto loglik = make_loglik_function(data, sys, spline, lc, f.model);
  const fs::path out(config.out);

  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  int dof = 1;
  double loglik_at_mle = 0.0;
  if (!config.slice.empty()) {
    for (std::size_t s = 0; s < config.slice.size(); ++s) {
      const int idx = f.model.param_index(config.slice[s]);
      const auto grid = sweep_grid(config, f.model, idx, s, f.theta_hat[static_cast<std::size_t>(idx)]);
      const auto surface = loglik_slice(loglik, idx, grid, f.theta_hat, f.model.param_bounds);
      const std::string name = "slice_" + config.slice[s] + ".csv";
      write_text_file(out / name, slice_csv(surface));
      files.push_back(name);
      params.push_back(config.slice[s]);
      loglik_at_mle = surface.loglik_at_mle;
    }
  } else {
    dof = 2;
    const int i1 = f.model.param_index(config.grid[0]);
    const int i2 = f.model.param_index(config.grid[1]);
    const auto g1 = sweep_grid(config, f.model, i1, 0, f.theta_hat[static_cast<std::size_t>(i1)]);
    const auto g2 = sweep_grid(config, f.model, i2, 1, f.theta_hat[static_cast<std::size_t>(i2)]);
    const auto surface = loglik_grid_2d(loglik, i1, i2, g1, g2, f.theta_hat, f.model.param_bounds);
    const std::string name = "grid_" + config.grid[0] + "_" + config.grid[1] + ".csv";
    write_text_file(out / name, grid_csv(surface));
    files.push_back(name);
    params = {config.grid[0], config.grid[1]};
    loglik_at_mle = surface.loglik_at_mle;
  }

  nlohmann::ordered_json mle = nlohmann::ordered_json::array();
  for (double v : f.theta_hat) mle.push_back(v);
  const nlohmann::ordered_json threshold = {{"dof", dof},
                                            {"q", config.q},
                                            {"threshold", chi2_threshold(dof, config.q)},
                                            {"params", params},
                                            {"mle", mle},
                                            {"loglik_at_mle", loglik_at_mle},
                                            {"weight", f.weight},
                                            {"noise_variance", config.noise_variance},
                                            {"files", files}};
  write_text_file(out / "threshold.json", dump_json(threshold));
  return kExitOk;
}

}  // namespace gradmatch
