// gradmatch command-line front end: generate | fit | loglik.
#include "gradmatch/commands.hpp"
#include "gradmatch/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <set>

using namespace gradmatch;

namespace {

/// Flat JSON config. Keys are routed to the selected subcommand; keys that
/// belong only to other subcommands are ignored, unknown keys are an error.
class JsonConfig : public CLI::Config {
 public:
  JsonConfig(const CLI::App& root, std::set<std::string> known)
      : root_(root), known_(std::move(known)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    throw CLI::ConfigError("writing JSON configs is not supported");
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::parse_error& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config must be a flat JSON object");

    const auto subs = root_.get_subcommands();
    if (subs.empty()) return {};
    const CLI::App* sub = subs.front();

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (!known_.count(key)) throw CLI::ConfigError("unknown config key '" + key + "'");
      if (sub->get_option_no_throw("--" + key) == nullptr) continue;
      CLI::ConfigItem item;
      item.parents = {sub->get_name()};
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(key, v));
      } else {
        item.inputs.push_back(scalar(key, value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return format_number(v.get<double>());
    throw CLI::ConfigError("config key '" + key + "' must hold scalars or a flat array");
  }

  const CLI::App& root_;
  std::set<std::string> known_;
};

void add_model_options(CLI::App* app, RunConfig& c) {
  app->add_option("--model", c.model, "oscillator | lotka-volterra")
      ->check(CLI::IsMember({"oscillator", "lotka-volterra"}));
  app->add_option("--out", c.out, "output directory");
}

void add_generate_options(CLI::App* app, RunConfig& c) {
  app->add_option("--theta_true", c.theta_true, "true parameters (oscillator: k c m)")->delimiter(',');
  app->add_option("--ic", c.ic, "initial conditions")->delimiter(',');
  app->add_option("--n_points", c.n_points);
  app->add_option("--t_span", c.t_span, "t_start t_end")->delimiter(',')->expected(2);
  app->add_option("--sigma", c.sigma, "noise standard deviation");
  app->add_option("--seed", c.seed);
}

void add_fit_options(CLI::App* app, RunConfig& c) {
  app->add_option("--data", c.data, "dataset CSV (default <out>/data.csv)");
  app->add_option("--theta0", c.theta0, "initial guess")->delimiter(',');
  app->add_option("--n_basis", c.n_basis, "basis size, 0 = one per observation");
  app->add_option("--n_fine", c.n_fine, "fine-grid size, 0 = max(5I+1, 201)");
  app->add_option("--penalty", c.penalty)->check(CLI::IsMember({"quadrature", "plain-sum"}));
  app->add_option("--knots_at_breaks", c.knots_at_breaks, "double knots at forcing breaks");
  app->add_option("--linear_terms", c.linear_terms)->check(CLI::IsMember({"implicit", "lagged"}));
  app->add_option("--weight_rule", c.weight_rule)->check(CLI::IsMember({"std-ratio", "var-ratio"}));
  app->add_option("--w_initial", c.w_initial);
  app->add_option("--tol_y", c.tol_y);
  app->add_option("--tol_theta", c.tol_theta);
  app->add_option("--n_max", c.n_max);
  app->add_option("--noise_variance", c.noise_variance);
}

void add_loglik_options(CLI::App* app, RunConfig& c) {
  app->add_option("--data", c.data, "dataset CSV (default <out>/data.csv)");
  app->add_option("--fit", c.fit, "fit.json (default <out>/fit.json)");
  app->add_option("--slice", c.slice, "parameter(s) to slice through the MLE")->delimiter(',');
  app->add_option("--grid", c.grid, "two parameters for a 2-D grid")->delimiter(',')->expected(2);
  app->add_option("--q", c.q, "confidence level for the threshold");
  app->add_option("--grid_points", c.grid_points);
  app->add_option("--grid_lo", c.grid_lo, "lower grid end per swept parameter")->delimiter(',');
  app->add_option("--grid_hi", c.grid_hi, "upper grid end per swept parameter")->delimiter(',');
  app->add_option("--noise_variance", c.noise_variance);
}

std::set<std::string> option_keys(const CLI::App& root) {
  std::set<std::string> keys;
  for (const auto* sub : root.get_subcommands({})) {
    for (const auto* opt : sub->get_options()) {
      for (const auto& name : opt->get_lnames()) keys.insert(name);
    }
  }
  keys.erase("help");
  keys.erase("config");
  return keys;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalised profiling for ODE parameter inference"};
  app.fallthrough();
  app.require_subcommand(1);
  RunConfig config;

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  add_model_options(gen, config);
  add_generate_options(gen, config);

  auto* fit = app.add_subcommand("fit", "fit a dataset");
  add_model_options(fit, config);
  add_fit_options(fit, config);

  auto* loglik = app.add_subcommand("loglik", "log-likelihood slices or grid at the fitted spline");
  add_model_options(loglik, config);
  add_loglik_options(loglik, config);

  app.set_config("--config", "", "flat JSON config; flags override its keys");
  app.config_formatter(std::make_shared<JsonConfig>(app, option_keys(app)));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(config);
    if (fit->parsed()) {
      const int code = cmd_fit(config);
      if (code == kExitNotConverged) std::cerr << "gradmatch: fit did not converge\n";
      return code;
    }
    return cmd_loglik(config);
  } catch (const std::exception& e) {
    std::cerr << "gradmatch: " << e.what() << "\n";
    return kExitUsage;
  }
}
