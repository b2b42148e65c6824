#include "gradmatch/commands.hpp"
#include "gradmatch/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace gradmatch;

namespace {

// A finished fit together with everything needed to evaluate the likelihood
// around it.
struct Fit {
  RunConfig config;
  OdeModel model;
  Dataset data;
  ProfilerOptions options;
  std::vector<double> theta0;
  SplineSystem sys;
  FitResult result;

  LoglikFunction loglik() const {
    return make_loglik_function(data, sys, result.final_state.spline,
                                {options.noise_variance, result.final_state.w}, model);
  }

  std::vector<double> sweep(int index, std::optional<double> lo, std::optional<double> hi,
                            int points) const {
    const double centre = result.theta_hat[static_cast<std::size_t>(index)];
    const auto& b = model.param_bounds[static_cast<std::size_t>(index)];
    return grid_through(lo.value_or(std::max(b.lo, 0.5 * centre)),
                        hi.value_or(std::min(b.hi, 1.5 * centre)), points, centre);
  }
};

Fit run_fit(const Dataset& data, const RunConfig& config) {
  Fit f{config, model_by_name(config.model), data, profiler_options(config), {}, {}, {}};
  if (data.components() != f.model.components) {
    throw std::invalid_argument(f.model.name + " expects " + std::to_string(f.model.components) +
                                " data columns");
  }
  f.theta0 = initial_guess(config, f.model);
  f.sys = make_spline_system(data.times, f.options.spline, f.model.breakpoints);
  f.result = fit(f.data, f.sys, f.model, f.theta0, f.options);
  return f;
}

py::dict surface_dict(const LoglikSurface& s, double threshold) {
  py::dict d;
  d["axes"] = s.axes;
  d["values"] = s.values;
  d["mle"] = s.mle;
  d["loglik_at_mle"] = s.loglik_at_mle;
  d["local_maxima"] = count_local_maxima(s);
  d["threshold"] = threshold;
  return d;
}

py::list trace_list(const Fit& f) {
  py::list out;
  for (const auto& e : f.result.trace) {
    py::dict d;
    d["n"] = e.n;
    d["w"] = e.w;
    d["theta_hat"] = e.theta_hat;
    d["sigma_d"] = e.sigma_d;
    d["sigma_m"] = e.sigma_m;
    d["delta_y"] = e.delta_y;
    d["delta_theta"] = e.delta_theta;
    d["weight_flag"] = to_string(e.weight_flag);
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_gradmatch, m) {
  m.doc() = "ODE parameter inference with ODE-penalised B-splines";

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ParameterBoundsError>(m, "ParameterBoundsError", PyExc_ValueError);

  py::class_<RunConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("model", &RunConfig::model)
      .def_readwrite("theta_true", &RunConfig::theta_true)
      .def_readwrite("theta0", &RunConfig::theta0)
      .def_readwrite("ic", &RunConfig::ic)
      .def_readwrite("n_points", &RunConfig::n_points)
      .def_readwrite("t_span", &RunConfig::t_span)
      .def_readwrite("sigma", &RunConfig::sigma)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("n_basis", &RunConfig::n_basis)
      .def_readwrite("n_fine", &RunConfig::n_fine)
      .def_readwrite("penalty", &RunConfig::penalty)
      .def_readwrite("knots_at_breaks", &RunConfig::knots_at_breaks)
      .def_readwrite("linear_terms", &RunConfig::linear_terms)
      .def_readwrite("weight_rule", &RunConfig::weight_rule)
      .def_readwrite("w_initial", &RunConfig::w_initial)
      .def_readwrite("tol_y", &RunConfig::tol_y)
      .def_readwrite("tol_theta", &RunConfig::tol_theta)
      .def_readwrite("n_max", &RunConfig::n_max)
      .def_readwrite("noise_variance", &RunConfig::noise_variance);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](std::vector<double> times, Matrix values) {
             Dataset d;
             d.times = std::move(times);
             d.values = std::move(values);
             if (d.values.rows() != d.n_times()) {
               throw std::invalid_argument("values needs one row per time");
             }
             d.validate();
             return d;
           }),
           py::arg("times"), py::arg("values"))
      .def_readonly("times", &Dataset::times)
      .def_readonly("values", &Dataset::values)
      .def_readonly("model", &Dataset::model)
      .def_readonly("seed", &Dataset::seed)
      .def_readonly("noise_sigma", &Dataset::noise_sigma)
      .def_readonly("theta_true", &Dataset::theta_true)
      .def("to_csv", &dataset_csv)
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_dataset(d, p); },
           py::arg("path"));

  py::class_<Fit>(m, "Fit")
      .def_property_readonly("model", [](const Fit& f) { return f.model.name; })
      .def_property_readonly("param_names", [](const Fit& f) { return f.model.param_names; })
      .def_property_readonly("theta_hat", [](const Fit& f) { return f.result.theta_hat; })
      .def_property_readonly("theta0", [](const Fit& f) { return f.theta0; })
      .def_property_readonly("converged", [](const Fit& f) { return f.result.converged; })
      .def_property_readonly("iterations", [](const Fit& f) { return f.result.iterations; })
      .def_property_readonly("reason", [](const Fit& f) { return f.result.reason; })
      .def_property_readonly("final_weight", [](const Fit& f) { return f.result.final_state.w; })
      .def_property_readonly("initial_values",
                             [](const Fit& f) { return f.result.initial_conditions.values; })
      .def_property_readonly("initial_derivatives",
                             [](const Fit& f) { return f.result.initial_conditions.derivatives; })
      .def_property_readonly("fine_grid", [](const Fit& f) { return f.sys.fine_grid; })
      .def_property_readonly("spline_values",
                             [](const Fit& f) { return f.result.final_state.spline.values; })
      .def_property_readonly("trace", &trace_list)
      .def("to_json",
           [](const Fit& f) { return dump_json(fit_json(f.result, f.model, f.theta0, f.options)); })
      .def("trace_csv", [](const Fit& f) { return trace_csv(f.result, f.model); })
      .def("spline_csv", [](const Fit& f) { return spline_csv(f.sys, f.result.final_state.spline); })
      .def(
          "loglik",
          [](const Fit& f, std::vector<double> theta) { return f.loglik()(theta); },
          py::arg("theta"))
      .def(
          "slice",
          [](const Fit& f, const std::string& param, std::optional<double> lo,
             std::optional<double> hi, int points, double q) {
            const int idx = f.model.param_index(param);
            const auto s = loglik_slice(f.loglik(), idx, f.sweep(idx, lo, hi, points),
                                        f.result.theta_hat, f.model.param_bounds);
            return surface_dict(s, chi2_threshold(1, q));
          },
          py::arg("param"), py::arg("lo") = py::none(), py::arg("hi") = py::none(),
          py::arg("points") = 51, py::arg("q") = 0.95)
      .def(
          "grid",
          [](const Fit& f, const std::string& p1, const std::string& p2, int points, double q) {
            const int i1 = f.model.param_index(p1);
            const int i2 = f.model.param_index(p2);
            const auto s = loglik_grid_2d(f.loglik(), i1, i2, f.sweep(i1, {}, {}, points),
                                          f.sweep(i2, {}, {}, points), f.result.theta_hat,
                                          f.model.param_bounds);
            return surface_dict(s, chi2_threshold(2, q));
          },
          py::arg("p1"), py::arg("p2"), py::arg("points") = 51, py::arg("q") = 0.95);

  m.def("generate", &generate_from_config, py::arg("config"));
  m.def("fit", &run_fit, py::arg("data"), py::arg("config"));
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("chi2_threshold", &chi2_threshold, py::arg("dof"), py::arg("q") = 0.95);
  m.def(
      "oscillator_analytic",
      [](std::vector<double> t, double k, double c, double mass, double x0, double v0) {
        const OscillatorParams p{.m = mass, .c = c, .k = k};
        const InitialConditions ic{{x0}, {v0}};
        std::vector<double> out;
        out.reserve(t.size());
        for (double ti : t) out.push_back(oscillator_analytic(ti, p, ic));
        return out;
      },
      py::arg("t"), py::arg("k") = 1.0, py::arg("c") = 0.2, py::arg("m") = 1.0,
      py::arg("x0") = 0.0, py::arg("v0") = 0.0);
}
