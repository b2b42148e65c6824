#include "gradmatch/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gradmatch {

namespace {

void require_same_length(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw std::invalid_argument("rhs inputs must have equal lengths");
}

}  // namespace

int OdeModel::max_diff_order() const {
  return diff_orders.empty() ? 1 : *std::max_element(diff_orders.begin(), diff_orders.end());
}

int OdeModel::param_index(const std::string& param) const {
  auto it = std::find(param_names.begin(), param_names.end(), param);
  if (it == param_names.end()) {
    throw std::invalid_argument("unknown parameter '" + param + "' for model " + name);
  }
  return static_cast<int>(it - param_names.begin());
}

bool OdeModel::in_bounds(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != n_params()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i]) || !param_bounds[i].contains(theta[i])) return false;
  }
  return true;
}

void OdeModel::check_params(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != n_params()) {
    throw ParameterBoundsError(name + " expects " + std::to_string(n_params()) + " parameters");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i]) || !param_bounds[i].contains(theta[i])) {
      std::ostringstream msg;
      msg << "parameter " << param_names[i] << " = " << theta[i] << " outside ["
          << param_bounds[i].lo << ", " << param_bounds[i].hi << "]";
      throw ParameterBoundsError(msg.str());
    }
  }
}

OscillatorParams oscillator_params(std::span<const double> theta) {
  if (theta.size() != 3) throw std::invalid_argument("oscillator expects (k, c, m)");
  return {theta[2], theta[1], theta[0]};
}

std::vector<double> to_vector(const OscillatorParams& p) { return {p.k, p.c, p.m}; }

LotkaVolterraParams lotka_volterra_params(std::span<const double> theta) {
  if (theta.size() != 2) throw std::invalid_argument("lotka-volterra expects (alpha, delta)");
  return {theta[0], theta[1]};
}

std::vector<double> to_vector(const LotkaVolterraParams& p) { return {p.alpha, p.delta}; }

double heaviside_force(double t) { return t < kForceSwitchTime ? 1.0 : 0.0; }

Vector oscillator_rhs(std::span<const double> t, std::span<const double> x,
                      std::span<const double> dx, const OscillatorParams& p) {
  require_same_length(t.size(), x.size(), dx.size());
  if (p.m == 0.0) throw std::invalid_argument("oscillator mass must be nonzero");
  Vector f(static_cast<Eigen::Index>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    f[static_cast<Eigen::Index>(j)] = (heaviside_force(t[j]) - p.c * dx[j] - p.k * x[j]) / p.m;
  }
  return f;
}

LotkaVolterraRates lotka_volterra_rhs(std::span<const double> t, std::span<const double> a,
                                      std::span<const double> b, const LotkaVolterraParams& p) {
  require_same_length(t.size(), a.size(), b.size());
  const auto n = static_cast<Eigen::Index>(t.size());
  LotkaVolterraRates r{Vector(n), Vector(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const double aj = a[static_cast<std::size_t>(j)];
    const double bj = b[static_cast<std::size_t>(j)];
    r.prey[j] = p.alpha * aj - aj * bj;
    r.predator[j] = p.delta * aj * bj - bj;
  }
  return r;
}

OdeModel make_oscillator_model() {
  OdeModel m;
  m.name = "oscillator";
  m.components = 1;
  m.diff_orders = {2};
  m.param_names = {"k", "c", "m"};
  m.param_bounds = {{0.01, 10.0}, {0.01, 10.0}, {0.01, 10.0}};
  m.true_params = std::vector<double>{1.0, 0.2, 1.0};
  m.breakpoints = {kForceSwitchTime};
  m.linear_terms = [](std::span<const double> theta) {
    const auto p = oscillator_params(theta);
    return std::vector<LinearCoefficients>{{p.k / p.m, p.c / p.m}};
  };
  m.rhs = [](std::span<const double> t, const Matrix& y, const Matrix& dy,
             std::span<const double> theta) -> Matrix {
    const auto x = y.col(0);
    const auto v = dy.col(0);
    return oscillator_rhs(t, {x.data(), static_cast<std::size_t>(x.size())},
                          {v.data(), static_cast<std::size_t>(v.size())},
                          oscillator_params(theta));
  };
  return m;
}

OdeModel make_lotka_volterra_model() {
  OdeModel m;
  m.name = "lotka-volterra";
  m.components = 2;
  m.diff_orders = {1, 1};
  m.param_names = {"alpha", "delta"};
  m.param_bounds = {{0.01, 10.0}, {0.01, 10.0}};
  m.true_params = std::vector<double>{1.0, 1.0};
  m.rhs = [](std::span<const double> t, const Matrix& y, const Matrix& /*dy*/,
             std::span<const double> theta) -> Matrix {
    const auto a = y.col(0);
    const auto b = y.col(1);
    auto rates = lotka_volterra_rhs(t, {a.data(), static_cast<std::size_t>(a.size())},
                                    {b.data(), static_cast<std::size_t>(b.size())},
                                    lotka_volterra_params(theta));
    Matrix out(y.rows(), 2);
    out.col(0) = rates.prey;
    out.col(1) = rates.predator;
    return out;
  };
  return m;
}

OdeModel model_by_name(const std::string& name) {
  if (name == "oscillator") return make_oscillator_model();
  if (name == "lotka-volterra") return make_lotka_volterra_model();
  throw std::invalid_argument("unknown model '" + name + "'");
}

Vector model_f_stack(const OdeModel& model, std::span<const double> fine_grid,
                     const Matrix& values, const Matrix& first_derivs,
                     std::span<const double> theta) {
  const auto n = static_cast<Eigen::Index>(fine_grid.size());
  if (values.rows() != n || values.cols() != model.components || first_derivs.rows() != n ||
      first_derivs.cols() != model.components) {
    throw std::invalid_argument("spline state shape does not match model and grid");
  }
  const Matrix f = model.rhs(fine_grid, values, first_derivs, theta);
  if (f.rows() != n || f.cols() != model.components) {
    throw std::logic_error("model rhs returned the wrong shape");
  }
  // Column-major storage is already component-major.
  return Eigen::Map<const Vector>(f.data(), f.size());
}

}  // namespace gradmatch
