#pragma once

#include "gradmatch/basis.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradmatch {

/// Thrown when a parameter vector falls outside a model's bounds.
class ParameterBoundsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Right-hand side f(t, y, theta) of the residual D y - f. Arguments are the
/// fine-grid times, spline values (J x K), spline first derivatives (J x K)
/// and the parameter vector; returns J x K.
using RhsFunction = std::function<Matrix(std::span<const double> t, const Matrix& values,
                                         const Matrix& first_derivs,
                                         std::span<const double> theta)>;

/// Part of f that is linear in the component's own state:
/// f_k = g_k(t, y, theta) - value * y_k - deriv * dy_k/dt.
struct LinearCoefficients {
  double value = 0.0;
  double deriv = 0.0;
};

using LinearTermsFunction =
    std::function<std::vector<LinearCoefficients>(std::span<const double> theta)>;

struct OdeModel {
  std::string name;
  int components = 1;
  std::vector<int> diff_orders;  // per component: 1 -> d/dt, 2 -> d^2/dt^2
  std::vector<std::string> param_names;
  std::vector<Bounds> param_bounds;
  RhsFunction rhs;
  /// Optional; lets the profiler keep these terms on the operator side.
  LinearTermsFunction linear_terms;
  /// Times where f jumps in t (forcing switches).
  std::vector<double> breakpoints;
  std::optional<std::vector<double>> true_params;

  int n_params() const { return static_cast<int>(param_names.size()); }
  int max_diff_order() const;
  /// Index of a parameter by name; throws std::invalid_argument when unknown.
  int param_index(const std::string& param) const;
  bool in_bounds(std::span<const double> theta) const;
  /// Throws ParameterBoundsError if theta has the wrong size or leaves the box.
  void check_params(std::span<const double> theta) const;
};

struct OscillatorParams {
  double m = 1.0;  // mass
  double c = 0.0;  // damping
  double k = 1.0;  // stiffness
};

struct LotkaVolterraParams {
  double alpha = 1.0;  // prey growth
  double delta = 1.0;  // predator conversion
};

/// Oscillator parameter vectors are ordered (k, c, m).
OscillatorParams oscillator_params(std::span<const double> theta);
std::vector<double> to_vector(const OscillatorParams& p);
/// Lotka-Volterra parameter vectors are ordered (alpha, delta).
LotkaVolterraParams lotka_volterra_params(std::span<const double> theta);
std::vector<double> to_vector(const LotkaVolterraParams& p);

inline constexpr double kForceSwitchTime = 25.0;

/// F(t) = 1 - H(t - 25) with H(0) = 1, so the force is already off at t = 25.
double heaviside_force(double t);

/// (F(t) - c dx - k x) / m at every grid point.
Vector oscillator_rhs(std::span<const double> t, std::span<const double> x,
                      std::span<const double> dx, const OscillatorParams& p);

struct LotkaVolterraRates {
  Vector prey;
  Vector predator;
};

/// (alpha a - a b, delta a b - b) at every grid point.
LotkaVolterraRates lotka_volterra_rhs(std::span<const double> t, std::span<const double> a,
                                      std::span<const double> b, const LotkaVolterraParams& p);

OdeModel make_oscillator_model();
OdeModel make_lotka_volterra_model();
/// "oscillator" or "lotka-volterra".
OdeModel model_by_name(const std::string& name);

/// Unweighted f values stacked component-major (all of component 1, then 2, ...).
Vector model_f_stack(const OdeModel& model, std::span<const double> fine_grid,
                     const Matrix& values, const Matrix& first_derivs,
                     std::span<const double> theta);

}  // namespace gradmatch
