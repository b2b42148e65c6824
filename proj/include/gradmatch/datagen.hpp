#pragma once

#include "gradmatch/basis.hpp"
#include "gradmatch/models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gradmatch {

/// State at t = 0. `derivatives` is filled only for second-order models.
struct InitialConditions {
  std::vector<double> values;
  std::vector<double> derivatives;
};

inline constexpr const char* kNoiseGenerator = "mt19937_64/box-muller";

struct Dataset {
  std::vector<double> times;  // I ascending
  Matrix values;              // I x K
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string generator = kNoiseGenerator;
  // provenance
  std::string model;
  std::vector<double> theta_true;
  InitialConditions ic;
  double t_start = 0.0;
  double t_end = 0.0;

  int n_times() const { return static_cast<int>(times.size()); }
  int components() const { return static_cast<int>(values.cols()); }
  /// Component-major stack of all I*K observations.
  Vector stacked() const { return Eigen::Map<const Vector>(values.data(), values.size()); }
  /// Throws std::invalid_argument if times are not strictly ascending or values
  /// are not finite.
  void validate() const;
};

/// Closed-form oscillator displacement under F(t) = 1 - H(t - 25). The
/// amplitude and phase are re-derived at the force switch so x and dx/dt stay
/// continuous.
double oscillator_analytic(double t, const OscillatorParams& p, const InitialConditions& ic);
/// Velocity of the closed-form solution.
double oscillator_analytic_velocity(double t, const OscillatorParams& p,
                                    const InitialConditions& ic);

/// dy/dt = rhs(t, y) for a first-order system.
using FirstOrderRhs = std::function<Vector(double t, const Vector& y)>;

struct Trajectory {
  std::vector<double> times;
  Matrix states;  // rows follow `times`
};

/// Classical fixed-step fourth-order Runge-Kutta on [t0, t1]; `dt` must divide
/// the span to within rounding. Returns every step including both endpoints.
Trajectory rk4_integrate(const FirstOrderRhs& rhs, const Vector& y0, double t0, double t1,
                         double dt);

/// RK4 states at `times` (ascending, starting at the initial time), stepping
/// each interval uniformly with a step no larger than `max_dt`.
Matrix rk4_sample(const FirstOrderRhs& rhs, const Vector& y0, std::span<const double> times,
                  double max_dt);

/// F uses the t = 25 convention, so an RK stage landing on 25 sees the force
/// already off; integrate up to the switch separately when that matters.
FirstOrderRhs oscillator_first_order(const OscillatorParams& p);
FirstOrderRhs lotka_volterra_first_order(const LotkaVolterraParams& p);

inline constexpr double kDataGenStep = 1e-3;

/// Samples the clean solution at `n_points` equispaced times on
/// [t_start, t_end] and adds N(0, sigma^2) noise per scalar observation, row by
/// row (time-major, then component).
Dataset generate_dataset(const std::string& model_name, std::span<const double> theta_true,
                         const InitialConditions& ic, int n_points, double t_start,
                         double t_end, double sigma, std::uint64_t seed);

/// Seeded standard-normal stream: mt19937_64 with Box-Muller pairs.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform();

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace gradmatch
