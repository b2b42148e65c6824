#include "gradmatch/datagen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gradmatch {

namespace {

struct OscillatorSegment {
  double start = 0.0;
  double force = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct Damping {
  double gamma;
  double omega;
};

Damping damping_of(const OscillatorParams& p) {
  if (p.k == 0.0) throw std::invalid_argument("oscillator stiffness must be nonzero");
  if (!(p.m > 0.0)) throw std::invalid_argument("oscillator mass must be positive");
  const double gamma = p.c / (2.0 * p.m);
  const double omega0_sq = p.k / p.m;
  if (!(omega0_sq > gamma * gamma)) {
    throw std::domain_error("closed-form oscillator solution requires the underdamped regime");
  }
  return {gamma, std::sqrt(omega0_sq - gamma * gamma)};
}

// Amplitude and phase of A e^{-gamma tau} cos(phase + omega tau) + F/k matching
// displacement x and velocity v at the segment start.
OscillatorSegment match_segment(double start, double force, double x, double v,
                                const OscillatorParams& p, const Damping& d) {
  const double u = x - force / p.k;
  const double s = (v + d.gamma * u) / d.omega;
  return {start, force, std::hypot(u, s), std::atan2(-s, u)};
}

double segment_x(const OscillatorSegment& seg, double t, const OscillatorParams& p,
                 const Damping& d) {
  const double tau = t - seg.start;
  return seg.amplitude * std::exp(-d.gamma * tau) * std::cos(seg.phase + d.omega * tau) +
         seg.force / p.k;
}

double segment_v(const OscillatorSegment& seg, double t, const Damping& d) {
  const double tau = t - seg.start;
  const double arg = seg.phase + d.omega * tau;
  return seg.amplitude * std::exp(-d.gamma * tau) *
         (-d.gamma * std::cos(arg) - d.omega * std::sin(arg));
}

OscillatorSegment segment_for(double t, const OscillatorParams& p, const InitialConditions& ic,
                              const Damping& d) {
  const double x0 = ic.values.empty() ? 0.0 : ic.values[0];
  const double v0 = ic.derivatives.empty() ? 0.0 : ic.derivatives[0];
  const auto first = match_segment(0.0, heaviside_force(0.0), x0, v0, p, d);
  if (t < kForceSwitchTime) return first;
  const double xs = segment_x(first, kForceSwitchTime, p, d);
  const double vs = segment_v(first, kForceSwitchTime, d);
  return match_segment(kForceSwitchTime, heaviside_force(kForceSwitchTime), xs, vs, p, d);
}

}  // namespace

void Dataset::validate() const {
  if (static_cast<Eigen::Index>(times.size()) != values.rows()) {
    throw std::invalid_argument("dataset times and values disagree in length");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("dataset times must be strictly ascending");
    }
  }
  if (!values.allFinite()) throw std::invalid_argument("dataset values must be finite");
}

double oscillator_analytic(double t, const OscillatorParams& p, const InitialConditions& ic) {
  const auto d = damping_of(p);
  return segment_x(segment_for(t, p, ic, d), t, p, d);
}

double oscillator_analytic_velocity(double t, const OscillatorParams& p,
                                    const InitialConditions& ic) {
  const auto d = damping_of(p);
  return segment_v(segment_for(t, p, ic, d), t, d);
}

Trajectory rk4_integrate(const FirstOrderRhs& rhs, const Vector& y0, double t0, double t1,
                         double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4 step must be positive");
  const double span = t1 - t0;
  if (!(span >= 0.0)) throw std::invalid_argument("rk4 span must be non-negative");
  const auto steps = static_cast<long>(std::llround(span / dt));
  if (std::abs(static_cast<double>(steps) * dt - span) > 1e-9 * std::max(1.0, span)) {
    throw std::invalid_argument("rk4 step does not divide the integration span");
  }

  Trajectory traj;
  traj.times.resize(static_cast<std::size_t>(steps) + 1);
  traj.states.resize(steps + 1, y0.size());
  Vector y = y0;
  traj.times[0] = t0;
  traj.states.row(0) = y.transpose();
  for (long i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    const Vector k1 = rhs(t, y);
    const Vector k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
    const Vector k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
    const Vector k4 = rhs(t + dt, y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) throw std::runtime_error("rk4 integration produced a non-finite state");
    traj.times[static_cast<std::size_t>(i) + 1] = i + 1 == steps ? t1 : t + dt;
    traj.states.row(i + 1) = y.transpose();
  }
  return traj;
}

Matrix rk4_sample(const FirstOrderRhs& rhs, const Vector& y0, std::span<const double> times,
                  double max_dt) {
  if (!(max_dt > 0.0)) throw std::invalid_argument("rk4 step must be positive");
  Matrix out(static_cast<Eigen::Index>(times.size()), y0.size());
  if (times.empty()) return out;
  Vector y = y0;
  out.row(0) = y.transpose();
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double span = times[i] - times[i - 1];
    if (!(span > 0.0)) throw std::invalid_argument("sample times must be strictly ascending");
    const double steps = std::ceil(span / max_dt - 1e-9);
    const auto traj = rk4_integrate(rhs, y, times[i - 1], times[i], span / steps);
    y = traj.states.bottomRows(1).transpose();
    out.row(static_cast<Eigen::Index>(i)) = y.transpose();
  }
  return out;
}

FirstOrderRhs oscillator_first_order(const OscillatorParams& p) {
  return [p](double t, const Vector& y) {
    Vector dy(2);
    dy[0] = y[1];
    dy[1] = (heaviside_force(t) - p.c * y[1] - p.k * y[0]) / p.m;
    return dy;
  };
}

FirstOrderRhs lotka_volterra_first_order(const LotkaVolterraParams& p) {
  return [p](double /*t*/, const Vector& y) {
    Vector dy(2);
    dy[0] = p.alpha * y[0] - y[0] * y[1];
    dy[1] = p.delta * y[0] * y[1] - y[1];
    return dy;
  };
}

double NormalStream::uniform() {
  // 53 random bits -> [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  return r * std::cos(angle);
}

Dataset generate_dataset(const std::string& model_name, std::span<const double> theta_true,
                         const InitialConditions& ic, int n_points, double t_start,
                         double t_end, double sigma, std::uint64_t seed) {
  if (n_points < 2) throw std::invalid_argument("dataset needs at least two points");
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  if (!(t_end > t_start)) throw std::invalid_argument("dataset span must be non-empty");
  const OdeModel model = model_by_name(model_name);
  model.check_params(theta_true);

  Dataset data;
  data.model = model.name;
  data.theta_true.assign(theta_true.begin(), theta_true.end());
  data.ic = ic;
  data.noise_sigma = sigma;
  data.seed = seed;
  data.t_start = t_start;
  data.t_end = t_end;
  data.times = linspace(t_start, t_end, n_points);

  if (model.name == "oscillator") {
    const auto p = oscillator_params(theta_true);
    if (data.ic.values.empty()) data.ic.values = {0.0};
    if (data.ic.derivatives.empty()) data.ic.derivatives = {0.0};
    data.values.resize(n_points, 1);
    for (int i = 0; i < n_points; ++i) {
      data.values(i, 0) = oscillator_analytic(data.times[static_cast<std::size_t>(i)], p, data.ic);
    }
  } else {
    if (ic.values.size() != 2) {
      throw std::invalid_argument("lotka-volterra needs two initial values");
    }
    if (t_start != 0.0) {
      throw std::invalid_argument("lotka-volterra initial conditions are given at t = 0");
    }
    const Vector y0 = Eigen::Map<const Vector>(ic.values.data(), 2);
    data.values = rk4_sample(lotka_volterra_first_order(lotka_volterra_params(theta_true)), y0,
                             data.times, kDataGenStep);
  }

  if (sigma > 0.0) {
    NormalStream noise(seed);
    for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
      for (Eigen::Index k = 0; k < data.values.cols(); ++k) data.values(i, k) += sigma * noise.next();
    }
  }
  return data;
}

}  // namespace gradmatch
