#include "gradmatch/spline.hpp"

#include <stdexcept>

namespace gradmatch {

Matrix SplineState::at_observations(const SplineSystem& sys) const {
  const Eigen::Index m = sys.n_basis();
  Matrix out(sys.n_obs(), values.cols());
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    out.col(k) = sys.basis_obs * beta.segment(k * m, m);
  }
  return out;
}

SplineState spline_from_coefficients(const SplineSystem& sys, const OdeModel& model,
                                     const Vector& beta) {
  const Eigen::Index m = sys.n_basis();
  const Eigen::Index k_count = model.components;
  if (beta.size() != m * k_count) {
    throw std::invalid_argument("coefficient vector does not match basis size and components");
  }
  SplineState s;
  s.beta = beta;
  s.values.resize(sys.n_fine(), k_count);
  s.first_derivs.resize(sys.n_fine(), k_count);
  s.op_derivs.resize(sys.n_fine(), k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto block = beta.segment(k * m, m);
    s.values.col(k) = sys.basis_fine * block;
    s.first_derivs.col(k) = sys.d1_basis * block;
    s.op_derivs.col(k) = sys.diff_basis(model.diff_orders[static_cast<std::size_t>(k)]) * block;
  }
  return s;
}

Vector model_residual(const SplineSystem& sys, const OdeModel& model, const SplineState& spline,
                      std::span<const double> theta) {
  const Vector f =
      model_f_stack(model, sys.fine_grid, spline.values, spline.first_derivs, theta);
  return Eigen::Map<const Vector>(spline.op_derivs.data(), spline.op_derivs.size()) - f;
}

}  // namespace gradmatch
