#pragma once

#include "gradmatch/basis.hpp"
#include "gradmatch/models.hpp"

namespace gradmatch {

/// A fitted spline for every model component, sampled on the fine grid.
/// `beta` holds one block of `n_basis` coefficients per component.
struct SplineState {
  Vector beta;
  Matrix values;        // J x K, B beta
  Matrix first_derivs;  // J x K, D1 B beta
  Matrix op_derivs;     // J x K, D_order B beta for each component's operator

  int components() const { return static_cast<int>(values.cols()); }
  /// Values at the observation times, I x K.
  Matrix at_observations(const SplineSystem& sys) const;
};

SplineState spline_from_coefficients(const SplineSystem& sys, const OdeModel& model,
                                     const Vector& beta);

/// D y - f(t, y, theta) on the fine grid, stacked component-major (length J K).
Vector model_residual(const SplineSystem& sys, const OdeModel& model, const SplineState& spline,
                      std::span<const double> theta);

}  // namespace gradmatch
