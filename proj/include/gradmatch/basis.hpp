#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace gradmatch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kSplineOrder = 4;  // cubic

/// Clamped knot vector for a cubic B-spline basis over [t_min, t_max].
///
/// The clamped sequence carries `interior.size() + 4` cubic B-splines. The basis
/// keeps all but the last of them and appends the constant function, so the
/// span is the full cubic spline space while one column is identically one.
/// Interior knots are non-decreasing; a knot listed twice is a C1 join.
struct KnotVector {
  double t_min = 0.0;
  double t_max = 1.0;
  std::vector<double> interior;

  /// Full knot sequence with the end knots repeated `kSplineOrder` times.
  std::vector<double> full_sequence() const;
  /// Number of cubic B-splines kept in the basis (excludes the constant).
  int n_cubic() const { return static_cast<int>(interior.size()) + 3; }
  /// Total basis size: kept cubics plus the constant column.
  int n_basis() const { return n_cubic() + 1; }
  bool contains(double t) const { return t >= t_min && t <= t_max; }
};

/// Uniform interior breakpoints over the observation span. Each entry of
/// `breaks` strictly inside the span becomes a double knot (C1 join) and the
/// uniform breakpoints are spread over the pieces between breaks in proportion
/// to their length.
KnotVector make_knots(std::span<const double> obs_times, int n_basis,
                      std::span<const double> breaks = {});

/// Basis values at `points`; columns are the kept cubic B-splines followed by
/// the constant function (last column).
Matrix eval_basis(const KnotVector& knots, std::span<const double> points);

/// Analytic derivative of the basis (order 1 or 2). Cross-check utility; the
/// profiler differentiates with difference matrices instead.
Matrix eval_basis_derivative(const KnotVector& knots, std::span<const double> points,
                             int deriv_order);

/// Finite-difference derivative operator on a uniform grid. Interior rows are
/// central differences; boundary rows use one-sided second-order stencils.
struct DiffMatrix {
  int order = 1;
  double grid_spacing = 0.0;
  Matrix matrix;
};

DiffMatrix diff_matrix(std::span<const double> fine_grid, int order);

/// Minimum-norm minimiser of ||A x - b||_2 (the pseudoinverse solution),
/// computed with a complete orthogonal decomposition.
Vector solve_least_squares(const Matrix& a, const Vector& b);

std::vector<double> linspace(double lo, double hi, int n);

/// Default fine-grid size for `n_obs` observation times.
int default_fine_points(int n_obs);

/// How the squared derivative residual is summed over the fine grid.
/// kQuadrature multiplies the plain sum by the grid spacing, approximating the
/// integral of the squared residual so the weight does not depend on J.
enum class PenaltyScaling { kQuadrature, kPlainSum };

std::string to_string(PenaltyScaling scaling);
PenaltyScaling penalty_scaling_from_string(const std::string& name);

struct SplineOptions {
  int n_basis = 0;  // 0: one basis function per observation time
  int n_fine = 0;   // 0: default_fine_points
  PenaltyScaling penalty = PenaltyScaling::kQuadrature;
  bool knots_at_breaks = false;  // double knots (C1 joins) at the model's forcing breaks
};

/// Everything the profiler needs about the spline discretisation of one
/// component. All components share the same basis.
struct SplineSystem {
  KnotVector knots;
  std::vector<double> obs_times;
  std::vector<double> fine_grid;
  Matrix basis_fine;  // J x M
  Matrix basis_obs;   // I x M
  DiffMatrix d1;
  DiffMatrix d2;
  Matrix d1_basis;  // d1 * basis_fine
  Matrix d2_basis;  // d2 * basis_fine
  double penalty_weight = 1.0;  // factor on sums over the fine grid

  int n_basis() const { return static_cast<int>(basis_fine.cols()); }
  int n_fine() const { return static_cast<int>(basis_fine.rows()); }
  int n_obs() const { return static_cast<int>(basis_obs.rows()); }
  const Matrix& diff_basis(int order) const { return order == 2 ? d2_basis : d1_basis; }
};

/// Builds the spline system over the observation span. `breaks` are honoured
/// only when `opts.knots_at_breaks` is set.
SplineSystem make_spline_system(std::span<const double> obs_times, const SplineOptions& opts = {},
                                std::span<const double> breaks = {});

}  // namespace gradmatch
