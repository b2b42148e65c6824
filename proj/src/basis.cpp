#include "gradmatch/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gradmatch {

namespace {

constexpr int kDegree = kSplineOrder - 1;

// Index s with U[s] <= t < U[s+1], clamped so t == t_max lands in the last
// non-degenerate span.
int find_span(const std::vector<double>& u, int n_functions, double t) {
  if (t >= u[n_functions]) return n_functions - 1;
  auto it = std::upper_bound(u.begin() + kDegree, u.begin() + n_functions + 1, t);
  return static_cast<int>(it - u.begin()) - 1;
}

// Values and derivatives up to `n_derivs` of the kDegree+1 B-splines that are
// nonzero on span `s` (Piegl & Tiller, algorithm A2.3).
std::array<std::array<double, kSplineOrder>, 3> basis_ders(const std::vector<double>& u, int s,
                                                          double t, int n_derivs) {
  constexpr int p = kDegree;
  std::array<std::array<double, p + 1>, p + 1> ndu{};
  std::array<double, p + 1> left{}, right{};
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - u[s + 1 - j];
    right[j] = u[s + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double tmp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    ndu[j][j] = saved;
  }

  std::array<std::array<double, p + 1>, 3> ders{};
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];

  std::array<std::array<double, p + 1>, 2> a{};
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= n_derivs; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int k = 1; k <= n_derivs; ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
    factor *= (p - k);
  }
  return ders;
}

Matrix eval_impl(const KnotVector& knots, std::span<const double> points, int deriv_order) {
  if (deriv_order < 0 || deriv_order > 2) {
    throw std::invalid_argument("basis derivative order must be 0, 1 or 2");
  }
  const auto u = knots.full_sequence();
  const int n_functions = knots.n_cubic() + 1;
  const int n_cubic = knots.n_cubic();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(points.size()), knots.n_basis());
  for (std::size_t r = 0; r < points.size(); ++r) {
    const double t = points[r];
    if (!std::isfinite(t) || !knots.contains(t)) {
      throw std::out_of_range("basis evaluation point " + std::to_string(t) +
                              " outside knot domain");
    }
    const int s = find_span(u, n_functions, t);
    const auto ders = basis_ders(u, s, t, deriv_order);
    for (int j = 0; j <= kDegree; ++j) {
      const int col = s - kDegree + j;
      if (col < n_cubic) out(static_cast<Eigen::Index>(r), col) = ders[deriv_order][j];
    }
    if (deriv_order == 0) out(static_cast<Eigen::Index>(r), n_cubic) = 1.0;
  }
  return out;
}

}  // namespace

std::vector<double> KnotVector::full_sequence() const {
  std::vector<double> u;
  u.reserve(interior.size() + 2 * kSplineOrder);
  u.insert(u.end(), kSplineOrder, t_min);
  u.insert(u.end(), interior.begin(), interior.end());
  u.insert(u.end(), kSplineOrder, t_max);
  return u;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + i * h;
  if (n > 1) out.back() = hi;
  return out;
}

KnotVector make_knots(std::span<const double> obs_times, int n_basis,
                      std::span<const double> breaks) {
  if (n_basis < 5) {
    throw std::invalid_argument("n_basis must be at least 5 for a cubic basis plus constant");
  }
  if (obs_times.size() < 2) throw std::invalid_argument("need at least two observation times");
  const auto [lo_it, hi_it] = std::minmax_element(obs_times.begin(), obs_times.end());
  if (!(*hi_it > *lo_it)) {
    throw std::invalid_argument("observation times must contain two distinct values");
  }
  KnotVector knots;
  knots.t_min = *lo_it;
  knots.t_max = *hi_it;

  std::vector<double> cuts;
  for (double b : breaks) {
    if (b > knots.t_min && b < knots.t_max) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const int n_interior = n_basis - kSplineOrder;
  const int n_uniform = n_interior - 2 * static_cast<int>(cuts.size());
  if (n_uniform < 0) throw std::invalid_argument("n_basis too small for the requested breaks");

  std::vector<double> edges{knots.t_min};
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(knots.t_max);
  const int pieces = static_cast<int>(edges.size()) - 1;

  // Intervals per piece by largest remainder, at least one each.
  const int total_intervals = n_uniform + pieces;
  const double span = knots.t_max - knots.t_min;
  std::vector<int> intervals(static_cast<std::size_t>(pieces), 1);
  std::vector<double> remainder(static_cast<std::size_t>(pieces), 0.0);
  int assigned = pieces;
  for (int p = 0; p < pieces; ++p) {
    const double share = (edges[p + 1] - edges[p]) / span * total_intervals;
    const int whole = std::max(1, static_cast<int>(std::floor(share)));
    assigned += whole - 1;
    intervals[static_cast<std::size_t>(p)] = whole;
    remainder[static_cast<std::size_t>(p)] = share - whole;
  }
  while (assigned < total_intervals) {
    const auto best = std::max_element(remainder.begin(), remainder.end()) - remainder.begin();
    ++intervals[static_cast<std::size_t>(best)];
    remainder[static_cast<std::size_t>(best)] -= 1.0;
    ++assigned;
  }
  while (assigned > total_intervals) {
    auto best = std::min_element(remainder.begin(), remainder.end()) - remainder.begin();
    if (intervals[static_cast<std::size_t>(best)] <= 1) {
      best = std::max_element(intervals.begin(), intervals.end()) - intervals.begin();
    }
    --intervals[static_cast<std::size_t>(best)];
    remainder[static_cast<std::size_t>(best)] += 1.0;
    --assigned;
  }

  for (int p = 0; p < pieces; ++p) {
    const auto pts = linspace(edges[p], edges[p + 1], intervals[static_cast<std::size_t>(p)] + 1);
    if (p > 0) knots.interior.insert(knots.interior.end(), 2, edges[p]);
    knots.interior.insert(knots.interior.end(), pts.begin() + 1, pts.end() - 1);
  }
  return knots;
}

Matrix eval_basis(const KnotVector& knots, std::span<const double> points) {
  return eval_impl(knots, points, 0);
}

Matrix eval_basis_derivative(const KnotVector& knots, std::span<const double> points,
                             int deriv_order) {
  if (deriv_order < 1) throw std::invalid_argument("derivative order must be 1 or 2");
  return eval_impl(knots, points, deriv_order);
}

DiffMatrix diff_matrix(std::span<const double> fine_grid, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("difference order must be 1 or 2");
  const auto n = static_cast<Eigen::Index>(fine_grid.size());
  if (n < 5) throw std::invalid_argument("difference matrix needs at least 5 grid points");
  const double span = fine_grid.back() - fine_grid.front();
  const double h = span / static_cast<double>(n - 1);
  if (!(h > 0.0)) throw std::invalid_argument("fine grid must be ascending");
  for (Eigen::Index j = 1; j < n; ++j) {
    const double step = fine_grid[static_cast<std::size_t>(j)] - fine_grid[static_cast<std::size_t>(j - 1)];
    if (std::abs(step - h) > 1e-9 * span) {
      throw std::invalid_argument("difference matrix requires a uniform grid");
    }
  }

  DiffMatrix d{order, h, Matrix::Zero(n, n)};
  auto& m = d.matrix;
  if (order == 1) {
    const double c = 1.0 / (2.0 * h);
    m(0, 0) = -3.0 * c;
    m(0, 1) = 4.0 * c;
    m(0, 2) = -1.0 * c;
    for (Eigen::Index j = 1; j < n - 1; ++j) {
      m(j, j - 1) = -c;
      m(j, j + 1) = c;
    }
    m(n - 1, n - 3) = 1.0 * c;
    m(n - 1, n - 2) = -4.0 * c;
    m(n - 1, n - 1) = 3.0 * c;
  } else {
    const double c = 1.0 / (h * h);
    m(0, 0) = 2.0 * c;
    m(0, 1) = -5.0 * c;
    m(0, 2) = 4.0 * c;
    m(0, 3) = -1.0 * c;
    for (Eigen::Index j = 1; j < n - 1; ++j) {
      m(j, j - 1) = c;
      m(j, j) = -2.0 * c;
      m(j, j + 1) = c;
    }
    m(n - 1, n - 4) = -1.0 * c;
    m(n - 1, n - 3) = 4.0 * c;
    m(n - 1, n - 2) = -5.0 * c;
    m(n - 1, n - 1) = 2.0 * c;
  }
  return d;
}

Vector solve_least_squares(const Matrix& a, const Vector& b) {
  if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("empty least-squares system");
  if (a.rows() != b.size()) throw std::invalid_argument("least-squares shape mismatch");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(b);
}

int default_fine_points(int n_obs) { return std::max(5 * n_obs + 1, 201); }

std::string to_string(PenaltyScaling scaling) {
  return scaling == PenaltyScaling::kPlainSum ? "plain-sum" : "quadrature";
}

PenaltyScaling penalty_scaling_from_string(const std::string& name) {
  if (name == "quadrature") return PenaltyScaling::kQuadrature;
  if (name == "plain-sum") return PenaltyScaling::kPlainSum;
  throw std::invalid_argument("unknown penalty scaling '" + name + "'");
}

SplineSystem make_spline_system(std::span<const double> obs_times, const SplineOptions& opts,
                                std::span<const double> breaks) {
  const int n_obs = static_cast<int>(obs_times.size());
  const int n_basis = opts.n_basis > 0 ? opts.n_basis : n_obs;
  const int n_fine = opts.n_fine > 0 ? opts.n_fine : default_fine_points(n_obs);
  if (n_fine < 5 * n_obs) {
    throw std::invalid_argument("fine grid must have at least 5 points per observation");
  }
  for (int i = 1; i < n_obs; ++i) {
    if (!(obs_times[static_cast<std::size_t>(i)] > obs_times[static_cast<std::size_t>(i - 1)])) {
      throw std::invalid_argument("observation times must be strictly ascending");
    }
  }

  SplineSystem sys;
  sys.knots = make_knots(obs_times, n_basis,
                         opts.knots_at_breaks ? breaks : std::span<const double>{});
  sys.obs_times.assign(obs_times.begin(), obs_times.end());
  sys.fine_grid = linspace(sys.knots.t_min, sys.knots.t_max, n_fine);
  sys.basis_fine = eval_basis(sys.knots, sys.fine_grid);
  sys.basis_obs = eval_basis(sys.knots, sys.obs_times);
  sys.d1 = diff_matrix(sys.fine_grid, 1);
  sys.d2 = diff_matrix(sys.fine_grid, 2);
  sys.d1_basis = sys.d1.matrix * sys.basis_fine;
  sys.d2_basis = sys.d2.matrix * sys.basis_fine;
  sys.penalty_weight = opts.penalty == PenaltyScaling::kQuadrature ? sys.d1.grid_spacing : 1.0;
  return sys;
}

}  // namespace gradmatch
