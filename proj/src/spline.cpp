#include "switchsim/spline.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include "switchsim/errors.hpp"

namespace switchsim {
namespace {

// Solve the symmetric positive definite tridiagonal system W z = rhs in
// place, where W has diagonal d and off-diagonal e (Thomas algorithm).
void solve_tridiag(std::vector<double> d, std::vector<double> e,
                   std::vector<double>& z) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = e[i - 1] / d[i - 1];
    d[i] -= w * e[i - 1];
    z[i] -= w * z[i - 1];
  }
  z[n - 1] /= d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    z[i] = (z[i] - e[i] * z[i + 1]) / d[i];
  }
}

// Cholesky solve for a dense SPD system A mu = y (A is overwritten).
void solve_spd(std::vector<double>& a, std::size_t n, std::vector<double>& y) {
  for (std::size_t k = 0; k < n; ++k) {
    double diag = a[k * n + k];
    for (std::size_t j = 0; j < k; ++j) diag -= a[k * n + j] * a[k * n + j];
    diag = std::sqrt(diag);
    a[k * n + k] = diag;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = a[i * n + k];
      for (std::size_t j = 0; j < k; ++j) s -= a[i * n + j] * a[k * n + j];
      a[i * n + k] = s / diag;
    }
  }
  // forward substitution L u = y
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t j = 0; j < i; ++j) s -= a[i * n + j] * y[j];
    y[i] = s / a[i * n + i];
  }
  // back substitution L^T mu = u
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[j * n + i] * y[j];
    y[i] = s / a[i * n + i];
  }
}

}  // namespace

SplineFit fit_smoothing_spline(const std::vector<double>& x,
                               const std::vector<double>& y, double lambda) {
  const std::size_t n = x.size();
  if (n < 4 || y.size() != n)
    throw ConfigError("smoothing spline needs at least 4 points");
  if (!(lambda >= 0.0))
    throw ConfigError("smoothing spline lambda must be >= 0");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(x[i + 1] > x[i]))
      throw ConfigError("spline abscissae must be strictly increasing");
  }

  const std::size_t m = n - 2;  // interior knots
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

  // Second-difference operator D (m x n): (D f)_i =
  //   f_i / h_i - f_{i+1} (1/h_i + 1/h_{i+1}) + f_{i+2} / h_{i+1}
  // and tridiagonal W (m x m) with W_ii = (h_i + h_{i+1})/3,
  // W_{i,i+1} = h_{i+1}/6. The penalty matrix is K = D^T W^{-1} D.
  std::vector<double> wd(m), we(m > 1 ? m - 1 : 0);
  for (std::size_t i = 0; i < m; ++i) wd[i] = (h[i] + h[i + 1]) / 3.0;
  for (std::size_t i = 0; i + 1 < m; ++i) we[i] = h[i + 1] / 6.0;

  // Z = W^{-1} D, column by column of D (each column has <= 3 entries).
  std::vector<double> zmat(m * n, 0.0);  // m x n, row-major
  std::vector<double> col(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) col[i] = 0.0;
    // rows i with nonzero D_ij: j-2, j-1, j (when in range)
    if (j >= 2 && j - 2 < m) col[j - 2] = 1.0 / h[j - 1];
    if (j >= 1 && j - 1 < m) col[j - 1] = -(1.0 / h[j - 1] + 1.0 / h[j]);
    if (j < m) col[j] = 1.0 / h[j];
    solve_tridiag(wd, we, col);
    for (std::size_t i = 0; i < m; ++i) zmat[i * n + j] = col[i];
  }

  // A = I + lambda K with K = D^T Z. Assemble dense (n is small here).
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  if (lambda > 0.0) {
    for (std::size_t r = 0; r < m; ++r) {
      // row r of D has entries at columns r, r+1, r+2
      const double dr0 = 1.0 / h[r];
      const double dr1 = -(1.0 / h[r] + 1.0 / h[r + 1]);
      const double dr2 = 1.0 / h[r + 1];
      for (std::size_t j = 0; j < n; ++j) {
        const double z = zmat[r * n + j];
        if (z == 0.0) continue;
        a[r * n + j] += lambda * dr0 * z;
        a[(r + 1) * n + j] += lambda * dr1 * z;
        a[(r + 2) * n + j] += lambda * dr2 * z;
      }
    }
  }

  SplineFit fit;
  fit.lambda = lambda;
  fit.knots = x;
  fit.values = y;
  solve_spd(a, n, fit.values);

  // Natural boundary: second derivatives vanish at the ends; interior values
  // solve W gamma = D mu.
  fit.second.assign(n, 0.0);
  if (m > 0) {
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      rhs[i] = fit.values[i] / h[i] -
               fit.values[i + 1] * (1.0 / h[i] + 1.0 / h[i + 1]) +
               fit.values[i + 2] / h[i + 1];
    }
    solve_tridiag(wd, we, rhs);
    for (std::size_t i = 0; i < m; ++i) fit.second[i + 1] = rhs[i];
  }
  return fit;
}

namespace {

double eval_segment(const SplineFit& fit, std::size_t k, double x) {
  const double h = fit.knots[k + 1] - fit.knots[k];
  const double a = (fit.knots[k + 1] - x) / h;
  const double b = (x - fit.knots[k]) / h;
  return a * fit.values[k] + b * fit.values[k + 1] +
         ((a * a * a - a) * fit.second[k] + (b * b * b - b) * fit.second[k + 1]) *
             (h * h) / 6.0;
}

double boundary_slope_left(const SplineFit& fit) {
  const double h = fit.knots[1] - fit.knots[0];
  return (fit.values[1] - fit.values[0]) / h -
         h / 6.0 * (2.0 * fit.second[0] + fit.second[1]);
}

double boundary_slope_right(const SplineFit& fit) {
  const std::size_t n = fit.knots.size();
  const double h = fit.knots[n - 1] - fit.knots[n - 2];
  return (fit.values[n - 1] - fit.values[n - 2]) / h +
         h / 6.0 * (fit.second[n - 2] + 2.0 * fit.second[n - 1]);
}

}  // namespace

double eval_spline(const SplineFit& fit, double x) {
  const std::size_t n = fit.knots.size();
  if (x <= fit.knots.front()) {
    return fit.values.front() + boundary_slope_left(fit) * (x - fit.knots.front());
  }
  if (x >= fit.knots.back()) {
    return fit.values.back() + boundary_slope_right(fit) * (x - fit.knots.back());
  }
  // binary search for the segment with knots[k] <= x < knots[k+1]
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (fit.knots[mid] <= x)
      lo = mid;
    else
      hi = mid;
  }
  return eval_segment(fit, lo, x);
}

double spline_gradient(const SplineFit& fit, double x, double delta) {
  if (!(delta > 0.0)) throw ConfigError("spline_gradient requires delta > 0");
  return (eval_spline(fit, x) - eval_spline(fit, x - delta)) / delta;
}

}  // namespace switchsim
