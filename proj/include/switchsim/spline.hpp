#pragma once

#include <vector>

namespace switchsim {

// Natural cubic smoothing spline: minimizes
//   sum_k (y_k - f(x_k))^2 + lambda * integral f''(x)^2 dx
// over natural cubic splines with knots at the data abscissae. lambda = 0
// interpolates; lambda -> infinity approaches the least-squares line (the
// null space of the curvature penalty).
struct SplineFit {
  std::vector<double> knots;    // strictly increasing abscissae
  std::vector<double> values;   // fitted values at the knots
  std::vector<double> second;   // second derivatives; zero at both ends
  double lambda = 0.0;
};

// Requires at least 4 strictly increasing abscissae and lambda >= 0.
SplineFit fit_smoothing_spline(const std::vector<double>& x,
                               const std::vector<double>& y, double lambda);

// Piecewise-cubic evaluation; linear extrapolation beyond the knot range
// using the boundary derivatives.
double eval_spline(const SplineFit& fit, double x);

// Backward finite difference (f(x) - f(x - delta)) / delta, delta > 0.
double spline_gradient(const SplineFit& fit, double x, double delta);

}  // namespace switchsim
