#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "switchsim/errors.hpp"
#include "switchsim/rng.hpp"
#include "switchsim/spline.hpp"

using namespace switchsim;

namespace {

// least-squares line oracle for the large-lambda limit
std::pair<double, double> lsq_line(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double d = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / d;
  const double intercept = (sy - slope * sx) / n;
  return {intercept, slope};
}

}  // namespace

TEST_CASE("lambda = 0 interpolates") {
  const std::vector<double> x = {0, 1, 2, 3, 4};
  const std::vector<double> y = {1.0, -0.5, 2.25, 0.0, 3.5};
  const SplineFit fit = fit_smoothing_spline(x, y, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(eval_spline(fit, x[i]) - y[i]) < 1e-9);
  }
}

TEST_CASE("linear data is reproduced exactly for any lambda") {
  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i + 0.75);
  }
  for (double lambda : {0.1, 1.0, 10.0}) {
    const SplineFit fit = fit_smoothing_spline(x, y, lambda);
    for (double q : {0.0, 0.5, 3.25, 8.0}) {
      CHECK(std::abs(eval_spline(fit, q) - (2.0 * q + 0.75)) < 1e-9);
    }
  }
}

TEST_CASE("huge lambda approaches the least-squares line") {
  Rng rng(4242);
  std::vector<double> x, y;
  for (int i = 0; i < 25; ++i) {
    x.push_back(i);
    y.push_back(0.3 * i + 1.0 + rng.normal(0.0, 0.5));
  }
  const auto [intercept, slope] = lsq_line(x, y);
  const SplineFit fit = fit_smoothing_spline(x, y, 1e10);
  for (double q : x) {
    const double line = intercept + slope * q;
    CHECK(std::abs(eval_spline(fit, q) - line) < 1e-3);
  }
}

TEST_CASE("evaluation is continuous at the knots") {
  const std::vector<double> x = {0, 1, 2, 3, 4, 5};
  const std::vector<double> y = {0.0, 1.2, 0.3, 2.0, 1.1, 1.5};
  const SplineFit fit = fit_smoothing_spline(x, y, 0.5);
  for (double knot : x) {
    const double below = eval_spline(fit, knot - 1e-10);
    const double at = eval_spline(fit, knot);
    const double above = eval_spline(fit, knot + 1e-10);
    CHECK(std::abs(below - at) < 1e-8);
    CHECK(std::abs(above - at) < 1e-8);
  }
}

TEST_CASE("linear extrapolation continues the boundary slope") {
  std::vector<double> x, y;
  for (int i = 0; i < 8; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i);
  }
  const SplineFit fit = fit_smoothing_spline(x, y, 0.0);
  CHECK(std::abs(eval_spline(fit, 10.0) - 20.0) < 1e-6);
  CHECK(std::abs(eval_spline(fit, 8.5) - 17.0) < 1e-6);
  CHECK(std::abs(eval_spline(fit, -1.0) - (-2.0)) < 1e-6);
}

TEST_CASE("spline gradient closed forms") {
  std::vector<double> x, y;
  for (int i = 0; i <= 6; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i);
  }
  const SplineFit linear = fit_smoothing_spline(x, y, 0.0);
  CHECK(std::abs(spline_gradient(linear, 4.0, 1.0) - 2.0) < 1e-6);

  std::vector<double> yc(x.size(), 3.25);
  const SplineFit constant = fit_smoothing_spline(x, yc, 0.0);
  CHECK(std::abs(spline_gradient(constant, 5.0, 1.0)) < 1e-9);

  // y = x^2 interpolated: the backward difference between the knots at 5 and
  // 4 is exactly (25 - 16) / 1 = 9.
  std::vector<double> yq;
  for (double xi : x) yq.push_back(xi * xi);
  const SplineFit quad = fit_smoothing_spline(x, yq, 0.0);
  CHECK(std::abs(spline_gradient(quad, 5.0, 1.0) - 9.0) < 1e-9);

  CHECK_THROWS_AS(spline_gradient(quad, 5.0, 0.0), ConfigError);
}

TEST_CASE("residual norm is non-increasing in 1/lambda") {
  Rng rng(777);
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i);
    y.push_back(std::sin(0.4 * i) + rng.normal(0.0, 0.3));
  }
  double prev = -1.0;
  for (double lambda : {1e4, 1e2, 1.0, 1e-2, 0.0}) {  // decreasing lambda
    const SplineFit fit = fit_smoothing_spline(x, y, lambda);
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - eval_spline(fit, x[i]);
      rss += r * r;
    }
    if (prev >= 0.0) CHECK(rss <= prev + 1e-9);
    prev = rss;
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(fit_smoothing_spline({0, 1, 2}, {0, 1, 2}, 0.0), ConfigError);
  CHECK_THROWS_AS(fit_smoothing_spline({0, 1, 1, 2}, {0, 1, 2, 3}, 0.0),
                  ConfigError);
  CHECK_THROWS_AS(fit_smoothing_spline({0, 1, 2, 3}, {0, 1, 2, 3}, -1.0),
                  ConfigError);
}
