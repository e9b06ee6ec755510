#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "switchsim/kernels.hpp"
#include "switchsim/rng.hpp"

using namespace switchsim;
namespace k = switchsim::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

bool close(double a, double b, double tol = 1e-10) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

bool close_vec(const std::vector<double>& a, const std::vector<double>& b,
               double tol = 1e-10) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!close(a[i], b[i], tol)) return false;
  return true;
}

}  // namespace

TEST_CASE("scalar kernels: hand-checked values") {
  const auto& t = k::table(k::Backend::scalar);

  // 2x3 matvec
  const std::vector<double> w = {1, 2, 3, 4, 5, 6};
  const std::vector<double> x = {1, -1, 2};
  std::vector<double> y(2);
  t.matvec(w.data(), 2, 3, x.data(), y.data());
  CHECK(y[0] == doctest::Approx(5.0));   // 1 - 2 + 6
  CHECK(y[1] == doctest::Approx(11.0));  // 4 - 5 + 12

  std::vector<double> yt(3);
  const std::vector<double> xr = {1, 2};
  t.matvec_t(w.data(), 2, 3, xr.data(), yt.data());
  CHECK(yt[0] == doctest::Approx(9.0));
  CHECK(yt[1] == doctest::Approx(12.0));
  CHECK(yt[2] == doctest::Approx(15.0));

  CHECK(t.dot(x.data(), x.data(), 3) == doctest::Approx(6.0));
  CHECK(t.sum_sq(x.data(), 3) == doctest::Approx(6.0));

  std::vector<double> acc = {1, 1, 1, 1, 1, 1};
  const std::vector<double> u = {1, 2};
  const std::vector<double> v = {1, 0, -1};
  t.rank1_update(acc.data(), 2, 3, 2.0, u.data(), v.data());
  CHECK(acc == std::vector<double>{3, 1, -1, 5, 1, -3});
}

TEST_CASE("avx2 kernels match scalar reference across sizes") {
  if (!k::backend_available(k::Backend::avx2)) {
    MESSAGE("AVX2 unavailable; equivalence suite skipped");
    return;
  }
  const auto& s = k::table(k::Backend::scalar);
  const auto& a = k::table(k::Backend::avx2);
  Rng rng(20260809);

  // sizes straddling vector width boundaries plus realistic layer shapes
  const std::vector<std::pair<std::size_t, std::size_t>> shapes = {
      {1, 1},  {1, 3},  {2, 4},   {3, 5},    {5, 8},     {7, 9},
      {4, 16}, {9, 17}, {16, 31}, {33, 65},  {128, 128}, {4, 128},
      {128, 1024}};

  for (const auto& [rows, cols] : shapes) {
    const auto w = random_vec(rng, rows * cols);
    const auto x = random_vec(rng, cols);
    const auto xr = random_vec(rng, rows);

    std::vector<double> y_s(rows), y_a(rows);
    s.matvec(w.data(), rows, cols, x.data(), y_s.data());
    a.matvec(w.data(), rows, cols, x.data(), y_a.data());
    CHECK(close_vec(y_s, y_a));

    std::vector<double> z_s(cols), z_a(cols);
    s.matvec_t(w.data(), rows, cols, xr.data(), z_s.data());
    a.matvec_t(w.data(), rows, cols, xr.data(), z_a.data());
    CHECK(close_vec(z_s, z_a));

    std::vector<double> w_s = w, w_a = w;
    s.rank1_update(w_s.data(), rows, cols, 0.37, xr.data(), x.data());
    a.rank1_update(w_a.data(), rows, cols, 0.37, xr.data(), x.data());
    CHECK(close_vec(w_s, w_a));
  }

  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u,
                        64u, 100u, 1024u, 1025u}) {
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    CHECK(close(s.dot(x.data(), y.data(), n), a.dot(x.data(), y.data(), n)));
    CHECK(close(s.sum_sq(x.data(), n), a.sum_sq(x.data(), n)));

    std::vector<double> ys = y, ya = y;
    s.axpy(0.25, x.data(), ys.data(), n);
    a.axpy(0.25, x.data(), ya.data(), n);
    CHECK(close_vec(ys, ya));

    std::vector<double> xs = x, xa = x;
    s.scale(xs.data(), -1.75, n);
    a.scale(xa.data(), -1.75, n);
    CHECK(close_vec(xs, xa));
  }
}

TEST_CASE("avx2 adam step matches scalar reference") {
  if (!k::backend_available(k::Backend::avx2)) return;
  const auto& s = k::table(k::Backend::scalar);
  const auto& a = k::table(k::Backend::avx2);
  Rng rng(7);

  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 130u, 1024u}) {
    auto p_s = random_vec(rng, n, 0.1);
    auto p_a = p_s;
    auto m_s = random_vec(rng, n, 0.01);
    auto m_a = m_s;
    auto v_s = random_vec(rng, n, 0.001);
    for (double& x : v_s) x = std::abs(x);
    auto v_a = v_s;
    const auto g = random_vec(rng, n, 0.5);

    const k::AdamParams ap{2.5e-4, 0.9, 0.999, 1e-8, 1.0 - std::pow(0.9, 3),
                           1.0 - std::pow(0.999, 3)};
    s.adam_step(p_s.data(), g.data(), m_s.data(), v_s.data(), n, ap);
    a.adam_step(p_a.data(), g.data(), m_a.data(), v_a.data(), n, ap);
    CHECK(close_vec(p_s, p_a, 1e-13));
    CHECK(close_vec(m_s, m_a, 1e-13));
    CHECK(close_vec(v_s, v_a, 1e-13));
  }
}

TEST_CASE("dot agrees with long double accumulation") {
  Rng rng(99);
  const std::size_t n = 999;
  const auto x = random_vec(rng, n);
  const auto y = random_vec(rng, n);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    acc += static_cast<long double>(x[i]) * static_cast<long double>(y[i]);
  CHECK(close(k::dot(x.data(), y.data(), n), static_cast<double>(acc), 1e-12));
}

TEST_CASE("backend dispatch reports an available backend") {
  const k::Backend b = k::active_backend();
  CHECK(k::backend_available(b));
  CHECK((std::string(k::backend_name(b)) == "scalar" ||
         std::string(k::backend_name(b)) == "avx2"));
}
