#include <cmath>
#include <cstddef>

#include "switchsim/kernels.hpp"

// Reference kernels. Plain sequential loops; the AVX2 variants are checked
// against these in the equivalence tests.

namespace switchsim::kernels {
namespace {

void s_matvec(const double* w, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void s_matvec_t(const double* w, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += xr * row[c];
  }
}

void s_rank1_update(double* w, std::size_t rows, std::size_t cols, double alpha,
                    const double* x, const double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = w + r * cols;
    const double ax = alpha * x[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += ax * y[c];
  }
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void s_axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void s_scale(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double s_sum_sq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void s_adam_step(double* p, const double* g, double* m, double* v,
                 std::size_t n, const AdamParams& a) {
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    m[i] = a.beta1 * m[i] + (1.0 - a.beta1) * gi;
    v[i] = a.beta2 * v[i] + (1.0 - a.beta2) * gi * gi;
    const double mhat = m[i] / a.bias1;
    const double vhat = v[i] / a.bias2;
    p[i] -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{s_matvec,  s_matvec_t, s_rank1_update,
                             s_dot,     s_axpy,     s_scale,
                             s_sum_sq,  s_adam_step};
  return t;
}

}  // namespace switchsim::kernels
