// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after the runtime CPU check in
// kernels_dispatch.cpp, so it deliberately contains no inline-able templates
// that other TUs could pick up.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstddef>

#include "switchsim/kernels.hpp"

namespace switchsim::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void a_matvec(const double* w, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 8 <= cols; c += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c),
                             acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c + 4),
                             _mm256_loadu_pd(x + c + 4), acc1);
    }
    for (; c + 4 <= cols; c += 4) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c),
                             acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void a_matvec_t(const double* w, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 4 <= cols; c += 4) _mm256_storeu_pd(y + c, _mm256_setzero_pd());
  for (; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const __m256d xr = _mm256_set1_pd(x[r]);
    c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(y + c);
      acc = _mm256_fmadd_pd(xr, _mm256_loadu_pd(row + c), acc);
      _mm256_storeu_pd(y + c, acc);
    }
    for (; c < cols; ++c) y[c] += x[r] * row[c];
  }
}

void a_rank1_update(double* w, std::size_t rows, std::size_t cols, double alpha,
                    const double* x, const double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = w + r * cols;
    const double ax = alpha * x[r];
    const __m256d vax = _mm256_set1_pd(ax);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(row + c);
      acc = _mm256_fmadd_pd(vax, _mm256_loadu_pd(y + c), acc);
      _mm256_storeu_pd(row + c, acc);
    }
    for (; c < cols; ++c) row[c] += ax * y[c];
  }
}

double a_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void a_axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_loadu_pd(y + i);
    acc = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), acc);
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void a_scale(double* x, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

double a_sum_sq(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void a_adam_step(double* p, const double* g, double* m, double* v,
                 std::size_t n, const AdamParams& a) {
  const __m256d b1 = _mm256_set1_pd(a.beta1);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - a.beta1);
  const __m256d b2 = _mm256_set1_pd(a.beta2);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - a.beta2);
  const __m256d inv_bias1 = _mm256_set1_pd(a.bias1);
  const __m256d inv_bias2 = _mm256_set1_pd(a.bias2);
  const __m256d lr = _mm256_set1_pd(a.lr);
  const __m256d eps = _mm256_set1_pd(a.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_loadu_pd(m + i);
    __m256d vi = _mm256_loadu_pd(v + i);
    mi = _mm256_add_pd(_mm256_mul_pd(b1, mi), _mm256_mul_pd(one_b1, gi));
    vi = _mm256_add_pd(_mm256_mul_pd(b2, vi),
                       _mm256_mul_pd(one_b2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, inv_bias1);
    const __m256d vhat = _mm256_div_pd(vi, inv_bias2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), eps);
    const __m256d stepv = _mm256_div_pd(_mm256_mul_pd(lr, mhat), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), stepv));
  }
  if (i < n) {
    // scalar tail kept identical to the reference arithmetic
    for (; i < n; ++i) {
      const double gi = g[i];
      m[i] = a.beta1 * m[i] + (1.0 - a.beta1) * gi;
      v[i] = a.beta2 * v[i] + (1.0 - a.beta2) * gi * gi;
      const double mhat = m[i] / a.bias1;
      const double vhat = v[i] / a.bias2;
      double root = vhat;
      __m128d tmp = _mm_set_sd(root);
      tmp = _mm_sqrt_sd(tmp, tmp);
      root = _mm_cvtsd_f64(tmp);
      p[i] -= a.lr * mhat / (root + a.eps);
    }
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{a_matvec,  a_matvec_t, a_rank1_update,
                             a_dot,     a_axpy,     a_scale,
                             a_sum_sq,  a_adam_step};
  return t;
}

}  // namespace switchsim::kernels

#endif  // __AVX2__ && __FMA__
