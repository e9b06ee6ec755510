#pragma once

#include <cstddef>
#include <string>

// Dense double-precision kernels used by the learner's inner loops.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. The two variants are
// equivalence-tested against each other (they differ only by floating-point
// reassociation). The SWITCHSIM_KERNELS environment variable ("scalar" or
// "avx2") overrides the automatic choice.

namespace switchsim::kernels {

enum class Backend { scalar, avx2 };

struct AdamParams {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias1;  // 1 - beta1^t
  double bias2;  // 1 - beta2^t
};

struct KernelTable {
  // y = W x, W row-major (rows x cols)
  void (*matvec)(const double* w, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
  // y = W^T x  (x has rows entries, y has cols entries)
  void (*matvec_t)(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, double* y);
  // W += alpha * x y^T  (x rows entries, y cols entries)
  void (*rank1_update)(double* w, std::size_t rows, std::size_t cols,
                       double alpha, const double* x, const double* y);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double* x, double alpha, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  // m,v <- moment update from g; p -= lr * mhat / (sqrt(vhat) + eps)
  void (*adam_step)(double* p, const double* g, double* m, double* v,
                    std::size_t n, const AdamParams& a);
};

bool backend_available(Backend b);
const KernelTable& table(Backend b);  // throws ConfigError if unavailable

Backend active_backend();
const char* backend_name(Backend b);
// Used by tests; throws ConfigError if the backend is unavailable.
void force_backend(Backend b);

// Dispatching entry points (forward to the active backend).
void matvec(const double* w, std::size_t rows, std::size_t cols,
            const double* x, double* y);
void matvec_t(const double* w, std::size_t rows, std::size_t cols,
              const double* x, double* y);
void rank1_update(double* w, std::size_t rows, std::size_t cols, double alpha,
                  const double* x, const double* y);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum_sq(const double* x, std::size_t n);
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               const AdamParams& a);

}  // namespace switchsim::kernels
