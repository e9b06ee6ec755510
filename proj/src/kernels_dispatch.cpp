#include <cstdlib>
#include <string>

#include "switchsim/errors.hpp"
#include "switchsim/kernels.hpp"

namespace switchsim::kernels {

const KernelTable& scalar_table();
#if SWITCHSIM_HAVE_AVX2
const KernelTable& avx2_table();
#endif

namespace {

bool cpu_has_avx2() {
#if SWITCHSIM_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Dispatch {
  Backend backend;
  const KernelTable* table;
};

Dispatch resolve_initial() {
  const char* env = std::getenv("SWITCHSIM_KERNELS");
  if (env != nullptr) {
    const std::string want(env);
    if (want == "scalar") return {Backend::scalar, &scalar_table()};
    if (want == "avx2") {
      if (!backend_available(Backend::avx2))
        throw ConfigError("SWITCHSIM_KERNELS=avx2 but this CPU/build lacks AVX2+FMA");
      return {Backend::avx2, &table(Backend::avx2)};
    }
    throw ConfigError("SWITCHSIM_KERNELS must be 'scalar' or 'avx2', got '" +
                      want + "'");
  }
  if (backend_available(Backend::avx2))
    return {Backend::avx2, &table(Backend::avx2)};
  return {Backend::scalar, &scalar_table()};
}

Dispatch& dispatch() {
  static Dispatch d = resolve_initial();
  return d;
}

}  // namespace

bool backend_available(Backend b) {
  if (b == Backend::scalar) return true;
  return cpu_has_avx2();
}

const KernelTable& table(Backend b) {
  if (b == Backend::scalar) return scalar_table();
#if SWITCHSIM_HAVE_AVX2
  if (cpu_has_avx2()) return avx2_table();
#endif
  throw ConfigError("AVX2 kernel backend unavailable on this CPU/build");
}

Backend active_backend() { return dispatch().backend; }

const char* backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

void force_backend(Backend b) {
  dispatch() = {b, &table(b)};
}

void matvec(const double* w, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
  dispatch().table->matvec(w, rows, cols, x, y);
}
void matvec_t(const double* w, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  dispatch().table->matvec_t(w, rows, cols, x, y);
}
void rank1_update(double* w, std::size_t rows, std::size_t cols, double alpha,
                  const double* x, const double* y) {
  dispatch().table->rank1_update(w, rows, cols, alpha, x, y);
}
double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}
void scale(double* x, double alpha, std::size_t n) {
  dispatch().table->scale(x, alpha, n);
}
double sum_sq(const double* x, std::size_t n) {
  return dispatch().table->sum_sq(x, n);
}
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               const AdamParams& a) {
  dispatch().table->adam_step(p, g, m, v, n, a);
}

}  // namespace switchsim::kernels
